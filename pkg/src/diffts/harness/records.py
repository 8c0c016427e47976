"""Regret records, per-round summaries and their comma-separated files."""

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import IngestionError

RECORD_HEADER = ("task_id", "agent", "round", "regret", "cum_regret")
SUMMARY_HEADER = ("agent", "round", "mean_cum_regret", "stderr", "n_tasks")


@dataclass(frozen=True)
class RegretRecord:
    task_id: int
    agent: str
    round: int
    regret: float
    cum_regret: float


def _fmt(x):
    return format(float(x), ".17g")


class RecordWriter:
    """Streams records to an open text file, flushing after every batch."""

    def __init__(self, fh):
        self.fh = fh
        self._w = csv.writer(fh, lineterminator="\n")
        self._w.writerow(RECORD_HEADER)

    def write(self, records):
        for r in records:
            self._w.writerow((r.task_id, r.agent, r.round, _fmt(r.regret), _fmt(r.cum_regret)))
        self.fh.flush()


def write_records(path, records):
    with open(path, "w", newline="") as fh:
        RecordWriter(fh).write(records)


def read_records(path):
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return out
        if tuple(header) != RECORD_HEADER:
            raise IngestionError(f"{path}: unexpected header {header}", row=1)
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append(RegretRecord(int(row[0]), row[1], int(row[2]), float(row[3]), float(row[4])))
            except (ValueError, IndexError) as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}", row=lineno)
    return out


def summarize(records):
    """Per ``(agent, round)``: mean cumulative regret over tasks and its standard error."""
    groups = {}
    for r in records:
        groups.setdefault((r.agent, r.round), []).append(r.cum_regret)
    rows = []
    for (agent, rnd) in sorted(groups):
        vals = np.array(groups[(agent, rnd)])
        se = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
        rows.append((agent, rnd, float(vals.mean()), se, len(vals)))
    return rows


def final_means(records):
    """Mean cumulative regret at each agent's last round."""
    last = {}
    for agent, rnd, mean, _, _ in summarize(records):
        if agent not in last or rnd > last[agent][0]:
            last[agent] = (rnd, mean)
    return {a: m for a, (_, m) in last.items()}


def write_summary(fh, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for agent, rnd, mean, se, n in rows:
        w.writerow((agent, rnd, _fmt(mean), _fmt(se), n))
