"""Ingestion of preprocessed auction win-rate tables."""

import csv

import numpy as np

from ..errors import IngestionError
from .tasks import AuctionTask

N_BIDS = 300


def read_win_rates(path, n_bids=N_BIDS):
    """Parse one comma-separated row of ``n_bids`` win rates per ad slot."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != n_bids:
                raise IngestionError(f"{path}:{lineno}: expected {n_bids} fields, got {len(row)}", row=lineno)
            try:
                vals = np.array([float(f) for f in row])
            except ValueError as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}", row=lineno)
            if np.any(~np.isfinite(vals)) or np.any((vals < 0) | (vals > 1)):
                raise IngestionError(f"{path}:{lineno}: win rates must lie in [0, 1]", row=lineno)
            rows.append(vals)
    return np.array(rows).reshape(len(rows), n_bids)


def auction_tasks_from_rates(win_rates):
    """Scale payoffs ``300 - b`` by the largest achievable expected reward over all slots."""
    win_rates = np.asarray(win_rates, dtype=np.float64)
    n_bids = win_rates.shape[1]
    raw = n_bids - np.arange(n_bids, dtype=np.float64)
    r_max = float((win_rates * raw).max()) if win_rates.size else 0.0
    if not r_max > 0:
        raise IngestionError("no slot has a positive achievable reward")
    payoffs = raw / r_max
    return [AuctionTask(w, payoffs) for w in win_rates]


def load_auction_tasks(path):
    return auction_tasks_from_rates(read_win_rates(path))
