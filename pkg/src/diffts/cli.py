"""Command-line entry point: ``diffts <subcommand> [--config PATH] [--seed U64] [--out DIR]``."""

import argparse
import dataclasses
import logging
import os
import sys

import numpy as np

from . import io
from .errors import DiffTSError
from .harness.config import SEED_MAX, load_config
from .harness.manifest import build_manifest, write_manifest
from .harness.pipeline import (build_datasets, run_experiment, train_clean_prior,
                               train_imperfect_prior)
from .harness.records import RecordWriter, read_records, summarize, write_summary
from .harness.seeding import unit_rng
from .posterior import NoiseMode, Observation, posterior_sample
from .diffusion import sample_unconditional
from .environments import corrupt

log = logging.getLogger("diffts")


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= v < SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _common(p, config_required=False):
    p.add_argument("--config", required=config_required, help="experiment INI file")
    p.add_argument("--seed", type=_u64, help="master seed (overrides the config)")
    p.add_argument("--out", default=".", help="output directory (default: current)")


def build_parser():
    parser = argparse.ArgumentParser(prog="diffts", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("gen-tasks", help="generate train/cal/test mean vectors"), True)

    p = sub.add_parser("corrupt", help="add noise and drop coordinates")
    _common(p)
    p.add_argument("--input", nargs="+", help="clean dataset files (default: train.bin cal.bin in --out)")
    p.add_argument("--p", type=float, help="missing probability")
    p.add_argument("--nu", type=float, help="noise standard deviation")

    p = sub.add_parser("train", help="train and calibrate a prior on clean data")
    _common(p, True)
    p.add_argument("--train", help="clean training set (default: train.bin in --out)")
    p.add_argument("--cal", help="clean calibration set (default: cal.bin in --out)")

    p = sub.add_parser("train-imperfect", help="train and calibrate a prior on corrupted data")
    _common(p, True)
    p.add_argument("--train", help="corrupted training set (default: train_deg.bin in --out)")
    p.add_argument("--cal", help="corrupted calibration set (default: cal_deg.bin in --out)")

    p = sub.add_parser("sample", help="unconditional or posterior draws")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--sigma", help="calibration file (omit for the plain reverse kernel)")
    p.add_argument("--n", type=int, default=1, help="draws (unconditional) or draws per observed row")
    p.add_argument("--observed", help="imperfect dataset to condition on")
    p.add_argument("--noise-mode", choices=[m.value for m in NoiseMode], default="predicted")

    _common(sub.add_parser("run", help="evaluate the configured agents"), True)

    p = sub.add_parser("report", help="summarise regret record files as CSV")
    _common(p)
    p.add_argument("--input", nargs="*", default=None, help="regret.csv files (default: regret.csv in --out)")
    return parser


def _config(args):
    cfg = load_config(args.config)
    return cfg.with_seed(args.seed) if args.seed is not None else cfg


def _out(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _manifest(args, cfg, outputs, extra=None):
    write_manifest(_out(args, f"manifest-{args.command}.json"),
                   build_manifest(args.command, cfg, outputs, dict(extra or {}, argv=sys.argv[1:])))


def cmd_gen_tasks(args):
    cfg = _config(args)
    data = build_datasets(dataclasses.replace(cfg, corruption=None))
    outs = []
    for name in ("train", "cal", "test"):
        path = _out(args, f"{name}.bin")
        io.save_dataset(getattr(data, name), path)
        outs.append(path)
    _manifest(args, cfg, outs)


def cmd_corrupt(args):
    cfg = _config(args) if args.config else None
    p, nu = cfg.corruption if cfg and cfg.corruption else (0.5, 0.1)
    p = args.p if args.p is not None else p
    nu = args.nu if args.nu is not None else nu
    seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
    inputs = args.input or [os.path.join(args.out, f) for f in ("train.bin", "cal.bin")]
    outs = []
    for path in inputs:
        stem = os.path.splitext(os.path.basename(path))[0]
        deg = corrupt(io.load_dataset(path), p, nu, unit_rng(seed, "corrupt", stem))
        dest = _out(args, f"{stem}_deg.bin")
        io.save_imperfect(deg, dest)
        outs.append(dest)
    _manifest(args, cfg, outs, {"p": p, "nu": nu, "seed": seed})


def cmd_train(args):
    cfg = _config(args)
    train = io.load_dataset(args.train or os.path.join(args.out, "train.bin"))
    cal = io.load_dataset(args.cal or os.path.join(args.out, "cal.bin"))
    model, sigma = train_clean_prior(cfg, train, cal)
    _save_prior(args, cfg, model, sigma)


def cmd_train_imperfect(args):
    cfg = _config(args)
    train = io.load_imperfect(args.train or os.path.join(args.out, "train_deg.bin"))
    cal = io.load_imperfect(args.cal or os.path.join(args.out, "cal_deg.bin"))
    model, sigma = train_imperfect_prior(cfg, train, cal)
    _save_prior(args, cfg, model, sigma)


def _save_prior(args, cfg, model, sigma):
    mpath, spath = _out(args, "model.bin"), _out(args, "sigma.bin")
    io.save_model(model, mpath)
    io.save_sigma(sigma, spath)
    _manifest(args, cfg, [mpath, spath])


def cmd_sample(args):
    model = io.load_model(args.model)
    sigma = io.load_sigma(args.sigma) if args.sigma else None
    seed = args.seed if args.seed is not None else 0
    rng = unit_rng(seed, "sample")
    if args.observed:
        deg = io.load_imperfect(args.observed)
        rows = np.repeat(np.arange(len(deg)), args.n)
        obs = Observation(deg.y[rows], deg.mask[rows], deg.nu_array()[rows])
        draws = posterior_sample(model, sigma, obs, NoiseMode(args.noise_mode), rng)
    else:
        draws = sample_unconditional(model, sigma, rng, n=args.n, plain=sigma is None)
    dest = _out(args, "samples.bin")
    io.save_dataset(draws, dest)
    _manifest(args, None, [dest], {"seed": seed, "n": args.n})


def cmd_run(args):
    cfg = _config(args)
    rpath, spath = _out(args, "regret.csv"), _out(args, "summary.csv")
    with open(rpath, "w", newline="") as fh:
        res = run_experiment(cfg, sink=RecordWriter(fh).write)
    with open(spath, "w", newline="") as fh:
        write_summary(fh, res.summary)
    _manifest(args, cfg, [rpath, spath])


def cmd_report(args):
    paths = args.input if args.input else [os.path.join(args.out, "regret.csv")]
    records = []
    for p in paths:
        records.extend(read_records(p))
    write_summary(sys.stdout, summarize(records))


COMMANDS = {"gen-tasks": cmd_gen_tasks, "corrupt": cmd_corrupt, "train": cmd_train,
            "train-imperfect": cmd_train_imperfect, "sample": cmd_sample, "run": cmd_run,
            "report": cmd_report}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (DiffTSError, OSError) as exc:
        msg = f"{exc.filename}: {exc.strerror}" if isinstance(exc, OSError) and exc.filename else str(exc)
        print(f"diffts {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
