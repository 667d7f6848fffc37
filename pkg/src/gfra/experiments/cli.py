"""Command-line entry point ``gfra``.

Every subcommand writes comma-separated results plus ``manifest.json`` into
``--out``. On failure a single line ``error=<category> message=<text>`` goes
to stderr and the exit code identifies the category.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from ..multiplicity import TedModel
from .config import ConfigError, ExperimentConfig
from .modelio import ModelFormatError, load_model, save_model
from .runners import (fit_ted_model, history_files, make_dataset, run_asymptotic_check,
                      run_confusion, run_rate_experiment, train_model, write_asymptotic,
                      write_confusion, write_manifest, write_rates)

EXIT_CODES = {"internal": 1, "usage": 2, "config": 3, "input": 4, "model": 5, "training": 6, "io": 7}


class CliError(Exception):
    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


def _cfg(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.workers is not None:
        changes["workers"] = args.workers
    return cfg.replace(**changes) if changes else cfg


def cmd_gen_data(cfg, out):
    ds = make_dataset(cfg)
    ds.to_csv(os.path.join(out, "dataset.csv"))
    cfg.deployment().to_csv(os.path.join(out, "deployment.csv"))
    return ["dataset.csv", "deployment.csv"], {"n_samples": len(ds)}


def cmd_train(cfg, out):
    ds = make_dataset(cfg)
    model, hist = train_model(cfg, ds)
    ted = fit_ted_model(cfg, ds)
    save_model(model, os.path.join(out, "model.bin"))
    with open(os.path.join(out, "ted.txt"), "w") as fh:
        fh.write(ted.to_text())
    files = ["model.bin", "ted.txt"]
    for name, write in history_files(hist).items():
        write(os.path.join(out, name))
        files.append(name)
    return files, {"epochs": hist.epochs, "stop_reason": hist.stop_reason}


def cmd_confusion(cfg, out):
    res = run_confusion(cfg)
    files = write_confusion(res, out)
    return files, {"epochs": res.history.epochs, "stop_reason": res.history.stop_reason}


def cmd_rates(cfg, out):
    if cfg.model_file:
        try:
            model = load_model(cfg.model_file)
        except OSError as exc:
            raise CliError("io", f"cannot read model: {exc}") from None
    else:
        model = None
    if cfg.ted_file:
        with open(cfg.ted_file) as fh:
            ted = TedModel.from_text(fh.read())
    else:
        ted = None
    if model is None or ted is None:
        ds = make_dataset(cfg)
        if model is None:
            model, _ = train_model(cfg, ds)
        if ted is None:
            ted = fit_ted_model(cfg, ds)
    report = run_rate_experiment(cfg, model, ted)
    return write_rates(report, out), {"collided_samples": report.n_collided}


def cmd_asymptotic(cfg, out):
    res = run_asymptotic_check(cfg)
    return write_asymptotic(res, out), ({"note": res.note} if res.note else {})


COMMANDS = {
    "gen-data": (cmd_gen_data, "generate a labelled multiplicity dataset"),
    "train": (cmd_train, "train the multiplicity MLP and fit T-ED"),
    "confusion": (cmd_confusion, "train and report DNN and T-ED confusion matrices"),
    "rates": (cmd_rates, "per-collided-UE achievable rates for all AP selection schemes"),
    "asymptotic": (cmd_asymptotic, "all-AP SINR against its large-M limit"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gfra", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="key = value configuration file (defaults if omitted)")
        s.add_argument("--seed", type=int, help="master seed (overrides the config)")
        s.add_argument("--out", required=True, help="output directory")
        s.add_argument("--workers", type=int, help="worker threads (results do not depend on it)")
    return p


def _fail(category: str, message: str) -> int:
    msg = " ".join(str(message).split())
    print(f"error={category} message={msg}", file=sys.stderr)
    return EXIT_CODES[category]


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        return _fail(exc.category, exc)
    try:
        cfg = _cfg(args)
        os.makedirs(args.out, exist_ok=True)
        t0 = time.perf_counter()
        files, extra = COMMANDS[args.command][0](cfg, args.out)
        extra = dict(extra, elapsed_s=round(time.perf_counter() - t0, 3))
        write_manifest(args.out, cfg, args.command, files, extra)
    except CliError as exc:
        return _fail(exc.category, exc)
    except ConfigError as exc:
        return _fail("config", exc)
    except ModelFormatError as exc:
        return _fail("model", exc)
    except FloatingPointError as exc:
        return _fail("training", exc)
    except OSError as exc:
        return _fail("io", exc)
    except ValueError as exc:
        return _fail("input", exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
