"""Command-line front end: ``sigmdn <command> ...``.

Exit codes: 0 success, 2 configuration error, 3 data-format error,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import config as run_config
from . import dataset
from . import evaluation
from .errors import ConfigError, FormatError, InvalidInputError, NumericError, SigMdnError
from .mdn import (
    TrainConfig,
    load_checkpoint,
    load_model,
    save_checkpoint,
    save_model,
    train,
)
from .pricing import CALL, PUT
from .scenario_io import load_scenario, write_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FORMAT = 3
EXIT_NUMERIC = 4

HISTORY_COLUMNS = ("epoch", "train_nll", "val_nll", "lr")


def validation_path(data_path) -> str:
    return str(data_path) + ".val"


def parse_strikes(text: str) -> tuple[float, ...]:
    """``"0.8,0.9,1.0"`` or ``"low:high:count"``."""
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            ks = np.round(np.linspace(float(lo), float(hi), int(n)), 10)
        else:
            ks = np.array([float(t) for t in text.split(",") if t.strip()])
    except ValueError:
        raise ConfigError("--strikes", f"cannot parse {text!r}") from None
    if ks.size == 0:
        raise ConfigError("--strikes", "no strikes given")
    if not np.all(np.isfinite(ks)) or np.any(ks <= 0):
        raise ConfigError("--strikes", "strikes must be positive")
    return tuple(float(k) for k in ks)


def _echo(msg: str) -> None:
    print(msg, file=sys.stderr)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_gen_data(args) -> int:
    cfg = run_config.load(args.config)
    seed = cfg.seeds.data if args.seed is None else args.seed
    threads = cfg.dataset.threads if args.threads is None else args.threads
    sz = cfg.dataset
    t0 = time.perf_counter()
    common = dict(level=cfg.level, time_augment=cfg.time_augment, threads=threads)
    data = dataset.generate(cfg.regime, sz.n1, sz.n2, sz.M, cfg.scenario, seed, **common)
    manifest = {"config": cfg.to_dict(), "seed": seed, "domain": "train"}
    dataset.write(data, args.out, manifest)
    n_val = 0
    if sz.validation_n1 > 0:
        val = dataset.generate(
            cfg.regime, sz.validation_n1, sz.n2, sz.M, cfg.scenario, seed, validation=True, **common
        )
        dataset.write(val, validation_path(args.out), dict(manifest, domain="validation"))
        n_val = len(val)
    dt = time.perf_counter() - t0
    print(f"records {len(data)} validation_records {n_val} wall_time_s {dt:.2f}")
    return EXIT_OK


def write_history(path, history) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(HISTORY_COLUMNS)
        for h in history:
            out.writerow([h.epoch, repr(h.train_loss), repr(h.val_loss), repr(h.lr)])


def cmd_train(args) -> int:
    cfg = run_config.load(args.config)
    data = dataset.read(args.data)
    if data.regime != cfg.regime or data.layout.dim != cfg.feature_dim:
        raise ConfigError(
            "regime", f"dataset is {data.regime}/dim {data.layout.dim}, config wants {cfg.regime}/dim {cfg.feature_dim}"
        )
    tc: TrainConfig = cfg.train_config()
    if args.epochs is not None:
        tc = dataclasses.replace(tc, epochs=args.epochs)
    if args.seed is not None:
        tc = dataclasses.replace(tc, seed=args.seed)
    val_file = args.validation or (validation_path(args.data) if Path(validation_path(args.data)).exists() else None)
    validation = None
    if val_file is not None:
        v = dataset.read(val_file)
        if v.layout != data.layout or v.n_targets != data.n_targets:
            raise FormatError("validation", "validation set layout differs from the training set")
        validation = (v.x, v.y)
    resume = load_checkpoint(args.resume) if args.resume else None
    mc = cfg.mdn_config()
    if resume is not None and resume.model.config != mc:
        raise ConfigError("mdn", "checkpoint network differs from the config")
    res = train(data.x, data.y, mc, tc, validation=validation, layout=data.layout, resume=resume,
                verbose=args.verbose)
    save_model(res.model, args.out)
    write_history(args.history or args.out + ".history.csv", res.history)
    save_checkpoint(res.checkpoint, args.checkpoint or args.out + ".ckpt")
    last = res.history[-1] if res.history else None
    if last is None:
        print("epochs 0")
    else:
        print(f"epochs {last.epoch} train_nll {last.train_loss:.6f} val_nll {last.val_loss:.6f} lr {last.lr:.3g}")
    return EXIT_OK


def _load_pair(model_path, scenario_path):
    model = load_model(model_path)
    if model.layout is None:
        raise FormatError("layout", "model file has no feature layout")
    sf = load_scenario(scenario_path, regime=model.layout.regime)
    if sf.scenario.n_assets != model.layout.n_assets:
        raise ConfigError(
            "n_assets", f"scenario has {sf.scenario.n_assets} assets, model expects {model.layout.n_assets}"
        )
    return model, sf


def _emit(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_price(args) -> int:
    strikes = parse_strikes(args.strikes)
    model, sf = _load_pair(args.model, args.scenario)
    kinds = (CALL, PUT) if args.kind == "both" else (args.kind,)
    rows = []
    for T in sf.maturities:
        rows += evaluation.model_price_rows(model, sf.scenario, T, strikes, kinds, sf.scenario_id)
    _emit(evaluation.price_table_csv(rows), args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model, sf = _load_pair(args.model, args.scenario)
    strikes = parse_strikes(args.strikes) if args.strikes else evaluation.DEFAULT_STRIKES
    if args.mc_paths < 30:
        raise ConfigError("--mc-paths", "at least 30 paths are needed for a density estimate")
    rep = evaluation.evaluate_scenario(
        model, sf.scenario, args.mc_paths, args.seed, sf.maturities, strikes, sf.weights, sf.scenario_id
    )
    for w in rep.warnings:
        _echo(f"warning: {w}")
    doc = {"scenario_id": sf.scenario_id, "mc_paths": args.mc_paths, "seed": args.seed}
    doc.update(rep.summary())
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out is None:
        sys.stdout.write(text)
        sys.stdout.write(evaluation.price_table_csv(rep.prices))
    else:
        Path(args.out + ".json").write_text(text, encoding="utf-8")
        Path(args.out + ".csv").write_text(evaluation.price_table_csv(rep.prices), encoding="utf-8")
    return EXIT_OK


def cmd_init_config(args) -> int:
    doc = run_config.default_document(args.regime)
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_make_scenario(args) -> int:
    cfg = run_config.load(args.config)
    seed = cfg.seeds.eval if args.seed is None else args.seed
    scen = evaluation.held_out_scenarios(cfg.scenario, cfg.regime, args.index + 1, seed, args.horizon)[-1]
    mats = [T for T in cfg.evaluation.maturities if T <= args.horizon + 1e-12]
    write_scenario(args.out, scen, mats, scenario_id=str(args.index))
    print(f"wrote {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sigmdn", description="Signature-conditioned MDN basket option pricer")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="generate a training set (and a validation set)")
    g.add_argument("--config", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--threads", type=int)
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", help="fit the network to a dataset")
    t.add_argument("--config", required=True)
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--validation", help="validation dataset (default: <data>.val if present)")
    t.add_argument("--history", help="history CSV (default: <out>.history.csv)")
    t.add_argument("--checkpoint", help="checkpoint file (default: <out>.ckpt)")
    t.add_argument("--resume", help="continue from a checkpoint")
    t.add_argument("--epochs", type=int, help="override the epoch budget")
    t.add_argument("--seed", type=int)
    t.add_argument("--verbose", action="store_true")
    t.set_defaults(func=cmd_train)

    pr = sub.add_parser("price", help="price calls/puts for a scenario file")
    pr.add_argument("--model", required=True)
    pr.add_argument("--scenario", required=True)
    pr.add_argument("--strikes", default="0.8:1.2:21")
    pr.add_argument("--kind", choices=(CALL, PUT, "both"), default="both")
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_price)

    e = sub.add_parser("evaluate", help="compare the model with Monte Carlo on a scenario")
    e.add_argument("--model", required=True)
    e.add_argument("--scenario", required=True)
    e.add_argument("--mc-paths", type=int, default=100_000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--strikes")
    e.add_argument("--out", help="report prefix; writes <out>.json and <out>.csv")
    e.set_defaults(func=cmd_evaluate)

    c = sub.add_parser("init-config", help="write a config with every default")
    c.add_argument("--regime", choices=("tv", "lv"), required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_init_config)

    s = sub.add_parser("make-scenario", help="sample a held-out scenario file")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--index", type=int, default=0)
    s.add_argument("--horizon", type=float, default=1.0)
    s.set_defaults(func=cmd_make_scenario)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "verbose", False):
        logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvalidInputError) as exc:
        _echo(f"config error: {exc}")
        return EXIT_CONFIG
    except FormatError as exc:
        _echo(f"format error: {exc}")
        return EXIT_FORMAT
    except NumericError as exc:
        _echo(f"numeric error: {exc}")
        return EXIT_NUMERIC
    except SigMdnError as exc:
        _echo(f"error: {exc}")
        return EXIT_NUMERIC
    except OSError as exc:
        _echo(f"I/O error: {exc}")
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
