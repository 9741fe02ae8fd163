"""Command-line entry point.

Subcommands: ``classify``, ``route``, ``sweep`` and ``gen-corpus``. Exit
status is 0 on success, 2 for usage, config, parse or I/O errors and 1
for internal failures.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import BeamSenseError, ConfigError
from .harness import run_route, run_rwpm_sweep, sweep_to_csv
from .mobility import DEFAULT_PROFILES, discretize_arrays, l_route, read_route_csv, synthesize_corpus
from .prediction import PredictorKind
from .propagation import Scenario, load_scenario
from .sensing import (ActivityClass, classify_features, labelled_features, read_manifest,
                      read_trace_csv, train, write_manifest, write_trace_csv)

log = logging.getLogger("beamsense")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


class UsageError(BeamSenseError):
    pass


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _predictor(text):
    try:
        return PredictorKind.from_name(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _scenario(args) -> Scenario:
    return load_scenario(args.scenario) if args.scenario else Scenario()


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _write(path: Path, text: str) -> None:
    with path.open("w", newline="") as fh:
        fh.write(text)


# -- classify -----------------------------------------------------------------


def _test_entries(args):
    path = Path(args.test)
    with path.open() as fh:
        first = fh.readline().strip().replace(" ", "")
    if first == "label,path":
        return [(label, p) for label, p in read_manifest(path)]
    if args.label is None:
        raise UsageError("--label is required when --test is a single trace")
    return [(ActivityClass.parse(args.label), read_trace_csv(path))]


def cmd_classify(args) -> int:
    entries = read_manifest(args.train)
    missing = set(ActivityClass) - {label for label, _ in entries}
    if missing:
        raise ConfigError("training manifest lacks classes: " + ", ".join(sorted(c.value for c in missing)))
    test = _test_entries(args)
    out = _out_dir(args.out)
    classes = list(ActivityClass)

    acc_rows, conf_rows = [], []
    for wl in args.window:
        X, y = labelled_features(entries, wl)
        Xt, yt = labelled_features(test, wl)
        if not len(Xt):
            continue
        clf = train(X, y, k=args.k, normalize=not args.raw_distance)
        pred = classify_features(clf, Xt)
        conf = np.zeros((4, 4), dtype=int)
        for truth, guess in zip(yt, pred):
            conf[classes.index(truth), classes.index(guess)] += 1
        for i, c in enumerate(classes):
            tp = conf[i, i]
            support = conf[i].sum()
            predicted = conf[:, i].sum()
            precision = tp / predicted if predicted else float("nan")
            recall = tp / support if support else float("nan")
            acc_rows.append([f"{wl * 1000:g}", c.value, int(support), f"{precision:.4f}", f"{recall:.4f}"])
            conf_rows.append([f"{wl * 1000:g}", c.value, *conf[i].tolist()])
        overall = np.trace(conf) / conf.sum()
        acc_rows.append([f"{wl * 1000:g}", "overall", int(conf.sum()), "", f"{overall:.4f}"])
        log.info("window %g ms: accuracy %.4f over %d windows", wl * 1000, overall, conf.sum())

    with (out / "accuracy.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window_ms", "class", "support", "precision", "recall"])
        w.writerows(acc_rows)
    with (out / "confusion.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window_ms", "true_class", *[c.value for c in classes]])
        w.writerows(conf_rows)
    return EXIT_OK


# -- route / sweep ------------------------------------------------------------


def cmd_route(args) -> int:
    scenario = _scenario(args)
    if args.p_dth is not None or args.p_rth is not None:
        scenario = replace(scenario,
                           p_dth=abs(args.p_dth) if args.p_dth is not None else scenario.p_dth,
                           p_rth=args.p_rth if args.p_rth is not None else scenario.p_rth)
    route = read_route_csv(args.route, step_len=args.step_len) if args.route else l_route(step_len=args.step_len)
    out = _out_dir(args.out)
    traj = discretize_arrays(route, scenario.room_dims[:2])
    report = run_route(scenario, traj, args.predictor, use_validation=args.validate)
    stem = f"route_{args.predictor.value}"
    _write(out / f"{stem}.json", report.to_json())
    _write(out / f"{stem}.csv", report.to_csv())
    log.info("%s: %d re-beamformings, %d beam switches over %d steps", args.predictor.value,
             report.rebeamform_count, report.beam_switch_count, report.n_steps)
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = _scenario(args)
    out = _out_dir(args.out)
    results = run_rwpm_sweep(scenario, n_waypoints=args.waypoints, repetitions=args.repetitions,
                             p_dth_values=args.p_dth, kinds=list(PredictorKind), seed=args.seed,
                             use_validation=args.validate)
    _write(out / "sweep.csv", sweep_to_csv(results))
    return EXIT_OK


# -- corpus -------------------------------------------------------------------


def cmd_gen_corpus(args) -> int:
    out = _out_dir(args.out)
    corpus = synthesize_corpus(duration=args.duration, rate=args.rate, seed=args.seed, profiles=DEFAULT_PROFILES)
    entries = []
    for activity, arr in corpus.items():
        name = f"{activity.value}.csv"
        write_trace_csv(out / name, arr)
        entries.append((activity, name))
    write_manifest(out / "manifest.csv", entries)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beamsense", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--scenario", help="key = value scenario file (defaults to the reference room)")

    p = sub.add_parser("classify", parents=[common], help="train kNN on a corpus and score a test set")
    p.add_argument("--train", required=True, help="training manifest (label,path)")
    p.add_argument("--test", required=True, help="test manifest, or a single trace CSV with --label")
    p.add_argument("--label", help="true activity of a single test trace")
    p.add_argument("--window", type=lambda s: [v / 1000 for v in _float_list(s)], default=[0.5],
                   help="window length(s) in ms, comma separated (default 500)")
    p.add_argument("-k", type=_positive_int, default=3)
    p.add_argument("--raw-distance", action="store_true", help="disable z-score normalization")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("route", parents=[common], help="track the beam along a route")
    p.add_argument("--route", help="route CSV (x,y per line); defaults to the bundled L-route")
    p.add_argument("--predictor", type=_predictor, default=PredictorKind.SENSOR, help="none|simple|sensor")
    p.add_argument("--p-dth", type=float, help="drop-off threshold magnitude, dB")
    p.add_argument("--p-rth", type=float, help="forced re-beamforming threshold, dBm")
    p.add_argument("--step-len", type=_positive_float, default=0.1)
    p.add_argument("--validate", action="store_true", help="accept predictions via the beam-pair test")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("sweep", parents=[common], help="random waypoint sweep over drop-off thresholds")
    p.add_argument("--repetitions", type=_positive_int, default=100)
    p.add_argument("--waypoints", type=int, default=100)
    p.add_argument("--p-dth", type=_float_list, default=[float(v) for v in range(1, 11)],
                   help="comma-separated thresholds in dB (sign ignored)")
    p.add_argument("--validate", action="store_true", help="accept predictions via the beam-pair test")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-corpus", parents=[common], help="write a synthetic labelled sensor corpus")
    p.add_argument("--duration", type=_positive_float, default=300.0, help="seconds per activity")
    p.add_argument("--rate", type=_positive_float, default=100.0, help="fused sample rate, Hz")
    p.set_defaults(func=cmd_gen_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (BeamSenseError, OSError, ValueError) as exc:
        print(f"beamsense {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"beamsense {args.command}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
