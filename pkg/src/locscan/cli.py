"""Command line: ``locscan {generate,scan,detect,power,sweep,heatmap}``.

Every command writes CSV or JSON; ``--out`` selects a file (default stdout).
Commands that sample draw a fresh seed when ``--seed`` is omitted and print
it to stderr, so any run can be repeated.
"""
from __future__ import annotations

import argparse
import csv
import json
import secrets
import sys
from contextlib import contextmanager

import numpy as np

from locscan.errors import InputError, ScopeError
from locscan.generators import RdpgSpec, sample_rdpg_series, sample_series
from locscan.ingest import read_series, read_vertex_map, write_series
from locscan.limit_theory import ALT_SCALES, heatmap_beta_diff, limit_model, power_large_sample
from locscan.locality import StatKind
from locscan.normalize import ScanConfig, scan_series
from locscan.power_mc import estimate_power, sweep_tau_ell
from locscan.specfile import read_spec, spec_summary

DEFAULT_WINDOW = 20
DEFAULT_THRESHOLD = 5.0
ALT_HELP = "Gumbel scale under the alternative: the null scale, or the alternative's own variance"


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(63)
        print(f"seed={args.seed}", file=sys.stderr)
    return args.seed


def _int_range(text: str) -> list[int]:
    """``"3"``, ``"0:10"`` (inclusive) or ``"0,2,5"``."""
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}") from None


def _float_grid(text: str) -> list[float]:
    """``"0.5,0.6,0.7"`` or ``"start:stop:count"`` (inclusive, evenly spaced)."""
    try:
        if ":" in text:
            lo, hi, count = text.split(":")
            return [float(x) for x in np.linspace(float(lo), float(hi), int(count))]
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None


def _read_series(args):
    vmap = read_vertex_map(args.vertex_map) if args.vertex_map else None
    series, vmap, _ = read_series(args.series, delimiter=args.delimiter, vertex_map=vmap)
    return series, vmap


def _cfg(args) -> ScanConfig:
    return ScanConfig(args.tau, args.ell, args.k, args.stat)


def cmd_generate(args) -> None:
    spec = read_spec(args.spec)
    seed = _seed(args)
    if isinstance(spec, RdpgSpec):
        series = sample_rdpg_series(spec, seed)
    else:
        series = sample_series(spec, seed)
    comments = [f"seed={seed}", *spec_summary(spec)]
    with _output(args.out) as fh:
        write_series(series, None, fh, delimiter=args.delimiter, comments=comments)


def cmd_scan(args) -> None:
    series, vmap = _read_series(args)
    rows = scan_series(series, _cfg(args))
    with _output(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "S", "argmax_vertex"])
        for r in rows:
            writer.writerow([r.t, repr(r.value), vmap.label_of(r.argmax_vertex)])


def cmd_detect(args) -> None:
    series, vmap = _read_series(args)
    rows = scan_series(series, _cfg(args))
    with _output(args.out) as fh:
        for r in rows:
            record = {
                "t": r.t,
                "value": r.value,
                "argmax_vertex": vmap.label_of(r.argmax_vertex),
                "flagged": bool(r.value > args.threshold),
            }
            fh.write(json.dumps(record) + "\n")


def cmd_power(args) -> None:
    spec = read_spec(args.spec)
    cfg = _cfg(args)
    report: dict = {"tau": cfg.tau, "ell": cfg.ell, "k": cfg.k, "stat": str(cfg.stat), "alpha": args.alpha}
    if args.mode in ("theory", "both"):
        if isinstance(spec, RdpgSpec):
            raise InputError("large-sample theory covers the block model only")
        if (cfg.tau, cfg.ell) != (1, 0) or cfg.k not in (0, 1):
            raise ScopeError("theory mode needs tau=1, ell=0, k in {0, 1}")
        report["beta_theory"] = power_large_sample(limit_model(spec, cfg.stat, cfg.k, args.alt_scale), args.alpha)
    if args.mode in ("mc", "both"):
        seed = _seed(args)
        est = estimate_power(spec, cfg, args.alpha, args.replicates, seed, args.threads)
        report["seed"] = seed
        report["mc"] = est.to_dict()
    if args.mode == "both":
        report["gap"] = abs(report["mc"]["beta"] - report["beta_theory"])
    with _output(args.out) as fh:
        fh.write(json.dumps(report) + "\n")


def cmd_sweep(args) -> None:
    spec = read_spec(args.spec)
    seed = _seed(args)
    result = sweep_tau_ell(
        spec, args.k, args.stat, args.tau_range, args.ell_range, args.alpha, args.replicates, seed, args.threads
    )
    with _output(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tau", "ell", "beta", "std_error"])
        for row in result.rows():
            writer.writerow([row["tau"], row["ell"], repr(row["beta"]), repr(row["std_error"])])
    summary = {
        "k": args.k,
        "stat": str(StatKind(args.stat)),
        "alpha": args.alpha,
        "replicates": args.replicates,
        "seed": seed,
        "best_tau": result.best_tau_ell[0],
        "best_ell": result.best_tau_ell[1],
        "best_beta": result.best_beta,
    }
    if args.summary:
        with _output(args.summary) as fh:
            fh.write(json.dumps(summary) + "\n")
    else:
        print(json.dumps(summary), file=sys.stderr)


def cmd_heatmap(args) -> None:
    heat = heatmap_beta_diff(args.p, args.h_grid, args.q_grid, args.n, args.alpha, args.c, args.alt_scale)
    with _output(args.out) as fh:
        heat.write_csv(fh)


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="locscan",
        description="Locality scan statistics for change-point detection in graph time series.",
        formatter_class=fmt,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sampling=False, scan=True):
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        if scan:
            p.add_argument("--tau", type=int, default=DEFAULT_WINDOW, help="vertex normalization window")
            p.add_argument("--ell", type=int, default=DEFAULT_WINDOW, help="temporal normalization window")
            p.add_argument("--k", type=int, default=1, help="neighborhood radius")
            p.add_argument("--stat", choices=["psi", "phi"], default="psi", help="locality statistic")
        if sampling:
            p.add_argument("--seed", type=int, default=None, help="RNG seed; drawn and printed when omitted")
            p.add_argument("--alpha", type=float, default=0.05, help="significance level")
            p.add_argument("--replicates", type=int, default=1000, help="Monte Carlo replicates")
            p.add_argument("--threads", type=int, default=1, help="maximum worker processes")

    def series_input(p):
        p.add_argument("series", help="temporal edge-list file")
        p.add_argument("--delimiter", default=",")
        p.add_argument("--vertex-map", default=None, help="file with one vertex label per line, in id order")

    p = sub.add_parser("generate", help="sample a series from a model file", formatter_class=fmt)
    p.add_argument("spec", help="key=value model file")
    p.add_argument("--seed", type=int, default=None, help="RNG seed; drawn and printed when omitted")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("scan", help="scan statistic at every admissible time (CSV)", formatter_class=fmt)
    series_input(p)
    common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("detect", help="flag times whose scan statistic exceeds a threshold (JSON lines)",
                       formatter_class=fmt)
    series_input(p)
    common(p)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="detection threshold")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("power", help="power at the change point (JSON)", formatter_class=fmt)
    p.add_argument("spec", help="key=value model file")
    p.add_argument("--mode", choices=["mc", "theory", "both"], default="mc")
    p.add_argument("--alt-scale", choices=ALT_SCALES, default="null", help=ALT_HELP)
    common(p, sampling=True)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("sweep", help="Monte Carlo power over a (tau, ell) grid (CSV)", formatter_class=fmt)
    p.add_argument("spec", help="key=value model file")
    common(p, sampling=True, scan=False)
    p.add_argument("--k", type=int, default=1, help="neighborhood radius")
    p.add_argument("--stat", choices=["psi", "phi"], default="psi", help="locality statistic")
    p.add_argument("--tau-range", type=_int_range, default=_int_range("0:10"), help="e.g. 0:10 or 0,1,5")
    p.add_argument("--ell-range", type=_int_range, default=_int_range("0:10"), help="e.g. 0:10 or 0,1,5")
    p.add_argument("--summary", default=None, help="summary JSON path (default: stderr)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("heatmap", help="large-sample beta_psi - beta_phi over an (h, q) grid (CSV)",
                       formatter_class=fmt)
    p.add_argument("--p", type=float, default=0.43)
    p.add_argument("--h-grid", type=_float_grid, default=_float_grid("0.45:0.99:28"))
    p.add_argument("--q-grid", type=_float_grid, default=_float_grid("0.45:0.99:28"))
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--c", type=float, default=1.0, help="sizing constant c in n2 = n3 = c sqrt(n log n)")
    p.add_argument("--alt-scale", choices=ALT_SCALES, default="null", help=ALT_HELP)
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.set_defaults(func=cmd_heatmap)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
