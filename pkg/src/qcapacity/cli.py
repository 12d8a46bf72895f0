"""Command-line interface.

Exit codes: 0 conclusive, 2 inconclusive, 64 usage error, 65 data error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import capacity as cap
from .channel import ChannelError, NormalFormParams, from_normal_form, load_channel, require_valid, save_channel
from .degradability import PSD_TOL, Verdict, classify
from .sampling import degradable_fraction

EXIT_OK = 0
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64
EXIT_DATA = 65


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(obj, out: str | None = None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read_channel(path: str):
    try:
        T = load_channel(path)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON: {exc}") from exc
    except OSError as exc:
        raise UsageError(f"{path}: cannot read: {exc}") from exc
    except ChannelError as exc:
        raise DataError(f"{path}: {exc}") from exc
    try:
        return require_valid(T)
    except ChannelError as exc:
        raise DataError(f"{path}: validation failed: {exc}") from exc


def cmd_check(args) -> int:
    T = _read_channel(args.channel)
    report = classify(T, args.tolerance)
    _emit(report.to_dict())
    return EXIT_INCONCLUSIVE if report.verdict is Verdict.INCONCLUSIVE else EXIT_OK


def cmd_capacity(args) -> int:
    if args.channel is not None:
        if args.alpha is not None or args.beta is not None:
            raise UsageError("give either a channel file or --alpha/--beta, not both")
        T = _read_channel(args.channel)
        result = cap.capacity_or_bounds(T, seed=args.seed)
    else:
        if args.alpha is None or args.beta is None:
            raise UsageError("--alpha and --beta are both required without a channel file")
        result = cap.qubit_capacity(NormalFormParams(args.alpha, args.beta))
    _emit(result.to_dict())
    if result.kind == cap.LOWER_BOUND and result.diagnostics.get("verdict") == Verdict.INCONCLUSIVE.value:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def surface_rows(alpha_range, beta_range, resolution: int):
    alphas = np.linspace(alpha_range[0], alpha_range[1], resolution)
    betas = np.linspace(beta_range[0], beta_range[1], resolution)
    for a in alphas:
        for b in betas:
            p = NormalFormParams(float(a), float(b))
            yield float(a), float(b), cap.qubit_capacity(p).value, cap.normal_form_verdict(p).value


def cmd_surface(args) -> int:
    if args.resolution < 2:
        raise UsageError("--resolution must be at least 2")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "beta", "capacity", "verdict"])
    for a, b, q, v in surface_rows(args.alpha_range, args.beta_range, args.resolution):
        writer.writerow([f"{a:.9f}", f"{b:.9f}", f"{q:.9f}", v])
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            raise DataError(f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    stats = degradable_fraction(args.d, args.dE, args.n, args.seed, tol=args.tolerance, workers=args.workers)
    _emit(stats.to_dict(), args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    if bool(args.mix) == bool(args.compose):
        raise UsageError("give either --mix terms or --compose q1 q2")
    if args.compose:
        q1, q2 = args.compose
        try:
            value = cap.bottleneck_bound(q1, q2)
        except cap.CapacityError as exc:
            raise DataError(str(exc)) from exc
        _emit({"bound": value, "kind": "bottleneck", "terms": [q1, q2]})
        return EXIT_OK
    terms, breakdown = [], []
    for weight, path in args.mix:
        try:
            w = float(weight)
        except ValueError as exc:
            raise UsageError(f"--mix weight {weight!r} is not a number") from exc
        res = cap.capacity_or_bounds(_read_channel(path), seed=args.seed)
        terms.append((w, res))
        breakdown.append({"weight": w, "channel": path, "capacity": res.value, "kind": res.kind})
    try:
        value = cap.convex_upper_bound(terms)
    except cap.CapacityError as exc:
        raise DataError(f"refusing convex bound: {exc}") from exc
    _emit({"bound": value, "kind": "convex", "terms": breakdown})
    return EXIT_OK


def cmd_normal_form(args) -> int:
    save_channel(from_normal_form(NormalFormParams(args.alpha, args.beta)), args.out)
    return EXIT_OK


def _float_pair(name):
    def parse(text):
        try:
            lo, hi = (float(x) for x in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must look like LO,HI")
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise argparse.ArgumentTypeError(f"{name} bounds must be finite")
        return lo, hi

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcapacity", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="classify a channel as degradable / anti-degradable")
    p.add_argument("channel", help="channel JSON file")
    p.add_argument("--tolerance", type=float, default=PSD_TOL)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("capacity", help="quantum capacity of a channel file or of a normal-form qubit channel")
    p.add_argument("channel", nargs="?", help="channel JSON file")
    p.add_argument("--alpha", type=float, help="normal-form angle (radians)")
    p.add_argument("--beta", type=float, help="normal-form angle (radians)")
    p.add_argument("--seed", type=int, default=0, help="seed for optimizer restarts")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("surface", help="capacity over an (alpha, beta) grid as CSV")
    p.add_argument("--alpha-range", type=_float_pair("--alpha-range"), default=(0.0, math.pi))
    p.add_argument("--beta-range", type=_float_pair("--beta-range"), default=(0.0, math.pi))
    p.add_argument("--resolution", type=int, default=101)
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("sample", help="degradable fraction of Haar-random channels")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--dE", type=int, default=2)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tolerance", type=float, default=PSD_TOL)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output JSON path (default: stdout)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("bound", help="convex-mixture or bottleneck upper bounds")
    p.add_argument("--mix", nargs=2, action="append", metavar=("WEIGHT", "CHANNEL"), default=[])
    p.add_argument("--compose", nargs=2, type=float, metavar=("Q1", "Q2"))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("normal-form", help="write the normal-form channel for (alpha, beta) to a JSON file")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_normal_form)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qcapacity: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ChannelError, cap.CapacityError) as exc:
        print(f"qcapacity: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
