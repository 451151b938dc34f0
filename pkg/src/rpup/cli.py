"""Command-line driver.

Subcommands
-----------
``generate {signal,unitary,projection,coefficients,sampling}``
    Write a random signal or a dense operator to a signal file.
``apply <transform>``
    Run a signal file through a transform; see ``TRANSFORMS``.
``stats``
    Run the distribution battery and write its CSV report.
``bench``
    Work counts and throughput of the decimating encoder for q in {1, 2, K+1}.
``cs-demo``
    Sparse recovery through the down-L operator.

Exit codes are 0 on success, 1 for invalid input or a failed check and 2
for I/O problems (missing, unreadable or malformed files).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from dataclasses import replace

import numpy as np

from . import decimation, givens, paraunitary, recovery, stats
from ._backend import BACKEND
from .decimation import DecimationSchedule
from .io import SignalFile, SignalFormatError, read_signal
from .prng import parse_seed

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

TRANSFORMS = (
    "unitary", "unitary-inverse", "project", "project-transpose",
    "paraunitary", "paraunitary-inverse", "decimate", "adjoint",
)

BENCH_COLUMNS = (
    "q", "blocks", "stages_executed", "stages_baseline", "rotations_executed",
    "rotations_baseline", "stage_ratio", "rotation_ratio", "claimed_ratio",
    "samples_per_sec", "backend",
)
CS_COLUMNS = ("M", "K", "sparsity", "trials", "exact", "rate")


class CLIError(Exception):
    def __init__(self, message, code=EXIT_INVALID):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CLIError(f"{self.prog}: {message}")


# -- helpers ---------------------------------------------------------------------


def _read(path) -> SignalFile:
    try:
        return read_signal(path)
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO)
    except SignalFormatError as exc:
        raise CLIError(f"malformed signal file {path}: {exc}", EXIT_IO)


def _write(path, samples, block_size) -> None:
    data = SignalFile(samples, block_size).to_bytes()
    if path in (None, "-"):
        sys.stdout.buffer.write(data)
        return
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise CLIError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO)


def _emit_text(path, text) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CLIError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO)


def _blocks(sf: SignalFile, width: int, flag: str) -> np.ndarray:
    """Payload as (B, width) blocks, naming the field that disagrees."""
    if sf.block_size and sf.block_size != width:
        raise CLIError(f"block size: file header says {sf.block_size}, {flag} gives {width}")
    if sf.count % width:
        raise CLIError(f"element count: {sf.count} samples is not a multiple of {flag}={width}")
    return sf.samples.reshape(-1, width)


def _schedule(args, n_blocks: int) -> DecimationSchedule:
    if args.schedule:
        try:
            with open(args.schedule) as fh:
                text = fh.read()
        except OSError as exc:
            raise CLIError(f"cannot read {args.schedule}: {exc.strerror or exc}", EXIT_IO)
        return DecimationSchedule.from_csv(text)
    q = args.q if args.q is not None else args.k_order + 1
    return DecimationSchedule.constant(q, max(1, -(-n_blocks // q)))


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _sparsities(text: str) -> list:
    out = []
    for part in text.split(","):
        lo, _, hi = part.partition("-")
        out.extend(range(int(lo), int(hi or lo) + 1))
    return out


# -- commands --------------------------------------------------------------------


def cmd_generate(args) -> int:
    M, seed = args.m, args.seed
    if args.what == "signal":
        rng = np.random.default_rng(seed)
        _write(args.out, rng.standard_normal(args.blocks * M), M)
    elif args.what == "unitary":
        _write(args.out, givens.materialize(givens.UnitarySpec(M, seed, args.subsets)), M)
    elif args.what == "projection":
        pspec = givens.ProjectionSpec(M, args.n if args.n is not None else M, seed, args.subsets)
        _write(args.out, givens.project(pspec, np.eye(M)), M)
    else:
        spec = paraunitary.ParaunitarySpec(M, args.k_order, seed, args.subsets)
        coeffs = paraunitary.coefficients(spec)
        if args.what == "coefficients":
            _write(args.out, coeffs.matrices, M)
        else:
            _write(args.out, decimation.sampling_matrix(coeffs), paraunitary.filter_length(spec))
    return EXIT_OK


def cmd_apply(args) -> int:
    if not args.input:
        raise CLIError("--in is required for apply")
    sf = _read(args.input)
    M, seed, kind = args.m, args.seed, args.transform

    if kind in ("unitary", "unitary-inverse"):
        spec = givens.UnitarySpec(M, seed, args.subsets)
        x = _blocks(sf, M, "--m")
        fn = givens.apply_unitary if kind == "unitary" else givens.apply_unitary_inverse
        _write(args.out, fn(spec, x.T).T, M)
    elif kind in ("project", "project-transpose"):
        N = args.n if args.n is not None else M
        pspec = givens.ProjectionSpec(M, N, seed, args.subsets)
        if kind == "project":
            _write(args.out, givens.project(pspec, _blocks(sf, M, "--m").T).T, N)
        else:
            _write(args.out, givens.project_transpose(pspec, _blocks(sf, N, "--n").T).T, M)
    else:
        spec = paraunitary.ParaunitarySpec(M, args.k_order, seed, args.subsets)
        x = _blocks(sf, M, "--m")
        if kind in ("paraunitary", "paraunitary-inverse"):
            y = paraunitary.stream(spec, x, inverse=kind.endswith("inverse"), flush_tail=True)
        elif kind == "decimate":
            y = decimation.forward_decimated(spec, x, _schedule(args, x.shape[0])).blocks
        else:
            if args.schedule:
                schedule = _schedule(args, 0)
            else:
                q = args.q if args.q is not None else args.k_order + 1
                schedule = DecimationSchedule.constant(q, x.shape[0])
            y = decimation.adjoint_decimated(x, schedule, spec, args.blocks)
        _write(args.out, y, M)
    return EXIT_OK


def cmd_stats(args) -> int:
    cfg = stats.BatteryConfig(seed=args.seed, alpha=args.alpha)
    if args.trials is not None:
        n = args.trials
        cfg = replace(cfg, gauss_trials=n, corr_trials=n, cross_trials=n, para_trials=n)
    try:
        records = stats.run_battery(cfg)
    except stats.InsufficientSamplesError as exc:
        raise CLIError(f"degenerate input: {exc} (--trials={args.trials})")
    _emit_text(args.out, stats.records_to_csv(records))
    failed = [r.name for r in records if not r.passed]
    if failed:
        print(f"rpup stats: failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_bench(args) -> int:
    K, M = args.k_order, args.m
    spec = paraunitary.ParaunitarySpec(M, K, args.seed, args.subsets)
    qs = sorted({1, 2, K + 1})
    B = args.blocks if args.blocks else 24 * math.lcm(*qs)
    x = np.random.default_rng(args.seed).standard_normal((B, M))
    rows = []
    for q in qs:
        schedule = DecimationSchedule.constant(q, -(-B // q))
        start = time.perf_counter()
        run = decimation.forward_decimated(spec, x, schedule)
        elapsed = time.perf_counter() - start
        w = run.work
        rows.append([
            q, w.blocks, w.stages_executed, w.stages_baseline, w.rotations_executed,
            w.rotations_baseline, _fmt(w.stage_ratio), _fmt(w.rotation_ratio),
            _fmt(decimation.claimed_savings(K) if q == K + 1 and K else None),
            f"{B * M / elapsed:.1f}", BACKEND,
        ])
    _emit_text(args.out, _csv(BENCH_COLUMNS, rows))
    return EXIT_OK


def cmd_cs_demo(args) -> int:
    trials = 100 if args.trials is None else args.trials
    rows = []
    for k in _sparsities(args.sparsity):
        rep = recovery.cs_demo(args.m, args.k_order, k, trials, args.seed)
        rows.append([rep.M, rep.K, rep.sparsity, rep.trials, rep.exact, _fmt(rep.rate)])
    _emit_text(args.out, _csv(CS_COLUMNS, rows))
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def _seed(text):
    try:
        return parse_seed(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _common(p, m_default=16, k_default=3):
    p.add_argument("--seed", type=_seed, default=0, help="64-bit seed, hexadecimal")
    p.add_argument("--m", type=int, default=m_default, help="block size M")
    p.add_argument("--n", type=int, default=None, help="retained rows N (default M)")
    p.add_argument("--k-order", type=int, default=k_default, help="paraunitary order K")
    p.add_argument("--subsets", type=int, default=None, help="angle subsets N_s (default M)")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rpup", description="Random unitary and paraunitary projections.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a random signal or dense operator")
    p.add_argument("what", choices=("signal", "unitary", "projection", "coefficients", "sampling"))
    _common(p)
    p.add_argument("--blocks", type=int, default=8, help="signal length in blocks")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("apply", help="run a signal file through a transform")
    p.add_argument("transform", choices=TRANSFORMS)
    _common(p)
    p.add_argument("--in", dest="input", default=None, help="input signal file")
    p.add_argument("--q", type=int, default=None, help="constant compression factor (default K+1)")
    p.add_argument("--schedule", default=None, help="schedule CSV (window_index,q,blocks)")
    p.add_argument("--blocks", type=int, default=None, help="adjoint output length in blocks")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("stats", help="run the distribution battery")
    p.add_argument("--seed", type=_seed, default=stats.BatteryConfig.seed)
    p.add_argument("--trials", type=int, default=None, help="ensemble size for every check")
    p.add_argument("--alpha", type=float, default=stats.DEFAULT_ALPHA)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("bench", help="decimation work counts and throughput")
    _common(p, k_default=4)
    p.add_argument("--blocks", type=int, default=None, help="stream length in blocks")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("cs-demo", help="sparse recovery through the down-L operator")
    _common(p)
    p.set_defaults(seed=0xC5)
    p.add_argument("--sparsity", default="3", help="k, a list '1,3' or a range '1-6'")
    p.add_argument("--trials", type=int, default=None, help="trials per sparsity (default 100)")
    p.set_defaults(func=cmd_cs_demo)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CLIError as exc:
        print(f"rpup: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"rpup: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except IndexError as exc:
        print(f"rpup: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
