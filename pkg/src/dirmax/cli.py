"""Command-line interface.

Subcommands:

  decompose      build or validate a lacunary decomposition from a slope set
  kernel-table   tabulate a kernel or its transform profile as CSV
  apply          run a maximal or smoothing operator over a grid file
  overlap        strip-overlap maxima of a decomposition (exact sweep or sampled)
  check-support  band-in-strip containment report for an interval chain
  sweep          operator-norm ratio sweeps over N or mu

All outputs are written atomically (temp file + rename).  Exit codes:
0 success, 1 validation/usage failure, 2 I/O failure.  Randomness flows from
--seed through counter-based generators, so identical invocations produce
identical results (sweep outputs include wall-clock runtime columns, which
are the one exception to byte-identical reruns).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from typing import Optional, Sequence

import numpy as np

from .errors import DirmaxError, InvalidArgument
from .grid_ops import Grid2D, OperatorConfig, gamma_op, m0, m1, m2, strong_maximal
from .harness import sweep_N, sweep_mu
from .kernels import KernelSpec
from .lacunary import (
    DirectionSet,
    LacunaryDecomposition,
    RankInterval,
    binary_decomposition,
    build_decomposition,
)
from .sectors import (
    max_overlap_with_argmax,
    overlap_count,
    support_containment_check,
)

__all__ = ["main", "run"]


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _atomic_write(path: str, data: bytes) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-dirmax-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_text(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        _atomic_write(path, text.encode())


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _parse_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise InvalidArgument(f"expected two comma-separated numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


def _load_grid(path: str, spacing: Optional[float]) -> Grid2D:
    if path.endswith(".csv"):
        if spacing is None:
            raise InvalidArgument("--spacing is required for CSV grids")
        return Grid2D.load_csv(path, spacing)
    return Grid2D.load(path)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_decompose(args) -> int:
    data = _load_json(args.input)
    domain = _parse_pair(args.domain) if args.domain else None
    if args.mode == "binary":
        if not isinstance(data, list):
            raise InvalidArgument("binary mode expects a JSON array of slopes")
        decomp = binary_decomposition([float(v) for v in data], gap=args.gap)
    else:
        chain = data["chain"] if isinstance(data, dict) else data
        decomp = build_decomposition(chain, args.gap, domain)
    _write_text(args.out, json.dumps(decomp.to_json(), sort_keys=True, indent=1) + "\n")
    return 0


def _cmd_kernel_table(args) -> int:
    kind = {
        "fejer": "fejer",
        "vp": "vallee_poussin",
        "vp-hat": "vp_hat",
        "bump": "bump",
        "zeta": "majorant_zeta",
    }[args.kind]
    spec = KernelSpec(kind, r=args.r, h=args.h)
    a, b = _parse_pair(args.range)
    if args.samples < 1:
        raise InvalidArgument("--samples must be >= 1")
    # open-interval uniform sampling: n nodes strictly between the endpoints
    xs = a + (b - a) * (np.arange(1, args.samples + 1) / (args.samples + 1))
    rows = "".join(f"{x:.12g},{spec(float(x)):.12g}\n" for x in xs)
    _write_text(args.out, "x,value\n" + rows)
    return 0


def _operator_config(args, spacing: float) -> OperatorConfig:
    if args.radii:
        radii = tuple(float(v) for v in args.radii.split(","))
    else:
        radii = tuple(0.25 * 2.0**k for k in range(4))
    return OperatorConfig(
        radii,
        samples_per_unit=args.spu or max(1, round(1.0 / spacing)),
        aspect_levels=args.aspects,
        offset_steps=args.offsets,
    )


def _cmd_apply(args) -> int:
    f = _load_grid(args.grid, args.spacing)
    if args.op == "gamma":
        if args.alpha is None or args.r is None:
            raise InvalidArgument("gamma needs --alpha and --r")
        out = gamma_op(f, args.alpha, args.r, args.h)
    else:
        cfg = _operator_config(args, f.spacing)
        if args.op == "strong":
            out = strong_maximal(f, cfg)
        else:
            if not args.directions:
                raise InvalidArgument(f"{args.op} needs --directions")
            omega = DirectionSet.from_json(_load_json(args.directions))
            out = {"m0": m0, "m1": m1, "m2": m2}[args.op](f, omega, cfg)
    buf = tempfile.NamedTemporaryFile(delete=False, dir=os.path.dirname(os.path.abspath(args.out)) or ".")
    buf.close()
    try:
        out.save(buf.name)
        os.replace(buf.name, args.out)
    except BaseException:
        if os.path.exists(buf.name):
            os.unlink(buf.name)
        raise
    return 0


def _cmd_overlap(args) -> int:
    decomp = LacunaryDecomposition.load(args.decomp)
    require = not args.skip_poleless
    if args.samples:
        rng = np.random.Generator(np.random.Philox(key=(args.seed, 0)))
        n_low = n_top = 0
        arg_low = arg_top = None
        for _ in range(args.samples):
            x1 = 10.0 ** rng.uniform(-2, 6)
            sigma = rng.uniform(-0.5, 1.5)
            p = (x1, sigma * x1 + rng.uniform(-6, 6))
            nl, nt = overlap_count(decomp, p, require_poles=require)
            if nl > n_low:
                n_low, arg_low = nl, p
            if nt > n_top:
                n_top, arg_top = nt, p
        payload = {
            "method": "sampled",
            "samples": args.samples,
            "n_low": n_low,
            "n_top": n_top,
            "argmax_low": arg_low,
            "argmax_top": arg_top,
        }
    else:
        nl, nt, al, at = max_overlap_with_argmax(decomp, require_poles=require)
        payload = {
            "method": "exact",
            "n_low": nl,
            "n_top": nt,
            "argmax_low": list(al),
            "argmax_top": list(at),
        }
    _write_text(args.out, json.dumps(payload, sort_keys=True, indent=1) + "\n")
    return 0


def _cmd_check_support(args) -> int:
    data = _load_json(args.chain)
    chain = [
        RankInterval(d["lo"], d["hi"], k + 1, d.get("pole"))
        for k, d in enumerate(data)
    ]
    rep = support_containment_check(chain, args.theta, args.R, samples=args.samples)
    payload = {
        "m": rep.m,
        "all_contained": rep.all_contained,
        "checks": [
            {
                "k": c.k,
                "band": [c.band.xi1_lo, c.band.xi1_hi],
                "strip_center": c.strip.center,
                "corner_margin": c.corner_margin,
                "lattice_margin": c.lattice_margin,
                "contained": c.contained,
            }
            for c in rep.checks
        ],
    }
    _write_text(args.out, json.dumps(payload, sort_keys=True, indent=1) + "\n")
    return 0 if rep.all_contained else 1


def _cmd_sweep(args) -> int:
    values = [int(v) for v in args.values.split(",")]
    ops = tuple(args.ops.split(","))
    family = tuple(args.family.split(","))
    if args.mode == "N":
        res = sweep_N(values, family, ops, size=args.size, seed=args.seed)
    else:
        res = sweep_mu(values, family_kinds=family, ops=ops, size=args.size, seed=args.seed)
    if args.format == "json":
        _write_text(args.out, json.dumps(res.to_json(), sort_keys=True, indent=1) + "\n")
    else:
        _write_text(args.out, res.to_csv())
    return 0


def _build_parser() -> _Parser:
    p = _Parser(prog="dirmax", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0, help="seed for all randomness (default 0)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker hint; results are identical regardless")
    sub = p.add_subparsers(dest="command")

    d = sub.add_parser("decompose", help="build a lacunary decomposition")
    d.add_argument("--input", required=True)
    d.add_argument("--mode", choices=("binary", "chain"), required=True)
    d.add_argument("--gap", type=float, default=0.5)
    d.add_argument("--domain", default=None, help="a,b")
    d.add_argument("--out", default=None)
    d.set_defaults(fn=_cmd_decompose)

    k = sub.add_parser("kernel-table", help="tabulate a kernel as CSV")
    k.add_argument("--kind", choices=("fejer", "vp", "vp-hat", "bump", "zeta"), required=True)
    k.add_argument("--r", type=float, default=1.0)
    k.add_argument("--h", type=float, default=1.0)
    k.add_argument("--range", required=True, help="a,b")
    k.add_argument("--samples", type=int, required=True)
    k.add_argument("--out", default=None)
    k.set_defaults(fn=_cmd_kernel_table)

    a = sub.add_parser("apply", help="apply an operator to a grid file")
    a.add_argument("--op", choices=("m0", "m1", "m2", "strong", "gamma"), required=True)
    a.add_argument("--grid", required=True)
    a.add_argument("--directions", default=None)
    a.add_argument("--spacing", type=float, default=None, help="grid spacing for CSV input")
    a.add_argument("--r", type=float, default=None)
    a.add_argument("--h", type=float, default=1.0)
    a.add_argument("--alpha", type=float, default=None)
    a.add_argument("--radii", default=None, help="comma-separated dyadic ladder")
    a.add_argument("--spu", type=int, default=None)
    a.add_argument("--aspects", type=int, default=3)
    a.add_argument("--offsets", type=int, default=0)
    a.add_argument("--out", required=True)
    a.set_defaults(fn=_cmd_apply)

    o = sub.add_parser("overlap", help="strip overlap maxima")
    o.add_argument("--decomp", required=True)
    g = o.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", default=True)
    g.add_argument("--samples", type=int, default=0)
    o.add_argument("--skip-poleless", action="store_true")
    o.add_argument("--out", default=None)
    o.set_defaults(fn=_cmd_overlap)

    c = sub.add_parser("check-support", help="band-in-strip containment")
    c.add_argument("--chain", required=True)
    c.add_argument("--theta", type=float, required=True)
    c.add_argument("--R", type=float, required=True)
    c.add_argument("--samples", type=int, default=512)
    c.add_argument("--out", default=None)
    c.set_defaults(fn=_cmd_check_support)

    s = sub.add_parser("sweep", help="operator-norm ratio sweeps")
    s.add_argument("--mode", choices=("N", "mu"), required=True)
    s.add_argument("--values", required=True, help="e.g. 4,16,64,256")
    s.add_argument("--ops", default="m0,m1,m2")
    s.add_argument("--family", default="disk,needles,random")
    s.add_argument("--size", type=int, default=512)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out", default=None)
    s.set_defaults(fn=_cmd_sweep)
    return p


def run(argv: Sequence[str]) -> int:
    parser = _build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    # join pair-valued flags with their values so "--range -3,3" parses
    argv = list(argv)
    for flag in ("--range", "--domain"):
        for i in range(len(argv) - 1):
            if argv[i] == flag and argv[i + 1].startswith("-"):
                argv[i : i + 2] = [f"{flag}={argv[i + 1]}"]
                break
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.fn(args)
    except DirmaxError as exc:
        print(f"dirmax: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"dirmax: i/o error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
