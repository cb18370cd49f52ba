"""Command-line front end.

Every command writes delimited records (CSV with a header by default,
``--format json`` for a JSON array of objects) to stdout or ``--output``.
Floats are written with ``repr`` so they round-trip exactly.

Exit status: 0 success, 2 usage error, 3 computation error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

from . import analytic
from .core import ModelParams, ParameterError
from .oracle import oracle_report
from .stochastic import GuardExceededError, OnDurationLaw, law_for, monte_carlo

EXIT_USAGE = 2
EXIT_COMPUTE = 3
EXIT_IO = 4

SWEEP_QUANTITIES = ("F0", "F", "Flower", "Fupper", "ratios")
_QUANTITY_COLUMNS = {
    "F0": ["F0"],
    "F": ["F"],
    "Flower": ["F_lower"],
    "Fupper": ["F_upper"],
    "ratios": ["ratio_F0_F", "ratio_Fupper_F", "ratio_Flower_F"],
}
SWEEP_COLUMNS = ["N", "lambda", "p", "F0", "F", "F_lower", "F_upper",
                 "ratio_F0_F", "ratio_Fupper_F", "ratio_Flower_F"]


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class SweepSpec:
    n_values: Sequence[int]
    p_values: Sequence[float]
    lam: float = 1.0
    quantities: Sequence[str] = SWEEP_QUANTITIES
    output: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        if not self.n_values or not self.p_values:
            raise UsageError("sweep grids must be non-empty")
        if min(self.n_values) < 2:
            raise UsageError("--n-from: every N in a sweep must be >= 2")
        if any(not 0.0 <= p <= 1.0 for p in self.p_values):
            raise UsageError("--p-list: every p must lie in [0, 1]")
        unknown = set(self.quantities) - set(SWEEP_QUANTITIES)
        if unknown:
            raise UsageError(f"--quantities: unknown {sorted(unknown)}")

    @property
    def columns(self) -> List[str]:
        wanted = {col for q in self.quantities for col in _QUANTITY_COLUMNS[q]}
        return ["N", "lambda", "p"] + [c for c in SWEEP_COLUMNS[3:] if c in wanted]


def _ratio(num: float, den: float) -> float:
    return num / den if den != 0 else math.nan


def sweep_rows(spec: SweepSpec) -> List[dict]:
    rows = []
    for n in sorted(spec.n_values):
        for p in sorted(spec.p_values):
            params = ModelParams.from_p(n, spec.lam, p)
            f0 = analytic.sparse_flooding_time(params)
            f = analytic.exact_flooding_time(params)[0]
            lo = analytic.lower_bound_flooding_time(params)
            up = analytic.upper_bound_flooding_time(params)[0]
            full = {
                "N": n, "lambda": spec.lam, "p": p, "F0": f0, "F": f, "F_lower": lo, "F_upper": up,
                "ratio_F0_F": _ratio(f0, f), "ratio_Fupper_F": _ratio(up, f),
                "ratio_Flower_F": _ratio(lo, f),
            }
            rows.append({k: full[k] for k in spec.columns})
    return rows


def scaling_rows(b: float, n_values: Iterable[int], lam: float, p_cap: float) -> List[dict]:
    if not b > 0:
        raise UsageError("--b must be positive")
    if not 0.0 < p_cap < 1.0:
        raise UsageError("--p-cap must lie in (0, 1)")
    rows = []
    for n in n_values:
        if n < 2:
            raise UsageError("--n-from: scaling needs N >= 2")
        p = min(p_cap, math.log(n) / (b * n))
        params = ModelParams.from_p(n, lam, p)
        f = analytic.exact_flooding_time(params)[0]
        rows.append({
            "N": n, "p": p, "F": f, "normalized": n * f / math.log(n),
            "F0": analytic.sparse_flooding_time(params),
            "normalized_bound": 2.0 * (1.0 + math.log(n - 1)) / (lam * math.log(n)),
        })
    return rows


# -- serialisation ----------------------------------------------------------

def _cell(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render(rows: List[dict], fmt: str, columns: Optional[List[str]] = None) -> str:
    columns = columns or (list(rows[0]) if rows else [])
    if fmt == "json":
        data = [{c: _json_value(row[c]) for c in columns} for row in rows]
        return json.dumps(data, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


def emit(rows: List[dict], args, columns: Optional[List[str]] = None) -> None:
    text = render(rows, args.format, columns)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- argument handling ------------------------------------------------------

def _params(args, require_p: bool = True) -> ModelParams:
    if args.nodes is None:
        raise UsageError("--nodes is required")
    if args.nodes < 1:
        raise UsageError("--nodes must be >= 1")
    if not args.lam > 0:
        raise UsageError("--lambda must be positive")
    if args.p is not None:
        if not 0.0 <= args.p <= 1.0:
            raise UsageError("--p must lie in [0, 1]")
        return ModelParams.from_p(args.nodes, args.lam, args.p)
    if args.mu_inv is not None:
        if not args.mu_inv >= 0:
            raise UsageError("--mu-inv must be nonnegative")
        return ModelParams.from_contact(args.nodes, args.lam, args.mu_inv)
    if require_p:
        raise UsageError("one of --p or --mu-inv is required")
    return ModelParams.from_p(args.nodes, args.lam, 0.0)


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _n_range(args) -> List[int]:
    if args.n_step < 1:
        raise UsageError("--n-step must be >= 1")
    if args.n_to < args.n_from:
        raise UsageError("--n-to must be >= --n-from")
    return list(range(args.n_from, args.n_to + 1, args.n_step))


def cmd_exact(args) -> None:
    params = _params(args)
    f, _, ops = analytic.exact_flooding_time(params)
    emit([{"N": params.n_nodes, "lambda": params.lam, "p": params.p, "F": f,
           "multiplications": ops.multiplications, "additions": ops.additions}], args)


def cmd_bounds(args) -> None:
    params = _params(args)
    if params.n_nodes < 2:
        raise UsageError("--nodes must be >= 2 for bounds")
    emit([{"N": params.n_nodes, "lambda": params.lam, "p": params.p,
           "F_lower": analytic.lower_bound_flooding_time(params),
           "F_upper": analytic.upper_bound_flooding_time(params)[0],
           "F0": analytic.sparse_flooding_time(params)}], args)


def cmd_sparse(args) -> None:
    params = _params(args, require_p=False)
    low, high = analytic.sparse_envelope(params) if params.n_nodes >= 2 else (math.nan, math.nan)
    emit([{"N": params.n_nodes, "lambda": params.lam, "F0": analytic.sparse_flooding_time(params),
           "F0_env_low": low, "F0_env_high": high}], args)


def cmd_sweep(args) -> None:
    if args.p_list is None:
        raise UsageError("--p-list is required")
    quantities = tuple(args.quantities.split(",")) if args.quantities else SWEEP_QUANTITIES
    spec = SweepSpec(_n_range(args), args.p_list, args.lam, quantities, args.output, args.format)
    emit(sweep_rows(spec), args, spec.columns)


def cmd_simulate(args) -> None:
    params = _params(args)
    if args.reps < 2:
        raise UsageError("--reps must be >= 2")
    if args.seed < 0:
        raise UsageError("--seed must be nonnegative")
    law = None
    on_dist = ""
    if args.kind == "physical":
        if params.p == 1.0:
            law = OnDurationLaw.exponential(1.0)
        else:
            law = law_for(params, args.on_dist)
        on_dist = law.kind
    est = monte_carlo(args.kind, params, law, args.reps, args.seed, args.workers)
    f = analytic.exact_flooding_time(params)[0]
    if est.stderr > 0:
        z = (est.mean - f) / est.stderr
    else:
        z = 0.0 if est.mean == f else math.copysign(math.inf, est.mean - f)
    emit([{"kind": args.kind, "N": params.n_nodes, "lambda": params.lam, "p": params.p,
           "on_dist": on_dist, "mean": est.mean, "stderr": est.stderr, "ci_low": est.ci_low,
           "ci_high": est.ci_high, "replications": est.replications, "seed": est.seed,
           "F": f, "z": z}], args)


def cmd_crossover(args) -> None:
    if args.p is None:
        raise UsageError("--p is required")
    if not 0.0 <= args.p <= 1.0:
        raise UsageError("--p must lie in [0, 1]")
    if args.n_max < 3:
        raise UsageError("--n-max must be >= 3")
    if not args.lam > 0:
        raise UsageError("--lambda must be positive")
    n_hat = analytic.crossover_n(args.lam, args.p, args.n_max)
    emit([{"lambda": args.lam, "p": args.p, "n_max": args.n_max, "n_hat": n_hat}], args)


def cmd_scaling(args) -> None:
    if not args.lam > 0:
        raise UsageError("--lambda must be positive")
    emit(scaling_rows(args.b, _n_range(args), args.lam, args.p_cap), args)


def cmd_oracle(args) -> None:
    rows = []
    for n in args.nodes:
        if not 2 <= n <= 4:
            raise UsageError("--nodes: the chain oracle supports 2 <= N <= 4")
        for lam in args.lam:
            for mu_inv in args.mu_inv:
                if not (lam > 0 and mu_inv > 0):
                    raise UsageError("--lambda and --mu-inv must be positive")
                rows.append(oracle_report(n, lam, 1.0 / mu_inv).as_row())
    emit(rows, args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floodtime",
        description="Expected flooding time in intermittently connected mobile networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    io_opts = argparse.ArgumentParser(add_help=False)
    io_opts.add_argument("--format", choices=("csv", "json"), default="csv")
    io_opts.add_argument("--output", metavar="PATH")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--nodes", type=int)
    model.add_argument("--lambda", dest="lam", type=float, default=1.0)
    contact = model.add_mutually_exclusive_group()
    contact.add_argument("--mu-inv", type=float, help="mean contact duration")
    contact.add_argument("--p", type=float, help="stationary ON probability")

    n_grid = argparse.ArgumentParser(add_help=False)
    n_grid.add_argument("--n-from", type=int, default=10)
    n_grid.add_argument("--n-to", type=int, default=50)
    n_grid.add_argument("--n-step", type=int, default=1)

    p = sub.add_parser("exact", parents=[model, io_opts], help="exact flooding time")
    p.set_defaults(func=cmd_exact)
    p = sub.add_parser("bounds", parents=[model, io_opts], help="lower and upper bounds")
    p.set_defaults(func=cmd_bounds)
    p = sub.add_parser("sparse", parents=[model, io_opts], help="point-like contact regime")
    p.set_defaults(func=cmd_sparse)

    p = sub.add_parser("sweep", parents=[n_grid, io_opts], help="grid over N and p")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--p-list", type=_float_list)
    p.add_argument("--quantities", help="comma list from F0,F,Flower,Fupper,ratios")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", parents=[model, io_opts], help="Monte Carlo estimate")
    p.add_argument("--kind", choices=("generative", "physical"), default="generative")
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--on-dist", choices=("exp", "det"), default="exp")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("crossover", parents=[io_opts], help="size beyond which F_upper < F0")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--p", type=float)
    p.add_argument("--n-max", type=int, default=100)
    p.set_defaults(func=cmd_crossover)

    p = sub.add_parser("scaling", parents=[n_grid, io_opts], help="p(N) ~ ln N / (b N) experiment")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--p-cap", type=float, default=0.9)
    p.set_defaults(func=cmd_scaling, n_to=300)

    p = sub.add_parser("oracle", parents=[io_opts], help="exact Markov-chain comparison, N <= 4")
    p.add_argument("--nodes", type=int, nargs="+", default=[3])
    p.add_argument("--lambda", dest="lam", type=float, nargs="+", default=[1.0])
    p.add_argument("--mu-inv", type=float, nargs="+", default=[1.0])
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with EXIT_USAGE
    except ParameterError as exc:
        print(f"floodtime: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GuardExceededError as exc:
        print(f"floodtime: replication {exc.replication}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"floodtime: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, RuntimeError) as exc:
        print(f"floodtime: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return 0


if __name__ == "__main__":
    sys.exit(main())
