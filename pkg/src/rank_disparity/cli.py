"""Command-line front end.

Every subcommand parses its flags, calls library operations and serializes
the results; no index arithmetic happens here.

Exit codes: 0 success, 2 input or flag error, 3 numerical domain error.
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
import warnings

from . import __version__, core, data_io, inference, resampling
from .core import ALPHA_FREE_KINDS, IndexKind, IndexParams, Reference
from .errors import DomainError, InvalidInput

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN = 0, 2, 3
SEED_ENV = "RANK_DISPARITY_SEED"

INDEX_NAMES = {
    "ri": IndexKind.RI,
    "ge": IndexKind.GE,
    "ge_std": IndexKind.GE_STANDARDIZED,
    "atkinson": IndexKind.ATKINSON,
    "atkinson_ratio": IndexKind.ATKINSON_RATIO,
    "concentration": IndexKind.CONCENTRATION_EXTENDED,
    "concentration_classical": IndexKind.CONCENTRATION_CLASSICAL,
    "concentration_2p": IndexKind.CONCENTRATION_TWO_PARAM,
    "achievement": IndexKind.ACHIEVEMENT_MY,
    "achievement_wagstaff": IndexKind.ACHIEVEMENT_WAGSTAFF,
    "slope": IndexKind.SLOPE_REGRESSION,
}
ACHIEVEMENT_KINDS = {IndexKind.ACHIEVEMENT_MY, IndexKind.ACHIEVEMENT_WAGSTAFF, IndexKind.SLOPE_REGRESSION}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# Flag parsing
# --------------------------------------------------------------------------


def _number(text: str) -> float:
    text = text.strip().lower()
    if text in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None
    if math.isnan(value):
        raise UsageError("nan is not a valid parameter")
    return value


def parse_grid(text: str) -> list[float]:
    """Comma-separated values and ``start:stop:step`` ranges (stop inclusive)."""
    out = []
    for part in text.split(","):
        if ":" in part:
            bits = part.split(":")
            if len(bits) != 3:
                raise UsageError(f"ranges are start:stop:step, got {part!r}")
            start, stop, step = (_number(b) for b in bits)
            if not step > 0 or math.isinf(stop) or math.isinf(start):
                raise UsageError(f"invalid range {part!r}")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            out.extend(float(f"{start + i * step:.12g}") for i in range(max(n, 0)))
        elif part.strip():
            out.append(_number(part))
    if not out:
        raise UsageError("empty parameter list")
    return out


def parse_kinds(text: str) -> list[IndexKind]:
    kinds = []
    for name in text.split(","):
        name = name.strip().lower()
        if name not in INDEX_NAMES:
            raise UsageError(f"unknown index {name!r}; choose from {', '.join(INDEX_NAMES)}")
        kinds.append(INDEX_NAMES[name])
    return kinds


def param_grid(args) -> list[IndexParams]:
    alphas, nus = parse_grid(args.alpha), parse_grid(args.nu)
    reference = Reference(args.reference)
    try:
        return [IndexParams(a, n, reference, args.target) for n, a in itertools.product(nus, alphas)]
    except InvalidInput as exc:
        raise UsageError(str(exc)) from None


def resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def load_tables(args) -> list[data_io.GroupedTable]:
    tables = [data_io.load_fixture(name) for name in args.fixture or []]
    for path in args.data or []:
        name = os.path.splitext(os.path.basename(path))[0]
        try:
            tables.append(data_io.parse_grouped_csv(path, name=name))
        except OSError as exc:
            raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None
    return tables


def load_microdata(args) -> list[tuple[str, inference.SurveyMicrodata]]:
    out = []
    for path in args.microdata or []:
        try:
            out.append((os.path.splitext(os.path.basename(path))[0], data_io.parse_microdata_csv(path)))
        except OSError as exc:
            raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None
    return out


def _write(args, text: str):
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def point_rows(tables, kinds, grid) -> list[dict]:
    rows = []
    for table in tables:
        seen = set()
        for kind in kinds:
            for params in grid:
                key = (kind, params.nu) if kind in ALPHA_FREE_KINDS else (kind, params.nu, params.alpha)
                if key in seen:
                    continue
                seen.add(key)
                rows.append(data_io.result_row(core.evaluate(kind, table.dist, params), table.name))
    return rows


def _check_units(tables, kinds):
    units = {t.dist.units for t in tables}
    if len(units) > 1 and any(k in ACHIEVEMENT_KINDS for k in kinds):
        raise UsageError(f"achievement-scale results across datasets with different units: {sorted(units)}")


def cmd_compute(args) -> str:
    tables = load_tables(args)
    if not tables:
        raise UsageError("compute needs at least one --data or --fixture")
    kinds = parse_kinds(args.index)
    _check_units(tables, kinds)
    return _emit(point_rows(tables, kinds, param_grid(args)), args.format)


def cmd_sweep(args) -> str:
    return cmd_compute(args)


def _emit(rows, fmt) -> str:
    # a single result is written as one object rather than a list of one
    return data_io.emit_results(rows[0] if len(rows) == 1 else rows, fmt)


def _pairs(items):
    return list(itertools.combinations(items, 2))


def _infer_grouped(args, tables, grid, seed) -> list[dict]:
    rows = []
    if args.null_test:
        cfg = resampling.NullSimConfig(
            args.B, seed, count_recovery="age_strata" if args.age_strata else "se_inversion"
        )
        for table, params in itertools.product(tables, grid):
            if args.age_strata and table.registry is None:
                raise UsageError(f"{table.name}: --age-strata needs age_<k>_rate/_n columns")
            if not args.age_strata and table.std_errors is None:
                raise UsageError(f"{table.name}: the null test needs an 'se' column (or --age-strata)")
            res = resampling.poisson_null_test(
                table.dist, params, cfg, std_errors=table.std_errors, registry=table.registry
            )
            rows.append(data_io.null_test_row(res, table.name))
        return rows

    estimates = {}
    for table in tables:
        variances = table.variances
        if variances is None:
            raise UsageError(f"{table.name}: delta-method inference needs an 'se' column or age strata")
        for params in grid:
            est = inference.delta_method_variance(table.dist, variances, params, args.level)
            estimates[(table.name, params)] = est
            if not args.compare:
                rows.append(data_io.result_row(est, table.name))
    if args.compare:
        for (a, b), params in itertools.product(_pairs(tables), grid):
            cmp = inference.compare_estimates(estimates[(a.name, params)], estimates[(b.name, params)], args.level)
            rows.append(data_io.comparison_row(cmp, params, "delta_method", f"{a.name} - {b.name}"))
    return rows


def _infer_microdata(args, samples, grid, seed) -> list[dict]:
    rows = []
    method = args.method or "linearization"
    if method not in ("linearization", "bootstrap"):
        raise UsageError(f"--method {method} does not apply to microdata")
    cfg = resampling.BootstrapConfig(args.B, seed, args.interval, args.level, args.workers)
    if args.compare:
        for ((na, a), (nb, b)), params in itertools.product(_pairs(samples), grid):
            label = f"{na} - {nb}"
            if method == "bootstrap":
                res = resampling.bootstrap_difference(a, b, params, cfg)
            else:
                res = inference.compare_estimates(
                    inference.linearized_variance(a, params, args.level),
                    inference.linearized_variance(b, params, args.level),
                    args.level,
                )
            rows.append(data_io.comparison_row(res, params, method, label))
        return rows
    for (name, data), params in itertools.product(samples, grid):
        if method == "bootstrap":
            est, _ = resampling.rescaled_bootstrap(data, params, cfg)
        else:
            est = inference.linearized_variance(data, params, args.level)
        rows.append(data_io.result_row(est, name))
    return rows


def cmd_infer(args) -> str:
    grid = param_grid(args)
    seed = resolve_seed(args)
    tables, samples = load_tables(args), load_microdata(args)
    if bool(tables) == bool(samples):
        raise UsageError("infer needs either grouped input (--data/--fixture) or --microdata, not both")
    if args.compare and len(tables) + len(samples) < 2:
        raise UsageError("--compare needs at least two inputs")
    if samples:
        if args.null_test:
            raise UsageError("--null-test needs grouped registry rates, not microdata")
        rows = _infer_microdata(args, samples, grid, seed)
    else:
        if args.method not in (None, "delta"):
            raise UsageError(f"--method {args.method} needs --microdata; grouped input supports the delta method")
        if args.null_test and args.compare:
            raise UsageError("--null-test and --compare are separate analyses")
        rows = _infer_grouped(args, tables, grid, seed)
    return _emit(rows, args.format)


def cmd_synth(args) -> str:
    tables = load_tables(args)
    if len(tables) != 1:
        raise UsageError("synth needs exactly one margin table (--data or --fixture)")
    design = data_io.DesignSpec(args.strata, args.clusters, args.obs, args.cluster_sd)
    table = tables[0]
    data = data_io.synthesize_microdata(table.dist, table.std_errors, design, resolve_seed(args))
    return data_io.write_microdata_csv(data)


def cmd_fixtures(args) -> str:
    if args.verify:
        status = data_io.verify_fixtures()
        bad = [n for n, ok in status.items() if not ok]
        if bad:
            raise InvalidInput(f"fixture checksum mismatch: {', '.join(bad)}")
        return "".join(f"{n}\tok\n" for n in status)
    if args.name:
        return data_io.fixture_text(args.name)
    return "".join(f"{n}\n" for n in data_io.fixture_names())


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def _inputs(p, grouped=True):
    if grouped:
        p.add_argument("--data", action="append", metavar="CSV", help="grouped table (repeatable)")
        p.add_argument(
            "--fixture", action="append", metavar="NAME", help="embedded table, e.g. pop1 or seer_2010 (repeatable)"
        )


def _params(p, alpha="1", nu="1"):
    p.add_argument("--alpha", default=alpha, help="comma list or start:stop:step; 'inf' allowed (default %(default)s)")
    p.add_argument("--nu", default=nu, help="comma list or start:stop:step; 'inf' allowed (default %(default)s)")
    p.add_argument("--reference", default="population_mean", choices=[r.value for r in Reference])
    p.add_argument("--target", type=float, help="target rate for --reference fixed_target")


def _output(p):
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    p.add_argument("--output", metavar="PATH", help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rank-disparity", description="Rank-dependent health disparity indices.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("compute", help="point values of one or more indices")
    _inputs(p)
    _params(p)
    p.add_argument("--index", default="ri", help=f"comma list of: {', '.join(INDEX_NAMES)}")
    _output(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("sweep", help="plot-ready series over an (alpha, nu) grid")
    _inputs(p)
    _params(p, alpha="0:8:0.25", nu="1,2,3")
    p.add_argument("--index", default="ri,ge_std,concentration_2p")
    _output(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("infer", help="standard errors, intervals, null tests and comparisons")
    _inputs(p)
    p.add_argument("--microdata", action="append", metavar="CSV", help="survey microdata (repeatable)")
    _params(p)
    p.add_argument("--method", choices=("linearization", "bootstrap", "delta"))
    p.add_argument("--null-test", action="store_true", help="Poisson simulation under independence")
    p.add_argument("--age-strata", action="store_true", help="null counts from age-specific rates")
    p.add_argument("--compare", action="store_true", help="difference tests between every pair of inputs")
    p.add_argument("--B", type=int, default=1000, help="replicates (default %(default)s)")
    p.add_argument("--seed", type=int, help=f"master seed (fallback: ${SEED_ENV}, then 0)")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--interval", default="percentile", choices=("percentile", "normal"))
    p.add_argument("--workers", type=int, default=1)
    _output(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("synth", help="synthetic survey microdata matching published margins")
    _inputs(p)
    p.add_argument("--strata", type=int, default=15)
    p.add_argument("--clusters", type=int, default=2)
    p.add_argument("--obs", type=int, default=115, help="observations per cluster")
    p.add_argument("--cluster-sd", type=float, help="logit-scale cluster SD (default: calibrated from SEs)")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", metavar="PATH")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fixtures", help="list, dump or verify the embedded tables")
    p.add_argument("name", nargs="?", help="dump this table as CSV")
    p.add_argument("--verify", action="store_true", help="check recorded checksums")
    p.add_argument("--output", metavar="PATH")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            text = args.func(args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        _write(args, text)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
