"""Reading and writing grouped tables, survey microdata and results.

Grouped CSV layout (UTF-8, comma separated, dot decimals)::

    # units=percent
    group,order,share,mean,se
    Poor,1,0.05,30,

Optional leading ``# key=value`` lines carry metadata (``units``,
``rate_scale``).  Exactly one of ``share`` / ``count`` is present.  Age
strata are added as ``age_<k>_rate``, ``age_<k>_n`` and ``age_<k>_weight``
column triples.

Microdata CSV columns: ``stratum,psu,weight,y,group``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import special

from . import __version__
from .core import GroupedDistribution, IndexKind, IndexValue
from .errors import InvalidInput, ParseError
from .inference import IndexEstimate, RegistryRates, SurveyMicrodata

SHARE_WARN_TOL = 1e-6
SIG_DIGITS = 10

FIXTURES = (
    "pop1",
    "pop2",
    "pop3",
    "nhanes_2001_2004",
    "nhanes_2005_2008",
    "nhanes_2009_2010",
    "seer_2006",
    "seer_2007",
    "seer_2008",
    "seer_2009",
    "seer_2010",
)


@dataclass(frozen=True, eq=False)
class GroupedTable:
    """A parsed grouped table: the distribution plus optional standard errors and age strata."""

    dist: GroupedDistribution
    std_errors: np.ndarray | None = None
    registry: RegistryRates | None = None
    name: str = ""
    metadata: dict = field(default_factory=dict)

    @property
    def variances(self) -> np.ndarray | None:
        if self.registry is not None:
            from .inference import registry_moments

            return registry_moments(self.registry)[1]
        return None if self.std_errors is None else self.std_errors**2


def _open_text(source):
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8")
    return source


def _read_rows(source):
    """Metadata dict, header list and data rows, with 1-based file line numbers."""
    fh = _open_text(source)
    try:
        text = fh.read()
    finally:
        if fh is not source:
            fh.close()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    meta, lines = {}, []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            m = re.match(r"#\s*([\w-]+)\s*=\s*(.*)$", stripped)
            if m:
                meta[m.group(1)] = m.group(2).strip()
            continue
        lines.append((lineno, line))
    if not lines:
        raise ParseError("file has no header row")
    reader = csv.reader([ln for _, ln in lines])
    rows = [[c.strip() for c in r] for r in reader]
    header = [h.lower() for h in rows[0]]
    body = [(lines[i][0], r) for i, r in enumerate(rows[1:], 1)]
    return meta, header, body


def _number(text, row, column, allow_empty=False):
    if text == "":
        if allow_empty:
            return None
        raise ParseError(f"missing value in column {column!r}", row)
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"not a number in column {column!r}: {text!r}", row) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value in column {column!r}", row)
    if value < 0:
        raise ParseError(f"negative value in column {column!r}: {text}", row)
    return value


def parse_grouped_csv(source, name: str = "", age_weights=None, rate_scale=None) -> GroupedTable:
    """Parse a grouped rate table into a :class:`GroupedTable`.

    Rows are sorted by ``order`` (lowest SES first).  Shares that do not sum
    to one (display rounding) are renormalized with a warning.
    """
    meta, header, body = _read_rows(source)
    col = {h: i for i, h in enumerate(header)}
    for req in ("group", "order", "mean"):
        if req not in col:
            raise ParseError(f"missing required column {req!r}", 1)
    has_share, has_count = "share" in col, "count" in col
    if has_share == has_count:
        raise ParseError("exactly one of the columns 'share' or 'count' is required", 1)
    size_col = "share" if has_share else "count"
    if not body:
        raise ParseError("no data rows")

    age_keys = sorted(
        {int(m.group(1)) for h in header if (m := re.fullmatch(r"age_(\d+)_rate", h))}
    )
    for k in age_keys:
        if f"age_{k}_n" not in col:
            raise ParseError(f"column age_{k}_rate has no matching age_{k}_n", 1)

    records = []
    orders = {}
    for lineno, r in body:
        if len(r) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(r)}", lineno)
        order = _number(r[col["order"]], lineno, "order")
        if order in orders:
            raise ParseError(f"duplicate order key {r[col['order']]} (also row {orders[order]})", lineno)
        orders[order] = lineno
        size = _number(r[col[size_col]], lineno, size_col)
        if size == 0:
            raise ParseError(f"{size_col} must be positive", lineno)
        mean = _number(r[col["mean"]], lineno, "mean")
        se = _number(r[col["se"]], lineno, "se", allow_empty=True) if "se" in col else None
        ages = [
            (
                _number(r[col[f"age_{k}_rate"]], lineno, f"age_{k}_rate"),
                _number(r[col[f"age_{k}_n"]], lineno, f"age_{k}_n"),
                _number(r[col[f"age_{k}_weight"]], lineno, f"age_{k}_weight", allow_empty=True)
                if f"age_{k}_weight" in col
                else None,
            )
            for k in age_keys
        ]
        records.append((order, r[col["group"]], size, mean, se, ages, lineno))
    records.sort(key=lambda t: t[0])

    sizes = np.array([t[2] for t in records])
    labels = [t[1] for t in records]
    means = np.array([t[3] for t in records])
    units = meta.get("units", "")
    if has_count:
        if np.any(sizes != np.round(sizes)):
            raise ParseError("counts must be whole numbers")
        counts = sizes.astype(int)
        shares = sizes / sizes.sum()
    else:
        counts = None
        total = math.fsum(sizes.tolist())
        if abs(total - 1.0) > SHARE_WARN_TOL:
            warnings.warn(f"shares sum to {total:.6g}; renormalizing", stacklevel=2)
        shares = sizes / total
    try:
        dist = GroupedDistribution.from_arrays(shares, means, labels, counts, units)
    except InvalidInput as exc:
        raise ParseError(str(exc)) from None

    ses = [t[4] for t in records]
    std_errors = None
    if "se" in col and any(s is not None for s in ses):
        if any(s is None for s in ses):
            raise ParseError("column 'se' must be filled for every row or none")
        std_errors = np.array(ses)

    registry = None
    if age_keys:
        u = np.array([[a[0] for a in t[5]] for t in records])
        n = np.array([[a[1] for a in t[5]] for t in records])
        if age_weights is None:
            w = np.array([[a[2] for a in t[5]] for t in records], dtype=object)
            if np.any(w == None):  # noqa: E711
                raise ParseError("age-adjustment weights required (age_<k>_weight columns or age_weights)")
            w = w.astype(float)
            if np.any(np.abs(w - w[0]) > 1e-12):
                raise ParseError("age_<k>_weight must be identical on every row")
            age_weights = w[0]
        scale = rate_scale if rate_scale is not None else float(meta.get("rate_scale", 1.0))
        try:
            registry = RegistryRates(u, n, np.asarray(age_weights, dtype=float), scale)
        except InvalidInput as exc:
            raise ParseError(str(exc)) from None
    return GroupedTable(dist, std_errors, registry, name, meta)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{SIG_DIGITS}g}"
    return str(x)


def _exact(x) -> str:
    # shortest representation that parses back to the identical double
    return repr(float(x))


def write_grouped_csv(table: GroupedTable | GroupedDistribution, dest=None) -> str:
    """Serialize grouped data in the parse format.  Returns the CSV text.

    Numbers are written in their shortest exact form, so writing and
    re-parsing reproduces the data bit for bit.
    """
    if isinstance(table, GroupedDistribution):
        table = GroupedTable(table)
    dist = table.dist
    header = ["group", "order", "share", "mean"]
    if table.std_errors is not None:
        header.append("se")
    reg = table.registry
    if reg is not None:
        for k in range(reg.crude_rates.shape[1]):
            header += [f"age_{k + 1}_rate", f"age_{k + 1}_n", f"age_{k + 1}_weight"]
    buf = io.StringIO()
    if dist.units:
        buf.write(f"# units={dist.units}\n")
    if reg is not None and reg.rate_scale != 1.0:
        buf.write(f"# rate_scale={_exact(reg.rate_scale)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for j, g in enumerate(dist.groups):
        row = [g.label, j + 1, _exact(g.share), _exact(g.mean_outcome)]
        if table.std_errors is not None:
            row.append(_exact(table.std_errors[j]))
        if reg is not None:
            for k in range(reg.crude_rates.shape[1]):
                row += [
                    _exact(reg.crude_rates[j, k]),
                    _exact(reg.denominators[j, k]),
                    _exact(reg.age_weights[k]),
                ]
        w.writerow(row)
    return _finish(buf.getvalue(), dest)


def _finish(text, dest):
    if dest is None:
        return text
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)
    return text


# --------------------------------------------------------------------------
# Microdata
# --------------------------------------------------------------------------

MICRODATA_COLUMNS = ("stratum", "psu", "weight", "y", "group")


def parse_microdata_csv(source, n_groups: int | None = None) -> SurveyMicrodata:
    """Parse survey microdata.  Singleton-cluster strata only warn here."""
    _, header, body = _read_rows(source)
    col = {h: i for i, h in enumerate(header)}
    for req in MICRODATA_COLUMNS:
        if req not in col:
            raise ParseError(f"missing required column {req!r}", 1)
    if not body:
        raise ParseError("no data rows")
    strata, psus, weights, ys, groups = [], [], [], [], []
    for lineno, r in body:
        if len(r) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(r)}", lineno)
        weight = _number(r[col["weight"]], lineno, "weight")
        if weight == 0:
            raise ParseError("weight must be > 0", lineno)
        g = _number(r[col["group"]], lineno, "group")
        if g != int(g) or g < 1:
            raise ParseError(f"group must be a positive integer, got {r[col['group']]}", lineno)
        strata.append(r[col["stratum"]])
        psus.append(r[col["psu"]])
        weights.append(weight)
        ys.append(_number(r[col["y"]], lineno, "y"))
        groups.append(int(g))
    m = max(groups) if n_groups is None else n_groups
    data = SurveyMicrodata(
        np.array(strata), np.array(psus), np.array(weights), np.array(ys), np.array(groups), m
    )
    single = [s for s, cs in data.design.items() if len(cs) < 2]
    if single:
        warnings.warn(f"strata with a single cluster (variance estimation will fail): {single}", stacklevel=2)
    return data


def write_microdata_csv(data: SurveyMicrodata, dest=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MICRODATA_COLUMNS)
    for row in zip(data.stratum, data.cluster, data.weight, data.y, data.group):
        s, c, wt, y, g = row
        w.writerow([s, c, _exact(wt), _exact(y), int(g)])
    return _finish(buf.getvalue(), dest)


@dataclass(frozen=True)
class DesignSpec:
    """Layout of a synthetic stratified two-stage sample.

    ``cluster_sd`` is the SD of cluster effects on the logit of prevalence;
    ``None`` calibrates it from published standard errors when given, and
    falls back to 0.3.
    """

    n_strata: int = 15
    clusters_per_stratum: int = 2
    obs_per_cluster: int = 115
    cluster_sd: float | None = None
    weight_sd: float = 0.25

    def __post_init__(self):
        if self.n_strata < 1 or self.clusters_per_stratum < 2 or self.obs_per_cluster < 1:
            raise InvalidInput("a design needs >= 1 stratum, >= 2 clusters each and >= 1 observation per cluster")


def _prevalences(dist: GroupedDistribution) -> np.ndarray:
    prev = dist.means / 100.0 if dist.units == "percent" else dist.means
    if np.any(prev < 0) or np.any(prev > 1):
        raise InvalidInput("binary outcome margins must lie in [0, 1] (or [0, 100] percent)")
    return prev


def _largest_remainder(total: int, shares: np.ndarray) -> np.ndarray:
    raw = total * shares
    out = np.floor(raw).astype(int)
    short = total - out.sum()
    out[np.argsort(-(raw - out), kind="stable")[:short]] += 1
    return out


# Fixing the case count of every stratum-group cell removes most of the
# between-cluster variance a free binomial draw would have; the usual
# ``1 + (m - 1) * rho`` design-effect relation overstates the achieved design
# effect by roughly this factor (determined by simulation over seeds).
_FIXED_COUNT_DAMPING = 0.175


def _calibrated_cluster_sd(prev, std_errors, shares, design: DesignSpec) -> np.ndarray:
    """Per-group logit cluster SD reproducing the design effect implied by published SEs."""
    n_total = design.n_strata * design.clusters_per_stratum * design.obs_per_cluster
    n_g = np.maximum(n_total * shares, 1.0)
    se = np.asarray(std_errors, dtype=float)
    if np.any(se > 1) and np.all(prev <= 1):
        se = se / 100.0
    srs = prev * (1 - prev) / n_g
    deff = np.divide(se**2, srs, out=np.ones_like(srs), where=srs > 0)
    m_g = np.maximum(design.obs_per_cluster * shares, 2.0)
    rho = np.clip((deff - 1.0) / (m_g - 1.0) / _FIXED_COUNT_DAMPING, 0.0, 0.5)
    return np.sqrt(rho / (1.0 - rho) * math.pi**2 / 3.0)


def synthesize_microdata(
    margins: GroupedDistribution,
    std_errors=None,
    design: DesignSpec = DesignSpec(),
    seed: int = 0,
) -> SurveyMicrodata:
    """Generate stratified cluster microdata matching published group margins.

    Groups are allocated to every stratum in proportion to their shares and,
    within each stratum-group cell, exactly ``round(prevalence * n)`` cases
    are drawn without replacement with probability proportional to
    ``expit(logit(prevalence) + cluster effect)``.  Weighted shares and
    prevalences therefore match the margins up to rounding, while cluster
    effects create a design effect.
    """
    prev = _prevalences(margins)
    shares = margins.shares
    m = len(shares)
    if design.cluster_sd is not None:
        sd = np.full(m, float(design.cluster_sd))
    elif std_errors is not None:
        sd = _calibrated_cluster_sd(prev, std_errors, shares, design)
    else:
        sd = np.full(m, 0.3)
    rng = np.random.default_rng(seed)
    c, k = design.clusters_per_stratum, design.obs_per_cluster
    n_s = c * k
    weights = np.exp(design.weight_sd * rng.standard_normal(design.n_strata))
    alloc = _largest_remainder(n_s, shares)
    # Cumulative rounding in weighted space keeps every group's weighted
    # prevalence within half a weighted case of its margin.
    cases = np.zeros((design.n_strata, m), dtype=int)
    target = np.zeros(m)
    achieved = np.zeros(m)
    for s_ in range(design.n_strata):
        target += weights[s_] * prev * alloc
        cases[s_] = np.clip(np.round((target - achieved) / weights[s_]), 0, alloc).astype(int)
        achieved += weights[s_] * cases[s_]
    cols = {name: [] for name in MICRODATA_COLUMNS}
    logit = special.logit(np.clip(prev, 1e-12, 1 - 1e-12))
    for s_ in range(design.n_strata):
        effects = rng.standard_normal(c)
        group = np.repeat(np.arange(1, m + 1), alloc)
        cluster = rng.permutation(np.repeat(np.arange(c), k))
        y = np.zeros(n_s)
        for j in range(m):
            idx = np.flatnonzero(group == j + 1)
            if cases[s_, j] == 0:
                continue
            pi = special.expit(logit[j] + sd[j] * effects[cluster[idx]])
            chosen = rng.choice(idx, size=cases[s_, j], replace=False, p=pi / pi.sum())
            y[chosen] = 1.0
        cols["stratum"].append(np.full(n_s, s_ + 1))
        cols["psu"].append(cluster + 1)
        cols["weight"].append(np.full(n_s, weights[s_]))
        cols["y"].append(y)
        cols["group"].append(group)
    flat = {name: np.concatenate(v) for name, v in cols.items()}
    return SurveyMicrodata(
        flat["stratum"], flat["psu"], flat["weight"], flat["y"], flat["group"], m, margins.labels
    )


# --------------------------------------------------------------------------
# Fixtures
# --------------------------------------------------------------------------


def _data_dir():
    return resources.files("rank_disparity") / "data"


def fixture_names() -> tuple[str, ...]:
    return FIXTURES


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise InvalidInput(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    return (_data_dir() / f"{name}.csv").read_text(encoding="utf-8")


def load_fixture(name: str) -> GroupedTable:
    with warnings.catch_warnings():
        # published shares are display rounded
        warnings.simplefilter("ignore")
        return parse_grouped_csv(io.StringIO(fixture_text(name)), name=name)


def fixture_set() -> dict[str, GroupedTable]:
    return {name: load_fixture(name) for name in FIXTURES}


def recorded_checksums() -> dict[str, str]:
    return json.loads((_data_dir() / "checksums.json").read_text(encoding="utf-8"))


def verify_fixtures() -> dict[str, bool]:
    """Recompute SHA-256 of every fixture file against the recorded manifest."""
    recorded = recorded_checksums()
    out = {}
    for name in FIXTURES:
        blob = (_data_dir() / f"{name}.csv").read_bytes()
        out[name] = hashlib.sha256(blob).hexdigest() == recorded.get(f"{name}.csv")
    return out


# --------------------------------------------------------------------------
# Results
# --------------------------------------------------------------------------

RESULT_FIELDS = (
    "kind",
    "alpha",
    "nu",
    "reference",
    "value",
    "se",
    "ci_lo",
    "ci_hi",
    "method",
    "p_value",
    "dataset",
    "infinite",
    "version",
)


def result_row(result, dataset: str = "") -> dict:
    """Flatten an :class:`IndexValue` or :class:`IndexEstimate` to the result schema."""
    if isinstance(result, dict):
        row = {k: result.get(k) for k in RESULT_FIELDS}
        row["dataset"] = row["dataset"] or dataset
        row["version"] = row["version"] or __version__
        if row["infinite"] is None and isinstance(row["value"], float):
            row["infinite"] = math.isinf(row["value"])
        return row
    if isinstance(result, IndexEstimate):
        value, se, (lo, hi), method = result.value, result.std_error, result.interval, result.method.value
    elif isinstance(result, IndexValue):
        value, se, lo, hi, method = result, None, None, None, "point"
    else:
        raise InvalidInput(f"cannot serialize {type(result).__name__}")
    params = value.params
    return {
        "kind": value.kind.value,
        "alpha": None if params is None else params.alpha,
        "nu": None if params is None else params.nu,
        "reference": None if params is None else params.reference.value,
        "value": value.value,
        "se": se,
        "ci_lo": lo,
        "ci_hi": hi,
        "method": method,
        "p_value": None,
        "dataset": dataset,
        "infinite": math.isinf(value.value),
        "version": __version__,
    }


def _row(kind, params, value, se, interval, method, p_value, dataset):
    lo, hi = interval if interval is not None else (None, None)
    return {
        "kind": IndexKind(kind).value,
        "alpha": params.alpha,
        "nu": params.nu,
        "reference": params.reference.value,
        "value": value,
        "se": se,
        "ci_lo": lo,
        "ci_hi": hi,
        "method": method,
        "p_value": p_value,
        "dataset": dataset,
        "infinite": math.isinf(value),
        "version": __version__,
    }


def null_test_row(result, dataset: str = "") -> dict:
    """Observed index and one-sided p-value of a Poisson null test."""
    obs = result.observed
    return _row(obs.kind, obs.params, obs.value, None, None, "null_simulation", result.p_value, dataset)


def comparison_row(comparison, params, method: str, dataset: str = "", kind=IndexKind.RI) -> dict:
    """A between-dataset difference from a z test or the bootstrap."""
    se = getattr(comparison, "std_error", None)
    return _row(kind, params, comparison.difference, se, comparison.interval, method, comparison.p_value, dataset)


def _json_number(x):
    if x is None:
        return None
    if isinstance(x, (bool, str)):
        return x
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def emit_results(results, fmt: str = "csv", dest=None) -> str:
    """Serialize results as CSV (one row each) or JSON.

    A single result becomes one JSON object, several a JSON array.
    Infinite values are written as ``inf`` in CSV and as ``null`` with
    ``"infinite": true`` in JSON.
    """
    single = isinstance(results, (IndexValue, IndexEstimate, dict))
    rows = [result_row(results)] if single else [result_row(r) for r in results]
    if fmt == "json":
        # infinite parameters stay readable as "inf"; an infinite value is
        # null with the infinite flag set
        objs = [
            {
                k: "inf" if k in ("alpha", "nu") and row[k] == math.inf else _json_number(row[k])
                for k in RESULT_FIELDS
            }
            for row in rows
        ]
        text = json.dumps(objs[0] if single else objs, indent=2) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(RESULT_FIELDS)
        for row in rows:
            w.writerow(
                [
                    ("true" if row[k] else "false") if k == "infinite" else _fmt(row[k])
                    for k in RESULT_FIELDS
                ]
            )
        text = buf.getvalue()
    else:
        raise InvalidInput(f"unknown output format {fmt!r}")
    return _finish(text, dest)
