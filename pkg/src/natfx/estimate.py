"""Estimators for mediation components.

Two independent routes to the same decomposition:

* ``plugin_seq2`` sums outcome cell means against mediator probability
  tables from a categorical model (literal double sums over the support).
* ``linear_components`` evaluates closed-form expressions under a
  Gaussian-linear sequential model whose coefficients come from three
  least-squares regressions fitted by ``fit_linear_system``.

The routes share the report layout of the component catalogs in
:mod:`natfx.decomp`, so results can be compared row by row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy import linalg

from .cfexpr import Scenario, ScenarioKind
from .decomp import ComponentValue, DecompositionResult, MissingFixedLevel, Query
from .scm import Dataset, DiscreteScm, _resolve_level

__all__ = [
    "Assumption",
    "AssumptionLedger",
    "CovariateProfile",
    "LinearFit",
    "LinearParams",
    "LogDomainError",
    "RankDeficient",
    "expectation_w",
    "fit_linear_system",
    "fit_ols",
    "linear_components",
    "plugin_seq2",
]

_PIVOT_TOL = 1e-10


class RankDeficient(ValueError):
    """The design matrix has a column explained by the columns before it."""

    def __init__(self, column: str, index: int, pivot: float = 0.0):
        self.column = column
        self.index = index
        self.pivot = pivot
        super().__init__(
            f"design is rank deficient: column {column!r} (index {index}) is "
            f"linearly dependent on the others (pivot {pivot:.3e})"
        )


class LogDomainError(ValueError):
    """A log transform met non-positive values."""

    def __init__(self, column: str, rows: Sequence[int]):
        self.column = column
        self.rows = tuple(int(r) for r in rows)
        shown = ", ".join(str(r) for r in self.rows[:10])
        more = f" (+{len(self.rows) - 10} more)" if len(self.rows) > 10 else ""
        super().__init__(
            f"log transform of column {column!r} undefined: non-positive "
            f"values at rows {shown}{more}"
        )


# ---------------------------------------------------------------------------
# parameter containers


@dataclass(frozen=True)
class LinearParams:
    """Coefficients of the three-equation Gaussian chain model.

    ``theta`` holds the outcome regression in the order (intercept, A, M1,
    M2, A·M1, A·M2, M1·M2, A·M1·M2); ``beta`` the M2 regression (intercept,
    A, M1, A·M1); ``gamma`` the M1 regression (intercept, A).  The ``_c``
    vectors are covariate coefficients and must share one length across the
    three equations.  ``sigma2_m1`` is the residual variance of the M1
    regression; it enters the closed forms through E[M1^2].
    """

    theta: tuple[float, ...]
    beta: tuple[float, ...]
    gamma: tuple[float, ...]
    theta_c: tuple[float, ...] = ()
    beta_c: tuple[float, ...] = ()
    gamma_c: tuple[float, ...] = ()
    sigma2_m1: float = 0.0

    def __post_init__(self) -> None:
        for name, want in (("theta", 8), ("beta", 4), ("gamma", 2)):
            raw = getattr(self, name)
            vals = tuple(float(v) for v in raw)
            if len(vals) != want:
                raise ValueError(f"{name} needs {want} coefficients, got {len(vals)}")
            object.__setattr__(self, name, vals)
        lengths = set()
        for name in ("theta_c", "beta_c", "gamma_c"):
            vals = tuple(float(v) for v in getattr(self, name))
            object.__setattr__(self, name, vals)
            lengths.add(len(vals))
        if len(lengths) > 1:
            raise ValueError(
                "covariate coefficient vectors must share one length, got "
                f"{sorted(lengths)}"
            )
        object.__setattr__(self, "sigma2_m1", float(self.sigma2_m1))
        if not self.sigma2_m1 >= 0.0:
            raise ValueError(f"sigma2_m1 must be >= 0, got {self.sigma2_m1}")
        for name in ("theta", "beta", "gamma", "theta_c", "beta_c", "gamma_c"):
            if not all(math.isfinite(v) for v in getattr(self, name)):
                raise ValueError(f"{name} contains a non-finite coefficient")
        if not math.isfinite(self.sigma2_m1):
            raise ValueError("sigma2_m1 is not finite")

    @property
    def n_covariates(self) -> int:
        return len(self.theta_c)

    def to_dict(self) -> dict[str, Any]:
        return {
            "theta": list(self.theta),
            "theta_c": list(self.theta_c),
            "beta": list(self.beta),
            "beta_c": list(self.beta_c),
            "gamma": list(self.gamma),
            "gamma_c": list(self.gamma_c),
            "sigma2_m1": self.sigma2_m1,
        }

    @staticmethod
    def from_dict(doc: Mapping[str, Any]) -> "LinearParams":
        try:
            return LinearParams(
                theta=tuple(doc["theta"]),
                beta=tuple(doc["beta"]),
                gamma=tuple(doc["gamma"]),
                theta_c=tuple(doc.get("theta_c", ())),
                beta_c=tuple(doc.get("beta_c", ())),
                gamma_c=tuple(doc.get("gamma_c", ())),
                sigma2_m1=doc.get("sigma2_m1", 0.0),
            )
        except KeyError as err:
            raise ValueError(f"parameter document is missing key {err}") from None


@dataclass(frozen=True)
class CovariateProfile:
    """A covariate value vector the components are reported conditional on.

    No marginalization happens anywhere: every closed form is evaluated at
    exactly these values (e.g. one sex, the mean age).
    """

    values: tuple[float, ...] = ()
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.names is not None:
            names = tuple(str(n) for n in self.names)
            if len(names) != len(self.values):
                raise ValueError(
                    f"{len(names)} covariate names for {len(self.values)} values"
                )
            object.__setattr__(self, "names", names)


def _covariate_vector(
    params: LinearParams, c: CovariateProfile | Sequence[float] | None
) -> tuple[float, ...]:
    k = params.n_covariates
    if c is None:
        return (0.0,) * k
    values = c.values if isinstance(c, CovariateProfile) else tuple(float(v) for v in c)
    if len(values) != k:
        raise ValueError(
            f"covariate profile has {len(values)} values; the model has {k} "
            "covariate coefficients"
        )
    return values


def _dot(coefs: tuple[float, ...], values: tuple[float, ...]) -> float:
    return sum(a * b for a, b in zip(coefs, values))


# ---------------------------------------------------------------------------
# assumption ledger


@dataclass(frozen=True)
class Assumption:
    id: str
    prose: str
    acknowledged: bool = False


_SINGLE_ASSUMPTIONS: tuple[tuple[str, str], ...] = (
    ("A'1", "no unmeasured exposure-outcome confounding given the covariates"),
    (
        "A'2",
        "no unmeasured mediator-outcome confounding given exposure and covariates",
    ),
    ("A'3", "no unmeasured exposure-mediator confounding given the covariates"),
    (
        "A'4",
        "no mediator-outcome confounder is itself affected by the exposure "
        "(outcome counterfactuals are independent of the mediator's "
        "counterfactual under the other exposure level)",
    ),
)

_TWO_MEDIATOR_ASSUMPTIONS: tuple[tuple[str, str], ...] = (
    ("A1", "no unmeasured exposure-outcome confounding given the covariates"),
    (
        "A2",
        "no unmeasured confounding of the outcome and the mediator set given "
        "exposure and covariates",
    ),
    ("A3", "no unmeasured exposure-mediator confounding given the covariates"),
    (
        "A4",
        "no mediator-outcome confounder is itself affected by the exposure "
        "(outcome counterfactuals are independent of the mediator "
        "counterfactuals under other exposure levels)",
    ),
    (
        "A5",
        "no unmeasured confounding between the two mediators given exposure "
        "and covariates",
    ),
    (
        "A6",
        "no confounder of the mediator pair is itself affected by the "
        "exposure (M2's counterfactual is independent of M1's counterfactual "
        "under the other exposure level)",
    ),
)


@dataclass(frozen=True)
class AssumptionLedger:
    """The no-unmeasured-confounding conditions an estimate leans on.

    None of them is testable from the data, so estimation proceeds either
    way; reports embed the ledger so the reliance stays visible, and the
    ``acknowledged`` flags record that a user has read them.
    """

    scenario: Scenario
    assumptions: tuple[Assumption, ...]

    @staticmethod
    def for_scenario(scenario: Scenario, acknowledged: bool = False) -> "AssumptionLedger":
        table = (
            _SINGLE_ASSUMPTIONS
            if scenario.kind is ScenarioKind.SINGLE
            else _TWO_MEDIATOR_ASSUMPTIONS
        )
        return AssumptionLedger(
            scenario=scenario,
            assumptions=tuple(
                Assumption(aid, prose, acknowledged) for aid, prose in table
            ),
        )

    def acknowledge_all(self) -> "AssumptionLedger":
        return AssumptionLedger(
            scenario=self.scenario,
            assumptions=tuple(replace(a, acknowledged=True) for a in self.assumptions),
        )

    @property
    def all_acknowledged(self) -> bool:
        return all(a.acknowledged for a in self.assumptions)

    def as_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario.id,
            "assumptions": [
                {"id": a.id, "prose": a.prose, "acknowledged": a.acknowledged}
                for a in self.assumptions
            ],
        }


# ---------------------------------------------------------------------------
# least squares


def fit_ols(
    design: np.ndarray,
    response: np.ndarray,
    names: Sequence[str] | None = None,
) -> tuple[np.ndarray, float]:
    """Least squares with a rank guard.

    Returns ``(coefficients, residual_variance)`` where the variance is
    RSS/(n - p).  A pivoted QR factorization screens the design first: any
    pivot below 1e-10 of the leading one raises :class:`RankDeficient`
    naming the dependent column instead of returning a garbage solution.
    """
    x = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"design must be a 2-d matrix, got shape {x.shape}")
    if y.ndim != 1:
        raise ValueError(f"response must be a 1-d vector, got shape {y.shape}")
    n, p = x.shape
    if y.shape[0] != n:
        raise ValueError(f"response has {y.shape[0]} rows, design has {n}")
    if n < p:
        raise ValueError(f"{n} rows cannot support {p} regressors")
    if names is None:
        names = tuple(f"column {j}" for j in range(p))
    elif len(names) != p:
        raise ValueError(f"{len(names)} names for {p} columns")

    q, r, pivots = linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    lead = float(diag[0]) if diag.size else 0.0
    if p > 0 and lead == 0.0:
        j = int(pivots[0])
        raise RankDeficient(str(names[j]), j, 0.0)
    small = np.nonzero(diag <= _PIVOT_TOL * lead)[0]
    if small.size:
        k = int(small[0])
        j = int(pivots[k])
        raise RankDeficient(str(names[j]), j, float(diag[k]))

    permuted = linalg.solve_triangular(r, q.T @ y)
    coef = np.empty(p)
    coef[pivots] = permuted
    resid = y - x @ coef
    rss = float(resid @ resid)
    dof = n - p
    return coef, (rss / dof if dof > 0 else 0.0)


@dataclass(frozen=True)
class LinearFit:
    """A fitted three-equation system plus its audit trail.

    ``params`` is what the closed forms consume.  ``sigma2_y`` and
    ``sigma2_m2`` appear in no component formula and are carried as fit
    diagnostics only.  ``sample_means`` holds post-transform column means
    (used e.g. to resolve a fixed mediator level given as "mean"), and
    ``tables`` the per-equation coefficient tables for reporting.
    """

    params: LinearParams
    sigma2_y: float
    sigma2_m2: float
    n_used: int
    n_dropped: int
    covariate_names: tuple[str, ...]
    sample_means: dict[str, float]
    tables: dict[str, dict[str, float]]

    def to_dict(self) -> dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "covariates": list(self.covariate_names),
            "sigma2_y": self.sigma2_y,
            "sigma2_m2": self.sigma2_m2,
            "n_used": self.n_used,
            "n_dropped": self.n_dropped,
            "sample_means": dict(self.sample_means),
            "tables": {k: dict(v) for k, v in self.tables.items()},
        }

    @staticmethod
    def from_dict(doc: Mapping[str, Any]) -> "LinearFit":
        return LinearFit(
            params=LinearParams.from_dict(doc["params"]),
            sigma2_y=float(doc.get("sigma2_y", 0.0)),
            sigma2_m2=float(doc.get("sigma2_m2", 0.0)),
            n_used=int(doc.get("n_used", 0)),
            n_dropped=int(doc.get("n_dropped", 0)),
            covariate_names=tuple(doc.get("covariates", ())),
            sample_means={k: float(v) for k, v in doc.get("sample_means", {}).items()},
            tables={
                k: {n: float(v) for n, v in t.items()}
                for k, t in doc.get("tables", {}).items()
            },
        )


def _numeric_column(values: np.ndarray, role: str) -> np.ndarray:
    try:
        return np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        raise ValueError(f"column for role {role!r} is not numeric") from None


def fit_linear_system(
    data: Dataset,
    *,
    transforms: Mapping[str, Callable[[np.ndarray], np.ndarray] | str] | None = None,
) -> LinearFit:
    """Fit the three-equation chain model by least squares.

    Regressor sets are fixed: Y on (A, M1, M2, A·M1, A·M2, M1·M2, A·M1·M2,
    C), M2 on (A, M1, A·M1, C), M1 on (A, C), each with an intercept.
    Column roles are carried by the Dataset.  ``transforms`` maps a role
    ("exposure", "m1", "m2", "outcome", or a covariate name) to a callable
    applied before fitting, or to the string "log", which also checks its
    domain and reports offending row numbers.  Rows with non-finite values
    in any used column are dropped and counted.
    """
    if data.m2 is None:
        raise ValueError("two-mediator dataset required: the m2 role is missing")
    columns: dict[str, np.ndarray] = {
        "exposure": _numeric_column(data.exposure, "exposure"),
        "m1": _numeric_column(data.m1, "m1"),
        "m2": _numeric_column(data.m2, "m2"),
        "outcome": _numeric_column(data.outcome, "outcome"),
    }
    cov_names = tuple(data.covariates.keys())
    for name in cov_names:
        if name in columns:
            raise ValueError(f"covariate name {name!r} collides with a role name")
        columns[name] = _numeric_column(data.covariates[name], name)

    mask = np.ones(data.n, dtype=bool)
    for col in columns.values():
        mask &= np.isfinite(col)
    kept = np.nonzero(mask)[0]
    n_used = int(kept.size)
    if n_used == 0:
        raise ValueError("no complete rows left after dropping missing values")
    columns = {name: col[kept] for name, col in columns.items()}

    for role, fn in (transforms or {}).items():
        if role not in columns:
            known = ", ".join(["exposure", "m1", "m2", "outcome", *cov_names])
            raise ValueError(f"unknown transform target {role!r}; expected one of {known}")
        col = columns[role]
        if fn == "log":
            bad = np.nonzero(col <= 0.0)[0]
            if bad.size:
                raise LogDomainError(role, kept[bad])
            columns[role] = np.log(col)
        elif callable(fn):
            out = np.asarray(fn(col), dtype=float)
            if out.shape != col.shape:
                raise ValueError(f"transform for {role!r} changed the column length")
            bad = np.nonzero(~np.isfinite(out))[0]
            if bad.size:
                raise ValueError(
                    f"transform for {role!r} produced non-finite values at rows "
                    f"{', '.join(str(int(r)) for r in kept[bad][:10])}"
                )
            columns[role] = out
        else:
            raise ValueError(f"transform for {role!r} must be callable or 'log'")

    a = columns["exposure"]
    m1 = columns["m1"]
    m2 = columns["m2"]
    y = columns["outcome"]
    covs = [columns[name] for name in cov_names]
    ones = np.ones_like(a)

    y_design = np.column_stack(
        [ones, a, m1, m2, a * m1, a * m2, m1 * m2, a * m1 * m2, *covs]
    )
    y_names = ("intercept", "A", "M1", "M2", "A:M1", "A:M2", "M1:M2", "A:M1:M2") + cov_names
    m2_design = np.column_stack([ones, a, m1, a * m1, *covs])
    m2_names = ("intercept", "A", "M1", "A:M1") + cov_names
    m1_design = np.column_stack([ones, a, *covs])
    m1_names = ("intercept", "A") + cov_names

    theta, sigma2_y = fit_ols(y_design, y, y_names)
    beta, sigma2_m2 = fit_ols(m2_design, m2, m2_names)
    gamma, sigma2_m1 = fit_ols(m1_design, m1, m1_names)

    params = LinearParams(
        theta=tuple(theta[:8]),
        theta_c=tuple(theta[8:]),
        beta=tuple(beta[:4]),
        beta_c=tuple(beta[4:]),
        gamma=tuple(gamma[:2]),
        gamma_c=tuple(gamma[2:]),
        sigma2_m1=sigma2_m1,
    )
    sample_means = {name: float(np.mean(col)) for name, col in columns.items()}
    tables = {
        "outcome": dict(zip(y_names, (float(v) for v in theta))),
        "m2": dict(zip(m2_names, (float(v) for v in beta))),
        "m1": dict(zip(m1_names, (float(v) for v in gamma))),
    }
    return LinearFit(
        params=params,
        sigma2_y=sigma2_y,
        sigma2_m2=sigma2_m2,
        n_used=n_used,
        n_dropped=data.n_dropped + (data.n - n_used),
        covariate_names=cov_names,
        sample_means=sample_means,
        tables=tables,
    )


# ---------------------------------------------------------------------------
# closed forms

# Exposure triple (e_Y, e_M2, e_M1) behind each world: which slots take the
# treated level and which the reference.
_W_TRIPLES: dict[str, tuple[str, str, str]] = {
    "W1": ("a", "a", "a"),
    "W2": ("a", "a*", "a"),
    "W3": ("a", "a", "a*"),
    "W4": ("a*", "a", "a"),
    "W5": ("a*", "a", "a*"),
    "W6": ("a*", "a*", "a"),
    "W7": ("a", "a*", "a*"),
    "W8": ("a*", "a*", "a*"),
}


def _world_mean(
    params: LinearParams, e_y: float, e_m2: float, e_m1: float, cvec: tuple[float, ...]
) -> float:
    """E[Y(e_Y, M1(e_M1), M2(e_M2, M1(e_M1)))] given the covariate values.

    Integrating the outcome equation over M2 then M1 leaves a polynomial in
    the mean of M1 and its second moment, hence the sigma2_m1 term.
    """
    t, b, g = params.theta, params.beta, params.gamma
    mu1 = g[0] + g[1] * e_m1 + _dot(params.gamma_c, cvec)
    base2 = b[0] + b[1] * e_m2 + _dot(params.beta_c, cvec)
    slope2 = b[2] + b[3] * e_m2
    on_m2 = t[3] + t[5] * e_y
    on_m1 = t[2] + t[4] * e_y
    on_m1m2 = t[6] + t[7] * e_y
    return (
        t[0]
        + t[1] * e_y
        + _dot(params.theta_c, cvec)
        + on_m2 * base2
        + on_m1 * mu1
        + on_m1m2 * base2 * mu1
        + on_m2 * slope2 * mu1
        + on_m1m2 * slope2 * (params.sigma2_m1 + mu1 * mu1)
    )


def expectation_w(
    params: LinearParams,
    which: str | int,
    a: float,
    a_star: float,
    c: CovariateProfile | Sequence[float] | None = None,
) -> float:
    """Closed-form expectation of one of the eight one-path worlds.

    ``which`` is "W1".."W8" (or the bare index 1..8).  W1 is the all-treated
    world; W8 is W1 with a replaced by a* throughout; the rest mix levels
    across the outcome, M2, and M1 exposure slots.
    """
    key = f"W{which}" if isinstance(which, int) else str(which).upper()
    if key not in _W_TRIPLES:
        raise ValueError(f"which must be one of W1..W8, got {which!r}")
    levels = {"a": float(a), "a*": float(a_star)}
    e_y, e_m2, e_m1 = (levels[s] for s in _W_TRIPLES[key])
    return _world_mean(params, e_y, e_m2, e_m1, _covariate_vector(params, c))


def _require_numeric_query(q: Query) -> tuple[float, float, float, float]:
    missing = [
        label
        for label, v in (("m1*", q.m1_star), ("m2*", q.m2_star))
        if v is None
    ]
    if missing:
        raise MissingFixedLevel(
            f"linear decomposition needs fixed level(s) {', '.join(missing)}"
        )
    try:
        return float(q.a), float(q.a_star), float(q.m1_star), float(q.m2_star)
    except (TypeError, ValueError):
        raise ValueError(
            "linear decomposition needs numeric exposure and fixed mediator "
            f"levels, got a={q.a!r}, a*={q.a_star!r}, m1*={q.m1_star!r}, "
            f"m2*={q.m2_star!r}"
        ) from None


def linear_components(
    params: LinearParams,
    q: Query,
    c: CovariateProfile | Sequence[float] | None = None,
) -> DecompositionResult:
    """Closed-form decomposition under the Gaussian-linear chain model.

    Each component is evaluated from its own polynomial display (CDE and
    the reference interaction rows as products involving m1* and m2*, the
    natural interaction and pure indirect rows as polynomials in the
    coefficients), while TE comes from the two corner worlds, so the
    telescoping identity is a genuine cross-check rather than bookkeeping.
    Exposure levels may be any reals; a == a* collapses everything to zero.
    """
    a, a_star, m1s, m2s = _require_numeric_query(q)
    cvec = _covariate_vector(params, c)
    t, b, g = params.theta, params.beta, params.gamma
    sig2 = params.sigma2_m1

    d = a - a_star
    s = a + a_star
    gamma0c = g[0] + _dot(params.gamma_c, cvec)
    mu1s = gamma0c + g[1] * a_star
    base2s = b[0] + b[1] * a_star + _dot(params.beta_c, cvec)
    slope2s = b[2] + b[3] * a_star
    ref2 = sig2 + mu1s * mu1s

    cde = (t[1] + t[4] * m1s + t[5] * m2s + t[7] * m1s * m2s) * d
    ir1 = (mu1s - m1s) * (t[4] + t[7] * m2s) * d
    ir2 = (
        t[1]
        + t[5] * base2s
        + t[7] * base2s * mu1s
        + t[5] * slope2s * mu1s
        + t[7] * slope2s * ref2
        - (t[1] + t[5] * m2s)
        - t[7] * m2s * mu1s
    ) * d
    nat_am1 = (
        t[4] * g[1]
        + t[7] * g[1] * base2s
        + t[5] * g[1] * slope2s
        + 2.0 * t[7] * g[1] * slope2s * gamma0c
        + t[7] * g[1] * g[1] * slope2s * s
    ) * d * d
    nat_am2 = (
        t[5] * b[1] + t[7] * b[1] * mu1s + t[5] * b[3] * mu1s + t[7] * b[3] * ref2
    ) * d * d
    nat_am1m2 = (
        t[7] * b[1] * g[1]
        + t[5] * b[3] * g[1]
        + 2.0 * t[7] * b[3] * g[1] * gamma0c
        + t[7] * b[3] * g[1] * g[1] * s
    ) * d * d * d
    nat_m1m2 = (
        b[1] * g[1] * (t[6] + t[7] * a_star)
        + b[3] * g[1] * (t[3] + t[5] * a_star)
        + 2.0 * b[3] * g[1] * (t[6] + t[7] * a_star) * gamma0c
        + b[3] * g[1] * g[1] * (t[6] + t[7] * a_star) * s
    ) * d * d
    pie_m1 = (
        g[1] * (t[2] + t[4] * a_star)
        + g[1] * (t[6] + t[7] * a_star) * base2s
        + g[1] * (t[3] + t[5] * a_star) * slope2s
        + 2.0 * g[1] * (t[6] + t[7] * a_star) * slope2s * gamma0c
        + g[1] * g[1] * (t[6] + t[7] * a_star) * slope2s * s
    ) * d
    pie_m2 = (
        b[1] * (t[3] + t[5] * a_star)
        + b[1] * (t[6] + t[7] * a_star) * mu1s
        + b[3] * (t[3] + t[5] * a_star) * mu1s
        + b[3] * (t[6] + t[7] * a_star) * ref2
    ) * d

    te = _world_mean(params, a, a, a, cvec) - _world_mean(
        params, a_star, a_star, a_star, cvec
    )
    pde = cde + ir1 + ir2
    core = (cde, ir1, ir2, nat_am1, nat_am2, nat_am1m2, nat_m1m2, pie_m1, pie_m2)
    rows = (
        ComponentValue("CDE", cde),
        ComponentValue("INT_ref-AM1", ir1),
        ComponentValue("INT_ref-AM2+AM1M2", ir2),
        ComponentValue("NatINT_AM1", nat_am1),
        ComponentValue("NatINT_AM2", nat_am2),
        ComponentValue("NatINT_AM1M2", nat_am1m2),
        ComponentValue("NatINT_M1M2", nat_m1m2),
        ComponentValue("PDE", pde, in_sum=False),
        ComponentValue("PIE_M1", pie_m1),
        ComponentValue("PIE_M2", pie_m2),
        ComponentValue("TE", te, in_sum=False),
    )
    return DecompositionResult(
        components=rows, te=te, sum_gap=abs(math.fsum(core) - te)
    )


# ---------------------------------------------------------------------------
# plug-in sums for categorical models


def plugin_seq2(model: DiscreteScm, q: Query) -> DecompositionResult:
    """Plug-in decomposition from categorical mediator tables.

    The nine summed components come from their literal double sums over the
    (m1, m2) support; TE comes from its own two-world sum, so ``sum_gap``
    measures the telescoping identity instead of restating it.  A
    non-sequential two-mediator model runs through the same sums, its
    conditional M2 table being constant in m1.
    """
    if model.k != 2:
        raise ValueError(
            f"two-mediator model required for the plug-in sums, got {model.scenario.id}"
        )
    missing = [
        label for label, v in (("m1*", q.m1_star), ("m2*", q.m2_star)) if v is None
    ]
    if missing:
        raise MissingFixedLevel(
            f"plug-in decomposition needs fixed level(s) {', '.join(missing)}"
        )
    a = _resolve_level(q.a, model.exposure_levels, "exposure a")
    a_star = _resolve_level(q.a_star, model.exposure_levels, "exposure a*")
    m1s = _resolve_level(q.m1_star, model.m1_levels, "fixed level m1*")
    m2s = _resolve_level(q.m2_star, model.m2_levels, "fixed level m2*")

    p = model.ymean
    pr1 = model.pm1
    pr2 = model.pm2
    m1_levels = model.m1_levels
    m2_levels = model.m2_levels

    cde = p[a][m1s][m2s] - p[a_star][m1s][m2s]

    ir1 = 0.0
    for m1 in m1_levels:
        ir1 += (
            p[a][m1][m2s] - p[a_star][m1][m2s] - p[a][m1s][m2s] + p[a_star][m1s][m2s]
        ) * pr1[a_star][m1]

    ir2 = 0.0
    nat_am1 = 0.0
    nat_am2 = 0.0
    nat_am1m2 = 0.0
    nat_m1m2 = 0.0
    pie_m1 = 0.0
    pie_m2 = 0.0
    te = 0.0
    for m1 in m1_levels:
        w1_ref = pr1[a_star][m1]
        d1 = pr1[a][m1] - w1_ref
        for m2 in m2_levels:
            y_trt = p[a][m1][m2]
            y_ref = p[a_star][m1][m2]
            w2_ref = pr2[a_star][m1][m2]
            d2 = pr2[a][m1][m2] - w2_ref
            ir2 += (
                y_trt - p[a][m1][m2s] - y_ref + p[a_star][m1][m2s]
            ) * w1_ref * w2_ref
            nat_am1 += (y_trt - y_ref) * w2_ref * d1
            nat_am2 += (y_trt - y_ref) * w1_ref * d2
            nat_am1m2 += (y_trt - y_ref) * d1 * d2
            nat_m1m2 += y_ref * d1 * d2
            pie_m1 += y_ref * w2_ref * d1
            pie_m2 += y_ref * w1_ref * d2
            te += y_trt * pr1[a][m1] * pr2[a][m1][m2] - y_ref * w1_ref * w2_ref

    pde = cde + ir1 + ir2
    core = (cde, ir1, ir2, nat_am1, nat_am2, nat_am1m2, nat_m1m2, pie_m1, pie_m2)
    rows = (
        ComponentValue("CDE", cde),
        ComponentValue("INT_ref-AM1", ir1),
        ComponentValue("INT_ref-AM2+AM1M2", ir2),
        ComponentValue("NatINT_AM1", nat_am1),
        ComponentValue("NatINT_AM2", nat_am2),
        ComponentValue("NatINT_AM1M2", nat_am1m2),
        ComponentValue("NatINT_M1M2", nat_m1m2),
        ComponentValue("PDE", pde, in_sum=False),
        ComponentValue("PIE_M1", pie_m1),
        ComponentValue("PIE_M2", pie_m2),
        ComponentValue("TE", te, in_sum=False),
    )
    return DecompositionResult(
        components=rows, te=te, sum_gap=abs(math.fsum(core) - te)
    )
