"""Discrete structural causal model over one or two mediators.

Holds the tables Pr(M1 | A), Pr(M2 | A, M1) and the outcome cell means
E[Y | A, M1, M2], evaluates identifiable counterfactual expectations by
exhaustive enumeration, simulates datasets for testing, and builds plug-in
models from categorical data.

Non-sequential two-mediator models are stored in sequential shape with
Pr(M2 | A, M1) constant in m1, so a single enumeration routine serves both
structures.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .cfexpr import (
    CfExpr,
    Counterfactual,
    ExposureLevel,
    Fixed,
    IdentifiabilityVerdict,
    Scenario,
    ScenarioKind,
    check_identifiability,
    format_cf,
    validate_cf,
)

__all__ = [
    "Dataset",
    "DiscreteScm",
    "EmptyCell",
    "InvalidDistribution",
    "NonCategoricalColumn",
    "NotIdentifiable",
    "UnboundLevel",
    "UnknownSupportValue",
    "eval_expectation",
    "from_dataset",
    "load_model",
    "model_from_json",
    "model_to_json",
    "save_model",
    "simulate",
]

_ROW_SUM_TOL = 1e-12
_MAX_SUPPORT = 64


class NotIdentifiable(ValueError):
    """Expectation requested for a problematic counterfactual formula."""

    def __init__(self, expr: CfExpr, verdict: IdentifiabilityVerdict):
        parts = "; ".join(
            f"M{c.mediator} pinned as {', '.join(c.specs)}" for c in verdict.conflicts
        )
        super().__init__(f"{format_cf(expr)} is not identifiable: {parts}")
        self.verdict = verdict


class UnboundLevel(ValueError):
    """A formula symbol has no binding to a model level."""


class UnknownSupportValue(ValueError):
    """A bound or literal level is absent from the relevant support."""


class EmptyCell(ValueError):
    """Plug-in tables require cells that hold no observations."""

    def __init__(self, cells: Sequence[tuple[tuple[str, Any], ...]]):
        self.cells = tuple(cells)
        shown = ", ".join(
            "(" + ", ".join(f"{name}={level!r}" for name, level in cell) + ")"
            for cell in self.cells[:8]
        )
        more = "" if len(self.cells) <= 8 else f" and {len(self.cells) - 8} more"
        super().__init__(f"empty cells: {shown}{more}")


class InvalidDistribution(ValueError):
    """Exposure assignment probabilities are negative or do not sum to one."""


class NonCategoricalColumn(ValueError):
    """A column bound as categorical looks continuous."""


def _as_prob_row(row: Mapping[Any, float], levels: tuple, what: str) -> dict:
    out = {}
    for level in levels:
        if level not in row:
            raise ValueError(f"{what} is missing an entry for level {level!r}")
        p = float(row[level])
        if p < 0:
            raise ValueError(f"{what} has a negative probability at {level!r}")
        out[level] = p
    extras = [k for k in row if k not in levels]
    if extras:
        raise ValueError(f"{what} has entries outside the support: {extras!r}")
    total = sum(out.values())
    if abs(total - 1.0) > _ROW_SUM_TOL:
        raise ValueError(f"{what} sums to {total!r}, not 1")
    if total != 1.0:
        out = {k: v / total for k, v in out.items()}
    return out


@dataclass(frozen=True)
class DiscreteScm:
    """Tables of a discrete one- or two-mediator model.

    Parameters
    ----------
    scenario : Scenario
        ``single``, ``nonseq2``, or ``seq2``; the evaluator stops at two
        mediators.
    pm1 : mapping
        ``pm1[a][m1]`` = Pr(M1 = m1 | A = a).
    pm2 : mapping, optional
        ``pm2[a][m1][m2]`` = Pr(M2 = m2 | A = a, M1 = m1).  Required for two
        mediators; must be constant in m1 when the scenario is
        non-sequential.  Use `DiscreteScm.nonseq2` to build from the marginal
        Pr(M2 | A) directly.
    ymean : mapping
        ``ymean[a][m1]`` (one mediator) or ``ymean[a][m1][m2]`` = E[Y | ...].
    treatment, reference : optional
        Levels the symbols ``a`` and ``a*`` evaluate to.

    Probability rows must sum to one within 1e-12 and are renormalized to
    exactly one; larger drift is an error.
    """

    scenario: Scenario
    pm1: Mapping[Any, Mapping[Any, float]]
    ymean: Mapping[Any, Any]
    pm2: Mapping[Any, Mapping[Any, Mapping[Any, float]]] | None = None
    exposure_levels: tuple = ()
    m1_levels: tuple = ()
    m2_levels: tuple | None = None
    treatment: Any = None
    reference: Any = None

    def __post_init__(self) -> None:
        if self.scenario.k > 2:
            raise ValueError("enumeration models support at most two mediators")
        exposure = self.exposure_levels or tuple(self.pm1.keys())
        if not exposure:
            raise ValueError("model needs at least one exposure level")
        first = next(iter(self.pm1.values()))
        m1 = self.m1_levels or tuple(first.keys())
        pm1 = {
            a: _as_prob_row(self._row(self.pm1, a, "pm1"), m1, f"pm1[{a!r}]")
            for a in exposure
        }
        if self.scenario.k == 1:
            if self.pm2 is not None or self.m2_levels is not None:
                raise ValueError("single-mediator model takes no pm2 table")
            ymean = {
                a: {
                    lvl: float(self._cell(self._row(self.ymean, a, "ymean"), lvl, f"ymean[{a!r}]"))
                    for lvl in m1
                }
                for a in exposure
            }
            m2 = None
            pm2 = None
        else:
            if self.pm2 is None:
                raise ValueError("two-mediator model requires a pm2 table")
            some_row = next(iter(next(iter(self.pm2.values())).values()))
            m2 = self.m2_levels or tuple(some_row.keys())
            pm2 = {
                a: {
                    lvl: _as_prob_row(
                        self._cell(self._row(self.pm2, a, "pm2"), lvl, f"pm2[{a!r}]"),
                        m2,
                        f"pm2[{a!r}][{lvl!r}]",
                    )
                    for lvl in m1
                }
                for a in exposure
            }
            if self.scenario.kind is ScenarioKind.NONSEQ:
                for a in exposure:
                    rows = [pm2[a][lvl] for lvl in m1]
                    for other in rows[1:]:
                        drift = max(abs(other[v] - rows[0][v]) for v in m2)
                        if drift > _ROW_SUM_TOL:
                            raise ValueError(
                                "non-sequential model requires Pr(M2 | A) "
                                f"independent of M1; pm2[{a!r}] varies by {drift:g}"
                            )
            ymean = {
                a: {
                    l1: {
                        l2: float(
                            self._cell(
                                self._cell(self._row(self.ymean, a, "ymean"), l1, "ymean"),
                                l2,
                                f"ymean[{a!r}][{l1!r}]",
                            )
                        )
                        for l2 in m2
                    }
                    for l1 in m1
                }
                for a in exposure
            }
        for name, level in (("treatment", self.treatment), ("reference", self.reference)):
            if level is not None and level not in exposure:
                raise ValueError(f"{name} level {level!r} is not an exposure level")
        object.__setattr__(self, "exposure_levels", tuple(exposure))
        object.__setattr__(self, "m1_levels", tuple(m1))
        object.__setattr__(self, "m2_levels", tuple(m2) if m2 is not None else None)
        object.__setattr__(self, "pm1", pm1)
        object.__setattr__(self, "pm2", pm2)
        object.__setattr__(self, "ymean", ymean)

    @staticmethod
    def _row(table: Mapping, key: Any, what: str) -> Mapping:
        if key not in table:
            raise ValueError(f"{what} is missing the row for level {key!r}")
        return table[key]

    _cell = _row

    @staticmethod
    def nonseq2(
        pm1: Mapping,
        pm2_marginal: Mapping[Any, Mapping[Any, float]],
        ymean: Mapping,
        **kwargs: Any,
    ) -> "DiscreteScm":
        """Build a non-sequential model from the marginal table Pr(M2 | A)."""
        m1_levels = kwargs.get("m1_levels") or tuple(next(iter(pm1.values())).keys())
        expanded = {
            a: {lvl: dict(row) for lvl in m1_levels} for a, row in pm2_marginal.items()
        }
        return DiscreteScm(
            Scenario.nonseq(2), pm1=pm1, pm2=expanded, ymean=ymean, **kwargs
        )

    @property
    def k(self) -> int:
        return self.scenario.k


def _resolve_level(value: Any, levels: tuple, what: str) -> Any:
    """Match `value` against a support, tolerating str/int/float spellings."""
    if value in levels:
        return value
    if isinstance(value, str):
        for cast in (int, float):
            try:
                converted = cast(value)
            except ValueError:
                continue
            if converted in levels:
                return converted
    else:
        if str(value) in levels:
            return str(value)
    raise UnknownSupportValue(f"{what}: level {value!r} is not in the support {list(levels)!r}")


@dataclass(frozen=True)
class Dataset:
    """Role-bound rectangular data: exposure, mediator(s), outcome, covariates."""

    exposure: np.ndarray
    m1: np.ndarray
    outcome: np.ndarray
    m2: np.ndarray | None = None
    covariates: dict[str, np.ndarray] = field(default_factory=dict)
    n_dropped: int = 0

    def __post_init__(self) -> None:
        n = len(self.exposure)
        if n < 1:
            raise ValueError("dataset needs at least one row")
        columns = [("m1", self.m1), ("outcome", self.outcome)]
        if self.m2 is not None:
            columns.append(("m2", self.m2))
        columns += list(self.covariates.items())
        for name, col in columns:
            if len(col) != n:
                raise ValueError(f"column {name!r} has {len(col)} rows, expected {n}")

    @property
    def n(self) -> int:
        return len(self.exposure)

    def take(self, indices: np.ndarray) -> "Dataset":
        """Row subset/resample; drops the original drop count."""
        return Dataset(
            exposure=self.exposure[indices],
            m1=self.m1[indices],
            outcome=self.outcome[indices],
            m2=None if self.m2 is None else self.m2[indices],
            covariates={k: v[indices] for k, v in self.covariates.items()},
        )


# ---------------------------------------------------------------------------
# evaluation


def _bind_exposure(
    exp: ExposureLevel, model: DiscreteScm, binding: Mapping[str, Any]
) -> Any:
    symbol = exp.symbol
    if symbol in binding:
        return _resolve_level(binding[symbol], model.exposure_levels, f"exposure {symbol}")
    if exp.is_treatment:
        if model.treatment is None:
            raise UnboundLevel("no level bound for the treatment symbol 'a'")
        return model.treatment
    if exp.is_reference:
        if model.reference is None:
            raise UnboundLevel("no level bound for the reference symbol 'a*'")
        return model.reference
    if "*" in symbol:
        raise UnboundLevel(f"no level bound for exposure symbol {symbol!r}")
    return _resolve_level(symbol, model.exposure_levels, f"exposure {symbol!r}")


def _bind_fixed(
    label: str, levels: tuple, binding: Mapping[str, Any], mediator: str
) -> Any:
    if label in binding:
        return _resolve_level(binding[label], levels, f"{mediator} level {label!r}")
    if "*" in label:
        raise UnboundLevel(f"no level bound for fixed {mediator} label {label!r}")
    return _resolve_level(label, levels, f"{mediator} level {label!r}")


def eval_expectation(
    model: DiscreteScm, expr: CfExpr, binding: Mapping[str, Any] | None = None
) -> float:
    """Expectation of an identifiable counterfactual formula, by enumeration.

    Computes sum over (m1, m2) of ``ymean(e_Y, m1, m2) * w1(m1) * w2(m2 | m1)``
    where each weight is a point mass at a fixed level or the conditional
    probability row at the spec's exposure; the parent value of M2's history
    is the shared summation index, which is sound because identifiability
    forces every occurrence of M1's spec to coincide.

    Parameters
    ----------
    model : DiscreteScm
    expr : CfExpr
        Must be identifiable for the model's scenario.
    binding : mapping, optional
        Symbol-to-level overrides, e.g. ``{"a": 1, "a*": 0, "m1*": 0}``.
        Unlisted symbols fall back to the model's treatment/reference levels;
        star-free symbols may also match support levels literally.

    Raises
    ------
    NotIdentifiable
        The formula is problematic; no expectation is defined by the tables.
    UnboundLevel, UnknownSupportValue
        A symbol cannot be mapped into the model's supports.
    """
    validate_cf(expr, model.scenario)
    verdict = check_identifiability(expr, model.scenario)
    if not verdict.identifiable:
        raise NotIdentifiable(expr, verdict)
    binding = binding or {}

    e_y = _bind_exposure(expr.exposure, model, binding)
    spec1 = expr.mediators[0]
    if isinstance(spec1, Fixed):
        level1 = _bind_fixed(spec1.label, model.m1_levels, binding, "M1")
        w1 = {lvl: (1.0 if lvl == level1 else 0.0) for lvl in model.m1_levels}
    else:
        row = model.pm1[_bind_exposure(spec1.exposure, model, binding)]
        w1 = row

    if model.k == 1:
        return float(sum(w1[m1] * model.ymean[e_y][m1] for m1 in model.m1_levels))

    spec2 = expr.mediators[1]
    if isinstance(spec2, Fixed):
        level2 = _bind_fixed(spec2.label, model.m2_levels, binding, "M2")
        w2 = {
            m1: {lvl: (1.0 if lvl == level2 else 0.0) for lvl in model.m2_levels}
            for m1 in model.m1_levels
        }
    else:
        w2 = model.pm2[_bind_exposure(spec2.exposure, model, binding)]

    total = 0.0
    for m1 in model.m1_levels:
        p1 = w1[m1]
        if p1 == 0.0:
            continue
        inner = 0.0
        row_y = model.ymean[e_y][m1]
        row_w = w2[m1]
        for m2 in model.m2_levels:
            inner += row_w[m2] * row_y[m2]
        total += p1 * inner
    return float(total)


# ---------------------------------------------------------------------------
# simulation


def _sample_rows(
    rng: np.random.Generator, prob_rows: np.ndarray, row_idx: np.ndarray
) -> np.ndarray:
    """Draw one categorical value per row from per-row probability vectors."""
    cum = np.cumsum(prob_rows[row_idx], axis=1)
    u = rng.random(len(row_idx))
    idx = (cum < u[:, None]).sum(axis=1)
    return np.minimum(idx, prob_rows.shape[1] - 1)


def simulate(
    model: DiscreteScm,
    n: int,
    seed: int,
    exposure_assignment: Mapping[Any, float] | None = None,
    noise_sd: float = 1.0,
) -> Dataset:
    """Draw `n` i.i.d. rows through the factorization A -> M1 (-> M2) -> Y.

    The outcome is its cell mean plus Gaussian noise with standard deviation
    `noise_sd`.  Identical ``(model, n, seed, exposure_assignment, noise_sd)``
    give byte-identical output; the generator is stream-split so concurrent
    callers with distinct seeds never share state.

    `exposure_assignment` maps exposure levels to probabilities (uniform when
    omitted).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    levels = model.exposure_levels
    if exposure_assignment is None:
        probs = np.full(len(levels), 1.0 / len(levels))
    else:
        probs = np.zeros(len(levels))
        for raw, p in exposure_assignment.items():
            level = _resolve_level(raw, levels, "exposure assignment")
            probs[levels.index(level)] = float(p)
        if (probs < 0).any():
            raise InvalidDistribution("exposure probabilities must be non-negative")
        total = probs.sum()
        if abs(total - 1.0) > 1e-9:
            raise InvalidDistribution(f"exposure probabilities sum to {total!r}, not 1")
        probs = probs / total

    rng = np.random.default_rng(seed)
    a_idx = _sample_rows(rng, np.tile(probs, (1, 1)), np.zeros(n, dtype=int))

    p1 = np.array([[model.pm1[a][m] for m in model.m1_levels] for a in levels])
    m1_idx = _sample_rows(rng, p1, a_idx)

    exposure = np.asarray(levels)[a_idx]
    m1 = np.asarray(model.m1_levels)[m1_idx]

    if model.k == 1:
        ymat = np.array(
            [[model.ymean[a][m] for m in model.m1_levels] for a in levels]
        )
        mean = ymat[a_idx, m1_idx]
        outcome = mean + rng.normal(size=n) * noise_sd
        return Dataset(exposure=exposure, m1=m1, outcome=outcome)

    k1 = len(model.m1_levels)
    p2 = np.array(
        [
            [model.pm2[a][m][v] for v in model.m2_levels]
            for a in levels
            for m in model.m1_levels
        ]
    )
    m2_idx = _sample_rows(rng, p2, a_idx * k1 + m1_idx)
    m2 = np.asarray(model.m2_levels)[m2_idx]
    ymat = np.array(
        [
            [model.ymean[a][m][v] for v in model.m2_levels]
            for a in levels
            for m in model.m1_levels
        ]
    )
    mean = ymat[a_idx * k1 + m1_idx, m2_idx]
    outcome = mean + rng.normal(size=n) * noise_sd
    return Dataset(exposure=exposure, m1=m1, outcome=outcome, m2=m2)


# ---------------------------------------------------------------------------
# plug-in construction


def _check_categorical(name: str, col: np.ndarray) -> None:
    if np.issubdtype(col.dtype, np.floating):
        finite = np.isfinite(col)
        if not finite.all() or not np.equal(np.mod(col, 1), 0).all():
            raise NonCategoricalColumn(
                f"column {name!r} holds non-integer reals; bin it before plug-in use"
            )
    distinct = len(np.unique(col))
    if distinct > _MAX_SUPPORT:
        raise NonCategoricalColumn(
            f"column {name!r} has {distinct} distinct values; not categorical"
        )


def _codes(col: np.ndarray, declared: Iterable | None, name: str):
    observed = [v.item() if hasattr(v, "item") else v for v in np.unique(col)]
    if declared is None:
        levels = observed
    else:
        levels = list(declared)
        missing = [v for v in observed if v not in levels]
        if missing:
            raise UnknownSupportValue(
                f"column {name!r} holds levels outside the declared support: {missing!r}"
            )
    lookup = {lvl: i for i, lvl in enumerate(levels)}
    codes = np.array([lookup[v] for v in col.tolist()])
    return tuple(levels), codes


def from_dataset(
    data: Dataset,
    scenario: Scenario,
    *,
    exposure_levels: Iterable | None = None,
    m1_levels: Iterable | None = None,
    m2_levels: Iterable | None = None,
    treatment: Any = None,
    reference: Any = None,
) -> DiscreteScm:
    """Empirical plug-in model: conditional frequencies and cell means.

    Supports default to the observed distinct values; pass declared level
    sets to demand a wider grid.  Any required cell without observations
    raises `EmptyCell` naming every offending cell — empty cells are never
    imputed.
    """
    if scenario.k > 2:
        raise ValueError("plug-in models support at most two mediators")
    _check_categorical("exposure", data.exposure)
    _check_categorical("m1", data.m1)
    a_levels, a_codes = _codes(data.exposure, exposure_levels, "exposure")
    l1, c1 = _codes(data.m1, m1_levels, "m1")
    ka, k1 = len(a_levels), len(l1)
    y = np.asarray(data.outcome, dtype=float)

    empty: list[tuple[tuple[str, Any], ...]] = []
    n_a = np.bincount(a_codes, minlength=ka)
    thin_a = {i for i in range(ka) if n_a[i] == 0}
    for i in sorted(thin_a):
        empty.append((("A", a_levels[i]),))

    if scenario.k == 1:
        cell = a_codes * k1 + c1
        counts = np.bincount(cell, minlength=ka * k1)
        ysum = np.bincount(cell, weights=y, minlength=ka * k1)
        for i in range(ka):
            if i in thin_a:
                continue
            for j in range(k1):
                if counts[i * k1 + j] == 0:
                    empty.append((("A", a_levels[i]), ("M1", l1[j])))
        if empty:
            raise EmptyCell(empty)
        counts2 = counts.reshape(ka, k1)
        pm1 = {
            a_levels[i]: {l1[j]: counts2[i, j] / n_a[i] for j in range(k1)}
            for i in range(ka)
        }
        ymean = {
            a_levels[i]: {
                l1[j]: ysum[i * k1 + j] / counts2[i, j] for j in range(k1)
            }
            for i in range(ka)
        }
        return DiscreteScm(
            scenario,
            pm1=pm1,
            ymean=ymean,
            treatment=treatment,
            reference=reference,
        )

    if data.m2 is None:
        raise ValueError("two-mediator scenario requires an m2 column")
    _check_categorical("m2", data.m2)
    l2, c2 = _codes(data.m2, m2_levels, "m2")
    k2 = len(l2)
    cell = (a_codes * k1 + c1) * k2 + c2
    counts = np.bincount(cell, minlength=ka * k1 * k2).reshape(ka, k1, k2)
    ysum = np.bincount(cell, weights=y, minlength=ka * k1 * k2).reshape(ka, k1, k2)
    n_am1 = counts.sum(axis=2)

    for i in range(ka):
        if i in thin_a:
            continue
        for j in range(k1):
            if n_am1[i, j] == 0:
                empty.append((("A", a_levels[i]), ("M1", l1[j])))
                continue
            for v in range(k2):
                if counts[i, j, v] == 0:
                    empty.append(
                        (("A", a_levels[i]), ("M1", l1[j]), ("M2", l2[v]))
                    )
    if empty:
        raise EmptyCell(empty)

    pm1 = {
        a_levels[i]: {l1[j]: n_am1[i, j] / n_a[i] for j in range(k1)}
        for i in range(ka)
    }
    ymean = {
        a_levels[i]: {
            l1[j]: {l2[v]: ysum[i, j, v] / counts[i, j, v] for v in range(k2)}
            for j in range(k1)
        }
        for i in range(ka)
    }
    if scenario.kind is ScenarioKind.NONSEQ:
        n_am2 = counts.sum(axis=1)
        pm2_marginal = {
            a_levels[i]: {l2[v]: n_am2[i, v] / n_a[i] for v in range(k2)}
            for i in range(ka)
        }
        return DiscreteScm.nonseq2(
            pm1,
            pm2_marginal,
            ymean,
            m1_levels=tuple(l1),
            treatment=treatment,
            reference=reference,
        )
    pm2 = {
        a_levels[i]: {
            l1[j]: {l2[v]: counts[i, j, v] / n_am1[i, j] for v in range(k2)}
            for j in range(k1)
        }
        for i in range(ka)
    }
    return DiscreteScm(
        scenario,
        pm1=pm1,
        pm2=pm2,
        ymean=ymean,
        treatment=treatment,
        reference=reference,
    )


# ---------------------------------------------------------------------------
# model files


def model_to_json(model: DiscreteScm) -> dict:
    """Plain-JSON shape of a model; all levels rendered as strings."""
    s = str
    levels: dict[str, Any] = {
        "exposure": [s(a) for a in model.exposure_levels],
        "m1": [s(v) for v in model.m1_levels],
    }
    if model.m2_levels is not None:
        levels["m2"] = [s(v) for v in model.m2_levels]
    if model.treatment is not None:
        levels["treatment"] = s(model.treatment)
    if model.reference is not None:
        levels["reference"] = s(model.reference)
    doc: dict[str, Any] = {
        "scenario": model.scenario.id,
        "levels": levels,
        "pm1": {s(a): {s(m): p for m, p in row.items()} for a, row in model.pm1.items()},
    }
    if model.k == 1:
        doc["ymean"] = {
            s(a): {s(m): v for m, v in row.items()} for a, row in model.ymean.items()
        }
    else:
        if model.scenario.kind is ScenarioKind.NONSEQ:
            first_m1 = model.m1_levels[0]
            doc["pm2"] = {
                s(a): {s(v): p for v, p in rows[first_m1].items()}
                for a, rows in model.pm2.items()
            }
        else:
            doc["pm2"] = {
                s(a): {s(m): {s(v): p for v, p in row.items()} for m, row in rows.items()}
                for a, rows in model.pm2.items()
            }
        doc["ymean"] = {
            s(a): {s(m): {s(v): y for v, y in row.items()} for m, row in rows.items()}
            for a, rows in model.ymean.items()
        }
    return doc


def model_from_json(doc: Mapping[str, Any]) -> DiscreteScm:
    """Inverse of `model_to_json`; levels are strings throughout."""
    scenario = Scenario.from_id(doc["scenario"])
    levels = doc.get("levels", {})
    kwargs: dict[str, Any] = {
        "treatment": levels.get("treatment"),
        "reference": levels.get("reference"),
    }
    if "exposure" in levels:
        kwargs["exposure_levels"] = tuple(str(v) for v in levels["exposure"])
    if "m1" in levels:
        kwargs["m1_levels"] = tuple(str(v) for v in levels["m1"])
    pm1 = {str(a): {str(m): float(p) for m, p in row.items()} for a, row in doc["pm1"].items()}
    if scenario.k == 1:
        ymean = {
            str(a): {str(m): float(v) for m, v in row.items()}
            for a, row in doc["ymean"].items()
        }
        return DiscreteScm(scenario, pm1=pm1, ymean=ymean, **kwargs)
    ymean = {
        str(a): {
            str(m): {str(v): float(y) for v, y in row.items()} for m, row in rows.items()
        }
        for a, rows in doc["ymean"].items()
    }
    if "m2" in levels:
        kwargs["m2_levels"] = tuple(str(v) for v in levels["m2"])
    raw_pm2 = doc["pm2"]
    nested = isinstance(next(iter(next(iter(raw_pm2.values())).values())), Mapping)
    if not nested and scenario.kind is not ScenarioKind.NONSEQ:
        raise ValueError(
            "sequential model files need the full pm2[a][m1][m2] table; "
            "the flat pm2[a][m2] shape is only valid for nonseq scenarios"
        )
    if scenario.kind is ScenarioKind.NONSEQ and not nested:
        pm2_marginal = {
            str(a): {str(v): float(p) for v, p in row.items()}
            for a, row in raw_pm2.items()
        }
        m1_levels = kwargs.pop("m1_levels", None) or tuple(next(iter(pm1.values())).keys())
        return DiscreteScm.nonseq2(
            pm1, pm2_marginal, ymean, m1_levels=m1_levels, **kwargs
        )
    pm2 = {
        str(a): {
            str(m): {str(v): float(p) for v, p in row.items()} for m, row in rows.items()
        }
        for a, rows in raw_pm2.items()
    }
    return DiscreteScm(scenario, pm1=pm1, pm2=pm2, ymean=ymean, **kwargs)


def load_model(path: str) -> DiscreteScm:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(json.load(fh))


def save_model(model: DiscreteScm, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(model), fh, indent=2)
        fh.write("\n")
