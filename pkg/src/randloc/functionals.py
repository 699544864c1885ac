"""Catalog of location functionals and grid-exact axiom checkers.

Every functional maps (path, interval) to a time in the interval or to
INFTY.  Global functionals accept arbitrary grid-aligned intervals;
local-only functionals are defined for windows [a, a+T] of one fixed
related length T.

Checkers enumerate grid-aligned intervals exhaustively (capped with a
deterministic stride subsample) and report violations verbatim; a failing
functional yields a report with passed=False, never an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from randloc.paths import (
    INFTY,
    DiscretePath,
    Interval,
    PathMode,
    differentiate,
    is_grid_multiple,
    mollify,
    shift,
)

DEFAULT_PAIR_CAP = 5000


class Scope(Enum):
    GLOBAL = "global"
    LOCAL_ONLY = "local_only"


class OffsetOutOfDomain(ValueError):
    """Interval plus the largest offset exceeds the sampled domain."""


@dataclass
class CheckReport:
    """Outcome of an exact or statistical check.

    For exact checks passed is equivalent to an empty violation list;
    statistical checks carry their tolerance in ``statistics``.
    """

    check_name: str
    trials: int = 0
    violations: list = field(default_factory=list)
    statistics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "check": self.check_name,
            "trials": self.trials,
            "passed": self.passed,
            "violations": [list(map(str, v)) if isinstance(v, tuple) else str(v)
                           for v in self.violations],
            "statistics": self.statistics,
        }


# ---------------------------------------------------------------------
# functional catalog
# ---------------------------------------------------------------------


class LocationFunctional:
    """Base class: a named, parameterized location functional."""

    name: str = ""
    scope: Scope = Scope.GLOBAL
    related_length: float | None = None
    claims_doubly: bool = False

    @property
    def params(self) -> dict:
        return {}

    # margins (in time units) the functional needs inside the sampled
    # domain, beyond the query interval itself
    def margins(self, path: DiscretePath) -> tuple[float, float]:
        return (0.0, 0.0)

    def prepare(self, path: DiscretePath) -> "PreparedFunctional":
        raise NotImplementedError

    def __call__(self, path: DiscretePath, interval: Interval) -> float:
        if self.scope is Scope.LOCAL_ONLY:
            if abs(interval.length - self.related_length) > path.tol:
                raise ValueError(
                    f"{self.name} is local-only with related length "
                    f"{self.related_length}; got window length {interval.length}")
        p = self.prepare(path)
        return p.locate(path.node_index(interval.a), path.node_index(interval.b))

    def at(self, path: DiscretePath, a: float) -> float:
        """Window evaluation L_T(f, a) for a local (or restricted) functional."""
        T = self.related_length
        if T is None:
            raise ValueError(f"{self.name} has no related length")
        return self(path, Interval(a, a + T))

    def describe(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "scope": self.scope.value,
            "related_length": self.related_length,
            "claims_doubly": self.claims_doubly,
        }


class PreparedFunctional:
    """Evaluator bound to one path; locate() works on grid node indices."""

    def __init__(self, path: DiscretePath):
        self.path = path

    def valid_range(self) -> tuple[int, int]:
        """Node index range [lo, hi] within which intervals may be queried."""
        return (0, self.path.n - 1)

    def locate(self, i: int, j: int) -> float:
        raise NotImplementedError


# -- extremum location ------------------------------------------------


class ExtremumLocation(LocationFunctional):
    """Leftmost time attaining the path supremum (or infimum) over I."""

    name = "extremum"
    claims_doubly = True

    def __init__(self, which: str = "sup"):
        if which not in ("sup", "inf"):
            raise ValueError("which must be 'sup' or 'inf'")
        self.which = which

    @property
    def params(self):
        return {"which": self.which}

    def prepare(self, path):
        return _PreparedExtremum(path, self.which)


class _PreparedExtremum(PreparedFunctional):
    def __init__(self, path, which):
        super().__init__(path)
        v = np.asarray(path.values)
        self.v = v if which == "sup" else -v

    def locate(self, i, j):
        k = int(np.argmax(self.v[i:j + 1]))
        return self.path.node_time(i + k)


# -- hitting time -----------------------------------------------------


class HittingTime(LocationFunctional):
    """First (or last) time the interpolated path equals a fixed level."""

    name = "hitting"
    claims_doubly = False

    def __init__(self, level: float, which: str = "first"):
        if which not in ("first", "last"):
            raise ValueError("which must be 'first' or 'last'")
        self.level = float(level)
        self.which = which

    @property
    def params(self):
        return {"level": self.level, "which": self.which}

    def prepare(self, path):
        if path.mode is not PathMode.CONTINUOUS_LINEAR:
            raise ValueError("hitting times need a CONTINUOUS_LINEAR path")
        return _PreparedHitting(path, self.level, self.which)


class _PreparedHitting(PreparedFunctional):
    def __init__(self, path, level, which):
        super().__init__(path)
        self.which = which
        v = np.asarray(path.values) - level
        self.v = v
        # segments [k, k+1] containing a solution of f(t) = level
        self.hit = (v[:-1] == 0.0) | (v[1:] == 0.0) | (v[:-1] * v[1:] < 0.0)

    def _segment_first(self, k: int) -> float:
        v0, v1 = self.v[k], self.v[k + 1]
        if v0 == 0.0:
            return self.path.node_time(k)
        if v1 == 0.0 and v0 * v1 >= 0.0:
            return self.path.node_time(k + 1)
        return self.path.node_time(k) + self.path.step * v0 / (v0 - v1)

    def _segment_last(self, k: int) -> float:
        v0, v1 = self.v[k], self.v[k + 1]
        if v1 == 0.0:
            return self.path.node_time(k + 1)
        if v0 == 0.0 and v0 * v1 >= 0.0:
            return self.path.node_time(k)
        return self.path.node_time(k) + self.path.step * v0 / (v0 - v1)

    def locate(self, i, j):
        segs = np.nonzero(self.hit[i:j])[0]
        if segs.size == 0:
            return INFTY
        if self.which == "first":
            return self._segment_first(i + int(segs[0]))
        return self._segment_last(i + int(segs[-1]))


# -- first jump -------------------------------------------------------


class FirstJump(LocationFunctional):
    """First grid node in I whose jump from the previous node exceeds a threshold."""

    name = "first_jump"
    claims_doubly = True

    def __init__(self, threshold: float = 0.0):
        if threshold < 0:
            raise ValueError("threshold must be >= 0")
        self.threshold = float(threshold)

    @property
    def params(self):
        return {"threshold": self.threshold}

    def prepare(self, path):
        if path.mode is not PathMode.CADLAG_STEP:
            raise ValueError("first_jump needs a CADLAG_STEP path")
        return _PreparedFirstJump(path, self.threshold)


class _PreparedFirstJump(PreparedFunctional):
    def __init__(self, path, threshold):
        super().__init__(path)
        v = np.asarray(path.values)
        # jump[k] corresponds to node k+1
        self.jump = np.abs(np.diff(v)) > threshold

    def locate(self, i, j):
        lo = max(i, 1)  # node 0 has no left limit on the grid
        hits = np.nonzero(self.jump[lo - 1: j])[0]
        if hits.size == 0:
            return INFTY
        return self.path.node_time(lo + int(hits[0]))


# -- increment pattern ------------------------------------------------


class IncrementPattern(LocationFunctional):
    """First grid t in I with f(t + t_i) - f(t) inside box I_i for all i.

    Depends only on path increments, hence vertically shift invariant by
    construction.
    """

    name = "increment_pattern"
    claims_doubly = True

    def __init__(self, offsets: Sequence[float], boxes: Sequence[tuple[float, float]]):
        offsets = [float(t) for t in offsets]
        if len(offsets) != len(boxes) or not offsets:
            raise ValueError("need equally many offsets and boxes, at least one")
        if any(t <= 0 for t in offsets) or any(
                b <= a for a, b in zip(offsets, offsets[1:])):
            raise ValueError("offsets must be strictly increasing and positive")
        self.offsets = tuple(offsets)
        self.boxes = tuple((float(lo), float(hi)) for lo, hi in boxes)
        for lo, hi in self.boxes:
            if not lo <= hi:
                raise ValueError(f"empty box [{lo}, {hi}]")

    @property
    def params(self):
        return {"offsets": list(self.offsets), "boxes": [list(b) for b in self.boxes]}

    def margins(self, path):
        return (0.0, self.offsets[-1])

    def prepare(self, path):
        return _PreparedIncrementPattern(path, self.offsets, self.boxes)


class _PreparedIncrementPattern(PreparedFunctional):
    def __init__(self, path, offsets, boxes):
        super().__init__(path)
        steps = []
        for t in offsets:
            if not is_grid_multiple(t, path.step):
                raise ValueError(f"offset {t} is not a multiple of step {path.step}")
            steps.append(round(t / path.step))
        self.m = steps
        v = np.asarray(path.values)
        n = path.n
        last = n - steps[-1]
        ok = np.ones(max(last, 0), dtype=bool)
        for mi, (lo, hi) in zip(steps, boxes):
            inc = v[mi:mi + last] - v[:last]
            ok &= (inc >= lo) & (inc <= hi)
        self.ok = ok

    def valid_range(self):
        return (0, self.path.n - 1 - self.m[-1])

    def locate(self, i, j):
        if j >= self.ok.size:
            raise OffsetOutOfDomain(
                "interval plus largest offset exceeds the sampled domain")
        hits = np.nonzero(self.ok[i:j + 1])[0]
        if hits.size == 0:
            return INFTY
        return self.path.node_time(i + int(hits[0]))


# -- mollified derivative hitting -------------------------------------


class MollifiedDerivativeHitting(LocationFunctional):
    """First time the derivative of the mollified path hits level h.

    Convolution commutes with vertical shifts and differentiation removes
    them, so the location depends only on the path's shape.
    """

    name = "mollified_derivative_hitting"
    claims_doubly = True

    def __init__(self, h: float, radius: float):
        self.h = float(h)
        self.radius = float(radius)

    @property
    def params(self):
        return {"h": self.h, "radius": self.radius}

    def margins(self, path):
        m = (math.ceil(self.radius / path.step - 1e-9) + 1) * path.step
        return (m, m)

    def prepare(self, path):
        return _PreparedMollifiedHitting(path, self.h, self.radius)


class _PreparedMollifiedHitting(PreparedFunctional):
    def __init__(self, path, h, radius):
        super().__init__(path)
        composed = differentiate(mollify(path, radius))
        # convolution noise leaves the derivative within ~1e-15 of exact
        # values; snap near-hits so affine stretches register as hits
        vals = np.asarray(composed.values).copy()
        vals[np.abs(vals - h) <= 1e-9] = h
        composed = DiscretePath(composed.origin, composed.step, vals,
                                composed.mode)
        self.offset = round((composed.origin - path.origin) / path.step)
        self.inner = _PreparedHitting(composed, h, "first")
        self.composed = composed

    def valid_range(self):
        return (self.offset, self.offset + self.composed.n - 1)

    def locate(self, i, j):
        lo, hi = self.valid_range()
        if i < lo or j > hi:
            raise ValueError("interval outside the mollified-derivative domain")
        return self.inner.locate(i - self.offset, j - self.offset)


# -- constrained hitting (local only) ---------------------------------


class ConstrainedHitting(LocationFunctional):
    """First hit of a level in [a, a+T], accepted only if within a+max_offset.

    A local intrinsic location functional whose naive global extension is
    not an intrinsic location functional.
    """

    name = "constrained_hitting"
    scope = Scope.LOCAL_ONLY
    claims_doubly = False

    def __init__(self, level: float, max_offset: float, related_length: float):
        if not max_offset > 0:
            raise ValueError("max_offset must be > 0")
        if not related_length > 0:
            raise ValueError("related_length must be > 0")
        self.level = float(level)
        self.max_offset = float(max_offset)
        self.related_length = float(related_length)

    @property
    def params(self):
        return {"level": self.level, "max_offset": self.max_offset,
                "related_length": self.related_length}

    def prepare(self, path):
        return _PreparedConstrainedHitting(path, self)


class _PreparedConstrainedHitting(PreparedFunctional):
    def __init__(self, path, func: ConstrainedHitting):
        super().__init__(path)
        self.inner = _PreparedHitting(path, func.level, "first")
        self.max_offset = func.max_offset

    def locate(self, i, j):
        t = self.inner.locate(i, j)
        a = self.path.node_time(i)
        if t <= a + self.max_offset + self.path.tol:
            return t
        return INFTY


class NaiveConstrainedHitting(LocationFunctional):
    """Global extension of constrained hitting that keeps 't <= a + max_offset'.

    Negative control: fails stability under restriction / consistency of
    existence, because the admissible zone moves with the interval's left
    endpoint.
    """

    name = "naive_constrained_hitting"
    claims_doubly = False

    def __init__(self, level: float, max_offset: float):
        self.level = float(level)
        self.max_offset = float(max_offset)

    @property
    def params(self):
        return {"level": self.level, "max_offset": self.max_offset}

    def prepare(self, path):
        return _PreparedNaiveConstrained(path, self.level, self.max_offset)


class _PreparedNaiveConstrained(PreparedFunctional):
    def __init__(self, path, level, max_offset):
        super().__init__(path)
        self.inner = _PreparedHitting(path, level, "first")
        self.max_offset = max_offset

    def locate(self, i, j):
        t = self.inner.locate(i, j)
        a = self.path.node_time(i)
        if t <= a + self.max_offset + self.path.tol:
            return t
        return INFTY


# -- catalog ----------------------------------------------------------

CATALOG_NAMES = (
    "extremum",
    "hitting",
    "first_jump",
    "increment_pattern",
    "mollified_derivative_hitting",
    "constrained_hitting",
    "naive_constrained_hitting",
)


def make_functional(name: str, params: dict) -> LocationFunctional:
    """Construct a catalog functional from its name and parameter map."""
    params = dict(params)
    try:
        if name == "extremum":
            return ExtremumLocation(**params)
        if name == "hitting":
            return HittingTime(**params)
        if name == "first_jump":
            return FirstJump(**params)
        if name == "increment_pattern":
            boxes = [tuple(b) for b in params.pop("boxes")]
            return IncrementPattern(params.pop("offsets"), boxes, **params)
        if name == "mollified_derivative_hitting":
            return MollifiedDerivativeHitting(**params)
        if name == "constrained_hitting":
            return ConstrainedHitting(**params)
        if name == "naive_constrained_hitting":
            return NaiveConstrainedHitting(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for functional {name!r}: {exc}") from exc
    raise ValueError(
        f"unknown functional {name!r}; valid names: {', '.join(CATALOG_NAMES)}")


# ---------------------------------------------------------------------
# interval enumeration
# ---------------------------------------------------------------------


def valid_node_range(func: LocationFunctional, path: DiscretePath) -> tuple[int, int]:
    """Grid node index range on which intervals for this functional may live."""
    ml, mr = func.margins(path)
    lo = int(math.ceil(ml / path.step - 1e-9))
    hi = path.n - 1 - int(math.ceil(mr / path.step - 1e-9))
    if hi - lo < 1:
        raise ValueError("path domain too small for this functional's margins")
    return lo, hi


def enumerate_index_pairs(lo: int, hi: int, cap: int = DEFAULT_PAIR_CAP,
                          extra: Sequence[tuple[int, int]] = ()) -> list[tuple[int, int]]:
    """All grid interval index pairs (i, j), i < j, in [lo, hi].

    Beyond ``cap`` pairs, a deterministic stride subsample is taken.
    ``extra`` pairs are always included (deduplicated, order preserved).
    """
    i, j = np.triu_indices(hi - lo + 1, k=1)
    pairs = list(zip((i + lo).tolist(), (j + lo).tolist()))
    if len(pairs) > cap:
        idx = np.linspace(0, len(pairs) - 1, cap).round().astype(int)
        pairs = [pairs[k] for k in np.unique(idx)]
    if extra:
        seen = set(pairs)
        for p in extra:
            if p not in seen:
                pairs.append(p)
                seen.add(p)
    return pairs


def enumerate_nested_pairs(pairs: Sequence[tuple[int, int]],
                           cap: int = DEFAULT_PAIR_CAP) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Deterministic nested interval pairs (I1, I2) with I2 a sub-interval of I1."""
    nested = []
    for (i, j) in pairs:
        if j - i < 2:
            continue
        third = (j - i) // 3
        candidates = {
            (i + 1, j), (i, j - 1), (i + 1, j - 1),
            (i + third, j - third) if j - 2 * third > i + third else (i, j),
        }
        for (p, q) in sorted(candidates):
            if i <= p < q <= j and (p, q) != (i, j):
                nested.append(((i, j), (p, q)))
    if len(nested) > cap:
        idx = np.linspace(0, len(nested) - 1, cap).round().astype(int)
        nested = [nested[k] for k in np.unique(idx)]
    return nested


def default_grid_shifts(path: DiscretePath, count: int = 3) -> list[float]:
    """Deterministic grid-multiple shifts spread over a few scales."""
    spans = [1, 7, max(1, (path.n - 1) // 4)]
    shifts = [k * path.step for k in spans[:count]]
    return shifts


# ---------------------------------------------------------------------
# axiom checkers
# ---------------------------------------------------------------------


def _in_interval(t: float, a: float, b: float, tol: float) -> bool:
    return a - tol <= t <= b + tol


def _times_equal(s: float, t: float, tol: float) -> bool:
    if math.isinf(s) or math.isinf(t):
        return math.isinf(s) and math.isinf(t)
    return abs(s - t) <= tol


def check_ilf_axioms(func: LocationFunctional, path: DiscretePath,
                     cap: int = DEFAULT_PAIR_CAP,
                     shifts: Sequence[float] | None = None) -> CheckReport:
    """Exhaustive grid check of the intrinsic-location-functional axioms.

    Checks, over an enumerated (capped) family of grid-aligned intervals:
    the range condition, shift compatibility for a set of grid shifts,
    stability under restriction, and consistency of existence for nested
    interval pairs.
    """
    if func.scope is not Scope.GLOBAL:
        raise ValueError("check_ilf_axioms applies to global functionals")
    report = CheckReport("ilf_axioms")
    prepared = func.prepare(path)
    lo, hi = valid_node_range(func, path)
    pairs = enumerate_index_pairs(lo, hi, cap)
    tol = path.tol
    tt = path.node_time

    evals: dict[tuple[int, int], float] = {}
    for (i, j) in pairs:
        t = prepared.locate(i, j)
        evals[(i, j)] = t
        report.trials += 1
        if not (math.isinf(t) or _in_interval(t, tt(i), tt(j), tol)):
            report.violations.append(
                ("range", (tt(i), tt(j)), f"in [{tt(i)}, {tt(j)}] or inf", t))

    # shift compatibility: L(f, I) = L(theta_c f, I - c) + c
    if shifts is None:
        shifts = default_grid_shifts(path)
    sample = pairs[:: max(1, len(pairs) // 50)]
    for c in shifts:
        shifted = shift(path, c)
        prep_c = func.prepare(shifted)
        for (i, j) in sample:
            report.trials += 1
            t = evals[(i, j)]
            tc = prep_c.locate(i, j)  # same node indices = interval I - c
            if not _times_equal(t, tc + c if math.isfinite(tc) else tc, tol):
                report.violations.append(
                    ("shift", (tt(i), tt(j), c), t, tc + c))

    # stability under restriction + consistency of existence
    for (I1, I2) in enumerate_nested_pairs(pairs, cap):
        report.trials += 1
        t1 = evals[I1]
        t2 = evals.get(I2)
        if t2 is None:
            t2 = evals[I2] = prepared.locate(*I2)
        a2, b2 = tt(I2[0]), tt(I2[1])
        if math.isfinite(t1) and _in_interval(t1, a2, b2, tol):
            if not _times_equal(t1, t2, tol):
                report.violations.append(
                    ("stability", (tt(I1[0]), tt(I1[1]), a2, b2), t1, t2))
        if math.isfinite(t2) and math.isinf(t1):
            report.violations.append(
                ("consistency", (tt(I1[0]), tt(I1[1]), a2, b2), t2, t1))
    return report


def check_vertical_invariance(func: LocationFunctional, path: DiscretePath,
                              shifts: Sequence[float],
                              cap: int = 200) -> CheckReport:
    """Compare L(f, I) with L(f + c, I) over a deterministic interval sample."""
    report = CheckReport("vertical_invariance")
    tol = path.tol
    if func.scope is Scope.LOCAL_ONLY:
        T = func.related_length
        starts = local_start_indices(func, path)
        starts = starts[:: max(1, len(starts) // cap)]
        base = [func.at(path, path.node_time(i)) for i in starts]
        for c in shifts:
            moved = path + c
            for i, t in zip(starts, base):
                report.trials += 1
                tc = func.at(moved, path.node_time(i))
                if not _times_equal(t, tc, tol):
                    report.violations.append(
                        ("vertical", (path.node_time(i), T, c), t, tc))
        return report

    prepared = func.prepare(path)
    lo, hi = valid_node_range(func, path)
    pairs = enumerate_index_pairs(lo, hi, cap)
    base = {p: prepared.locate(*p) for p in pairs}
    for c in shifts:
        prep_c = func.prepare(path + c)
        for (i, j) in pairs:
            report.trials += 1
            t, tc = base[(i, j)], prep_c.locate(i, j)
            if not _times_equal(t, tc, tol):
                report.violations.append(
                    ("vertical", (path.node_time(i), path.node_time(j), c), t, tc))
    return report


def local_start_indices(func: LocationFunctional, path: DiscretePath,
                        T: float | None = None) -> list[int]:
    """Grid node indices a such that [a, a+T] fits the functional's margins."""
    T = func.related_length if T is None else T
    ml, mr = func.margins(path)
    lo = int(math.ceil(ml / path.step - 1e-9))
    width = round(T / path.step)
    if not is_grid_multiple(T, path.step):
        raise ValueError(f"window length {T} is not a multiple of step {path.step}")
    hi = path.n - 1 - int(math.ceil(mr / path.step - 1e-9)) - width
    return list(range(lo, hi + 1))


def window_eval(func: LocationFunctional, path: DiscretePath, a: float,
                T: float) -> float:
    """L_T(f, a): a local functional directly, or a global one restricted."""
    if func.scope is Scope.LOCAL_ONLY:
        if abs(T - func.related_length) > path.tol:
            raise ValueError("window length differs from the related length")
        return func.at(path, a)
    return func(path, Interval(a, a + T))


def check_local_axioms(func: LocationFunctional, path: DiscretePath, T: float | None = None,
                       cap: int = DEFAULT_PAIR_CAP,
                       shifts: Sequence[float] | None = None) -> CheckReport:
    """Check the local intrinsic location functional axioms on all grid windows.

    A global functional is wrapped as L_T(f, a) = L(f, [a, a+T]).  The
    replacement axiom is checked for every pair of overlapping windows:
    if L_T(f, a) lands in [b, b+T] then either L_T(f, b) equals it, or
    L_T(f, b) lies in [b, b+T] outside [a, a+T].
    """
    T = func.related_length if T is None else T
    if T is None:
        raise ValueError("need a window length T")
    report = CheckReport("local_axioms")
    tol = path.tol
    starts = local_start_indices(func, path, T)
    tt = path.node_time
    locs = {i: window_eval(func, path, tt(i), T) for i in starts}

    # range condition
    for i in starts:
        report.trials += 1
        t = locs[i]
        if not (math.isinf(t) or _in_interval(t, tt(i), tt(i) + T, tol)):
            report.violations.append(("range", (tt(i), T), None, t))

    # shift compatibility on a sampled set of starts
    if shifts is None:
        shifts = default_grid_shifts(path, count=2)
    sample = starts[:: max(1, len(starts) // 25)]
    for c in shifts:
        moved = shift(path, c)
        for i in sample:
            report.trials += 1
            t = locs[i]
            tc = window_eval(func, moved, tt(i) - c, T)
            if not _times_equal(t, tc + c if math.isfinite(tc) else tc, tol):
                report.violations.append(("shift", (tt(i), c), t, tc + c))

    # replacement axiom (condition 4)
    width = round(T / path.step)
    checked = 0
    for a in starts:
        ta = locs[a]
        if not math.isfinite(ta):
            continue
        for b in starts:
            if b == a or abs(b - a) > width:
                continue
            A, B = tt(a), tt(b)
            if not _in_interval(ta, B, B + T, tol):
                continue
            checked += 1
            tb = locs[b]
            ok = _times_equal(ta, tb, tol) or (
                math.isfinite(tb)
                and _in_interval(tb, B, B + T, tol)
                and not _in_interval(tb, A, A + T, -tol)
            )
            if not ok:
                report.violations.append(("replacement", (A, B, T), ta, tb))
            if checked >= cap * 10:
                break
        if checked >= cap * 10:
            break
    report.trials += checked
    return report
