"""Partially ordered random set representations of location functionals.

The minimal representation of a functional on a fixed path is the set of
all locations it ever chooses, ordered by "chosen over": s1 precedes s2
whenever some enumerated window containing both picks s2.  The order is
stored as a covers edge set with its reflexive-transitive closure; a
2-cycle among distinct points certifies that the input was not a valid
(local) intrinsic location functional on this path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from randloc.paths import INFTY, DiscretePath, Interval
from randloc.functionals import (
    CheckReport,
    LocationFunctional,
    Scope,
    enumerate_index_pairs,
    local_start_indices,
    valid_node_range,
    window_eval,
)


class CycleDetected(ValueError):
    """The chosen-over relation has a cycle among distinct points."""


class MultipleMaxima(ValueError):
    """A window held several maximal points; the representation is invalid."""


class AgreementViolation(ValueError):
    """Local-to-global extension disagreed with the functional on an interior point."""

    def __init__(self, witnesses):
        self.witnesses = witnesses
        super().__init__(f"{len(witnesses)} interior disagreement(s), "
                         f"first: {witnesses[0]}")


def _transitive_closure(covers: np.ndarray) -> np.ndarray:
    """Reflexive-transitive closure of a boolean adjacency matrix."""
    reach = covers.copy()
    np.fill_diagonal(reach, True)
    while True:
        nxt = reach | (reach.astype(np.uint8) @ reach.astype(np.uint8) > 0)
        if np.array_equal(nxt, reach):
            return reach
        reach = nxt


def _dedupe_index(points: list[float], tol: float):
    """Sorted unique point list and a lookup callable time -> index."""
    pts = sorted(points)
    uniq: list[float] = []
    for t in pts:
        if not uniq or t - uniq[-1] > tol:
            uniq.append(t)
    arr = np.asarray(uniq)

    def index_of(t: float) -> int:
        k = int(np.searchsorted(arr, t))
        for c in (k - 1, k, k + 1):
            if 0 <= c < arr.size and abs(arr[c] - t) <= tol:
                return c
        raise KeyError(f"time {t} not among representation points")

    return arr, index_of


@dataclass
class OrderedSetRep:
    """Finite point set with a partial order given as covers + reachability."""

    points: np.ndarray            # sorted times
    covers: np.ndarray            # bool matrix, covers[i, j] = points[i] <=0 points[j]
    reach: np.ndarray             # reflexive-transitive closure of covers
    mode: str                     # "global" or "local"
    T: float | None = None        # related length when mode == "local"
    windows: list = field(default_factory=list)   # (a, b) time pairs enumerated
    tol: float = 0.0

    @property
    def size(self) -> int:
        return int(self.points.size)

    def index_of(self, t: float) -> int:
        arr = self.points
        k = int(np.searchsorted(arr, t))
        for c in (k - 1, k, k + 1):
            if 0 <= c < arr.size and abs(arr[c] - t) <= self.tol:
                return c
        raise KeyError(f"time {t} not among representation points")

    def strictly_below(self, i: int, j: int) -> bool:
        return bool(self.reach[i, j]) and i != j

    def to_dict(self) -> dict:
        ii, jj = np.nonzero(self.covers)
        return {
            "schema": 1,
            "mode": self.mode,
            "T": self.T,
            "points": [float(t) for t in self.points],
            "covers": sorted([int(a), int(b)] for a, b in zip(ii, jj)),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def build_minimal_representation(
    func: LocationFunctional,
    path: DiscretePath,
    mode: str,
    T: float | None = None,
    intervals: Sequence[tuple[int, int]] | None = None,
    cap: int = 5000,
) -> OrderedSetRep:
    """Minimal ordered-set representation over an enumerated window family.

    mode "global": windows are grid-aligned intervals (all pairs, capped);
    mode "local": windows are [a, a+T] for every admissible grid start.
    Points are all finite locations achieved; edges point from every
    co-resident point to the chosen one.
    """
    tol = path.tol
    tt = path.node_time
    if mode == "local":
        if T is None:
            T = func.related_length
        if T is None:
            raise ValueError("local mode needs a window length T")
        starts = local_start_indices(func, path, T)
        evals = [(tt(i), tt(i) + T, window_eval(func, path, tt(i), T))
                 for i in starts]
    elif mode == "global":
        if func.scope is Scope.LOCAL_ONLY:
            raise ValueError("global representation needs a global functional")
        prepared = func.prepare(path)
        if intervals is None:
            lo, hi = valid_node_range(func, path)
            intervals = enumerate_index_pairs(lo, hi, cap)
        evals = [(tt(i), tt(j), prepared.locate(i, j)) for (i, j) in intervals]
    else:
        raise ValueError(f"mode must be 'global' or 'local', got {mode!r}")

    finite = [t for (_, _, t) in evals if math.isfinite(t)]
    points, index_of = _dedupe_index(finite, tol)
    n = points.size
    covers = np.zeros((n, n), dtype=bool)
    for (a, b, t) in evals:
        if not math.isfinite(t):
            continue
        q = index_of(t)
        lo = int(np.searchsorted(points, a - tol))
        hi = int(np.searchsorted(points, b + tol))
        for p in range(lo, hi):
            if p != q:
                covers[p, q] = True

    reach = _transitive_closure(covers)
    mutual = reach & reach.T
    np.fill_diagonal(mutual, False)
    if mutual.any():
        i, j = map(int, np.argwhere(mutual)[0])
        raise CycleDetected(
            f"points {points[i]} and {points[j]} order each other; "
            "the functional is not a valid (local) ILF on this path")
    return OrderedSetRep(points=points, covers=covers, reach=reach, mode=mode,
                         T=T, windows=[(a, b) for (a, b, _) in evals], tol=tol)


def verify_partial_order(rep: OrderedSetRep) -> CheckReport:
    """Antisymmetry, discrete directness, and absence of 3-cycles in covers."""
    report = CheckReport("partial_order")
    n = rep.size
    reach, covers = rep.reach, rep.covers

    mutual = reach & reach.T
    np.fill_diagonal(mutual, False)
    report.trials += n * n
    for i, j in np.argwhere(mutual):
        report.violations.append(
            ("antisymmetry", (float(rep.points[i]), float(rep.points[j]))))

    # directness: comparable points that some enumerated window can see
    # together must share a direct chosen-over edge in one direction
    if rep.mode == "local" and rep.T is not None and rep.windows:
        starts = np.sort(np.array([a for a, _ in rep.windows]))
        for i in range(n):
            for j in range(i + 1, n):
                if rep.points[j] - rep.points[i] > rep.T + rep.tol:
                    break
                # a grid window [a, a+T] holding both points needs a
                # start in [points[j] - T, points[i]]; skip pairs whose
                # admissible range falls between grid starts
                lo = np.searchsorted(starts, rep.points[j] - rep.T - rep.tol)
                if lo >= starts.size or starts[lo] > rep.points[i] + rep.tol:
                    continue
                report.trials += 1
                comparable = reach[i, j] or reach[j, i]
                if comparable and not (covers[i, j] or covers[j, i]):
                    report.violations.append(
                        ("direct", (float(rep.points[i]), float(rep.points[j]))))

    # 3-cycles among covers edges
    report.trials += 1
    c = covers.astype(np.uint8)
    tri = ((c @ c) > 0) & covers.T
    for i, j in np.argwhere(tri):
        report.violations.append(
            ("three_cycle", (float(rep.points[j]), float(rep.points[i]))))
    return report


def _maximal_indices(rep: OrderedSetRep, sel: np.ndarray) -> list[int]:
    """Indices in sel with no strictly greater element inside sel."""
    sub = rep.reach[np.ix_(sel, sel)]
    strict = sub & ~sub.T
    return [int(p) for p in sel[~strict.any(axis=1)]]


def locate_via_representation(rep: OrderedSetRep, interval: Interval) -> float:
    """Location of the unique maximal representation point inside the interval."""
    if rep.mode == "local" and abs(interval.length - rep.T) > rep.tol:
        raise ValueError(
            f"local representation answers only windows of length {rep.T}")
    sel = np.nonzero((rep.points >= interval.a - rep.tol)
                     & (rep.points <= interval.b + rep.tol))[0]
    if sel.size == 0:
        return INFTY
    maxima = _maximal_indices(rep, sel)
    if len(maxima) != 1:
        raise MultipleMaxima(
            f"window [{interval.a}, {interval.b}] holds {len(maxima)} maxima")
    return float(rep.points[maxima[0]])


def check_representation_equivariance(func: LocationFunctional, path: DiscretePath,
                                      c: float, mode: str = "global",
                                      T: float | None = None,
                                      cap: int = 2000) -> CheckReport:
    """S(theta_c f) = S(f) - c with covers matching under the shift."""
    from randloc.paths import shift, is_grid_multiple

    report = CheckReport("representation_equivariance")
    if not is_grid_multiple(c, path.step):
        raise ValueError("shift must be a grid multiple")
    moved = shift(path, c)
    tol = path.tol

    # shifting moves node k from time t to t - c with its value unchanged,
    # so the window at indices (i, j) on `moved` is exactly I - c with the
    # same path content; compare identical index sets on both paths
    if mode == "global":
        lo, hi = valid_node_range(func, path)
        pairs = enumerate_index_pairs(lo, hi, cap)
        rep_f = build_minimal_representation(func, path, "global",
                                             intervals=pairs)
        rep_s = build_minimal_representation(func, moved, "global",
                                             intervals=pairs)
    else:
        T = func.related_length if T is None else T
        starts = local_start_indices(func, path, T)
        rep_f = _local_rep_on_starts(func, path, T, starts, tol)
        rep_s = _local_rep_on_starts(func, moved, T, starts, moved.tol)

    report.trials += 1
    if rep_f.size != rep_s.size:
        report.violations.append(
            ("point_count", rep_f.size, rep_s.size))
        return report
    diff = np.abs((rep_f.points - c) - rep_s.points)
    report.trials += rep_f.size
    for k in np.nonzero(diff > tol)[0]:
        report.violations.append(
            ("point_shift", float(rep_f.points[k]), float(rep_s.points[k])))
    if not report.violations and not np.array_equal(rep_f.covers, rep_s.covers):
        i, j = map(int, np.argwhere(rep_f.covers != rep_s.covers)[0])
        report.violations.append(
            ("covers_mismatch", float(rep_f.points[i]), float(rep_f.points[j])))
    report.trials += 1
    return report


def _local_rep_on_starts(func, path, T, starts, tol):
    tt = path.node_time
    evals = [(tt(i), tt(i) + T, window_eval(func, path, tt(i), T)) for i in starts]
    finite = [t for (_, _, t) in evals if math.isfinite(t)]
    points, index_of = _dedupe_index(finite, tol)
    n = points.size
    covers = np.zeros((n, n), dtype=bool)
    for (a, b, t) in evals:
        if not math.isfinite(t):
            continue
        q = index_of(t)
        lo = int(np.searchsorted(points, a - tol))
        hi = int(np.searchsorted(points, b + tol))
        for p in range(lo, hi):
            if p != q:
                covers[p, q] = True
    reach = _transitive_closure(covers)
    return OrderedSetRep(points=points, covers=covers, reach=reach, mode="local",
                         T=T, windows=[(a, b) for (a, b, _) in evals], tol=tol)


def check_minimal_inclusion(func: LocationFunctional, T: float,
                            path: DiscretePath, cap: int = 3000) -> CheckReport:
    """S_T(f) is included in S(f) and the local order embeds into the global one."""
    report = CheckReport("minimal_inclusion")
    if func.scope is not Scope.GLOBAL:
        raise ValueError("inclusion check needs a global functional")
    rep_local = build_minimal_representation(func, path, "local", T=T)
    # global enumeration must contain every length-T window for inclusion
    lo, hi = valid_node_range(func, path)
    width = round(T / path.step)
    extra = [(i, i + width) for i in range(lo, hi - width + 1)]
    pairs = enumerate_index_pairs(lo, hi, cap, extra=extra)
    rep_global = build_minimal_representation(func, path, "global",
                                              intervals=pairs)

    mapping: dict[int, int] = {}
    for k, t in enumerate(rep_local.points):
        report.trials += 1
        try:
            mapping[k] = rep_global.index_of(float(t))
        except KeyError:
            report.violations.append(("inclusion", float(t)))
    for i, j in np.argwhere(rep_local.reach):
        i, j = int(i), int(j)
        if i == j or i not in mapping or j not in mapping:
            continue
        report.trials += 1
        if not rep_global.reach[mapping[i], mapping[j]]:
            report.violations.append(
                ("order_embedding", float(rep_local.points[i]),
                 float(rep_local.points[j])))
    return report


@dataclass
class ExtensionResult:
    """Local-to-global extension built from the constancy and endpoint sets."""

    s1: np.ndarray
    s2: np.ndarray
    s_prime: np.ndarray
    rep: OrderedSetRep
    global_eval: Callable[[Interval], float]
    endpoint_warnings: list = field(default_factory=list)


def extend_local_to_global(func: LocationFunctional, path: DiscretePath,
                           T: float | None = None) -> ExtensionResult:
    """Extend a local functional to arbitrary intervals via its ordered set.

    S1 holds locations chosen by at least two consecutive grid starts (the
    finite analogue of an open interval of starts); S2 holds locations
    sitting at a window endpoint of their own window.  Evaluation takes
    the leftmost maximal element of (S1 union S2) inside the query
    interval.  Disagreements with the direct local evaluation are only
    tolerated at window endpoints; an interior disagreement raises.
    """
    T = func.related_length if T is None else T
    if T is None:
        raise ValueError("need a related length")
    tol = path.tol
    tt = path.node_time
    starts = local_start_indices(func, path, T)
    locs = [window_eval(func, path, tt(i), T) for i in starts]

    s1 = []
    for k in range(len(starts) - 1):
        if (math.isfinite(locs[k]) and math.isfinite(locs[k + 1])
                and abs(locs[k] - locs[k + 1]) <= tol):
            s1.append(locs[k])
    # A location strictly inside its choosing window is constant over a
    # run of starts of positive length, even when the grid samples that
    # run only once, so it also belongs to S1.
    for i, t in zip(starts, locs):
        if math.isfinite(t) and tt(i) + tol < t < tt(i) + T - tol:
            s1.append(t)
    s1_arr, _ = _dedupe_index(s1, tol)

    s2 = []
    for i, t in zip(starts, locs):
        if not math.isfinite(t):
            continue
        a = tt(i)
        if abs(t - a) <= tol or abs(t - (a + T)) <= tol:
            if s1_arr.size == 0 or np.min(np.abs(s1_arr - t)) > tol:
                s2.append(t)
    s2_arr, _ = _dedupe_index(s2, tol)

    points, index_of = _dedupe_index(list(s1_arr) + list(s2_arr), tol)
    n = points.size
    covers = np.zeros((n, n), dtype=bool)
    for i, t2 in zip(starts, locs):
        if not math.isfinite(t2):
            continue
        try:
            q = index_of(t2)
        except KeyError:
            continue  # location outside S'; carries no order information
        a, b = tt(i), tt(i) + T
        lo = int(np.searchsorted(points, a - tol))
        hi = int(np.searchsorted(points, b + tol))
        for p in range(lo, hi):
            if p != q and abs(points[p] - t2) < T - tol:
                covers[p, q] = True
    reach = _transitive_closure(covers)
    mutual = reach & reach.T
    np.fill_diagonal(mutual, False)
    if mutual.any():
        i, j = map(int, np.argwhere(mutual)[0])
        raise CycleDetected(
            f"extension order cycles between {points[i]} and {points[j]}")
    rep = OrderedSetRep(points=points, covers=covers, reach=reach, mode="global",
                        T=T, tol=tol)

    def global_eval(interval: Interval) -> float:
        sel = np.nonzero((points >= interval.a - tol)
                         & (points <= interval.b + tol))[0]
        if sel.size == 0:
            return INFTY
        maxima = _maximal_indices(rep, sel)
        return float(points[min(maxima)])  # leftmost-first rule

    interior = []
    warnings = []
    for i, t in zip(starts, locs):
        a, b = tt(i), tt(i) + T
        g = global_eval(Interval(a, b))
        if math.isfinite(t) and math.isfinite(g) and abs(t - g) <= tol:
            continue
        if math.isinf(t) and math.isinf(g):
            continue
        t_interior = math.isfinite(t) and a + tol < t < b - tol
        g_interior = math.isfinite(g) and a + tol < g < b - tol
        if t_interior or g_interior:
            interior.append((a, t, g))
        else:
            warnings.append((a, t, g))
    if interior:
        raise AgreementViolation(interior)
    return ExtensionResult(s1=s1_arr, s2=s2_arr, s_prime=points, rep=rep,
                           global_eval=global_eval,
                           endpoint_warnings=warnings)
