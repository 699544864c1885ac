"""The sliding-window location profile g(x) = L_T(f, x) - x and its structure.

For a valid local functional the profile decomposes into maximal runs on
which the location is a fixed time d (so g has slope -1) or is infinite.
Adjacent runs obey combination rules: a location can vanish from the
window interior only when replaced at the right edge, and can appear in
the interior only when one expires at the left edge.  At grid scale the
one-sided limits become one-grid-step approximations.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from randloc.paths import INFTY, DiscretePath, Interval, PathMode
from randloc.functionals import (
    CheckReport,
    LocationFunctional,
    Scope,
    local_start_indices,
    window_eval,
)


class MalformedProfile(ValueError):
    """A profile run violates the piece invariants; the input was not a local ILF."""


@dataclass
class GProfile:
    """g sampled at every grid window start; inf entries mark empty windows."""

    starts: np.ndarray
    g: np.ndarray
    T: float
    step: float

    def location(self) -> np.ndarray:
        """L(x) = g(x) + x, the absolute location per start."""
        return self.g + self.starts

    def to_csv(self, fileobj) -> None:
        writer = csv.writer(fileobj)
        writer.writerow(["x", "g"])
        for x, g in zip(self.starts, self.g):
            writer.writerow([repr(float(x)), "inf" if math.isinf(g) else repr(float(g))])


@dataclass
class ProfilePiece:
    left: float
    right: float
    kind: str                     # "linear" or "infinite"
    d: float | None = None        # the pinned location for linear pieces
    left_closed: bool = True
    right_closed: bool = True

    def to_dict(self) -> dict:
        return {"left": self.left, "right": self.right, "kind": self.kind,
                "d": self.d, "left_closed": self.left_closed,
                "right_closed": self.right_closed}


def pieces_to_json(pieces: list[ProfilePiece]) -> str:
    return json.dumps({"schema": 1, "pieces": [p.to_dict() for p in pieces]},
                      sort_keys=True)


def compute_g_profile(func: LocationFunctional, path: DiscretePath,
                      T: float | None = None,
                      query: Interval | None = None) -> GProfile:
    """Evaluate g(x) = L_T(f, x) - x at every grid start in the query range."""
    T = func.related_length if T is None else T
    if T is None:
        raise ValueError("need a window length T")
    idx = local_start_indices(func, path, T)
    tt = path.node_time
    if query is not None:
        idx = [i for i in idx if query.a - path.tol <= tt(i) <= query.b + path.tol]
        if not idx:
            raise ValueError("query range holds no admissible window starts")
    starts = np.array([tt(i) for i in idx])
    g = np.array([window_eval(func, path, tt(i), T) for i in idx]) - starts
    return GProfile(starts=starts, g=g, T=T, step=path.step)


def partition_g_profile(profile: GProfile) -> list[ProfilePiece]:
    """Roughest partition into constant-location (slope -1) and infinite runs.

    Stretches where the location tracks a window endpoint (g identically 0
    or T) decompose into singleton linear pieces, since the pinned
    location d changes with every start.
    """
    starts, g, T = profile.starts, profile.g, profile.T
    tol = 1e-9 * max(T, 1.0)
    pieces: list[ProfilePiece] = []
    k = 0
    n = starts.size
    while k < n:
        if math.isinf(g[k]):
            j = k
            while j + 1 < n and math.isinf(g[j + 1]):
                j += 1
            pieces.append(ProfilePiece(float(starts[k]), float(starts[j]),
                                       "infinite"))
        else:
            d = g[k] + starts[k]
            j = k
            while (j + 1 < n and math.isfinite(g[j + 1])
                   and abs(g[j + 1] + starts[j + 1] - d) <= tol):
                j += 1
            left, right = float(starts[k]), float(starts[j])
            if right - left > T + tol:
                raise MalformedProfile(
                    f"linear run [{left}, {right}] longer than T={T}")
            if not (right - tol <= d <= left + T + tol):
                raise MalformedProfile(
                    f"pinned location {d} outside [{right}, {left + T}]")
            pieces.append(ProfilePiece(left, right, "linear", d=float(d)))
        k = j + 1
    return pieces


def check_combination_rules(pieces: list[ProfilePiece],
                            profile: GProfile) -> CheckReport:
    """Boundary conditions between adjacent pieces, one grid step of slack.

    Discrete reading: unless the incoming piece starts within one step of
    g = T, the outgoing piece must end within one step of g = 0; and
    unless the outgoing piece ends within one step of g = 0, the incoming
    piece must start within one step of g = T.
    """
    report = CheckReport("combination_rules")
    step, T = profile.step, profile.T
    slack = step + 1e-9
    x0 = float(profile.starts[0])

    def g_at(x: float) -> float:
        return float(profile.g[round((x - x0) / step)])

    for prev, nxt in zip(pieces, pieces[1:]):
        report.trials += 1
        g_end = g_at(prev.right)      # last value of the outgoing piece
        g_start = g_at(nxt.left)      # first value of the incoming piece
        starts_at_top = math.isfinite(g_start) and g_start >= T - slack
        ends_at_zero = math.isfinite(g_end) and g_end <= slack
        if not starts_at_top and not ends_at_zero:
            report.violations.append(
                ("boundary", (prev.right, nxt.left), g_end, g_start))
    report.statistics["slack"] = slack
    return report


def check_location_monotonicity(profile: GProfile) -> CheckReport:
    """Monotone locations, constancy between equal values, infinity gaps, slow decrease."""
    report = CheckReport("location_monotonicity")
    starts, g, T = profile.starts, profile.g, profile.T
    tol = 1e-9 * max(T, 1.0)
    L = g + starts
    fin = np.nonzero(np.isfinite(g))[0]

    # (i) L nondecreasing over finite entries
    for a, b in zip(fin, fin[1:]):
        report.trials += 1
        if L[b] < L[a] - tol:
            report.violations.append(
                ("nondecreasing", (float(starts[a]), float(starts[b])),
                 float(L[a]), float(L[b])))

    # (ii) equal finite locations pin L on the whole in-between range;
    # non-constant finite interiors already violate (i), so only interior
    # infinities need flagging here
    for k in range(fin.size - 1):
        a, b = fin[k], fin[k + 1]
        report.trials += 1
        if b > a + 1 and abs(L[a] - L[b]) <= tol:
            report.violations.append(
                ("constancy_gap", (float(starts[a]), float(starts[b])),
                 float(L[a]), "interior infinities"))

    # (iii) infinities at both ends of a gap <= T pin infinity in between
    inf_idx = np.nonzero(np.isinf(g))[0]
    for k in range(inf_idx.size - 1):
        a, b = inf_idx[k], inf_idx[k + 1]
        report.trials += 1
        if (b > a + 1 and starts[b] - starts[a] <= T + tol
                and np.isfinite(g[a + 1: b]).any()):
            report.violations.append(
                ("infinity_gap", (float(starts[a]), float(starts[b]))))

    # (iv) slow decrease g(x) - g(y) <= y - x for x < y, finite
    for a, b in zip(fin, fin[1:]):
        report.trials += 1
        if g[a] - g[b] > (starts[b] - starts[a]) + tol:
            report.violations.append(
                ("slow_decrease", (float(starts[a]), float(starts[b])),
                 float(g[a]), float(g[b])))
    return report


# ---------------------------------------------------------------------
# converse direction: synthesize a valid profile, materialize as a functional
# ---------------------------------------------------------------------


def synthesize_profile(rng: np.random.Generator, starts: np.ndarray,
                       T: float, step: float) -> GProfile:
    """Random profile made of valid pieces obeying the combination rules.

    Pieces either run until their location expires at the left window edge
    (g down to ~0, after which anything may follow) or are cut early, in
    which case the next piece must start at the right window edge
    (g = T).  Infinite pieces may only follow an expired piece and must be
    followed by a right-edge entry.
    """
    n = starts.size
    g = np.empty(n)
    k = 0
    ends_free = True  # previous piece decayed to g <= step
    while k < n:
        if ends_free and rng.random() < 0.25:
            # infinite piece
            run = int(rng.integers(1, max(2, n // 4)))
            j = min(k + run, n)
            g[k:j] = INFTY
            k = j
            ends_free = False
            continue
        if ends_free:
            # location may appear anywhere in the window
            d = starts[k] + float(rng.integers(0, round(T / step) + 1)) * step
        else:
            d = starts[k] + T  # must enter at the right edge
        width = round((d - starts[k]) / step)
        cut = int(rng.integers(1, width + 2))  # how many starts the run survives
        j = min(k + min(cut, width + 1), n)
        idx = np.arange(k, j)
        g[idx] = d - starts[idx]
        ends_free = bool(g[j - 1] <= step + 1e-12)
        k = j
    return GProfile(starts=starts.copy(), g=g, T=T, step=step)


class SyntheticProfileFunctional(LocationFunctional):
    """Local functional materialized from a profile, keyed to the path origin.

    The profile is stored as offsets from the path origin, so evaluating
    on a horizontally shifted path shifts the locations along with it.
    """

    name = "synthetic_profile"
    scope = Scope.LOCAL_ONLY
    claims_doubly = True

    def __init__(self, profile: GProfile, anchor_origin: float):
        self.related_length = profile.T
        self.profile = profile
        self.anchor = anchor_origin

    @property
    def params(self):
        return {"T": self.related_length}

    def prepare(self, path):
        raise NotImplementedError("evaluated via at() only")

    def at(self, path: DiscretePath, a: float) -> float:
        # horizontal shift of the path moves the profile along with it:
        # L_T(theta_c f, a - c) = L_T(f, a) - c
        c = self.anchor - path.origin
        a0 = a + c
        k = round((a0 - self.profile.starts[0]) / self.profile.step)
        if not 0 <= k < self.profile.starts.size:
            raise ValueError("start outside the synthesized profile range")
        gv = self.profile.g[k]
        return INFTY if math.isinf(gv) else float(a + gv)

    def __call__(self, path, interval):
        if abs(interval.length - self.related_length) > path.tol:
            raise ValueError("synthetic functional is local-only")
        return self.at(path, interval.a)
