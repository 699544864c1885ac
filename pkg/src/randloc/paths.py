"""Discrete path representation and path-space transforms.

A path is a finite uniform grid of samples together with an interpolation
mode: piecewise linear for continuous paths, piecewise constant
(right-continuous) for cadlag paths.  Locations are plain floats; a
location that does not exist is the distinguished value ``INFTY``
(``math.inf``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

INFTY = math.inf

# relative tolerance for grid-alignment checks
GRID_RTOL = 1e-9


class PathMode(Enum):
    CONTINUOUS_LINEAR = "continuous_linear"
    CADLAG_STEP = "cadlag_step"


class NonGridShift(ValueError):
    """Horizontal shift is not an integer multiple of the grid step."""


class DomainTooSmall(ValueError):
    """A transform would leave fewer than the required number of nodes."""


class PathFormatError(ValueError):
    """A path file does not conform to the CSV path format."""


def is_grid_multiple(h: float, step: float, rtol: float = GRID_RTOL) -> bool:
    """True if h is an integer multiple of step within relative tolerance."""
    k = round(h / step)
    return abs(h - k * step) <= rtol * max(1.0, abs(h), step)


@dataclass(frozen=True)
class DiscretePath:
    """Uniformly sampled path; immutable after construction.

    value_at(t) interpolates linearly between neighbouring samples
    (CONTINUOUS_LINEAR) or returns the value of the latest grid node <= t
    (CADLAG_STEP).
    """

    origin: float
    step: float
    values: np.ndarray
    mode: PathMode

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("path needs at least 2 samples")
        if not (self.step > 0) or not math.isfinite(self.step):
            raise ValueError("step must be positive and finite")
        if not math.isfinite(self.origin):
            raise ValueError("origin must be finite")
        if not np.all(np.isfinite(vals)):
            raise ValueError("all path values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    # -- geometry -----------------------------------------------------

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def end(self) -> float:
        return self.origin + (self.n - 1) * self.step

    @property
    def tol(self) -> float:
        """Absolute time tolerance: 1e-9 times the domain length."""
        return 1e-9 * (self.end - self.origin)

    def times(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.n)

    def node_time(self, i: int) -> float:
        return self.origin + i * self.step

    def node_index(self, t: float) -> int:
        """Index of the grid node at time t; t must be grid-aligned."""
        k = round((t - self.origin) / self.step)
        if not 0 <= k < self.n:
            raise ValueError(f"time {t} outside sampled domain")
        if abs(t - self.node_time(k)) > self.tol + GRID_RTOL * self.step:
            raise ValueError(f"time {t} is not on the path grid")
        return int(k)

    def contains(self, t: float) -> bool:
        return self.origin - self.tol <= t <= self.end + self.tol

    # -- evaluation ---------------------------------------------------

    def value_at(self, t: float) -> float:
        if not self.contains(t):
            raise ValueError(f"time {t} outside domain [{self.origin}, {self.end}]")
        x = (t - self.origin) / self.step
        if self.mode is PathMode.CADLAG_STEP:
            k = int(math.floor(x + GRID_RTOL))
            return float(self.values[min(k, self.n - 1)])
        k = int(math.floor(x))
        k = min(max(k, 0), self.n - 2)
        frac = x - k
        return float(self.values[k] * (1 - frac) + self.values[k + 1] * frac)

    # -- construction helpers ----------------------------------------

    def with_values(self, values: np.ndarray, origin: float | None = None,
                    mode: PathMode | None = None) -> "DiscretePath":
        return DiscretePath(
            origin=self.origin if origin is None else origin,
            step=self.step,
            values=values,
            mode=self.mode if mode is None else mode,
        )

    def __add__(self, c: float) -> "DiscretePath":
        return self.with_values(np.asarray(self.values) + c)


@dataclass(frozen=True)
class Interval:
    """Compact non-degenerate interval [a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains(self, t: float, tol: float = 0.0) -> bool:
        return self.a - tol <= t <= self.b + tol

    def shifted(self, c: float) -> "Interval":
        return Interval(self.a + c, self.b + c)


# ---------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------


def shift(path: DiscretePath, h: float, v: float = 0.0) -> DiscretePath:
    """Return theta_h f + v: horizontal shift by h plus vertical shift by v.

    The shifted path evaluates at x to path(x + h); concretely the origin
    decreases by h.  h must be an integer multiple of the grid step.
    """
    if not is_grid_multiple(h, path.step):
        raise NonGridShift(f"shift {h} is not a multiple of step {path.step}")
    vals = np.asarray(path.values)
    if v != 0.0:
        vals = vals + v
    return DiscretePath(path.origin - h, path.step, vals, path.mode)


def mollifier_weights(radius: float, step: float) -> np.ndarray:
    """Grid samples of the bump kernel exp(-1/(1-x^2)), renormalized to sum 1."""
    kmax = int(math.ceil(radius / step))
    k = np.arange(-kmax, kmax + 1)
    x = k * step / radius
    w = np.zeros_like(x, dtype=float)
    inside = np.abs(x) < 1.0 - 1e-12
    w[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    # strip zero tails so the support matches the nonzero weights
    nz = np.nonzero(w)[0]
    w = w[nz[0]: nz[-1] + 1]
    return w / w.sum()


def mollify(path: DiscretePath, radius: float) -> DiscretePath:
    """Convolve the path with the compactly supported bump kernel.

    Output is a CONTINUOUS_LINEAR path on the eroded domain
    [origin + radius, end - radius], same grid step.  The discrete kernel
    is renormalized to sum 1 so constants are preserved exactly.
    """
    if radius < 2 * path.step * (1 - GRID_RTOL):
        raise ValueError(f"radius {radius} must be >= 2*step = {2 * path.step}")
    w = mollifier_weights(radius, path.step)
    half = (w.size - 1) // 2
    # erode enough nodes that the output domain starts at >= origin+radius
    erode = int(math.ceil(radius / path.step - GRID_RTOL))
    if path.n - 2 * erode < 2:
        raise DomainTooSmall(
            f"eroded domain has {max(path.n - 2 * erode, 0)} nodes, need >= 2")
    conv = np.convolve(np.asarray(path.values), w, mode="valid")
    # conv[i] is centred on node half + i; keep centres erode .. n-1-erode
    lo = erode - half
    out = conv[lo: conv.size - lo] if lo > 0 else conv
    return DiscretePath(path.origin + erode * path.step, path.step, out,
                        PathMode.CONTINUOUS_LINEAR)


def differentiate(path: DiscretePath) -> DiscretePath:
    """Central finite differences at interior nodes."""
    if path.mode is not PathMode.CONTINUOUS_LINEAR:
        raise ValueError("differentiate requires a CONTINUOUS_LINEAR path")
    if path.n < 4:
        # the interior grid must itself be a valid path (>= 2 nodes)
        raise DomainTooSmall("differentiate needs at least 4 nodes")
    v = np.asarray(path.values)
    d = (v[2:] - v[:-2]) / (2 * path.step)
    return DiscretePath(path.origin + path.step, path.step, d,
                        PathMode.CONTINUOUS_LINEAR)


# ---------------------------------------------------------------------
# CSV path format: header `t,value`, uniform spacing
# ---------------------------------------------------------------------


def save_path_csv(path: DiscretePath, fileobj) -> None:
    writer = csv.writer(fileobj)
    writer.writerow(["t", "value"])
    for t, v in zip(path.times(), path.values):
        writer.writerow([repr(float(t)), repr(float(v))])


def load_path_csv(fileobj, mode: PathMode) -> DiscretePath:
    rows = (line for line in fileobj if not line.lstrip().startswith("#"))
    reader = csv.reader(rows)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["t", "value"]:
        raise PathFormatError("expected CSV header 't,value'")
    ts: list[float] = []
    vs: list[float] = []
    for row in reader:
        if not row:
            continue
        if len(row) != 2:
            raise PathFormatError(f"malformed row: {row!r}")
        ts.append(float(row[0]))
        vs.append(float(row[1]))
    if len(ts) < 2:
        raise PathFormatError("need at least 2 samples")
    t = np.asarray(ts)
    steps = np.diff(t)
    step = float(np.mean(steps))
    if step <= 0 or np.max(np.abs(steps - step)) > 1e-6 * max(abs(step), 1e-300):
        raise PathFormatError("grid spacing is not uniform (rel tol 1e-6)")
    return DiscretePath(float(t[0]), step, np.asarray(vs), mode)
