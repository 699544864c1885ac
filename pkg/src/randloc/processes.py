"""Seeded samplers for stationary, stationary-increment, and neither-class processes.

All samplers use counter-based Philox streams keyed by (seed, stream,
path index), so identical (seed, stream, spec, grid) gives bit-identical
paths regardless of batch size or worker scheduling.  Raw randoms are
drawn per path from its own stream; the recursion / accumulation step is
vectorized over whole blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.signal import lfilter

from randloc.paths import DiscretePath, PathMode


class ProcessClass(Enum):
    STATIONARY = "stationary"
    STATIONARY_INCREMENTS = "stationary_increments"
    NEITHER = "neither"


class BadParams(ValueError):
    """Process parameters outside their valid range."""


FAMILIES = ("ou", "moving_average", "brownian", "compound_poisson",
            "ou_transient", "modulated_bm")

_CLASS_OF = {
    "ou": ProcessClass.STATIONARY,
    "moving_average": ProcessClass.STATIONARY,
    "brownian": ProcessClass.STATIONARY_INCREMENTS,
    "compound_poisson": ProcessClass.STATIONARY_INCREMENTS,
    "ou_transient": ProcessClass.NEITHER,
    "modulated_bm": ProcessClass.NEITHER,
}


@dataclass(frozen=True)
class RngSeed:
    seed: int
    stream: int = 0

    def generator(self, path_index: int) -> np.random.Generator:
        key = [
            self.seed & 0xFFFFFFFFFFFFFFFF,
            ((self.stream & 0xFFFFFFFF) << 32) | (path_index & 0xFFFFFFFF),
        ]
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class ProcessSpec:
    """A named process family with parameters and its asserted class label."""

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise BadParams(f"unknown family {self.family!r}; valid: {FAMILIES}")
        p = self.params
        if self.family in ("ou", "ou_transient"):
            if p.get("theta", 1.0) <= 0:
                raise BadParams("ou needs theta > 0")
            if p.get("sigma", 1.0) < 0:
                raise BadParams("ou needs sigma >= 0")
        if self.family == "moving_average":
            if int(p.get("window", 1)) < 1:
                raise BadParams("moving_average needs window >= 1")
        if self.family == "compound_poisson":
            if p.get("rate", 1.0) <= 0:
                raise BadParams("compound_poisson needs rate > 0")
        if self.family == "modulated_bm":
            if not 0 <= p.get("amplitude", 0.5) < 1:
                raise BadParams("modulated_bm needs 0 <= amplitude < 1")

    @property
    def process_class(self) -> ProcessClass:
        return _CLASS_OF[self.family]

    @property
    def mode(self) -> PathMode:
        if self.family == "compound_poisson":
            return PathMode.CADLAG_STEP
        return PathMode.CONTINUOUS_LINEAR

    def describe(self) -> dict:
        return {"family": self.family, "params": dict(self.params),
                "class": self.process_class.value}


# -- per-path raw draws (deterministic order within each stream) ------


def _draw_raw(spec: ProcessSpec, rng: np.random.Generator, n: int,
              step: float) -> np.ndarray:
    fam = spec.family
    if fam in ("ou", "ou_transient", "brownian", "modulated_bm"):
        return rng.standard_normal(n)  # [initial z, n-1 innovation z's]
    if fam == "moving_average":
        w = int(spec.params.get("window", 5))
        return rng.standard_normal(n + w - 1)
    if fam == "compound_poisson":
        lam = spec.params.get("rate", 1.0)
        raw = np.empty(2 * (n - 1))
        raw[: n - 1] = rng.poisson(lam * step, n - 1)
        raw[n - 1:] = rng.standard_normal(n - 1)
        return raw
    raise BadParams(f"unknown family {fam!r}")


def _transform(spec: ProcessSpec, raw: np.ndarray, times: np.ndarray,
               step: float) -> np.ndarray:
    """Turn a (rows, raw_len) block of raw randoms into path values."""
    p = spec.params
    n = times.size
    fam = spec.family

    if fam in ("ou", "ou_transient"):
        theta = p.get("theta", 1.0)
        sigma = p.get("sigma", 1.0)
        rho = math.exp(-theta * step)
        innov_sd = sigma * math.sqrt((1 - rho * rho) / (2 * theta))
        if fam == "ou":
            x0 = (sigma / math.sqrt(2 * theta)) * raw[:, 0]
        else:
            x0 = np.full(raw.shape[0], float(p.get("x0", 5.0)))
        xi = innov_sd * raw[:, 1:]
        # exact transition X_{k+1} = rho X_k + innov, run as an IIR filter
        out, _ = lfilter([1.0], [1.0, -rho], xi, axis=1, zi=(rho * x0)[:, None])
        return np.concatenate([x0[:, None], out], axis=1)

    if fam == "brownian":
        sigma = p.get("sigma", 1.0)
        inc = sigma * math.sqrt(step) * raw[:, 1:]
        out = np.zeros((raw.shape[0], n))
        np.cumsum(inc, axis=1, out=out[:, 1:])
        return out

    if fam == "moving_average":
        w = int(p.get("window", 5))
        sigma = p.get("sigma", 1.0)
        c = np.cumsum(sigma * raw, axis=1)
        out = np.empty((raw.shape[0], n))
        out[:, 0] = c[:, w - 1]
        out[:, 1:] = c[:, w:] - c[:, : n - 1]
        return out / w

    if fam == "compound_poisson":
        jump_mean = p.get("jump_mean", 0.0)
        jump_sd = p.get("jump_sd", 1.0)
        counts = raw[:, : n - 1]
        z = raw[:, n - 1:]
        sums = jump_mean * counts + jump_sd * np.sqrt(counts) * z
        out = np.zeros((raw.shape[0], n))
        np.cumsum(sums, axis=1, out=out[:, 1:])
        return out

    if fam == "modulated_bm":
        amp = p.get("amplitude", 0.5)
        sigma = p.get("sigma", 1.0)
        scale = 1.0 + amp * np.sin(times[:-1])
        inc = sigma * math.sqrt(step) * raw[:, 1:] * scale
        out = np.zeros((raw.shape[0], n))
        np.cumsum(inc, axis=1, out=out[:, 1:])
        return out

    raise BadParams(f"unknown family {fam!r}")


def sample_path_matrix(spec: ProcessSpec, origin: float, step: float, count: int,
                       n_paths: int, seed: RngSeed, first_index: int = 0,
                       batch: int = 4096) -> np.ndarray:
    """(n_paths, count) matrix of sample paths; row i uses stream (seed, stream, first_index+i)."""
    if step <= 0 or count < 2 or n_paths < 1:
        raise BadParams("need step > 0, count >= 2, n_paths >= 1")
    times = origin + step * np.arange(count)
    probe = _draw_raw(spec, seed.generator(first_index), count, step)
    raw_len = probe.size
    out = np.empty((n_paths, count))
    done = 0
    while done < n_paths:
        m = min(batch, n_paths - done)
        raw = np.empty((m, raw_len))
        for r in range(m):
            if done + r == 0:
                raw[r] = probe
            else:
                raw[r] = _draw_raw(spec, seed.generator(first_index + done + r),
                                   count, step)
        out[done: done + m] = _transform(spec, raw, times, step)
        done += m
    return out


def sample_paths(spec: ProcessSpec, origin: float, step: float, count: int,
                 n_paths: int, seed: RngSeed) -> list[DiscretePath]:
    """n_paths independent DiscretePath samples of the given process."""
    mat = sample_path_matrix(spec, origin, step, count, n_paths, seed)
    mode = spec.mode
    return [DiscretePath(origin, step, row, mode) for row in mat]
