"""TOML run configuration: parsing, defaulting, strict validation.

Unknown keys are hard errors with a dotted key path, so a typo cannot
silently change a run.  The Monte Carlo seed is mandatory: runs must be
reproducible by construction, never seeded from the wall clock.
"""

from __future__ import annotations

from dataclasses import dataclass, field

try:
    import tomllib as tomli
except ModuleNotFoundError:  # python < 3.11
    import tomli

from randloc.functionals import CATALOG_NAMES, LocationFunctional, make_functional
from randloc.processes import BadParams, ProcessSpec, RngSeed

__all__ = ["ConfigError", "RunConfig", "load_config"]


class ConfigError(ValueError):
    """Configuration rejected; message carries the offending key path."""


_PROCESS_PARAMS = {
    "ou": {"theta", "sigma"},
    "ou_transient": {"theta", "sigma", "x0"},
    "brownian": {"sigma"},
    "moving_average": {"window", "sigma"},
    "compound_poisson": {"rate", "jump_mean", "jump_sd"},
    "modulated_bm": {"sigma", "amplitude"},
}

_SECTIONS = {
    "process", "grid", "window", "mc", "output",
    "functional", "axioms", "represent", "profile", "diagnose",
}


@dataclass
class RunConfig:
    process: ProcessSpec
    functionals: list[LocationFunctional]
    grid: tuple[float, float, int]
    window: tuple[float, float]          # (a, T)
    n: int
    bins: int
    seed: RngSeed
    output_dir: str = "out"
    axioms_cap: int = 5000
    axioms_shifts: list[float] = field(default_factory=list)
    represent_mode: str = "global"
    represent_cap: int = 2000
    diagnose_starts: list[float] = field(default_factory=list)


def _require(table: dict, key: str, path: str):
    if key not in table:
        raise ConfigError(f"{path}.{key} required")
    return table[key]


def _check_keys(table: dict, allowed: set[str], path: str):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}.{key}; "
                              f"allowed: {', '.join(sorted(allowed))}")


def load_config(text: str) -> RunConfig:
    """Parse, default, and validate a TOML run configuration."""
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config does not parse: {exc}") from exc
    _check_keys(raw, _SECTIONS, "config")

    proc = _require(raw, "process", "config")
    family = _require(proc, "family", "process")
    if family not in _PROCESS_PARAMS:
        raise ConfigError(
            f"process.family {family!r} unknown; valid: "
            f"{', '.join(sorted(_PROCESS_PARAMS))}")
    _check_keys(proc, _PROCESS_PARAMS[family] | {"family"}, "process")
    params = {k: v for k, v in proc.items() if k != "family"}
    try:
        spec = ProcessSpec(family, params)
    except BadParams as exc:
        raise ConfigError(f"process: {exc}") from exc

    grid = _require(raw, "grid", "config")
    _check_keys(grid, {"origin", "step", "count"}, "grid")
    origin = float(grid.get("origin", 0.0))
    step = float(_require(grid, "step", "grid"))
    count = int(_require(grid, "count", "grid"))
    if step <= 0 or count < 2:
        raise ConfigError("grid needs step > 0 and count >= 2")

    window = _require(raw, "window", "config")
    _check_keys(window, {"a", "T"}, "window")
    a = float(_require(window, "a", "window"))
    T = float(_require(window, "T", "window"))
    if T <= 0:
        raise ConfigError("window.T must be > 0")
    end = origin + (count - 1) * step
    if not (origin <= a and a + T <= end + step * 1e-9):
        raise ConfigError(
            f"window [{a}, {a + T}] does not fit grid [{origin}, {end}]")

    mc = _require(raw, "mc", "config")
    _check_keys(mc, {"n", "bins", "seed", "stream"}, "mc")
    if "seed" not in mc:
        raise ConfigError("mc.seed required")
    seed = RngSeed(int(mc["seed"]), int(mc.get("stream", 0)))
    n = int(mc.get("n", 1000))
    bins = int(mc.get("bins", 20))
    if n < 1 or bins < 1:
        raise ConfigError("mc needs n >= 1 and bins >= 1")

    funcs = []
    for idx, entry in enumerate(raw.get("functional", [])):
        path = f"functional[{idx}]"
        name = _require(entry, "name", path)
        if name not in CATALOG_NAMES:
            raise ConfigError(
                f"{path}.name {name!r} not in catalog; valid: "
                f"{', '.join(CATALOG_NAMES)}")
        fparams = {k: v for k, v in entry.items() if k != "name"}
        try:
            funcs.append(make_functional(name, fparams))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if not funcs:
        raise ConfigError("at least one [[functional]] required")

    out = raw.get("output", {})
    _check_keys(out, {"dir"}, "output")

    ax = raw.get("axioms", {})
    _check_keys(ax, {"cap", "shifts"}, "axioms")
    rep = raw.get("represent", {})
    _check_keys(rep, {"mode", "cap"}, "represent")
    mode = rep.get("mode", "global")
    if mode not in ("global", "local"):
        raise ConfigError("represent.mode must be 'global' or 'local'")
    diag = raw.get("diagnose", {})
    _check_keys(diag, {"starts"}, "diagnose")
    _check_keys(raw.get("profile", {}), set(), "profile")

    return RunConfig(
        process=spec,
        functionals=funcs,
        grid=(origin, step, count),
        window=(a, T),
        n=n,
        bins=bins,
        seed=seed,
        output_dir=str(out.get("dir", "out")),
        axioms_cap=int(ax.get("cap", 5000)),
        axioms_shifts=[float(c) for c in ax.get("shifts", [])],
        represent_mode=mode,
        represent_cap=int(rep.get("cap", 2000)),
        diagnose_starts=[float(s) for s in diag.get("starts", [])],
    )
