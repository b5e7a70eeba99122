"""Study configuration read from TOML files.

A config holds a ``[study]`` table (tag, replicas, seed, ladders), a
``[problem]`` table (coefficients, grid, exponents) and an optional
``[tolerances]`` table overriding the defaults below::

    [study]
    name = "stability"
    replicas = 200
    seed = 2024
    ladder = [4, 16, 64, 256]

    [problem]
    coefficients = "linear"
    params = { a0 = -0.5, c1 = 0.3 }
    n_steps = 4096
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

STUDIES = ("moments", "stability", "uniqueness", "convergence", "norms")

DEFAULT_TOLERANCES: dict[str, float] = {
    "n_se": 3.0,
    "stability_eps": 0.5,
    "spearman_min": 0.5,
    "uniqueness_tol": 1e-2,
    "slope_tol_ode": 0.2,
    "slope_tol_ito": 0.15,
    "strong_error_max": 5e-2,
    "norm_rtol": 1e-2,
    "monotone_slack": 1e-12,
}


class ConfigError(ValueError):
    """Invalid or inconsistent study configuration."""


@dataclass(frozen=True)
class ProblemSpec:
    coefficients: str = "linear"
    params: dict[str, float] = field(default_factory=dict)
    x0: float = 1.0
    r: float = 0.25
    T: float = 1.0
    n_steps: int = 1024
    H: float = 0.7
    alpha: float = 0.35
    gamma: float | None = None
    theta: float = 1.0

    @property
    def gamma_eff(self) -> float:
        # fBm is gamma-Hölder for every gamma < H
        return self.H - 0.02 if self.gamma is None else self.gamma

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    @property
    def n_hist(self) -> int:
        k = self.r / self.dt
        if abs(k - round(k)) > 1e-9 * max(1.0, k) or round(k) < 1:
            raise ConfigError(f"delay r={self.r} is not a positive multiple of dt={self.dt}")
        return int(round(k))

    def at_steps(self, n_steps: int) -> "ProblemSpec":
        return replace(self, n_steps=int(n_steps))


@dataclass(frozen=True)
class StudyConfig:
    study: str
    problem: ProblemSpec = field(default_factory=ProblemSpec)
    replicas: int = 200
    seed: int = 0
    p: tuple[float, ...] = (2.0, 4.0, 8.0)
    ladder: tuple[int, ...] = (4, 16, 64, 256)
    N: tuple[float, ...] = (14.0, 16.0, 18.0, 22.0, float("inf"))
    levels: tuple[tuple[int, float], ...] = ((4096, 64.0), (16384, 256.0))
    variant: str = "geometric"
    dt_ladder: tuple[int, ...] = (6, 7, 8, 9, 10)
    driver: str = "fbm"
    jobs: int = 1
    out: str = "results"
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ConfigError(f"unknown study {self.study!r}; choose from {STUDIES}")
        if int(self.replicas) != self.replicas or self.replicas < 1:
            raise ConfigError(f"replicas must be a positive integer, got {self.replicas}")
        if any(p < 1 for p in self.p):
            raise ConfigError(f"moment orders must be >= 1, got {self.p}")
        for name in ("ladder", "dt_ladder"):
            lad = getattr(self, name)
            if any(b <= a for a, b in zip(lad, lad[1:])):
                raise ConfigError(f"{name} must be strictly increasing, got {lad}")
        if any(b[0] <= a[0] or b[1] <= a[1] for a, b in zip(self.levels, self.levels[1:])):
            raise ConfigError(f"refinement levels must increase in both entries, got {self.levels}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance keys {sorted(unknown)}")
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.tolerances)
        object.__setattr__(self, "tolerances", tol)

    def with_overrides(self, **kw) -> "StudyConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self

    def flat(self) -> dict[str, Any]:
        """Flattened ``key -> value`` view for ``meta.txt``."""
        d = asdict(self)
        prob = d.pop("problem")
        tol = d.pop("tolerances")
        out = {k: v for k, v in d.items()}
        out.update({f"problem.{k}": v for k, v in prob.items()})
        out.update({f"tolerance.{k}": v for k, v in tol.items()})
        return out


def _tuple(v, cast=float):
    return tuple(cast(x) for x in v)


def config_from_dict(data: dict[str, Any]) -> StudyConfig:
    study = dict(data.get("study", {}))
    problem = dict(data.get("problem", {}))
    tolerances = dict(data.get("tolerances", {}))
    if "name" not in study:
        raise ConfigError("[study] needs a name")
    try:
        prob = ProblemSpec(**problem)
    except TypeError as exc:
        raise ConfigError(f"bad [problem] table: {exc}") from None
    kw: dict[str, Any] = {}
    casts = {
        "replicas": int, "seed": int, "jobs": int, "out": str, "variant": str, "driver": str,
        "p": lambda v: _tuple(v), "ladder": lambda v: _tuple(v, int), "dt_ladder": lambda v: _tuple(v, int),
        "N": lambda v: tuple(float("inf") if x in ("inf", "infinity") else float(x) for x in v),
        "levels": lambda v: tuple((int(a), float(b)) for a, b in v),
    }
    for key, value in study.items():
        if key == "name":
            continue
        if key not in casts:
            raise ConfigError(f"unknown [study] key {key!r}")
        kw[key] = casts[key](value)
    return StudyConfig(study=study["name"], problem=prob, tolerances=tolerances, **kw)


def load_config(path) -> StudyConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return config_from_dict(data)


def config_from_json(text: str) -> StudyConfig:
    """Inverse of ``json.dumps(dataclasses.asdict(config))``."""
    d = json.loads(text)
    prob = ProblemSpec(**d.pop("problem"))
    seqs = {"p": float, "ladder": int, "N": float, "dt_ladder": int}
    for key, cast in seqs.items():
        d[key] = tuple(cast(x) for x in d[key])
    d["levels"] = tuple((int(a), float(b)) for a, b in d["levels"])
    return StudyConfig(problem=prob, **d)
