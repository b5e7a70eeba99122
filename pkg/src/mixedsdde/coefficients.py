"""Registry of built-in coefficient sets and sampling-based validation of
the growth, Fréchet, local Lipschitz and time-Hölder assumptions.

Built-ins are scalar (``d = m = l = 1``) and broadcast over leading batch
axes of the segment, so they can drive batched solves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .solver import CoefficientSet, segment_of

_REGISTRY: dict[str, Callable[..., CoefficientSet]] = {}


def register(name: str):
    def deco(fn):
        _REGISTRY[name] = fn
        return fn

    return deco


def available() -> list[str]:
    return sorted(_REGISTRY)


def build_coefficients(name: str, **params) -> CoefficientSet:
    """Instantiate a registered coefficient set, e.g. ``build_coefficients("geometric", mu=0.1)``."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown coefficient set {name!r}; choose from {available()}") from None
    return factory(**params)


def _col(x):
    return x[..., None]


def _lag(seg):
    return seg(-seg.r)


@register("zero")
def zero() -> CoefficientSet:
    def a(t, seg):
        return np.zeros_like(seg(0.0))

    def bc(t, seg):
        return _col(np.zeros_like(seg(0.0)))

    form = {"terms": [], "stochastic": False}
    return CoefficientSet(a, bc, bc, growth=0.0, frechet_bound=0.0, lipschitz=lambda R: 0.0,
                          beta=1.0, time_holder=0.0, name="zero", params={"_linear_form": form})


@register("linear")
def linear(a0=0.0, a1=0.0, a2=0.0, b0=0.0, b1=0.0, b2=0.0, c0=0.0, c1=0.0, c2=0.0) -> CoefficientSet:
    """Affine in the current and the fully delayed state.

    ``a = a0 psi(0) + a1 psi(-r) + a2``, likewise for ``b`` and ``c``.
    """

    def affine(k0, k1, k2):
        if k1 == 0.0:
            return lambda seg: k0 * seg(0.0) + k2
        return lambda seg: k0 * seg(0.0) + k1 * _lag(seg) + k2

    fa, fb, fc = affine(a0, a1, a2), affine(b0, b1, b2), affine(c0, c1, c2)
    coef = [a0, a1, a2, b0, b1, b2, c0, c1, c2]
    growth = sum(abs(v) for v in coef)
    lip = abs(a0) + abs(a1) + abs(b0) + abs(b1)
    stochastic = any(v != 0.0 for v in coef[3:])
    form = {"terms": [(0.0, a0, False), (1.0, a1, True)], "forcing": a2, "stochastic": stochastic}
    return CoefficientSet(
        a=lambda t, seg: fa(seg),
        b=lambda t, seg: _col(fb(seg)),
        c=lambda t, seg: _col(fc(seg)),
        growth=growth,
        frechet_bound=abs(c0) + abs(c1),
        lipschitz=lambda R: lip,
        beta=1.0,
        time_holder=0.0,
        name="linear",
        params=dict(a0=a0, a1=a1, a2=a2, b0=b0, b1=b1, b2=b2, c0=c0, c1=c1, c2=c2, _linear_form=form),
    )


@register("pure_delay")
def pure_delay(k=1.0) -> CoefficientSet:
    """``x'(t) = k x(t - r)``."""
    co = linear(a1=k)
    return CoefficientSet(co.a, co.b, co.c, growth=abs(k), frechet_bound=0.0, lipschitz=lambda R: abs(k),
                          beta=1.0, time_holder=0.0, name="pure_delay", params={"k": k, **co.params})


@register("geometric")
def geometric(mu=0.0, sigma=0.0, nu=0.0) -> CoefficientSet:
    """``dX = mu X dt + sigma X dW + nu X dZ`` without delay dependence."""
    co = linear(a0=mu, b0=sigma, c0=nu)
    return CoefficientSet(co.a, co.b, co.c, growth=co.growth, frechet_bound=abs(nu),
                          lipschitz=co.lipschitz, beta=1.0, time_holder=0.0, name="geometric",
                          params={"mu": mu, "sigma": sigma, "nu": nu, **co.params})


def geometric_exact(x0: float, mu: float, sigma: float, nu: float, t, W, Z):
    """``x0 exp((mu - sigma^2/2) t + sigma W + nu Z)``: Itô for ``W``, chain rule for ``Z``."""
    return x0 * np.exp((mu - 0.5 * sigma**2) * t + sigma * W + nu * Z)


@register("bounded_diffusion")
def bounded_diffusion(mu=-0.5, mu_delay=0.3, sigma=0.5, nu=0.3, nu0=0.2) -> CoefficientSet:
    """Linear drift, ``b = sigma cos(psi(-r))`` and ``c = nu sin(psi(0)) + nu0``; ``|b| <= |sigma|``."""

    def a(t, seg):
        return mu * seg(0.0) + mu_delay * _lag(seg)

    def b(t, seg):
        return _col(sigma * np.cos(_lag(seg)))

    def c(t, seg):
        return _col(nu * np.sin(seg(0.0)) + nu0)

    growth = abs(mu) + abs(mu_delay) + abs(sigma) + abs(nu) + abs(nu0)
    return CoefficientSet(
        a, b, c,
        growth=growth,
        frechet_bound=abs(nu),
        lipschitz=lambda R: abs(mu) + abs(mu_delay) + abs(sigma),
        beta=1.0,
        time_holder=0.0,
        name="bounded_diffusion",
        params=dict(mu=mu, mu_delay=mu_delay, sigma=sigma, nu=nu, nu0=nu0, b_bound=abs(sigma)),
    )


# ---------------------------------------------------------------- validation


def _mnorm(x) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=float)))


def _cnorm(values) -> float:
    return float(np.linalg.norm(values, axis=-1).max())


def random_segment_sampler(r: float, n_points: int = 65, d: int = 1):
    """Sampler ``(rng, R) -> values`` of random-walk segments with ``||psi||_C <= R``."""

    def sample(rng, R):
        steps = rng.standard_normal((n_points, d))
        walk = np.cumsum(steps, axis=0) + rng.standard_normal(d) * math.sqrt(n_points)
        scale = R * rng.uniform(0.05, 1.0) / max(_cnorm(walk), 1e-300)
        return walk * scale

    sample.r = r
    return sample


@dataclass
class ValidationReport:
    """Largest observed ratios against the declared constants."""

    name: str
    growth_ratio: float
    lipschitz_ratios: dict[float, float]
    lipschitz_slope: float
    time_holder_ratio: float
    frechet_ratio: float
    declared: dict[str, float | None]
    flags: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flags

    def lines(self) -> list[str]:
        out = [
            f"coefficients = {self.name}",
            f"growth_ratio = {self.growth_ratio!r}",
            f"frechet_ratio = {self.frechet_ratio!r}",
            f"time_holder_ratio = {self.time_holder_ratio!r}",
            f"lipschitz_slope = {self.lipschitz_slope!r}",
        ]
        out += [f"lipschitz_ratio[R={R!r}] = {v!r}" for R, v in self.lipschitz_ratios.items()]
        out += [f"flag = {f}" for f in self.flags]
        return out


def validate_coefficients(
    coeffs: CoefficientSet,
    sampler,
    trials: int = 200,
    radii=(2.0, 4.0, 8.0, 16.0),
    T: float = 1.0,
    seed: int = 0,
    eps: float = 1e-6,
    slope_limit: float = 0.5,
    rtol: float = 1e-6,
) -> ValidationReport:
    """Probe the coefficient assumptions on random segments.

    ``sampler(rng, R)`` returns segment values on ``[-r, 0]`` with sup norm at
    most ``R``; ``sampler.r`` is the delay. Ratios are maxima over the trials:
    growth ``(|a|+|b|+|c|)/(1+||psi||)``, Lipschitz ``sum of increments /
    ||psi1 - psi2||`` per radius, time-Hölder ``|c(s)-c(t)| / (|s-t|^beta (1+||psi||))``
    and directional Fréchet quotients of ``c``. A Lipschitz ratio growing
    with ``R`` (log-log slope above ``slope_limit``) is flagged as local only.
    Violations of declared constants are flagged, never raised.
    """
    rng = np.random.default_rng(seed)
    r = sampler.r
    beta = coeffs.beta if coeffs.beta is not None else 1.0

    def seg(values, t=0.0):
        return segment_of(values, r, t)

    def parts(t, v):
        s = seg(v, t)
        return coeffs.a(t, s), coeffs.b(t, s), coeffs.c(t, s)

    growth = 0.0
    lip: dict[float, float] = {}
    holder = 0.0
    frechet = 0.0
    for R in radii:
        best = 0.0
        for _ in range(trials):
            t = float(rng.uniform(0.0, T))
            p1, p2 = sampler(rng, R), sampler(rng, R)
            a1, b1, c1 = parts(t, p1)
            a2, b2, c2 = parts(t, p2)
            growth = max(growth, (_mnorm(a1) + _mnorm(b1) + _mnorm(c1)) / (1.0 + _cnorm(p1)))
            dist = _cnorm(p1 - p2)
            if dist > 0:
                best = max(best, (_mnorm(a1 - a2) + _mnorm(b1 - b2)) / dist)
            s = float(rng.uniform(0.0, T))
            if s != t:
                cs = coeffs.c(s, seg(p1, s))
                holder = max(holder, _mnorm(cs - c1) / (abs(s - t) ** beta * (1.0 + _cnorm(p1))))
            h = sampler(rng, 1.0)
            hn = _cnorm(h)
            if hn > 0:
                ch = coeffs.c(t, seg(p1 + eps * h, t))
                frechet = max(frechet, _mnorm(ch - c1) / (eps * hn))
        lip[float(R)] = best

    Rs = np.array(list(lip), dtype=float)
    Ls = np.array(list(lip.values()))
    if len(Rs) >= 2 and np.all(Ls > 0):
        slope = float(np.polyfit(np.log(Rs), np.log(Ls), 1)[0])
    else:
        slope = 0.0

    flags = []
    declared = {
        "growth": coeffs.growth,
        "frechet_bound": coeffs.frechet_bound,
        "time_holder": coeffs.time_holder,
        "beta": coeffs.beta,
    }
    slack = 1.0 + rtol
    if coeffs.growth is not None and growth > coeffs.growth * slack + rtol:
        flags.append(f"growth ratio {growth:.6g} exceeds declared {coeffs.growth}")
    if coeffs.frechet_bound is not None and frechet > coeffs.frechet_bound * slack + 1e3 * eps:
        flags.append(f"Fréchet quotient {frechet:.6g} exceeds declared {coeffs.frechet_bound}")
    if coeffs.time_holder is not None and holder > coeffs.time_holder * slack + rtol:
        flags.append(f"time-Hölder ratio {holder:.6g} exceeds declared {coeffs.time_holder}")
    if coeffs.lipschitz is not None:
        for R, v in lip.items():
            bound = coeffs.lipschitz(R)
            if v > bound * slack + rtol:
                flags.append(f"Lipschitz ratio {v:.6g} at R={R} exceeds declared {bound}")
    if slope > slope_limit:
        flags.append(f"Lipschitz ratio grows with R (slope {slope:.3f}); only locally Lipschitz")
    return ValidationReport(coeffs.name, growth, lip, slope, holder, frechet, declared, flags)
