"""Bounded symmetric priors: point mass at zero mixed with a spread density on [-m, m]."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate
from scipy.special import betainc, betaln

from .errors import ArgumentError

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class NoiseModel:
    sigma: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ArgumentError(f"sigma must be positive and finite, got {self.sigma}")


def _check_common(alpha, m):
    if not 0 <= alpha < 1:
        raise ArgumentError(f"point-mass weight alpha must lie in [0, 1), got {alpha}")
    if not (math.isfinite(m) and m > 0):
        raise ArgumentError(f"bound m must be positive and finite, got {m}")


class _SpreadPrior:
    """Shared behaviour. Subclasses provide ``log_density`` on the open support."""

    alpha: float
    m: float
    family = ""

    # interior points where the spread density is not smooth
    def kinks(self) -> tuple[float, ...]:
        return ()

    # exponent e with g(x) ~ (m - |x|)**e near the edges (Gauss-Jacobi weight)
    @property
    def edge_exponent(self) -> float:
        return 0.0

    @property
    def spread_sd(self) -> float:
        raise NotImplementedError

    def log_density(self, x):
        raise NotImplementedError

    def density(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.exp(self.log_density(x))

    def cdf(self, k: float) -> float:
        """P(theta <= k) under the spread density alone (adaptive quadrature)."""
        if k <= -self.m:
            return 0.0
        if k >= self.m:
            return 1.0
        pts = [p for p in self.kinks() if -self.m < p < k]
        val, _ = integrate.quad(
            lambda t: float(self.density(t)), -self.m, k,
            points=pts or None, limit=200, epsabs=1e-13, epsrel=1e-12,
        )
        return val

    def spread_second_moment(self) -> float:
        val, _ = integrate.quad(
            lambda t: t * t * float(self.density(t)), -self.m, self.m,
            points=[p for p in self.kinks()] or None, limit=200, epsabs=1e-13,
        )
        return val

    def total_mass(self) -> float:
        val, _ = integrate.quad(
            lambda t: float(self.density(t)), -self.m, self.m,
            points=[p for p in self.kinks()] or None, limit=200, epsabs=1e-13,
        )
        return val

    def with_params(self, alpha: float, m: float):
        return replace(self, alpha=alpha, m=m)

    def describe(self) -> str:
        return f"{self.family}(alpha={self.alpha:g}, m={self.m:g})"


@dataclass(frozen=True)
class BetaPrior(_SpreadPrior):
    """Symmetric beta on [-m, m]: g(x) = (m^2 - x^2)^(a-1) / ((2m)^(2a-1) B(a, a))."""

    alpha: float
    a: float
    m: float
    family = "beta"

    def __post_init__(self):
        _check_common(self.alpha, self.m)
        if not (math.isfinite(self.a) and self.a > 0):
            raise ArgumentError(f"shape a must be positive, got {self.a}")

    @property
    def edge_exponent(self) -> float:
        return self.a - 1.0

    @property
    def spread_sd(self) -> float:
        return self.m / math.sqrt(2 * self.a + 1)

    def log_norm(self) -> float:
        return -(2 * self.a - 1) * math.log(2 * self.m) - betaln(self.a, self.a)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        m = self.m
        inside = np.abs(x) < m
        out = np.full(x.shape, -np.inf)
        xi = x[inside]
        # (m - x)(m + x) avoids cancellation in m^2 - x^2 near the edges
        out[inside] = (self.a - 1) * (np.log(m - xi) + np.log(m + xi)) + self.log_norm()
        if self.a == 1:
            out[np.abs(x) == m] = self.log_norm()
        return out

    def cdf(self, k: float) -> float:
        """P(theta <= k) under the spread density: a regularized incomplete beta."""
        if k <= -self.m:
            return 0.0
        if k >= self.m:
            return 1.0
        return float(betainc(self.a, self.a, (k + self.m) / (2 * self.m)))

    def describe(self) -> str:
        return f"beta(a={self.a:g}, alpha={self.alpha:g}, m={self.m:g})"


@dataclass(frozen=True)
class UniformPrior(_SpreadPrior):
    alpha: float
    m: float
    family = "uniform"

    def __post_init__(self):
        _check_common(self.alpha, self.m)

    @property
    def spread_sd(self) -> float:
        return self.m / math.sqrt(3.0)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= self.m, -math.log(2 * self.m), -np.inf)


@dataclass(frozen=True)
class TriangularPrior(_SpreadPrior):
    """Triangular density (m - |x|)/m^2, the convolution of two uniforms on [-m/2, m/2]."""

    alpha: float
    m: float
    family = "triangular"

    def __post_init__(self):
        _check_common(self.alpha, self.m)

    def kinks(self):
        return (0.0,)

    @property
    def spread_sd(self) -> float:
        return self.m / math.sqrt(6.0)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(
                np.abs(x) < self.m,
                np.log(np.maximum(self.m - np.abs(x), 0.0)) - 2 * math.log(self.m),
                -np.inf,
            )


@dataclass(frozen=True)
class BickelPrior(_SpreadPrior):
    """Spread density (1/m) cos^2(pi x / 2m) on [-m, m]."""

    alpha: float
    m: float
    family = "bickel"

    def __post_init__(self):
        _check_common(self.alpha, self.m)

    @property
    def spread_sd(self) -> float:
        return self.m * math.sqrt(1.0 / 3.0 - 2.0 / math.pi**2)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        c = np.cos(np.pi * x / (2 * self.m)) ** 2
        with np.errstate(divide="ignore"):
            return np.where(np.abs(x) < self.m, np.log(c) - math.log(self.m), -np.inf)


Prior = BetaPrior | UniformPrior | TriangularPrior | BickelPrior


def spread_density(prior: Prior, x):
    """Spread density g(x) of ``prior``; zero outside [-m, m]. Scalar in, float out."""
    out = prior.density(x)
    return float(out) if np.ndim(out) == 0 else out


def make_prior(family: str, alpha: float, m: float, a: float = 2.0) -> Prior:
    family = family.lower()
    if family == "beta":
        return BetaPrior(alpha=alpha, a=a, m=m)
    if family == "triangular":
        return TriangularPrior(alpha=alpha, m=m)
    if family == "bickel":
        return BickelPrior(alpha=alpha, m=m)
    if family == "uniform":
        return UniformPrior(alpha=alpha, m=m)
    raise ArgumentError(f"unknown prior family {family!r}")
