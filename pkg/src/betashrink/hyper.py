"""Hyperparameter selection: noise level, level-dependent (alpha, m), and the
percentile method for the beta shape."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ArgumentError, DegenerateConstraintError, NoSolutionError, ShapeError
from .priors import BetaPrior
from .wavelets import WaveletDecomposition

MAD_CONSTANT = 0.6745
DEFAULT_J0 = 3


@dataclass(frozen=True)
class HyperPolicy:
    """How a decomposition's per-level hyperparameters are chosen.

    ``sigma=None`` means estimate it from the finest detail level.
    ``overrides`` maps a level to a fixed ``(alpha, m)`` pair.
    ``fixed_a``, when set, replaces the shape of beta rules.
    """

    gamma: float = 2.0
    J0: int = DEFAULT_J0
    fixed_a: float | None = None
    sigma: float | None = None
    overrides: dict[int, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.gamma > 0:
            raise ArgumentError(f"gamma must be positive, got {self.gamma}")
        if self.J0 < 0:
            raise ArgumentError(f"J0 must be >= 0, got {self.J0}")
        if self.sigma is not None and not self.sigma > 0:
            raise ArgumentError(f"sigma must be positive, got {self.sigma}")
        if self.fixed_a is not None and not self.fixed_a > 0:
            raise ArgumentError(f"fixed_a must be positive, got {self.fixed_a}")

    def level_params(self, decomp: WaveletDecomposition, j: int) -> tuple[float, float]:
        """(alpha(j), m(j)) for level ``j``, honouring overrides."""
        if j in self.overrides:
            alpha, m = self.overrides[j]
            return float(alpha), float(m)
        return alpha_level(j, decomp.J0, self.gamma), m_level(decomp, j)

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "J0": self.J0,
            "fixed_a": self.fixed_a,
            "sigma": self.sigma,
            "overrides": {str(j): list(v) for j, v in sorted(self.overrides.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> HyperPolicy:
        over = {int(j): (float(v[0]), float(v[1])) for j, v in (d.get("overrides") or {}).items()}
        return cls(
            gamma=float(d.get("gamma", 2.0)),
            J0=int(d.get("J0", DEFAULT_J0)),
            fixed_a=None if d.get("fixed_a") is None else float(d["fixed_a"]),
            sigma=None if d.get("sigma") is None else float(d["sigma"]),
            overrides=over,
        )


def estimate_sigma(decomp: WaveletDecomposition) -> float:
    """Median absolute finest-level detail coefficient divided by 0.6745."""
    finest = decomp.details.get(decomp.J - 1)
    if finest is None or finest.size == 0:
        raise ShapeError("finest detail level is empty")
    # np.median averages the two middle values for even lengths
    return float(np.median(np.abs(finest)) / MAD_CONSTANT)


def alpha_level(j: int, J0: int, gamma: float = 2.0) -> float:
    """Point-mass weight 1 - 1/(j - J0 + 1)**gamma; zero at the primary level."""
    if j < J0:
        raise ArgumentError(f"level {j} is below the primary level {J0}")
    if not gamma > 0:
        raise ArgumentError("gamma must be positive")
    return 1.0 - 1.0 / (j - J0 + 1) ** gamma


def m_level(decomp: WaveletDecomposition, j: int) -> float:
    if j not in decomp.details:
        raise ArgumentError(f"level {j} not present (levels {decomp.J0}..{decomp.J - 1})")
    d = decomp.details[j]
    return float(np.max(np.abs(d))) if d.size else 0.0


@dataclass(frozen=True)
class ElicitationResult:
    a: float
    achieved_p: float
    at_bracket_edge: bool


def _beta_cdf(a: float, k: float, m: float) -> float:
    return BetaPrior(alpha=0.0, a=a, m=m).cdf(k)


def elicit_a_detailed(
    k: float, p: float, m: float, lo: float = 1e-3, hi: float = 1e3, tol: float = 1e-6
) -> ElicitationResult:
    """Solve P(theta <= k) = p for the beta shape ``a`` (percentile method)."""
    if not -m < k < m:
        raise ArgumentError(f"k must lie strictly inside (-{m}, {m})")
    if not 0 < p < 1:
        raise ArgumentError("p must lie in (0, 1)")
    if k == 0 or p == 0.5:
        if k == 0 and p == 0.5:
            raise DegenerateConstraintError("k=0, p=0.5 holds for every a by symmetry")
        raise NoSolutionError(f"no a > 0 gives P(theta <= {k}) = {p}")
    if (k < 0) != (p < 0.5):
        raise NoSolutionError("k and p lie on incompatible sides of the symmetry point")

    def f(log_a):
        return _beta_cdf(math.exp(log_a), k, m) - p

    f_lo, f_hi = f(math.log(lo)), f(math.log(hi))
    if f_lo * f_hi > 0:
        raise NoSolutionError(
            f"no sign change for a in [{lo:g}, {hi:g}] "
            f"(F-p = {f_lo:.3g} .. {f_hi:.3g})"
        )
    root = optimize.brentq(f, math.log(lo), math.log(hi), xtol=1e-14, rtol=1e-14, maxiter=200)
    a = math.exp(root)
    achieved = _beta_cdf(a, k, m)
    if abs(achieved - p) > tol:
        raise NoSolutionError(f"root check failed: F(k)={achieved:.10g} vs p={p:.10g}")
    edge = a < lo * 1.01 or a > hi / 1.01
    return ElicitationResult(a, achieved, edge)


def elicit_a(k: float, p: float, m: float) -> float:
    return elicit_a_detailed(k, p, m).a
