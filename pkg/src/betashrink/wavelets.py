"""Periodic orthogonal discrete wavelet transform with Daubechies filters.

Coefficients are stored level by level: ``details[j]`` holds the 2**j detail
coefficients d_{j,k} for J0 <= j <= J-1, and ``scaling`` the 2**J0 scaling
coefficients at the primary level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .errors import LevelError, ShapeError, UnsupportedFilterError

MAX_VANISHING_MOMENTS = 20


@dataclass(frozen=True, eq=False)
class WaveletFilter:
    lowpass: np.ndarray
    vanishing_moments: int

    def __post_init__(self):
        h = np.asarray(self.lowpass, dtype=float)
        h.setflags(write=False)
        object.__setattr__(self, "lowpass", h)
        check_filter(h, self.vanishing_moments)

    @property
    def highpass(self) -> np.ndarray:
        h = self.lowpass
        g = h[::-1].copy()
        g[1::2] *= -1
        return g

    def __len__(self):
        return self.lowpass.size


def check_filter(h: np.ndarray, n_moments: int, tol: float = 1e-10) -> None:
    """Raise UnsupportedFilterError unless ``h`` is an orthonormal lowpass filter."""
    if h.size != 2 * n_moments:
        raise UnsupportedFilterError(f"expected {2 * n_moments} taps, got {h.size}")
    if abs(h.sum() - np.sqrt(2.0)) > tol:
        raise UnsupportedFilterError("lowpass taps must sum to sqrt(2)")
    for shift in range(h.size // 2):
        s = np.dot(h[: h.size - 2 * shift], h[2 * shift :])
        if abs(s - (shift == 0)) > tol:
            raise UnsupportedFilterError(f"orthogonality fails at shift {shift}")


@lru_cache(maxsize=None)
def _extremal_phase_taps(n_moments: int) -> tuple[float, ...]:
    # Spectral factorization of the Daubechies half-band polynomial, done
    # in extended precision so that N=20 still meets the 1e-10 invariants.
    with mpmath.workdps(60):
        coeffs = [mpmath.binomial(n_moments - 1 + k, k) for k in range(n_moments)]
        if n_moments > 1:
            y_roots = mpmath.polyroots(coeffs[::-1], maxsteps=500, extraprec=400)
        else:
            y_roots = []
        z_roots = []
        for y in y_roots:
            b = 2 - 4 * y
            disc = mpmath.sqrt(b * b - 4)
            r = (b + disc) / 2
            z_roots.append(r if abs(r) < 1 else (b - disc) / 2)
        poly = [mpmath.mpc(1)]
        for z in z_roots + [-1] * n_moments:
            nxt = [mpmath.mpc(0)] * (len(poly) + 1)
            for i, c in enumerate(poly):
                nxt[i] += c
                nxt[i + 1] -= z * c
            poly = nxt
        taps = [mpmath.re(c) for c in poly]
        total = sum(taps)
        return tuple(float(t * mpmath.sqrt(2) / total) for t in taps)


def daubechies_filter(vanishing_moments: int) -> WaveletFilter:
    """Extremal-phase Daubechies filter with ``vanishing_moments`` null moments.

    N=1 is Haar; N=10 is the 20-tap filter commonly called Daub10 / db10.
    """
    n = vanishing_moments
    if isinstance(n, bool) or int(n) != n or not 1 <= n <= MAX_VANISHING_MOMENTS:
        raise UnsupportedFilterError(
            f"vanishing moments must be an integer in [1, {MAX_VANISHING_MOMENTS}], got {n!r}"
        )
    n = int(n)
    return WaveletFilter(np.array(_extremal_phase_taps(n)), n)


@dataclass(eq=False)
class WaveletDecomposition:
    scaling: np.ndarray
    details: dict[int, np.ndarray]
    J: int
    J0: int
    filter_n: int | None = field(default=None)

    def __post_init__(self):
        self.scaling = np.asarray(self.scaling, dtype=float)
        self.details = {int(j): np.asarray(v, dtype=float) for j, v in self.details.items()}
        if not 0 <= self.J0 < self.J:
            raise LevelError(f"need 0 <= J0 < J, got J0={self.J0}, J={self.J}")
        if self.scaling.shape != (2**self.J0,):
            raise ShapeError(f"scaling coefficients must have length {2 ** self.J0}")
        if sorted(self.details) != list(range(self.J0, self.J)):
            raise ShapeError(f"detail levels must be exactly {self.J0}..{self.J - 1}")
        for j, v in self.details.items():
            if v.shape != (2**j,):
                raise ShapeError(f"level {j} must hold {2 ** j} coefficients, has {v.shape}")

    @property
    def n(self) -> int:
        return 2**self.J

    @property
    def levels(self) -> range:
        return range(self.J0, self.J)

    def finest(self) -> np.ndarray:
        return self.details[self.J - 1]

    def energy(self) -> float:
        return float(np.sum(self.scaling**2) + sum(np.sum(v**2) for v in self.details.values()))

    def flat(self) -> np.ndarray:
        """Coarse-to-fine concatenation: scaling, then details J0..J-1."""
        return np.concatenate([self.scaling] + [self.details[j] for j in self.levels])

    def with_details(self, details: dict[int, np.ndarray]) -> WaveletDecomposition:
        merged = {**self.details, **details}
        return WaveletDecomposition(self.scaling.copy(), merged, self.J, self.J0, self.filter_n)

    def copy(self) -> WaveletDecomposition:
        return WaveletDecomposition(
            self.scaling.copy(), {j: v.copy() for j, v in self.details.items()},
            self.J, self.J0, self.filter_n,
        )


def dyadic_depth(n: int) -> int:
    """Return J with n == 2**J, or raise ShapeError."""
    if n < 2 or n & (n - 1):
        raise ShapeError(f"length must be a power of two >= 2, got {n}")
    return n.bit_length() - 1


def as_signal(samples) -> np.ndarray:
    y = np.asarray(samples, dtype=float)
    if y.ndim != 1:
        raise ShapeError("signal must be one-dimensional")
    dyadic_depth(y.size)
    if not np.all(np.isfinite(y)):
        raise ShapeError("signal contains non-finite samples")
    return y


def _index(n: int, taps: int) -> np.ndarray:
    return (2 * np.arange(n // 2)[:, None] + np.arange(taps)[None, :]) % n


def dwt(signal, filt: WaveletFilter, J0: int) -> WaveletDecomposition:
    """Periodic pyramid transform of ``signal`` down to primary level ``J0``."""
    y = as_signal(signal)
    J = dyadic_depth(y.size)
    if not 0 <= J0 < J:
        raise LevelError(f"J0 must satisfy 0 <= J0 < J={J}, got {J0}")
    h, g = filt.lowpass, filt.highpass
    approx = y
    details = {}
    for j in range(J - 1, J0 - 1, -1):
        windows = approx[_index(approx.size, h.size)]
        details[j] = windows @ g
        approx = windows @ h
    return WaveletDecomposition(approx, details, J, J0, filt.vanishing_moments)


def idwt(decomp: WaveletDecomposition, filt: WaveletFilter) -> np.ndarray:
    """Inverse of :func:`dwt` for the same filter."""
    if decomp.filter_n is not None and decomp.filter_n != filt.vanishing_moments:
        raise ShapeError(
            f"decomposition was built with N={decomp.filter_n}, got filter N={filt.vanishing_moments}"
        )
    h, g = filt.lowpass, filt.highpass
    approx = decomp.scaling
    for j in range(decomp.J0, decomp.J):
        d = decomp.details[j]
        if d.size != approx.size:
            raise ShapeError(f"level {j} has {d.size} coefficients, expected {approx.size}")
        n = 2 * approx.size
        out = np.zeros(n)
        base = 2 * np.arange(approx.size)
        for l in range(h.size):
            out[(base + l) % n] += h[l] * approx + g[l] * d
        approx = out
    return approx
