"""SINDR, achievable sum rate and far-field radiation patterns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import array_response
from .errors import InvalidInputError
from .pa import PaParams, bussgang_gain, distortion_covariance

__all__ = [
    "SindrBreakdown",
    "PatternPoint",
    "effective_gains",
    "sindr_terms",
    "sindr",
    "sum_rate",
    "per_user_rates",
    "radiation_pattern",
    "pattern_arrays",
    "DEFAULT_PATTERN_STEP",
]

DEFAULT_PATTERN_STEP = 0.25


@dataclass(frozen=True)
class SindrBreakdown:
    signal: float
    mui: float
    dist: float
    noise: float

    @property
    def sindr(self) -> float:
        return self.signal / (self.mui + self.dist + self.noise)


@dataclass(frozen=True)
class PatternPoint:
    psi: float
    linear_power: float
    distortion_power: float


def _channels(H) -> np.ndarray:
    return np.asarray(getattr(H, "vectors", H), dtype=complex)


def effective_gains(P, H, pa: PaParams) -> np.ndarray:
    """Matrix ``G[k, r] = h_k^T B(P) p_r`` of shape ``(..., K, K)``."""
    P = np.asarray(P, dtype=complex)
    b = bussgang_gain(P, pa)
    return _channels(H) @ (b[..., :, None] * P)


def sindr_terms(P, H, pa: PaParams):
    """Signal, interference and distortion powers for every user.

    Returns three real arrays of shape ``(..., K)``. The noise power is not
    included.
    """
    H = _channels(H)
    G = effective_gains(P, H, pa)
    g2 = G.real**2 + G.imag**2
    signal = np.diagonal(g2, axis1=-2, axis2=-1)
    K = g2.shape[-1]
    mui = np.where(np.eye(K, dtype=bool), 0.0, g2).sum(axis=-1)
    C = distortion_covariance(P, pa)
    dist = np.einsum("km,...mn,kn->...k", H, C, np.conj(H)).real
    return signal, mui, np.maximum(dist, 0.0)


def sindr(P, H, k: int, pa: PaParams, n0: float) -> SindrBreakdown:
    """SINDR breakdown of user ``k`` (zero-based)."""
    K = _channels(H).shape[0]
    if not 0 <= k < K:
        raise InvalidInputError(f"user index {k} out of range for K={K}")
    signal, mui, dist = sindr_terms(P, H, pa)
    return SindrBreakdown(float(signal[k]), float(mui[k]), float(dist[k]), float(n0))


def per_user_rates(P, H, pa: PaParams, n0: float) -> np.ndarray:
    signal, mui, dist = sindr_terms(P, H, pa)
    return np.log2(1.0 + signal / (mui + dist + n0))


def sum_rate(P, H, pa: PaParams, n0: float):
    """Achievable sum rate in bit/s/Hz, ``sum_k log2(1 + SINDR_k)``.

    ``P`` may carry leading batch dimensions, in which case an array of rates
    is returned.
    """
    r = per_user_rates(P, H, pa, n0).sum(axis=-1)
    return float(r) if np.ndim(r) == 0 else r


def pattern_arrays(P, pa: PaParams, psi_grid):
    """Linear and distortion power radiated towards each angle in ``psi_grid``.

    Returns
    -------
    linear, distortion : numpy.ndarray
        Real, nonnegative arrays with one entry per grid angle.
    """
    P = np.asarray(P, dtype=complex)
    psi_grid = np.atleast_1d(np.asarray(psi_grid, dtype=float))
    if psi_grid.size == 0:
        raise InvalidInputError("pattern grid is empty")
    A = array_response(psi_grid, P.shape[0])  # rows a(psi)^T
    BP = bussgang_gain(P, pa)[:, None] * P
    # a^T B P P^H B^H a^* = ||a^T B P||^2
    lin = np.sum(np.abs(A @ BP) ** 2, axis=1)
    C = distortion_covariance(P, pa)
    dist = np.einsum("gm,mn,gn->g", A, C, np.conj(A)).real
    return np.clip(lin, 0.0, None), np.clip(dist, 0.0, None)


def radiation_pattern(P, pa: PaParams, psi_grid=None) -> list[PatternPoint]:
    """Far-field pattern on ``psi_grid`` (degrees, default 0..180 in 0.25 steps)."""
    if psi_grid is None:
        psi_grid = np.arange(0.0, 180.0 + DEFAULT_PATTERN_STEP / 2, DEFAULT_PATTERN_STEP)
    psi_grid = np.atleast_1d(np.asarray(psi_grid, dtype=float))
    lin, dist = pattern_arrays(P, pa, psi_grid)
    return [PatternPoint(float(p), float(l), float(d)) for p, l, d in zip(psi_grid, lin, dist)]
