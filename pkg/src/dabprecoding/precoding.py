"""Baseline MRT/ZF precoders and the output-power projection.

Baselines are returned with unit-norm columns. Every precoder used in a
simulation is then rescaled by :func:`project_power` so that the *PA output*
power ``E||phi(P s)||^2`` equals the budget.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateChannelError, InvalidInputError, ProjectionInfeasibleError, SingularChannelError
from .pa import PaParams, antenna_powers

__all__ = ["mrt", "zf", "project_power", "projection_scale", "ZF_COND_LIMIT", "BRACKET_FACTOR"]

ZF_COND_LIMIT = 1e12
#: Search bracket for the projection, as a multiple of the linear-PA scale.
BRACKET_FACTOR = 4.0
_BISECTION_STEPS = 64


def _channel_matrix(H) -> np.ndarray:
    H = np.asarray(getattr(H, "vectors", H), dtype=complex)
    if H.ndim != 2:
        raise InvalidInputError(f"channel matrix must be (K, M), got shape {H.shape}")
    return H


def mrt(H) -> np.ndarray:
    """Conjugate beamforming, column ``k`` equal to ``conj(h_k) / ||h_k||``."""
    H = _channel_matrix(H)
    norms = np.linalg.norm(H, axis=1)
    if np.any(norms == 0):
        raise DegenerateChannelError("MRT undefined for an all-zero channel vector")
    return (np.conj(H) / norms[:, None]).T


def zf(H) -> np.ndarray:
    """Zero-forcing ``H^H (H H^H)^{-1}`` with unit-norm columns.

    Satisfies ``h_k^T p_r = 0`` for ``r != k``.

    Raises
    ------
    SingularChannelError
        If ``K > M`` or the condition number of ``H`` exceeds ``ZF_COND_LIMIT``.
    """
    H = _channel_matrix(H)
    K, M = H.shape
    if K > M:
        raise SingularChannelError(f"ZF needs K <= M, got K={K}, M={M}")
    sv = np.linalg.svd(H, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > ZF_COND_LIMIT:
        raise SingularChannelError("channel matrix is rank deficient")
    Hh = np.conj(H).T
    P = Hh @ np.linalg.inv(H @ Hh)
    return P / np.linalg.norm(P, axis=0)


def _power_poly(P, pa: PaParams):
    # E||phi(alpha P s)||^2 = a t + b t^2 + c t^3 with t = alpha^2
    s2 = antenna_powers(P)
    a = abs(pa.beta1) ** 2 * s2.sum(axis=-1)
    b = 4.0 * (np.conj(pa.beta1) * pa.beta3).real * (s2**2).sum(axis=-1)
    c = 6.0 * abs(pa.beta3) ** 2 * (s2**3).sum(axis=-1)
    return a, b, c


def projection_scale(P, pa: PaParams, p_tot: float) -> np.ndarray:
    """Scale ``alpha`` in ``(0, BRACKET_FACTOR * alpha_linear]`` meeting the budget.

    ``alpha_linear`` is the scale that would meet the budget with ``beta3 = 0``.
    The output power ``a t + b t^2 + c t^3`` (``t = alpha^2``) is strictly
    increasing, since ``b^2 <= (16/18) * 3ac`` by Cauchy-Schwarz, so the root is
    unique and is found by bisection.

    Works on stacks of shape ``(..., M, K)``; returns ``nan`` where the root
    lies outside the bracket and for all-zero precoders.
    """
    a, b, c = (np.atleast_1d(np.asarray(v, dtype=float)) for v in _power_poly(P, pa))
    shape = np.shape(antenna_powers(P))[:-1]

    def f(t):
        return t * (a + t * (b + t * c)) - p_tot

    with np.errstate(divide="ignore", invalid="ignore"):
        upper = BRACKET_FACTOR**2 * p_tot / a
        feasible = (a > 0) & np.isfinite(upper)
        feasible &= np.where(feasible, f(np.where(feasible, upper, 0.0)), -1.0) >= 0
    lo = np.zeros_like(a)
    hi = np.where(feasible, upper, 0.0)
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = f(mid) < 0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    alpha = np.where(feasible, np.sqrt(0.5 * (lo + hi)), np.nan)
    return alpha.reshape(shape)


def project_power(P, pa: PaParams, p_tot: float) -> np.ndarray:
    """Rescale ``P`` by a single scalar so that ``E||phi(P s)||^2 = p_tot``.

    Raises
    ------
    InvalidInputError
        If ``P`` is all zeros or ``p_tot`` is not positive.
    ProjectionInfeasibleError
        If the budget cannot be reached within the search bracket.
    """
    P = np.asarray(P, dtype=complex)
    if not p_tot > 0:
        raise InvalidInputError("p_tot must be positive")
    if not np.all(np.isfinite(P)):
        raise InvalidInputError("precoder has non-finite entries")
    if np.any(antenna_powers(P).sum(axis=-1) == 0):
        raise InvalidInputError("cannot project an all-zero precoder")
    alpha = projection_scale(P, pa, p_tot)
    if np.any(np.isnan(alpha)):
        raise ProjectionInfeasibleError(
            f"no scaling reaches {p_tot} W within {BRACKET_FACTOR}x the linear-PA scale"
        )
    return alpha[..., None, None] * P
