"""Third-order memoryless power amplifier and its Bussgang decomposition.

For a jointly Gaussian input ``x = P s`` with ``s ~ CN(0, I_K)``, the
per-antenna nonlinearity

.. math:: \\phi(x) = \\beta_1 x + \\beta_3 x |x|^2

splits into ``phi(x) = B(P) x + e`` with a diagonal gain ``B(P)`` and a
distortion ``e`` that is uncorrelated with ``x``.

All functions accept precoders of shape ``(..., M, K)`` so that a stack of
precoders can be processed in one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "PaParams",
    "DEFAULT_PA",
    "apply_pa",
    "antenna_powers",
    "bussgang_gain",
    "distortion_covariance",
    "expected_output_power",
    "sample_distortion",
]


@dataclass(frozen=True)
class PaParams:
    """Coefficients of ``phi(x) = beta1*x + beta3*x*|x|^2``."""

    beta1: complex
    beta3: complex

    def __post_init__(self):
        b1, b3 = complex(self.beta1), complex(self.beta3)
        if not (np.isfinite(b1) and np.isfinite(b3)):
            raise InvalidInputError("PA coefficients must be finite")
        if b1 == 0:
            raise InvalidInputError("beta1 must be nonzero")
        object.__setattr__(self, "beta1", b1)
        object.__setattr__(self, "beta3", b3)

    @property
    def is_linear(self) -> bool:
        return self.beta3 == 0


#: Coefficients used throughout the numerical experiments.
DEFAULT_PA = PaParams(0.98, -0.04 - 0.01j)


def _as_precoder(P) -> np.ndarray:
    P = np.asarray(P, dtype=complex)
    if P.ndim < 2:
        raise InvalidInputError(f"precoder must be at least 2-D, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise InvalidInputError("precoder has non-finite entries")
    return P


def apply_pa(x, pa: PaParams) -> np.ndarray:
    """Apply the PA nonlinearity entrywise."""
    x = np.asarray(x, dtype=complex)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("PA input has non-finite entries")
    return pa.beta1 * x + pa.beta3 * x * (x.real**2 + x.imag**2)


def antenna_powers(P) -> np.ndarray:
    """Per-antenna input power ``diag(P P^H)`` as a real array of shape ``(..., M)``."""
    P = np.asarray(P)
    return np.sum(P.real**2 + P.imag**2, axis=-1)


def bussgang_gain(P, pa: PaParams) -> np.ndarray:
    """Diagonal of the Bussgang gain ``B(P) = beta1*I + 2*beta3*diag(P P^H)``.

    Returns
    -------
    numpy.ndarray
        Complex array of shape ``(..., M)``. ``B`` is never formed densely.
    """
    P = _as_precoder(P)
    return pa.beta1 + 2.0 * pa.beta3 * antenna_powers(P)


def distortion_covariance(P, pa: PaParams) -> np.ndarray:
    """Covariance ``2|beta3|^2 (R o R^* o R)`` of the distortion, with ``R = P P^H``."""
    P = _as_precoder(P)
    R = P @ np.conj(np.swapaxes(P, -1, -2))
    C = 2.0 * abs(pa.beta3) ** 2 * (R.real**2 + R.imag**2) * R
    # R is Hermitian up to rounding; make C exactly so.
    return 0.5 * (C + np.conj(np.swapaxes(C, -1, -2)))


def expected_output_power(P, pa: PaParams) -> np.ndarray | float:
    """Closed-form ``E ||phi(P s)||^2`` for ``s ~ CN(0, I_K)``.

    Uses the complex Gaussian moments ``E|x|^4 = 2 sigma^4`` and
    ``E|x|^6 = 6 sigma^6`` per antenna.
    """
    P = _as_precoder(P)
    s2 = antenna_powers(P)
    b1, b3 = pa.beta1, pa.beta3
    per_antenna = (
        abs(b1) ** 2 * s2
        + 4.0 * (np.conj(b1) * b3).real * s2**2
        + 6.0 * abs(b3) ** 2 * s2**3
    )
    out = per_antenna.sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def sample_distortion(P, pa: PaParams, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` symbol vectors and return the PA input and its distortion.

    Parameters
    ----------
    P : array_like, shape (M, K)
        Precoding matrix.
    pa : PaParams
    n : int
        Number of symbol vectors.
    seed : int or sequence of int
        Seed for :func:`numpy.random.default_rng`.

    Returns
    -------
    x : numpy.ndarray, shape (n, M)
        Precoded vectors ``P s``.
    e : numpy.ndarray, shape (n, M)
        Distortion ``phi(x) - B(P) x``.
    """
    P = _as_precoder(P)
    if P.ndim != 2:
        raise InvalidInputError("sample_distortion takes a single (M, K) precoder")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    rng = np.random.default_rng(seed)
    K = P.shape[1]
    s = (rng.standard_normal((n, K)) + 1j * rng.standard_normal((n, K))) / np.sqrt(2.0)
    x = s @ P.T
    e = apply_pa(x, pa) - bussgang_gain(P, pa) * x
    return x, e
