"""Geometric mmWave channel with a half-wavelength ULA, and link-budget helpers.

Angles are given in degrees at every public interface. Channel matrices are
stored with one row per user, ``H[k] = h_k``, and the received signal of
user ``k`` is ``h_k^T phi(x)`` (no conjugation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "GeometryConfig",
    "ChannelSet",
    "LinkBudget",
    "array_response",
    "draw_channels",
    "fixed_channels",
    "noise_power",
    "realization_rng",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_watts",
    "watts_to_dbm",
]

#: Carrier frequency behind the -110 dB path loss used in the experiments.
#: Documentation only; nothing is computed from it.
CARRIER_FREQUENCY_HZ = 28e9


def _scalar_or_array(a):
    return float(a) if a.ndim == 0 else a


def db_to_linear(x_db):
    return _scalar_or_array(np.power(10.0, np.asarray(x_db, dtype=float) / 10.0))


def linear_to_db(x):
    return _scalar_or_array(10.0 * np.log10(np.asarray(x, dtype=float)))


def dbm_to_watts(p_dbm):
    return db_to_linear(p_dbm) * 1e-3


def watts_to_dbm(p_w):
    return linear_to_db(np.asarray(p_w, dtype=float) * 1e3)


@dataclass(frozen=True)
class GeometryConfig:
    M: int
    K: int
    L: int
    gamma2: float = 1.0
    aod_range: tuple[float, float] = (0.0, 180.0)

    def __post_init__(self):
        if self.M < 1 or self.K < 1 or self.L < 1:
            raise InvalidInputError("M, K and L must all be >= 1")
        if not self.gamma2 > 0:
            raise InvalidInputError("gamma2 must be positive")
        lo, hi = self.aod_range
        if not (0.0 <= lo <= hi <= 180.0):
            raise InvalidInputError(f"aod_range {self.aod_range} not within [0, 180]")
        object.__setattr__(self, "aod_range", (float(lo), float(hi)))


@dataclass(frozen=True)
class ChannelSet:
    """Per-user channel vectors and the path geometry that produced them.

    Attributes
    ----------
    vectors : numpy.ndarray, shape (K, M)
        Row ``k`` is ``h_k``.
    aods : numpy.ndarray, shape (K, L)
        Angles of departure in degrees.
    gains : numpy.ndarray, shape (K, L)
        Complex path gains.
    seed : int, tuple or None
    """

    vectors: np.ndarray
    aods: np.ndarray
    gains: np.ndarray
    seed: object = None

    @property
    def K(self) -> int:
        return self.vectors.shape[0]

    @property
    def M(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class LinkBudget:
    p_tot: float
    n0: float
    gamma2: float

    def __post_init__(self):
        if not (self.p_tot > 0 and self.n0 > 0 and self.gamma2 > 0):
            raise InvalidInputError("link budget entries must be strictly positive")

    @property
    def snr(self) -> float:
        return self.gamma2 * self.p_tot / self.n0

    @classmethod
    def from_snr(cls, snr, gamma2, p_tot):
        return cls(p_tot=p_tot, n0=noise_power(snr, gamma2, p_tot), gamma2=gamma2)


def array_response(psi, M: int) -> np.ndarray:
    """ULA response ``[a(psi)]_m = exp(-j*pi*(m-1)*cos(psi)) / sqrt(M)``.

    Parameters
    ----------
    psi : float or array_like
        Angle(s) in degrees.
    M : int
        Number of antennas.

    Returns
    -------
    numpy.ndarray
        Shape ``(M,)`` for scalar ``psi``, otherwise ``psi.shape + (M,)``.
    """
    if M < 1:
        raise InvalidInputError("M must be >= 1")
    c = np.cos(np.deg2rad(np.asarray(psi, dtype=float)))
    m = np.arange(M)
    return np.exp(-1j * np.pi * c[..., None] * m) / np.sqrt(M)


def realization_rng(seed, *counter) -> np.random.Generator:
    """Generator for one realization, keyed by ``(seed, *counter)``.

    Realization ``r`` gets the same stream whatever the batch size or the
    number of workers, because the stream depends only on its key.
    """
    key = [int(s) for s in np.atleast_1d(seed)] + [int(c) for c in counter]
    return np.random.default_rng(np.random.SeedSequence(key))


def draw_channels(cfg: GeometryConfig, seed) -> ChannelSet:
    """Draw ``h_k = sqrt(M/L) * sum_l alpha_kl a(psi_kl)``.

    Gains are i.i.d. ``CN(0, gamma2)`` and angles i.i.d. uniform over
    ``cfg.aod_range``, independently across users and paths.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    K, L, M = cfg.K, cfg.L, cfg.M
    lo, hi = cfg.aod_range
    aods = rng.uniform(lo, hi, size=(K, L))
    gains = np.sqrt(cfg.gamma2 / 2.0) * (
        rng.standard_normal((K, L)) + 1j * rng.standard_normal((K, L))
    )
    A = array_response(aods, M)  # (K, L, M)
    vectors = np.sqrt(M / L) * np.einsum("kl,klm->km", gains, A)
    if isinstance(seed, np.random.Generator):
        seed = None
    return ChannelSet(vectors=vectors, aods=aods, gains=gains, seed=seed)


def fixed_channels(aods_deg, M: int) -> ChannelSet:
    """Line-of-sight users with ``h_k = a(psi_k)`` exactly (unit path loss)."""
    aods = np.asarray(aods_deg, dtype=float).reshape(-1, 1)
    return ChannelSet(
        vectors=array_response(aods[:, 0], M),
        aods=aods,
        gains=np.full(aods.shape, 1.0 / np.sqrt(M) + 0j),
        seed=None,
    )


def noise_power(snr, gamma2, p_tot):
    """Noise power ``N0 = gamma2 * p_tot / snr`` (all linear)."""
    for name, v in (("snr", snr), ("gamma2", gamma2), ("p_tot", p_tot)):
        if not np.all(np.asarray(v) > 0):
            raise InvalidInputError(f"{name} must be positive, got {v}")
    return gamma2 * p_tot / snr
