"""Distortion-aware beamforming (DAB) by projected gradient ascent.

The gradient returned by :func:`sum_rate_gradient` is
``dR/dRe(P) + 1j * dR/dIm(P)``, i.e. twice the Wirtinger derivative
``dR/dP^*``. That is the steepest-ascent direction of the sum rate when
``P`` is viewed as a real vector of twice the size.

:func:`gamma_matrix` and :func:`upsilon_matrix` build the per-user matrices
of the closed-form gradient explicitly and are used by
:func:`sum_rate_gradient_reference`. :func:`sum_rate_gradient` evaluates the
same expression in a vectorized form that also accepts stacks of precoders.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DabError
from .metrics import effective_gains, sindr_terms, sum_rate
from .pa import PaParams, antenna_powers
from .precoding import mrt, project_power, projection_scale, zf

__all__ = [
    "OptimizerOptions",
    "AscentTrace",
    "DabResult",
    "gamma_matrix",
    "upsilon_matrix",
    "sum_rate_gradient",
    "sum_rate_gradient_reference",
    "dab_precoder",
    "multi_init_dab",
    "initializations",
]

log = logging.getLogger(__name__)

_LOG2E = 1.0 / np.log(2.0)


@dataclass(frozen=True)
class OptimizerOptions:
    max_iters: int = 50
    mu0: float = 1.0
    n_random_inits: int = 48
    include_mrt: bool = True
    include_zf: bool = True
    seed: object = 0
    stall_tol: float = 0.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.mu0 > 0:
            raise ValueError("mu0 must be positive")
        if self.n_random_inits < 0:
            raise ValueError("n_random_inits must be >= 0")
        if self.stall_tol < 0:
            raise ValueError("stall_tol must be >= 0")


@dataclass
class AscentTrace:
    """Per-iteration record of one ascent run.

    ``rates`` and ``step_sizes`` have ``max_iters + 1`` entries (index 0 is
    the initialization); ``accepted`` has ``max_iters`` entries.
    """

    rates: np.ndarray
    step_sizes: np.ndarray
    accepted: np.ndarray
    label: str = ""

    def stall_iteration(self, tol: float = 0.0) -> int:
        """First iteration whose rate is within relative ``tol`` of the final rate."""
        final = self.rates[-1]
        return int(np.argmax(self.rates >= final - tol * abs(final)))


@dataclass
class DabResult:
    P: np.ndarray
    rate: float
    label: str
    traces: list[AscentTrace]
    failures: dict[str, str] = field(default_factory=dict)

    def best_so_far(self) -> np.ndarray:
        """Elementwise maximum over initializations of the rate at each iteration."""
        return np.max([t.rates for t in self.traces], axis=0)


def gamma_matrix(P, h, pa: PaParams) -> np.ndarray:
    """``Gamma_k(P)`` for the user with channel ``h``.

    ``Gamma_k p_k`` is the part of ``dn_k/dp_k^*`` that does not come from the
    dependence of ``B(P)`` on ``p_k``.
    """
    P = np.asarray(P, dtype=complex)
    h = np.asarray(h, dtype=complex)
    b1, b3 = pa.beta1, pa.beta3
    hh = np.outer(np.conj(h), h)
    D = np.diag(antenna_powers(P))
    return (
        abs(b1) ** 2 * hh
        + 2.0 * (np.conj(b1) * b3 * hh @ D + b1 * np.conj(b3) * D @ hh)
        + 4.0 * abs(b3) ** 2 * D @ hh @ D
    )


def upsilon_matrix(P, h, p, pa: PaParams) -> np.ndarray:
    """``Upsilon_{k,r}(P)`` for channel ``h = h_k`` and column ``p = p_r``.

    All four terms are diagonal. ``Upsilon_{k,r} p_{k'}`` is the derivative of
    ``|h_k^T B(P) p_r|^2`` with respect to ``p_{k'}^*`` through ``B(P)``.
    """
    P = np.asarray(P, dtype=complex)
    h = np.asarray(h, dtype=complex)
    p = np.asarray(p, dtype=complex)
    b1, b3 = pa.beta1, pa.beta3
    hh = np.outer(np.conj(h), h)
    pp = np.outer(p, np.conj(p))
    D = np.diag(antenna_powers(P))
    d = (
        2.0 * (np.conj(b1) * b3 * np.diag(pp @ hh) + b1 * np.conj(b3) * np.diag(hh @ pp))
        + 4.0 * abs(b3) ** 2 * (np.diag(hh @ D @ pp) + np.diag(pp @ D @ hh))
    )
    return np.diag(d)


def sum_rate_gradient_reference(P, H, pa: PaParams, n0: float) -> np.ndarray:
    """Closed-form gradient assembled user by user from Gamma/Upsilon.

    Slow, single-precoder version kept as an independent check on
    :func:`sum_rate_gradient`.
    """
    P = np.asarray(P, dtype=complex)
    H = np.asarray(getattr(H, "vectors", H), dtype=complex)
    M, K = P.shape
    b3 = pa.beta3
    R = P @ P.conj().T
    R_abs2 = np.abs(R) ** 2
    R_sq = R * R
    signal, mui, dist = sindr_terms(P, H, pa)
    grad = np.zeros_like(P)
    for k in range(K):
        h = H[k]
        gam = gamma_matrix(P, h, pa)
        ups = [upsilon_matrix(P, h, P[:, r], pa) for r in range(K)]
        ups_other = sum((ups[r] for r in range(K) if r != k), np.zeros((M, M), complex))
        dn = np.empty_like(P)
        dd = np.empty_like(P)
        for kp in range(K):
            p = P[:, kp]
            dn[:, kp] = (gam * (kp == k) + ups[k]) @ p
            dd[:, kp] = (gam * (kp != k) + ups_other) @ p
            dd[:, kp] += (
                2.0
                * abs(b3) ** 2
                * (
                    2.0 * np.conj(h) * ((h * p) @ R_abs2)
                    + h * (R_sq @ (np.conj(h) * p))
                )
            )
        n = signal[k]
        d = mui[k] + dist[k] + n0
        grad += 2.0 * _LOG2E / (d**2 * (1.0 + n / d)) * (d * dn - n * dd)
    return grad


def sum_rate_gradient(P, H, pa: PaParams, n0: float) -> np.ndarray:
    """Gradient ``dR/dRe(P) + 1j*dR/dIm(P)`` of the sum rate.

    Parameters
    ----------
    P : array_like, shape (..., M, K)
    H : array_like or ChannelSet, shape (K, M)
    pa : PaParams
    n0 : float
        Noise power.

    Returns
    -------
    numpy.ndarray
        Same shape as ``P``.
    """
    P = np.asarray(P, dtype=complex)
    H = np.asarray(getattr(H, "vectors", H), dtype=complex)
    b1, b3 = pa.beta1, pa.beta3
    K = H.shape[0]

    b = b1 + 2.0 * b3 * antenna_powers(P)
    G = effective_gains(P, H, pa)
    signal, mui, dist = sindr_terms(P, H, pa)
    d = mui + dist + n0
    t = d + signal
    # R = sum_k ln(t_k) - ln(d_k); |G_kr|^2 enters t_k always and d_k for r != k.
    off = ~np.eye(K, dtype=bool)
    c = 1.0 / t[..., :, None] - off / d[..., :, None]
    e = 1.0 / t - 1.0 / d

    # dependence through the columns directly
    cG = c * G
    grad = np.conj(b)[..., :, None] * (np.conj(H).T @ cG)
    # dependence through B(P)
    PW = P @ np.swapaxes(c * np.conj(G), -1, -2)
    q = np.sum(H.T * PW, axis=-1)
    grad += 4.0 * (b3 * q).real[..., :, None] * P
    # dependence through the distortion covariance
    if b3 != 0:
        R = P @ np.conj(np.swapaxes(P, -1, -2))
        Q = np.einsum("ki,...k,kj->...ij", H, e, np.conj(H))
        grad += (
            2.0
            * abs(b3) ** 2
            * (2.0 * np.swapaxes(Q * (R.real**2 + R.imag**2), -1, -2) @ P + (Q * R * R) @ P)
        )
    return 2.0 * _LOG2E * grad


def _ascend(P0, H, pa, n0, p_tot, opts: OptimizerOptions, callback=None):
    """Run the projected ascent on a stack of feasible precoders in lockstep.

    Each member of the stack keeps its own step size and acceptance record;
    the members never interact.
    """
    P = np.array(P0, dtype=complex)
    B = P.shape[0]
    I = opts.max_iters
    rates = np.empty((B, I + 1))
    steps = np.empty((B, I + 1))
    accepted = np.zeros((B, I), dtype=bool)
    rate = np.asarray(sum_rate(P, H, pa, n0), dtype=float).reshape(B)
    mu = np.full(B, float(opts.mu0))
    rates[:, 0] = rate
    steps[:, 0] = mu
    for i in range(1, I + 1):
        cand = P + mu[:, None, None] * sum_rate_gradient(P, H, pa, n0)
        with np.errstate(all="ignore"):
            ok = np.all(np.isfinite(cand), axis=(-2, -1))
            alpha = np.full(B, np.nan)
            if ok.any():
                alpha[ok] = projection_scale(cand[ok], pa, p_tot)
            ok &= np.isfinite(alpha)
            cand = np.where(ok[:, None, None], alpha[:, None, None] * cand, P)
            cand_rate = np.where(ok, sum_rate(cand, H, pa, n0), -np.inf)
        acc = cand_rate > rate
        P = np.where(acc[:, None, None], cand, P)
        rate = np.where(acc, cand_rate, rate)
        mu = np.where(acc, opts.mu0, 0.5 * mu)
        rates[:, i] = rate
        steps[:, i] = mu
        accepted[:, i - 1] = acc
        if callback is not None:
            callback(i, P, acc)
    return P, rates, steps, accepted


def dab_precoder(H, pa: PaParams, n0: float, p_tot: float, P0, opts: OptimizerOptions | None = None, callback=None):
    """Projected gradient ascent from a single feasible starting point.

    At every iteration the candidate ``[P + mu * grad]^+`` is accepted only if
    it strictly increases the sum rate. An accepted step resets ``mu`` to
    ``opts.mu0``; a rejected or infeasible candidate halves it.

    Parameters
    ----------
    H : array_like or ChannelSet
    pa : PaParams
    n0, p_tot : float
        Noise power and PA output power budget, in watts.
    P0 : array_like, shape (M, K)
        Starting precoder; must already satisfy the power budget.
    opts : OptimizerOptions, optional
    callback : callable, optional
        Called as ``callback(i, P, accepted)`` after iteration ``i`` with the
        current iterate stacked as shape ``(1, M, K)``.

    Returns
    -------
    P : numpy.ndarray
    trace : AscentTrace
    """
    opts = opts or OptimizerOptions()
    P, rates, steps, acc = _ascend(np.asarray(P0, complex)[None], H, pa, n0, p_tot, opts, callback)
    return P[0], AscentTrace(rates[0], steps[0], acc[0])


def initializations(H, pa: PaParams, p_tot: float, opts: OptimizerOptions):
    """Projected starting points ``[(label, P0), ...]`` and failures ``{label: reason}``.

    Order: MRT, ZF, then ``opts.n_random_inits`` random matrices with
    i.i.d. ``CN(0, 1)`` entries drawn from ``opts.seed``.
    """
    H = np.asarray(getattr(H, "vectors", H), dtype=complex)
    K, M = H.shape
    inits, failures = [], {}
    builders = []
    if opts.include_mrt:
        builders.append(("mrt", lambda: mrt(H)))
    if opts.include_zf:
        builders.append(("zf", lambda: zf(H)))
    rng = np.random.default_rng(opts.seed)
    for j in range(opts.n_random_inits):
        Z = (rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))) / np.sqrt(2.0)
        builders.append((f"random-{j}", lambda Z=Z: Z))
    for label, build in builders:
        try:
            inits.append((label, project_power(build(), pa, p_tot)))
        except DabError as exc:
            log.warning("initialization %s skipped: %s", label, exc)
            failures[label] = f"{type(exc).__name__}: {exc}"
    return inits, failures


def multi_init_dab(H, pa: PaParams, n0: float, p_tot: float, opts: OptimizerOptions | None = None) -> DabResult:
    """Run :func:`dab_precoder` from every initialization and keep the best.

    Ties in the final rate go to the earliest initialization. Because MRT and
    ZF are among the starting points (unless disabled) and the ascent never
    decreases the rate, the result is never worse than either baseline.
    """
    opts = opts or OptimizerOptions()
    inits, failures = initializations(H, pa, p_tot, opts)
    if not inits:
        raise DabError(f"every initialization failed: {failures}")
    labels = [label for label, _ in inits]
    P, rates, steps, acc = _ascend(np.stack([P0 for _, P0 in inits]), H, pa, n0, p_tot, opts)
    traces = [AscentTrace(rates[j], steps[j], acc[j], labels[j]) for j in range(len(labels))]
    best = int(np.argmax(rates[:, -1]))
    return DabResult(P=P[best], rate=float(rates[best, -1]), label=labels[best], traces=traces, failures=failures)
