"""Independent numerical oracles and a quick self-check suite.

The oracles here never call the closed-form expressions they are used to
check: gradients are compared with central differences of the sum rate,
and second-order statistics with sample averages over drawn symbols.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import GeometryConfig, db_to_linear, draw_channels, noise_power
from .metrics import sindr_terms, sum_rate
from .optimizer import sum_rate_gradient
from .pa import DEFAULT_PA, PaParams, apply_pa, bussgang_gain, distortion_covariance, expected_output_power, sample_distortion
from .precoding import mrt, project_power, zf

__all__ = [
    "finite_difference_gradient",
    "empirical_output_power",
    "bussgang_moments",
    "CheckResult",
    "run_checks",
]


def finite_difference_gradient(f, P, step: float = 1e-5) -> np.ndarray:
    """Central-difference ``df/dRe(P) + 1j*df/dIm(P)`` of a real function of a complex matrix."""
    P = np.asarray(P, dtype=complex)
    g = np.zeros_like(P)
    for idx in np.ndindex(P.shape):
        for unit in (1.0, 1j):
            Pp = P.copy()
            Pm = P.copy()
            Pp[idx] += step * unit
            Pm[idx] -= step * unit
            g[idx] += unit * (f(Pp) - f(Pm)) / (2.0 * step)
    return g


def empirical_output_power(P, pa: PaParams, n: int, seed, chunk: int = 250_000):
    """Sample mean of ``||phi(P s)||^2`` and its standard error."""
    P = np.asarray(P, dtype=complex)
    rng = np.random.default_rng(seed)
    K = P.shape[1]
    total = total_sq = 0.0
    done = 0
    while done < n:
        m = min(chunk, n - done)
        s = (rng.standard_normal((m, K)) + 1j * rng.standard_normal((m, K))) / np.sqrt(2.0)
        y = apply_pa(s @ P.T, pa)
        v = np.sum(np.abs(y) ** 2, axis=1)
        total += v.sum()
        total_sq += (v**2).sum()
        done += m
    mean = total / n
    var = total_sq / n - mean**2
    return mean, np.sqrt(var / n)


@dataclass
class MomentEstimate:
    mean: np.ndarray
    stderr: np.ndarray  # sqrt(E|z - mean|^2 / n), entrywise


def bussgang_moments(P, pa: PaParams, n: int, seed, chunk: int = 200_000):
    """Sample estimates of ``E[x e^H]`` and ``E[e e^H]`` with entrywise standard errors."""
    P = np.asarray(P, dtype=complex)
    M = P.shape[0]
    acc = {k: np.zeros((M, M), complex) for k in ("xe", "ee")}
    acc2 = {k: np.zeros((M, M)) for k in ("xe", "ee")}
    done = 0
    j = 0
    while done < n:
        m = min(chunk, n - done)
        x, e = sample_distortion(P, pa, m, [*np.atleast_1d(seed), j])
        for key, a in (("xe", x), ("ee", e)):
            z = a[:, :, None] * np.conj(e[:, None, :])
            acc[key] += z.sum(axis=0)
            acc2[key] += (np.abs(z) ** 2).sum(axis=0)
        done += m
        j += 1
    out = {}
    for key in acc:
        mean = acc[key] / n
        var = np.maximum(acc2[key] / n - np.abs(mean) ** 2, 0.0)
        out[key] = MomentEstimate(mean, np.sqrt(var / n))
    return out["xe"], out["ee"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _random_precoder(rng, M, K):
    return (rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))) / np.sqrt(2.0)


def run_checks(seed: int = 0, pa: PaParams = DEFAULT_PA) -> list[CheckResult]:
    """Fast versions of the gradient, Bussgang, power and linear-PA checks."""
    rng = np.random.default_rng(seed)
    p_tot = 19.952623149688797
    results = []

    worst = 0.0
    for _ in range(10):
        M, K = int(rng.choice([2, 4, 8])), int(rng.choice([1, 2, 4]))
        ch = draw_channels(GeometryConfig(M, K, 3, 1e-11), rng)
        n0 = noise_power(db_to_linear(rng.uniform(-10, 40)), 1e-11, p_tot)
        P = project_power(_random_precoder(rng, M, K), pa, p_tot)
        fd = finite_difference_gradient(lambda X: sum_rate(X, ch, pa, n0), P)
        an = sum_rate_gradient(P, ch, pa, n0)
        worst = max(worst, float(np.max(np.abs(an - fd) / np.abs(fd))))
    results.append(CheckResult("gradient vs central differences", worst < 1e-5, f"max rel err {worst:.2e}"))

    P = _random_precoder(rng, 4, 2)
    xe, ee = bussgang_moments(P, pa, 200_000, [seed, 7])
    z_xe = float(np.max(np.abs(xe.mean) / xe.stderr))
    C = distortion_covariance(P, pa)
    z_ee = float(np.max(np.abs(ee.mean - C) / ee.stderr))
    results.append(CheckResult("E[x e^H] = 0", z_xe < 3.0, f"max |z| {z_xe:.2f}"))
    results.append(CheckResult("E[e e^H] = C_e", z_ee < 3.0, f"max |z| {z_ee:.2f}"))

    Pp = project_power(_random_precoder(rng, 16, 2), pa, p_tot)
    closed = expected_output_power(Pp, pa)
    mc, se = empirical_output_power(Pp, pa, 1_000_000, [seed, 8])
    results.append(
        CheckResult(
            "projected output power",
            abs(closed - p_tot) <= 1e-8 * p_tot and abs(mc - p_tot) <= 0.01 * p_tot,
            f"closed-form {closed:.12g} W, Monte Carlo {mc:.5g} +/- {se:.2g} W",
        )
    )

    lin = PaParams(pa.beta1, 0.0)
    ch = draw_channels(GeometryConfig(8, 3, 4, 1.0), rng)
    Pz = project_power(zf(ch), lin, p_tot)
    sig, mui, dist = sindr_terms(Pz, ch, lin)
    Pm = project_power(mrt(ch), lin, p_tot)
    G = ch.vectors @ Pm
    sinr = abs(lin.beta1) ** 2 * np.abs(np.diag(G)) ** 2 / (
        abs(lin.beta1) ** 2 * (np.sum(np.abs(G) ** 2, axis=1) - np.abs(np.diag(G)) ** 2) + 0.1
    )
    ok = (
        not np.any(distortion_covariance(Pz, lin))
        and np.allclose(bussgang_gain(Pz, lin), lin.beta1, rtol=0, atol=0)
        and float(np.max(mui / sig)) < 1e-10
        and np.isclose(sum_rate(Pm, ch, lin, 0.1), np.sum(np.log2(1 + sinr)), rtol=1e-12)
    )
    results.append(CheckResult("linear PA reduces to classical SINR", bool(ok), f"ZF max mui/signal {np.max(mui / sig):.1e}"))
    return results
