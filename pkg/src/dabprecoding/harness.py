"""Experiment drivers: sum-rate sweep, convergence study, radiation patterns.

Channel realization ``r`` draws from ``realization_rng(seed, 0, r)`` and the
random initializations for that realization from ``(seed, 1, r)``, so every
result depends only on the configuration, never on the number of workers.
Rows are always written in realization order.
"""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .channel import db_to_linear, draw_channels, fixed_channels, noise_power, realization_rng
from .config import PatternConfig, SweepConfig
from .errors import DabError
from .metrics import pattern_arrays, sum_rate
from .optimizer import multi_init_dab
from .precoding import mrt, project_power, zf

__all__ = [
    "SweepResult",
    "ConvergenceResult",
    "PatternResult",
    "run_sweep",
    "run_convergence",
    "run_pattern",
    "summary_path",
    "THREADS_ENV",
    "DB_FLOOR",
]

log = logging.getLogger(__name__)

THREADS_ENV = "DABPRECODING_THREADS"
DB_FLOOR = -100.0

SWEEP_COLUMNS = ("snr_db", "realization", "precoder", "sum_rate", "init_label")
SUMMARY_COLUMNS = ("snr_db", "precoder", "mean_rate", "stderr", "n")
CONVERGENCE_COLUMNS = ("iteration", "mean_rate", "snr_db")
PATTERN_COLUMNS = ("psi_deg", "precoder", "linear_power_db", "distortion_power_db")


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path, columns, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def _check_writable(path):
    path = Path(path)
    try:
        with path.open("a"):
            pass
    except OSError as exc:
        raise OSError(f"cannot write output {path}: {exc.strerror}") from exc


def summary_path(path) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}_summary{p.suffix or '.csv'}")


def default_workers() -> int:
    return int(os.environ.get(THREADS_ENV, "1"))


def _map(fn, items, workers):
    if workers is None:
        workers = default_workers()
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _realization(cfg: SweepConfig, r: int):
    ch = draw_channels(cfg.geometry, realization_rng(cfg.seed, 0, r))
    opts = replace(cfg.optimizer, seed=[cfg.seed, 1, r])
    return ch, opts


def _baselines(ch, cfg: SweepConfig):
    out = {}
    for name, build in (("mrt", mrt), ("zf", zf)):
        try:
            out[name] = project_power(build(ch), cfg.pa, cfg.p_tot)
        except DabError as exc:
            log.warning("%s unavailable for this realization: %s", name, exc)
            out[name] = None
    return out


# -- sweep ------------------------------------------------------------------


@dataclass
class SweepResult:
    rows: list[dict]
    summary: list[dict]

    def rates(self, precoder: str, snr_db: float) -> np.ndarray:
        """Per-realization rates of ``precoder`` at ``snr_db``, in realization order."""
        return np.array(
            [row["sum_rate"] for row in self.rows if row["precoder"] == precoder and row["snr_db"] == snr_db]
        )


def _sweep_one(args):
    cfg, r = args
    ch, opts = _realization(cfg, r)
    base = _baselines(ch, cfg)
    rows = []
    for snr_db in cfg.snr_db_list:
        n0 = noise_power(db_to_linear(snr_db), cfg.geometry.gamma2, cfg.p_tot)
        for name in cfg.precoders:
            label = ""
            if name == "dab":
                res = multi_init_dab(ch, cfg.pa, n0, cfg.p_tot, opts)
                rate, label = res.rate, res.label
            elif base[name] is None:
                rate = float("nan")
            else:
                rate = sum_rate(base[name], ch, cfg.pa, n0)
            rows.append(
                {"snr_db": float(snr_db), "realization": r, "precoder": name, "sum_rate": float(rate), "init_label": label}
            )
    return rows


def _summarize(rows, cfg: SweepConfig):
    summary = []
    for snr_db in cfg.snr_db_list:
        for name in cfg.precoders:
            x = np.array([row["sum_rate"] for row in rows if row["snr_db"] == snr_db and row["precoder"] == name])
            x = x[np.isfinite(x)]
            n = x.size
            summary.append(
                {
                    "snr_db": float(snr_db),
                    "precoder": name,
                    "mean_rate": float(x.mean()) if n else float("nan"),
                    "stderr": float(x.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan"),
                    "n": n,
                }
            )
    return summary


def run_sweep(cfg: SweepConfig, workers: int | None = None, output_path=None) -> SweepResult:
    """Ergodic sum rate of the configured precoders over an SNR grid.

    Writes one row per ``(snr_db, realization, precoder)`` to the output path
    and the per-SNR mean and standard error to :func:`summary_path` of it.
    Pass ``output_path=False`` to skip writing.
    """
    out = cfg.output_path if output_path is None else output_path
    if out:
        _check_writable(out)
    per_real = _map(_sweep_one, [(cfg, r) for r in range(cfg.n_channels)], workers)
    # realization-major from the workers; reorder to SNR-major for the table
    order = {snr: i for i, snr in enumerate(cfg.snr_db_list)}
    rows = sorted((row for rows in per_real for row in rows), key=lambda row: (order[row["snr_db"]], row["realization"]))
    result = SweepResult(rows=rows, summary=_summarize(rows, cfg))
    if out:
        _write_csv(out, SWEEP_COLUMNS, result.rows)
        _write_csv(summary_path(out), SUMMARY_COLUMNS, result.summary)
    return result


# -- convergence ------------------------------------------------------------


@dataclass
class ConvergenceResult:
    snr_db: tuple[float, ...]
    traces: np.ndarray  # (n_snr, n_channels, max_iters + 1) best-so-far rates

    @property
    def mean(self) -> np.ndarray:
        return self.traces.mean(axis=1)

    def iterations_to_fraction(self, fraction: float = 0.99) -> np.ndarray:
        """First iteration at which each mean trace reaches ``fraction`` of its final value."""
        m = self.mean
        return np.argmax(m >= fraction * m[:, -1:], axis=1)


def _convergence_one(args):
    cfg, r = args
    ch, opts = _realization(cfg, r)
    out = []
    for snr_db in cfg.snr_db_list:
        n0 = noise_power(db_to_linear(snr_db), cfg.geometry.gamma2, cfg.p_tot)
        out.append(multi_init_dab(ch, cfg.pa, n0, cfg.p_tot, opts).best_so_far())
    return np.array(out)


def run_convergence(cfg: SweepConfig, workers: int | None = None, output_path=None) -> ConvergenceResult:
    """Mean best-so-far DAB sum rate versus iteration, for each SNR in the config."""
    out = cfg.output_path if output_path is None else output_path
    if out:
        _check_writable(out)
    per_real = _map(_convergence_one, [(cfg, r) for r in range(cfg.n_channels)], workers)
    traces = np.stack(per_real, axis=1)
    result = ConvergenceResult(snr_db=tuple(cfg.snr_db_list), traces=traces)
    if out:
        rows = [
            {"iteration": i, "mean_rate": float(v), "snr_db": float(snr)}
            for snr, trace in zip(cfg.snr_db_list, result.mean)
            for i, v in enumerate(trace)
        ]
        _write_csv(out, CONVERGENCE_COLUMNS, rows)
    return result


# -- radiation pattern ------------------------------------------------------


@dataclass
class PatternResult:
    psi_deg: np.ndarray
    precoders: dict  # name -> projected precoder
    linear: dict  # name -> linear power per angle, watts
    distortion: dict  # name -> distortion power per angle, watts

    def normalized_db(self, name: str):
        """Linear and distortion patterns in dB relative to the peak linear power."""
        ref = self.linear[name].max()

        def to_db(x):
            return np.maximum(10.0 * np.log10(np.maximum(x / ref, 1e-300)), DB_FLOOR)

        return to_db(self.linear[name]), to_db(self.distortion[name])


def run_pattern(cfg: PatternConfig, output_path=None) -> PatternResult:
    """Far-field patterns of MRT and DAB for users on fixed line-of-sight channels."""
    out = cfg.output_path if output_path is None else output_path
    if out:
        _check_writable(out)
    ch = fixed_channels(cfg.user_aods_deg, cfg.M)
    n0 = noise_power(db_to_linear(cfg.snr_db), 1.0, cfg.p_tot)
    grid = np.arange(0.0, 180.0 + cfg.grid_step_deg / 2, cfg.grid_step_deg)
    grid = grid[grid <= 180.0]
    opts = replace(cfg.optimizer, seed=[cfg.seed, 2])
    precoders = {
        "mrt": project_power(mrt(ch), cfg.pa, cfg.p_tot),
        "dab": multi_init_dab(ch, cfg.pa, n0, cfg.p_tot, opts).P,
    }
    lin, dist = {}, {}
    for name, P in precoders.items():
        lin[name], dist[name] = pattern_arrays(P, cfg.pa, grid)
    result = PatternResult(psi_deg=grid, precoders=precoders, linear=lin, distortion=dist)
    if out:
        rows = []
        for name in precoders:
            l_db, d_db = result.normalized_db(name)
            rows += [
                {"psi_deg": float(p), "precoder": name, "linear_power_db": float(a), "distortion_power_db": float(b)}
                for p, a, b in zip(grid, l_db, d_db)
            ]
        _write_csv(out, PATTERN_COLUMNS, rows)
    return result
