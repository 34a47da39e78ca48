"""JSON experiment configurations.

Two document types exist. A *sweep* document drives the sum-rate sweep and
the convergence study::

    {
      "geometry": {"M": 16, "K": 2, "L": 10, "gamma2_db": -110, "aod_range": [0, 180]},
      "pa": {"beta1": [0.98, 0.0], "beta3": [-0.04, -0.01]},
      "p_tot_dbm": 43,
      "snr_db_list": [-10, 0, 10, 20, 30, 40],
      "n_channels": 100,
      "optimizer": {"max_iters": 50, "mu0": 1.0, "n_random_inits": 16},
      "precoders": ["mrt", "zf", "dab"],
      "output_path": "sweep.csv",
      "seed": 0
    }

A *pattern* document drives the radiation-pattern study::

    {
      "user_aods_deg": [90],
      "snr_db": 30,
      "M": 16,
      "pa": {"beta1": [0.98, 0.0], "beta3": [-0.04, -0.01]},
      "p_tot_dbm": 43,
      "grid_step_deg": 0.25,
      "optimizer": {"n_random_inits": 16},
      "output_path": "pattern.csv",
      "seed": 0
    }

Complex numbers are written as ``[re, im]``; a plain number or a Python
complex literal string such as ``"-0.04-0.01j"`` is also accepted. Unknown
keys are rejected. Every key except the geometry and ``user_aods_deg`` has
a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .channel import GeometryConfig, db_to_linear, linear_to_db
from .errors import ConfigError, DabError
from .optimizer import OptimizerOptions
from .pa import DEFAULT_PA, PaParams

__all__ = ["SweepConfig", "PatternConfig", "load_config", "PRECODERS"]

PRECODERS = ("mrt", "zf", "dab")

#: Desk-scale defaults; the full-scale study uses 1000 channels and 48 random starts.
DEFAULT_N_CHANNELS = 100
DEFAULT_RANDOM_INITS = 16
DEFAULT_SNR_DB = tuple(range(-10, 45, 5))


def _complex(value, key):
    if isinstance(value, (list, tuple)) and len(value) == 2:
        re, im = value
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re, im)):
            return complex(re, im)
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    elif isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(f"{key}: expected [re, im], a number or a complex literal, got {value!r}", key)


def _check_keys(doc, allowed, prefix=""):
    if not isinstance(doc, dict):
        raise ConfigError(f"{prefix or 'config'}: expected an object", prefix or None)
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        key = f"{prefix}.{unknown[0]}" if prefix else unknown[0]
        raise ConfigError(f"unknown key {key!r}", key)


def _number(doc, key, default, prefix, kind=float, positive=False):
    full = f"{prefix}.{key}" if prefix else key
    v = doc.get(key, default)
    if v is None:
        raise ConfigError(f"missing required key {full!r}", full)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{full}: expected a number, got {v!r}", full)
    if kind is int and int(v) != v:
        raise ConfigError(f"{full}: expected an integer, got {v!r}", full)
    if positive and not v > 0:
        raise ConfigError(f"{full}: must be positive, got {v!r}", full)
    return kind(v)


def _pa_from(doc, prefix="pa"):
    if doc is None:
        return DEFAULT_PA
    _check_keys(doc, ("beta1", "beta3"), prefix)
    try:
        return PaParams(
            _complex(doc.get("beta1", [DEFAULT_PA.beta1.real, DEFAULT_PA.beta1.imag]), f"{prefix}.beta1"),
            _complex(doc.get("beta3", [DEFAULT_PA.beta3.real, DEFAULT_PA.beta3.imag]), f"{prefix}.beta3"),
        )
    except ConfigError:
        raise
    except DabError as exc:
        raise ConfigError(f"{prefix}: {exc}", prefix) from exc


def _pa_to(pa: PaParams):
    return {"beta1": [pa.beta1.real, pa.beta1.imag], "beta3": [pa.beta3.real, pa.beta3.imag]}


_OPT_KEYS = ("max_iters", "mu0", "n_random_inits", "include_mrt", "include_zf", "stall_tol")


def _optimizer_from(doc, prefix="optimizer"):
    doc = {} if doc is None else doc
    _check_keys(doc, _OPT_KEYS, prefix)
    base = OptimizerOptions(n_random_inits=DEFAULT_RANDOM_INITS)
    kwargs = {}
    for f in fields(OptimizerOptions):
        if f.name not in doc:
            continue
        v = doc[f.name]
        full = f"{prefix}.{f.name}"
        if f.name.startswith("include_"):
            if not isinstance(v, bool):
                raise ConfigError(f"{full}: expected true/false", full)
            kwargs[f.name] = v
        elif f.name in ("max_iters", "n_random_inits"):
            kwargs[f.name] = _number(doc, f.name, None, prefix, int)
        else:
            kwargs[f.name] = _number(doc, f.name, None, prefix)
    try:
        return replace(base, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"{prefix}: {exc}", prefix) from exc


def _optimizer_to(opts: OptimizerOptions):
    return {k: getattr(opts, k) for k in _OPT_KEYS}


@dataclass(frozen=True)
class SweepConfig:
    geometry: GeometryConfig
    pa: PaParams = DEFAULT_PA
    p_tot_dbm: float = 43.0
    snr_db_list: tuple[float, ...] = DEFAULT_SNR_DB
    n_channels: int = DEFAULT_N_CHANNELS
    optimizer: OptimizerOptions = field(default_factory=lambda: OptimizerOptions(n_random_inits=DEFAULT_RANDOM_INITS))
    precoders: tuple[str, ...] = PRECODERS
    output_path: str = "sweep.csv"
    seed: int = 0

    @property
    def p_tot(self) -> float:
        return db_to_linear(self.p_tot_dbm) * 1e-3

    @classmethod
    def from_dict(cls, doc) -> "SweepConfig":
        _check_keys(
            doc,
            ("geometry", "pa", "p_tot_dbm", "snr_db_list", "n_channels", "optimizer", "precoders", "output_path", "seed"),
        )
        g = doc.get("geometry")
        if g is None:
            raise ConfigError("missing required key 'geometry'", "geometry")
        _check_keys(g, ("M", "K", "L", "gamma2_db", "aod_range"), "geometry")
        aod = g.get("aod_range", [0.0, 180.0])
        if not (
            isinstance(aod, (list, tuple))
            and len(aod) == 2
            and all(isinstance(a, (int, float)) and not isinstance(a, bool) for a in aod)
        ):
            raise ConfigError("geometry.aod_range: expected [lo, hi]", "geometry.aod_range")
        try:
            geometry = GeometryConfig(
                M=_number(g, "M", None, "geometry", int),
                K=_number(g, "K", None, "geometry", int),
                L=_number(g, "L", None, "geometry", int),
                gamma2=db_to_linear(_number(g, "gamma2_db", -110.0, "geometry")),
                aod_range=(float(aod[0]), float(aod[1])),
            )
        except ConfigError:
            raise
        except DabError as exc:
            raise ConfigError(f"geometry: {exc}", "geometry") from exc

        snrs = doc.get("snr_db_list", list(DEFAULT_SNR_DB))
        if not isinstance(snrs, list) or not snrs:
            raise ConfigError("snr_db_list: expected a nonempty list", "snr_db_list")
        if any(isinstance(s, bool) or not isinstance(s, (int, float)) for s in snrs):
            raise ConfigError("snr_db_list: entries must be numbers", "snr_db_list")
        precoders = doc.get("precoders", list(PRECODERS))
        if not isinstance(precoders, list) or not precoders or any(p not in PRECODERS for p in precoders):
            raise ConfigError(f"precoders: expected a nonempty subset of {list(PRECODERS)}", "precoders")
        output = doc.get("output_path", "sweep.csv")
        if not isinstance(output, str) or not output:
            raise ConfigError("output_path: expected a file path", "output_path")
        return cls(
            geometry=geometry,
            pa=_pa_from(doc.get("pa")),
            p_tot_dbm=_number(doc, "p_tot_dbm", 43.0, ""),
            snr_db_list=tuple(float(s) for s in snrs),
            n_channels=_number(doc, "n_channels", DEFAULT_N_CHANNELS, "", int, positive=True),
            optimizer=_optimizer_from(doc.get("optimizer")),
            precoders=tuple(p for p in PRECODERS if p in precoders),
            output_path=output,
            seed=_number(doc, "seed", 0, "", int),
        )

    def to_dict(self) -> dict:
        g = self.geometry
        return {
            "geometry": {
                "M": g.M,
                "K": g.K,
                "L": g.L,
                "gamma2_db": linear_to_db(g.gamma2),
                "aod_range": list(g.aod_range),
            },
            "pa": _pa_to(self.pa),
            "p_tot_dbm": self.p_tot_dbm,
            "snr_db_list": list(self.snr_db_list),
            "n_channels": self.n_channels,
            "optimizer": _optimizer_to(self.optimizer),
            "precoders": list(self.precoders),
            "output_path": self.output_path,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class PatternConfig:
    user_aods_deg: tuple[float, ...]
    snr_db: float = 30.0
    pa: PaParams = DEFAULT_PA
    M: int = 16
    p_tot_dbm: float = 43.0
    grid_step_deg: float = 0.25
    optimizer: OptimizerOptions = field(default_factory=lambda: OptimizerOptions(n_random_inits=DEFAULT_RANDOM_INITS))
    output_path: str = "pattern.csv"
    seed: int = 0

    @property
    def p_tot(self) -> float:
        return db_to_linear(self.p_tot_dbm) * 1e-3

    @classmethod
    def from_dict(cls, doc) -> "PatternConfig":
        _check_keys(
            doc,
            ("user_aods_deg", "snr_db", "pa", "M", "p_tot_dbm", "grid_step_deg", "optimizer", "output_path", "seed"),
        )
        aods = doc.get("user_aods_deg")
        if not isinstance(aods, list) or not aods:
            raise ConfigError("user_aods_deg: expected a nonempty list of angles", "user_aods_deg")
        if any(isinstance(a, bool) or not isinstance(a, (int, float)) or not 0 <= a <= 180 for a in aods):
            raise ConfigError("user_aods_deg: angles must be numbers in [0, 180]", "user_aods_deg")
        output = doc.get("output_path", "pattern.csv")
        if not isinstance(output, str) or not output:
            raise ConfigError("output_path: expected a file path", "output_path")
        return cls(
            user_aods_deg=tuple(float(a) for a in aods),
            snr_db=_number(doc, "snr_db", 30.0, ""),
            pa=_pa_from(doc.get("pa")),
            M=_number(doc, "M", 16, "", int, positive=True),
            p_tot_dbm=_number(doc, "p_tot_dbm", 43.0, ""),
            grid_step_deg=_number(doc, "grid_step_deg", 0.25, "", positive=True),
            optimizer=_optimizer_from(doc.get("optimizer")),
            output_path=output,
            seed=_number(doc, "seed", 0, "", int),
        )

    def to_dict(self) -> dict:
        return {
            "user_aods_deg": list(self.user_aods_deg),
            "snr_db": self.snr_db,
            "pa": _pa_to(self.pa),
            "M": self.M,
            "p_tot_dbm": self.p_tot_dbm,
            "grid_step_deg": self.grid_step_deg,
            "optimizer": _optimizer_to(self.optimizer),
            "output_path": self.output_path,
            "seed": self.seed,
        }


def load_config(path, kind: str):
    """Read a JSON document of the given ``kind`` (``"sweep"`` or ``"pattern"``)."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    cls = {"sweep": SweepConfig, "pattern": PatternConfig}[kind]
    return cls.from_dict(doc)
