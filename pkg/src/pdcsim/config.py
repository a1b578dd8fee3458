"""Run configuration: flat dotted keys in a TOML file.

A config file may use either dotted keys or tables; both flatten to the same
``section.key`` names::

    pump.fwhm_nm = 1.95

    [phasematching]
    effective_length_mm = 8.0

Keys not listed in :data:`DEFAULTS` are rejected, as are values of the wrong
type. Physical quantities carry their unit in the key name; the builders below
convert to SI.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from pathlib import Path

import numpy as np
import tomli

from pdcsim.detection import DetectorModel
from pdcsim.errors import ConfigError
from pdcsim.jsa import PhasematchingModel, PumpEnvelope
from pdcsim.spectrometer import SpectrometerConfig

# kappa_s / kappa_i come from `pdcsim calibrate` with the calibration.* targets
# below (K minimal at 1.95 nm pump FWHM, L_eff = 8 mm, first signal-axis
# phasematching zero at 8 nm, gaussian-approx shape).
DEFAULTS = {
    "run.seed": 20100,
    "run.output_dir": "out",
    "run.n_jobs": 1,
    "pump.central_wavelength_nm": 768.0,
    "pump.fwhm_nm": 1.95,
    "pump.chirp_ps2": 0.0,
    "phasematching.effective_length_mm": 8.0,
    "phasematching.kappa_s_ps_per_mm": 0.12424928982035967,
    "phasematching.kappa_i_ps_per_mm": -0.09316543388386667,
    "phasematching.signal_wavelength_nm": 1544.0,
    "phasematching.idler_wavelength_nm": 1528.0,
    "phasematching.shape": "gaussian-approx",
    "grid.points": 256,
    "grid.pump_sigmas": 4.0,
    "grid.sinc_lobes": 2.0,
    "squeezer.gain": 0.5,
    # asinh(sqrt(2.5)): single-mode <n> = 2.5 at unit pump power
    "squeezer.gain_scale": 1.2389443651442444,
    "detectors.efficiency": 0.25,
    "detectors.background": 0.0,
    "g2.pulses": 1_000_000,
    "g2.splitter_ratio": 0.5,
    "gain.powers": [round(0.05 * k, 2) for k in range(21)],
    "gain.pulses_per_point": 200_000,
    "gain.single_mode": False,
    "sweep.fwhm_nm": [0.70, 1.95, 4.0],
    "spectrometer.dispersion_ps_nm_km": -20.0,
    "spectrometer.fiber_length_km": 10.0,
    "spectrometer.jitter_ps": 100.0,
    "spectrometer.bins": 128,
    "spectrometer.bin_width_ps": "auto",
    "spectrometer.pairs": 1_000_000,
    "calibration.target_fwhm_nm": 1.95,
    "calibration.zero_halfwidth_nm": 8.0,
    "calibration.search_min_nm": 0.2,
    "calibration.search_max_nm": 8.0,
}

_AUTO_OR_FLOAT = {"spectrometer.bin_width_ps"}


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _locate(text, key):
    """Best-effort line number of ``key`` in config ``text``."""
    if not text:
        return None
    leaf = re.escape(key.split(".")[-1])
    for n, line in enumerate(text.splitlines(), 1):
        if re.match(rf"\s*(\"?[\w.]*\.)?{leaf}\"?\s*=", line):
            return n
    return None


def _coerce(key, value, where):
    default = DEFAULTS[key]
    bad = ConfigError(f"{where}key '{key}': expected {type(default).__name__}, got {value!r}")
    if key in _AUTO_OR_FLOAT:
        if value == "auto":
            return value
        if isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0:
            return float(value)
        raise ConfigError(f"{where}key '{key}': expected \"auto\" or a positive number, got {value!r}")
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        raise bad
    if isinstance(default, int):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        raise bad
    if isinstance(default, float):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            if not math.isfinite(value):
                raise ConfigError(f"{where}key '{key}': value must be finite")
            return float(value)
        raise bad
    if isinstance(default, str):
        if isinstance(value, str):
            return value
        raise bad
    if isinstance(default, list):
        if isinstance(value, list) and value and all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return [float(v) for v in value]
        raise ConfigError(f"{where}key '{key}': expected a non-empty list of numbers, got {value!r}")
    raise bad


def _parse_override(item):
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, raw = (s.strip() for s in item.split("=", 1))
    try:
        value = tomli.loads(f"v = {raw}")["v"]
    except tomli.TOMLDecodeError:
        value = raw  # bare word, e.g. --set phasematching.shape=sinc
    return key, value


class RunConfig:
    """Validated flat configuration with SI builders for the domain objects."""

    def __init__(self, values: dict):
        self.values = dict(values)

    def __getitem__(self, key):
        return self.values[key]

    @classmethod
    def load(cls, path=None, overrides=(), seed=None) -> "RunConfig":
        values = dict(DEFAULTS)
        text = ""
        if path is not None:
            p = Path(path)
            try:
                text = p.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from exc
            try:
                raw = _flatten(tomli.loads(text))
            except tomli.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
            for key, value in raw.items():
                line = _locate(text, key)
                where = f"{path}:{line}: " if line else f"{path}: "
                if key not in DEFAULTS:
                    raise ConfigError(f"{where}unknown key '{key}'")
                values[key] = _coerce(key, value, where)
        for item in overrides:
            key, value = _parse_override(item)
            if key not in DEFAULTS:
                raise ConfigError(f"--set: unknown key '{key}'")
            values[key] = _coerce(key, value, "--set: ")
        if seed is not None:
            values["run.seed"] = _coerce("run.seed", seed, "--seed: ")
        cfg = cls(values)
        cfg.validate()
        return cfg

    def validate(self):
        """Build every domain object once so bad physics fails as a config error."""
        try:
            self.pump()
            self.phasematching()
            self.detector()
            self.spectrometer_arms()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self["run.seed"] < 0:
            raise ConfigError("run.seed must be non-negative")
        for key in ("grid.points", "g2.pulses", "gain.pulses_per_point", "spectrometer.pairs", "run.n_jobs"):
            if self[key] < 1:
                raise ConfigError(f"{key} must be >= 1")
        if any(w <= 0 for w in self["sweep.fwhm_nm"]):
            raise ConfigError("sweep.fwhm_nm entries must be > 0")
        if any(p < 0 for p in self["gain.powers"]):
            raise ConfigError("gain.powers entries must be >= 0")

    # -- builders -----------------------------------------------------------

    def pump(self, fwhm_nm=None):
        return PumpEnvelope(
            self["pump.central_wavelength_nm"] * 1e-9,
            (self["pump.fwhm_nm"] if fwhm_nm is None else fwhm_nm) * 1e-9,
            self["pump.chirp_ps2"] * 1e-24,
        )

    def phasematching(self):
        ps_per_mm = 1e-12 / 1e-3
        return PhasematchingModel(
            effective_length=self["phasematching.effective_length_mm"] * 1e-3,
            kappa_s=self["phasematching.kappa_s_ps_per_mm"] * ps_per_mm,
            kappa_i=self["phasematching.kappa_i_ps_per_mm"] * ps_per_mm,
            signal_central_wavelength=self["phasematching.signal_wavelength_nm"] * 1e-9,
            idler_central_wavelength=self["phasematching.idler_wavelength_nm"] * 1e-9,
            shape=self["phasematching.shape"],
        )

    def detector(self):
        return DetectorModel(self["detectors.efficiency"], self["detectors.background"])

    def spectrometer_arms(self):
        """(signal, idler) arm configs; ``bin_width`` is provisional if "auto"."""
        bw = self["spectrometer.bin_width_ps"]
        arms = []
        for lam in (self["phasematching.signal_wavelength_nm"], self["phasematching.idler_wavelength_nm"]):
            arms.append(SpectrometerConfig.from_lab_units(
                self["spectrometer.dispersion_ps_nm_km"],
                self["spectrometer.fiber_length_km"],
                lam,
                jitter_ps=self["spectrometer.jitter_ps"],
                bin_width_ps=1.0 if bw == "auto" else bw,
                bins=self["spectrometer.bins"],
            ))
        return tuple(arms)

    # -- serialization ------------------------------------------------------

    def to_toml(self, keys=None):
        lines = []
        for key in keys or DEFAULTS:
            lines.append(f"{key} = {toml_value(self.values[key])}")
        return "\n".join(lines) + "\n"

    def digest(self):
        blob = json.dumps(self.values, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {v!r}")
