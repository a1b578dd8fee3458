"""Dispersive-fiber two-photon spectrometer.

Each photon of a pair travels through its own long fiber; chromatic
dispersion turns wavelength into arrival time,
``t = t_ref + D * L * (lambda - lambda_ref)``, so a coincidence time
histogram is an affinely distorted picture of the joint spectral intensity.
Because the map is affine, the Jacobian between time bins and wavelength bins
is constant and the reconstruction only relabels axes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from pdcsim import rng as _rng
from pdcsim.detection import DetectorModel
from pdcsim.errors import WindowOverflow
from pdcsim.jsa import JointSpectralAmplitude, joint_spectral_intensity
from pdcsim.units import C, PS_PER_NM_KM, wavelength_to_omega

OVERFLOW_TOL = 1e-3


@dataclass(frozen=True)
class SpectrometerConfig:
    """One spectrometer arm.

    ``dispersion`` is in SI units (s per meter of wavelength per meter of
    fiber); :meth:`from_lab_units` takes the customary ps/(nm km). The time
    window is ``bins`` bins of ``bin_width`` centered on ``reference_delay``.
    """

    dispersion: float
    fiber_length: float
    reference_wavelength: float
    reference_delay: float = 0.0
    timing_jitter_sigma: float = 0.0
    bin_width: float = 10e-12
    bins: int = 128

    def __post_init__(self):
        if self.dispersion == 0:
            raise ValueError("dispersion must be non-zero")
        if not self.fiber_length > 0:
            raise ValueError("fiber_length must be > 0")
        if not self.bin_width > 0:
            raise ValueError("bin_width must be > 0")
        if self.bins < 8:
            raise ValueError("need at least 8 bins")
        if self.timing_jitter_sigma < 0:
            raise ValueError("timing_jitter_sigma must be >= 0")

    @classmethod
    def from_lab_units(cls, dispersion_ps_nm_km, fiber_length_km, reference_wavelength_nm,
                       jitter_ps=0.0, bin_width_ps=10.0, bins=128, reference_delay_ps=0.0):
        return cls(
            dispersion=dispersion_ps_nm_km * PS_PER_NM_KM,
            fiber_length=fiber_length_km * 1e3,
            reference_wavelength=reference_wavelength_nm * 1e-9,
            reference_delay=reference_delay_ps * 1e-12,
            timing_jitter_sigma=jitter_ps * 1e-12,
            bin_width=bin_width_ps * 1e-12,
            bins=int(bins),
        )

    @property
    def delay_per_wavelength(self):
        """``dt / dlambda`` in s/m."""
        return self.dispersion * self.fiber_length

    @property
    def window(self):
        half = 0.5 * self.bins * self.bin_width
        return self.reference_delay - half, self.reference_delay + half

    @property
    def edges(self):
        lo, _ = self.window
        return lo + self.bin_width * np.arange(self.bins + 1)

    def covering(self, wavelengths, margin=0.02):
        """Copy with ``bin_width`` chosen so ``wavelengths`` map inside the window."""
        dt = np.abs(arrival_time(np.asarray(wavelengths), self) - self.reference_delay).max()
        return replace(self, bin_width=float(2.0 * dt * (1.0 + margin) / self.bins))


@dataclass(frozen=True)
class TimeHistogram2D:
    signal_edges: np.ndarray
    idler_edges: np.ndarray
    counts: np.ndarray  # int64, [signal_bin, idler_bin]
    pairs: int  # pairs generated
    overflow: int  # detected coincidences outside the window

    @property
    def detected(self):
        return int(self.counts.sum())


@dataclass(frozen=True)
class JSIEstimate:
    """JSI on a wavelength grid (ascending axes, meters), unit total mass."""

    signal_wavelengths: np.ndarray
    idler_wavelengths: np.ndarray
    intensity: np.ndarray
    empty: bool = False


def arrival_time(wavelength, cfg: SpectrometerConfig):
    return cfg.reference_delay + cfg.delay_per_wavelength * (np.asarray(wavelength) - cfg.reference_wavelength)


def wavelength_at(time, cfg: SpectrometerConfig):
    """Inverse of :func:`arrival_time`."""
    return cfg.reference_wavelength + (np.asarray(time) - cfg.reference_delay) / cfg.delay_per_wavelength


def _bin_index(t, cfg):
    lo, _ = cfg.window
    idx = np.floor((t - lo) / cfg.bin_width).astype(np.int64)
    return idx, (idx >= 0) & (idx < cfg.bins)


def simulate_spectrometer(jsa: JointSpectralAmplitude, cfgs, detectors, n_pairs: int,
                          rng_seed: int) -> TimeHistogram2D:
    """Coincidence time histogram for ``n_pairs`` photon pairs drawn from the JSI.

    ``cfgs`` and ``detectors`` are ``(signal, idler)`` pairs. Pairs are drawn
    by inverse CDF on the flattened JSI with uniform dithering inside the grid
    cell. Only events where both photons are detected are recorded; detector
    background is not simulated here.

    Raises:
        WindowOverflow: more than 0.1 % of detected pairs fall outside the window.
    """
    cfg_s, cfg_i = cfgs
    det_s, det_i = (detectors, detectors) if isinstance(detectors, DetectorModel) else detectors
    g = jsa.grid
    mass = joint_spectral_intensity(jsa).ravel()
    cdf = np.cumsum(mass)
    cdf /= cdf[-1]
    n_idler = g.shape[1]

    counts = np.zeros(cfg_s.bins * cfg_i.bins, dtype=np.int64)
    overflow = 0
    for b, start, stop in _rng.blocks(n_pairs):
        size = stop - start
        r = _rng.substream(rng_seed, _rng.SPECTROMETER, b)
        cell = np.minimum(np.searchsorted(cdf, r.random(size), side="right"), cdf.size - 1)
        i, j = np.divmod(cell, n_idler)
        w_s = g.signal_center + g.signal_offsets[i] + (r.random(size) - 0.5) * g.signal_step
        w_i = g.idler_center + g.idler_offsets[j] + (r.random(size) - 0.5) * g.idler_step
        t_s = arrival_time(2.0 * np.pi * C / w_s, cfg_s)
        t_i = arrival_time(2.0 * np.pi * C / w_i, cfg_i)
        if cfg_s.timing_jitter_sigma:
            t_s = t_s + r.normal(0.0, cfg_s.timing_jitter_sigma, size)
        if cfg_i.timing_jitter_sigma:
            t_i = t_i + r.normal(0.0, cfg_i.timing_jitter_sigma, size)
        both = (r.random(size) < det_s.efficiency) & (r.random(size) < det_i.efficiency)
        bs, ok_s = _bin_index(t_s[both], cfg_s)
        bi, ok_i = _bin_index(t_i[both], cfg_i)
        ok = ok_s & ok_i
        overflow += int(np.count_nonzero(~ok))
        counts += np.bincount(bs[ok] * cfg_i.bins + bi[ok], minlength=counts.size)

    detected = int(counts.sum()) + overflow
    if detected and overflow / detected > OVERFLOW_TOL:
        raise WindowOverflow(
            f"{overflow} of {detected} detected pairs ({overflow / detected:.2%}) fall outside "
            "the time window; widen bins or bin_width")
    return TimeHistogram2D(cfg_s.edges, cfg_i.edges, counts.reshape(cfg_s.bins, cfg_i.bins),
                           pairs=n_pairs, overflow=overflow)


def reconstruct_jsi(hist: TimeHistogram2D, cfgs) -> JSIEstimate:
    """Map bin centers back to wavelength and normalize counts to unit mass."""
    cfg_s, cfg_i = cfgs
    lam_s = wavelength_at(0.5 * (hist.signal_edges[1:] + hist.signal_edges[:-1]), cfg_s)
    lam_i = wavelength_at(0.5 * (hist.idler_edges[1:] + hist.idler_edges[:-1]), cfg_i)
    total = hist.counts.sum()
    intensity = hist.counts / total if total else np.zeros(hist.counts.shape)
    # negative dispersion: late arrival = short wavelength; flip to ascending
    if lam_s[0] > lam_s[-1]:
        lam_s, intensity = lam_s[::-1], intensity[::-1, :]
    if lam_i[0] > lam_i[-1]:
        lam_i, intensity = lam_i[::-1], intensity[:, ::-1]
    return JSIEstimate(lam_s, lam_i, np.ascontiguousarray(intensity), empty=(total == 0))


def jsi_on_wavelength_grid(jsa: JointSpectralAmplitude, signal_wavelengths, idler_wavelengths):
    """Input JSI resampled as a density in wavelength on the given axes, unit mass.

    Serves as the reference for :func:`similarity` checks of a reconstruction.
    """
    g = jsa.grid
    interp = RegularGridInterpolator((g.signal_offsets, g.idler_offsets), joint_spectral_intensity(jsa),
                                     bounds_error=False, fill_value=0.0)
    w_s = wavelength_to_omega(signal_wavelengths)
    w_i = wavelength_to_omega(idler_wavelengths)
    ss, ii = np.meshgrid(w_s - g.signal_center, w_i - g.idler_center, indexing="ij")
    dens = interp(np.stack([ss, ii], axis=-1))
    dens *= np.outer(w_s**2, w_i**2)  # |d omega / d lambda| up to a constant
    total = dens.sum()
    return dens / total if total else dens


def similarity(jsi_a, jsi_b) -> float:
    """Pearson correlation over cells."""
    a = np.asarray(jsi_a, dtype=float)
    b = np.asarray(jsi_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    a = a.ravel() - a.mean()
    b = b.ravel() - b.mean()
    return float(a @ b / np.sqrt((a @ a) * (b @ b)))


def time_correlation(hist: TimeHistogram2D) -> float:
    """Pearson correlation of (t_signal, t_idler) under the histogram counts."""
    p = hist.counts / hist.counts.sum()
    ts = 0.5 * (hist.signal_edges[1:] + hist.signal_edges[:-1])
    ti = 0.5 * (hist.idler_edges[1:] + hist.idler_edges[:-1])
    ps, pi = p.sum(axis=1), p.sum(axis=0)
    ms, mi = ps @ ts, pi @ ti
    cov = (ts - ms) @ p @ (ti - mi)
    return float(cov / np.sqrt((ps @ (ts - ms) ** 2) * (pi @ (ti - mi) ** 2)))
