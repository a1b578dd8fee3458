"""Joint spectral amplitude of a pulsed, waveguided type-II PDC source.

The amplitude is the product of a Gaussian pump envelope evaluated at the sum
frequency and a phasematching function of the linearized wavevector mismatch::

    f(ws, wi) = alpha(ws + wi) * Phi(ws - ws0, wi - wi0)

Everything spectral is stored as angular frequency (rad/s). Wavelengths only
appear in constructors and at I/O boundaries.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from pdcsim.errors import GridTooCoarse, NotNormalizable
from pdcsim.units import bandwidth_wavelength_to_omega, omega_to_wavelength, wavelength_to_omega

#: sinc(x) ~ exp(-GAUSS_SINC_GAMMA * x**2) with matched intensity FWHM
GAUSS_SINC_GAMMA = 0.193
MIN_ANALYSIS_POINTS = 16
_STEP_RTOL = 1e-12
_NORM_ATOL = 1e-10

PhasematchingShape = Literal["sinc", "gaussian-approx"]


class GridCoverageWarning(UserWarning):
    """The frequency grid truncates a significant part of the amplitude."""


def _check_uniform(offsets, name):
    offsets = np.asarray(offsets, dtype=float)
    if offsets.ndim != 1 or offsets.size < 2:
        raise GridTooCoarse(f"{name} axis needs at least 2 points, got {offsets.size}")
    steps = np.diff(offsets)
    step = steps.mean()
    if step <= 0 or np.any(steps <= 0):
        raise ValueError(f"{name} axis must be strictly ascending")
    if np.max(np.abs(steps - step)) / step > _STEP_RTOL:
        raise ValueError(f"{name} axis is not uniformly spaced")
    return offsets, step


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform 2-D grid of signal/idler angular frequencies.

    The axes are stored as a center frequency plus detuning offsets; absolute
    frequencies of ~1e15 rad/s cannot hold a uniform step to 1e-12 in float64.
    """

    signal_center: float
    idler_center: float
    signal_offsets: np.ndarray
    idler_offsets: np.ndarray
    signal_step: float = field(init=False)
    idler_step: float = field(init=False)

    def __post_init__(self):
        s, ds = _check_uniform(self.signal_offsets, "signal")
        i, di = _check_uniform(self.idler_offsets, "idler")
        s.setflags(write=False)
        i.setflags(write=False)
        object.__setattr__(self, "signal_offsets", s)
        object.__setattr__(self, "idler_offsets", i)
        object.__setattr__(self, "signal_step", float(ds))
        object.__setattr__(self, "idler_step", float(di))

    @classmethod
    def uniform(cls, signal_center, idler_center, signal_halfwidth, idler_halfwidth,
                n_signal=256, n_idler=None):
        """Symmetric grid ``center +- halfwidth`` with ``n`` points per axis."""
        n_idler = n_signal if n_idler is None else n_idler
        return cls(
            float(signal_center),
            float(idler_center),
            np.linspace(-signal_halfwidth, signal_halfwidth, n_signal),
            np.linspace(-idler_halfwidth, idler_halfwidth, n_idler),
        )

    @property
    def signal_axis(self):
        return self.signal_center + self.signal_offsets

    @property
    def idler_axis(self):
        return self.idler_center + self.idler_offsets

    @property
    def shape(self):
        return (self.signal_offsets.size, self.idler_offsets.size)

    @property
    def cell_area(self):
        return self.signal_step * self.idler_step

    def refined(self, factor=2):
        """Same extent, ``factor`` times as many intervals per axis."""
        ns, ni = self.shape
        return FrequencyGrid(
            self.signal_center,
            self.idler_center,
            np.linspace(self.signal_offsets[0], self.signal_offsets[-1], (ns - 1) * factor + 1),
            np.linspace(self.idler_offsets[0], self.idler_offsets[-1], (ni - 1) * factor + 1),
        )

    def wavelengths(self):
        """(signal, idler) wavelength axes in meters."""
        return omega_to_wavelength(self.signal_axis), omega_to_wavelength(self.idler_axis)


@dataclass(frozen=True)
class PumpEnvelope:
    """Gaussian pump spectrum.

    Attributes:
        central_wavelength: meters.
        fwhm_wavelength: intensity FWHM in meters.
        chirp: quadratic spectral phase coefficient in rad s^2.
    """

    central_wavelength: float
    fwhm_wavelength: float
    chirp: float = 0.0

    def __post_init__(self):
        if not self.central_wavelength > 0:
            raise ValueError("pump central_wavelength must be > 0")
        if not self.fwhm_wavelength > 0:
            raise ValueError("pump fwhm_wavelength must be > 0")

    @property
    def central_omega(self):
        return float(wavelength_to_omega(self.central_wavelength))

    @property
    def fwhm_omega(self):
        return float(bandwidth_wavelength_to_omega(self.fwhm_wavelength, self.central_wavelength))

    @property
    def sigma_omega(self):
        """Standard deviation of the pump *intensity* spectrum (rad/s)."""
        return self.fwhm_omega / np.sqrt(8.0 * np.log(2.0))


@dataclass(frozen=True)
class PhasematchingModel:
    """Linearized phasematching of a waveguide of given effective length.

    ``kappa_s`` and ``kappa_i`` are the inverse group-velocity mismatches
    ``k_p' - k_s'`` and ``k_p' - k_i'`` in s/m, so that
    ``dk = kappa_s * nu_s + kappa_i * nu_i`` for detunings ``nu`` from the
    central signal/idler frequencies. Phasematching is perfect at the center
    by construction.
    """

    effective_length: float
    kappa_s: float
    kappa_i: float
    signal_central_wavelength: float
    idler_central_wavelength: float
    shape: PhasematchingShape = "gaussian-approx"

    def __post_init__(self):
        if not self.effective_length > 0:
            raise ValueError("effective_length must be > 0")
        if self.shape not in ("sinc", "gaussian-approx"):
            raise ValueError(f"unknown phasematching shape {self.shape!r}")
        if self.kappa_s == 0 and self.kappa_i == 0:
            raise ValueError("kappa_s and kappa_i cannot both be zero")

    @property
    def signal_omega(self):
        return float(wavelength_to_omega(self.signal_central_wavelength))

    @property
    def idler_omega(self):
        return float(wavelength_to_omega(self.idler_central_wavelength))

    def delta_k(self, nu_s, nu_i):
        return self.kappa_s * np.asarray(nu_s) + self.kappa_i * np.asarray(nu_i)


def energy_mismatch(pump: PumpEnvelope, pm: PhasematchingModel) -> float:
    """Relative violation of energy conservation ``|wp - ws - wi| / wp``."""
    wp = pump.central_omega
    return abs(wp - pm.signal_omega - pm.idler_omega) / wp


def pump_amplitude(pump: PumpEnvelope, omega_sum):
    """Complex pump amplitude at sum frequency ``omega_sum`` (peak value 1)."""
    nu = np.asarray(omega_sum, dtype=float) - pump.central_omega
    sigma = pump.sigma_omega
    amp = np.exp(-(nu**2) / (4.0 * sigma**2))
    if pump.chirp:
        return amp * np.exp(1j * pump.chirp * nu**2)
    return amp.astype(complex)


def phasematching_amplitude(pm: PhasematchingModel, nu_s, nu_i):
    """Phasematching amplitude for signal/idler detunings.

    ``sinc`` keeps the ``exp(i dk L / 2)`` phase of the length integral;
    ``gaussian-approx`` is real (phase dropped).
    """
    x = pm.delta_k(nu_s, nu_i) * pm.effective_length / 2.0
    if pm.shape == "sinc":
        return np.sinc(x / np.pi) * np.exp(1j * x)
    return np.exp(-GAUSS_SINC_GAMMA * x**2).astype(complex)


def _support_box(pump, pm, pump_sigmas, sinc_lobes):
    """Half-widths (signal, idler) of the bounding box of the region
    ``|nu_s + nu_i + offset| <= pump_sigmas * sigma`` and
    ``|dk L / 2| <= sinc_lobes * pi``."""
    offset = pump_offset(pump, pm)
    p = pump_sigmas * pump.sigma_omega + abs(offset)
    q = 2.0 * np.pi * sinc_lobes / pm.effective_length
    a = np.array([[1.0, 1.0], [pm.kappa_s, pm.kappa_i]])
    if abs(np.linalg.det(a)) < 1e-30:
        raise ValueError("phasematching band is parallel to the pump band; support is unbounded")
    corners = np.array([np.linalg.solve(a, [sp * p, sq * q]) for sp in (-1, 1) for sq in (-1, 1)])
    return np.abs(corners).max(axis=0)


def pump_offset(pump, pm):
    """``ws0 + wi0 - wp0``: where the pump center sits relative to the grid center."""
    return pm.signal_omega + pm.idler_omega - pump.central_omega


def auto_grid(pump: PumpEnvelope, pm: PhasematchingModel, n_points=256,
              pump_sigmas=4.0, sinc_lobes=2.0) -> FrequencyGrid:
    """Default grid: +-``pump_sigmas`` pump sigma and ``sinc_lobes`` sinc lobes
    on each side of the phasematching line, projected onto both axes."""
    hs, hi = _support_box(pump, pm, pump_sigmas, sinc_lobes)
    return FrequencyGrid.uniform(pm.signal_omega, pm.idler_omega, hs, hi, n_points)


@dataclass(frozen=True)
class JointSpectralAmplitude:
    """Complex amplitude matrix indexed ``[signal, idler]`` on a grid.

    A constructed JSA satisfies ``sum |f|^2 dws dwi == 1``; the constructor
    itself does not enforce it so that arbitrary test matrices can be wrapped.
    Use :meth:`from_matrix` for a normalized instance.
    """

    grid: FrequencyGrid
    amplitude: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitude, dtype=complex)
        if amp.shape != self.grid.shape:
            raise ValueError(f"amplitude shape {amp.shape} does not match grid {self.grid.shape}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitude", amp)

    @classmethod
    def from_matrix(cls, grid, amplitude, normalize=True):
        amp = np.asarray(amplitude, dtype=complex)
        if normalize:
            norm2 = float(np.sum(np.abs(amp) ** 2) * grid.cell_area)
            if not np.isfinite(norm2) or norm2 == 0.0:
                raise NotNormalizable("amplitude is identically zero or not finite")
            amp = amp / np.sqrt(norm2)
        return cls(grid, amp)

    def norm(self):
        """``sum |f|^2 dws dwi`` (1 for a normalized JSA)."""
        return float(np.sum(np.abs(self.amplitude) ** 2) * self.grid.cell_area)

    def is_normalized(self, atol=_NORM_ATOL):
        return abs(self.norm() - 1.0) < atol


def check_coverage(pump, pm, grid, pump_sigmas=3.0, sinc_lobes=2.0):
    """Warn if ``grid`` is narrower than the +-3 sigma / two-sinc-zero box."""
    hs, hi = _support_box(pump, pm, pump_sigmas, sinc_lobes)
    gs = min(-grid.signal_offsets[0], grid.signal_offsets[-1])
    gi = min(-grid.idler_offsets[0], grid.idler_offsets[-1])
    if gs < hs * (1 - 1e-9) or gi < hi * (1 - 1e-9):
        warnings.warn(
            f"grid half-widths ({gs:.3e}, {gi:.3e}) rad/s do not cover the "
            f"required support ({hs:.3e}, {hi:.3e}) rad/s",
            GridCoverageWarning,
            stacklevel=3,
        )
        return False
    return True


def build_jsa(pump: PumpEnvelope, pm: PhasematchingModel, grid: FrequencyGrid | None = None,
              n_points=256) -> JointSpectralAmplitude:
    """Evaluate ``alpha * Phi`` on ``grid`` and L2-normalize.

    If ``grid`` is omitted, :func:`auto_grid` with ``n_points`` per axis is used.

    Raises:
        GridTooCoarse: fewer than 16 points on an axis.
        NotNormalizable: the amplitude vanishes everywhere on the grid.
    """
    if grid is None:
        grid = auto_grid(pump, pm, n_points)
    if min(grid.shape) < MIN_ANALYSIS_POINTS:
        raise GridTooCoarse(f"grid {grid.shape} has fewer than {MIN_ANALYSIS_POINTS} points per axis")
    check_coverage(pump, pm, grid)

    nu_s = grid.signal_offsets[:, None]
    nu_i = grid.idler_offsets[None, :]
    omega_sum = (grid.signal_center + grid.idler_center) + (nu_s + nu_i)
    amp = pump_amplitude(pump, omega_sum) * phasematching_amplitude(pm, nu_s, nu_i)
    return JointSpectralAmplitude.from_matrix(grid, amp)


def joint_spectral_intensity(jsa: JointSpectralAmplitude) -> np.ndarray:
    """``|f|^2`` as a density: entries sum to ``1 / (dws * dwi)``."""
    return np.abs(jsa.amplitude) ** 2


def marginal_spectrum(jsa: JointSpectralAmplitude, arm: Literal["signal", "idler"]) -> np.ndarray:
    """Marginal probability mass per grid point of one arm (sums to 1)."""
    jsi = joint_spectral_intensity(jsa)
    if arm == "signal":
        m = jsi.sum(axis=1) * jsa.grid.idler_step
    elif arm == "idler":
        m = jsi.sum(axis=0) * jsa.grid.signal_step
    else:
        raise ValueError(f"arm must be 'signal' or 'idler', got {arm!r}")
    return m / m.sum()


def jsi_correlation(jsa: JointSpectralAmplitude) -> float:
    """Pearson correlation of (ws, wi) with the JSI as probability mass."""
    p = joint_spectral_intensity(jsa)
    p = p / p.sum()
    s = jsa.grid.signal_offsets[:, None]
    i = jsa.grid.idler_offsets[None, :]
    ps, pi = p.sum(axis=1), p.sum(axis=0)
    ms = ps @ jsa.grid.signal_offsets
    mi = pi @ jsa.grid.idler_offsets
    cov = np.sum(p * (s - ms) * (i - mi))
    vs = ps @ (jsa.grid.signal_offsets - ms) ** 2
    vi = pi @ (jsa.grid.idler_offsets - mi) ** 2
    return float(cov / np.sqrt(vs * vi))
