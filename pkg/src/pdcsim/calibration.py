"""Calibration of the phasematching slopes ``kappa_s`` and ``kappa_i``.

No dispersion data for the waveguide is available, so the two inverse
group-velocity mismatches are fixed by two targets:

1. scale: ``kappa_s`` is set so that the first zero of the phasematching
   function along the signal axis (idler at its center) lies
   ``zero_halfwidth`` away from the signal center,
   i.e. ``kappa_s * dw * L / 2 = pi``;
2. ratio: ``rho = kappa_i / kappa_s`` (negative) is found by a 1-D root solve
   so that the effective mode number K, minimized over pump FWHM, attains its
   minimum at ``target_fwhm``.

Fixing the scale first keeps the ratio solve monotone: the product
``kappa_s * kappa_i`` sets the separable pump width and is linear in ``rho``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from pdcsim.errors import CalibrationError
from pdcsim.jsa import GAUSS_SINC_GAMMA, PhasematchingModel, PumpEnvelope, auto_grid, build_jsa
from pdcsim.schmidt import decompose, effective_mode_number
from pdcsim.units import bandwidth_wavelength_to_omega


@dataclass(frozen=True)
class CalibrationResult:
    kappa_s: float
    kappa_i: float
    ratio: float
    fwhm_at_min: float  # meters
    K_min: float
    target_fwhm: float
    zero_halfwidth: float


def mode_number_at(pump, pm, fwhm, **grid_opts):
    p = PumpEnvelope(pump.central_wavelength, fwhm, pump.chirp)
    return effective_mode_number(decompose(build_jsa(p, pm, auto_grid(p, pm, **grid_opts))))


def fwhm_at_min_k(pump, pm, bounds=(0.2e-9, 8e-9), xatol=1e-13, **grid_opts):
    """Pump FWHM (meters) minimizing K, by bounded scalar minimization."""
    res = minimize_scalar(
        lambda w_nm: mode_number_at(pump, pm, w_nm * 1e-9, **grid_opts),
        bounds=(bounds[0] * 1e9, bounds[1] * 1e9),
        method="bounded",
        options={"xatol": xatol * 1e9},
    )
    return float(res.x) * 1e-9, float(res.fun)


def kappa_scale(pm, zero_halfwidth):
    """``kappa_s`` putting the first signal-axis phasematching zero at ``zero_halfwidth``."""
    dw = bandwidth_wavelength_to_omega(zero_halfwidth, pm.signal_central_wavelength)
    return 2.0 * np.pi / (pm.effective_length * dw)


def calibrate(pump: PumpEnvelope, pm: PhasematchingModel, target_fwhm=1.95e-9,
              zero_halfwidth=8e-9, search_bounds=(0.2e-9, 8e-9), **grid_opts) -> CalibrationResult:
    """Solve for ``(kappa_s, kappa_i)`` so K is minimal at ``target_fwhm``.

    ``pm`` supplies length, central wavelengths and shape; its kappas are
    ignored; ``grid_opts`` go to :func:`pdcsim.jsa.auto_grid`. The
    Gaussian-approximation separability condition
    ``kappa_s kappa_i = -1 / (gamma L^2 sigma^2)`` seeds the bracket.
    """
    ks = kappa_scale(pm, zero_halfwidth)
    sigma = PumpEnvelope(pump.central_wavelength, target_fwhm).sigma_omega
    rho0 = -1.0 / (GAUSS_SINC_GAMMA * pm.effective_length**2 * sigma**2 * ks**2)

    def residual(log_abs_rho):
        rho = -np.exp(log_abs_rho)
        trial = replace(pm, kappa_s=ks, kappa_i=rho * ks)
        w, _ = fwhm_at_min_k(pump, trial, search_bounds, **grid_opts)
        return w - target_fwhm

    lo, hi = np.log(abs(rho0)) - 1.5, np.log(abs(rho0)) + 1.5
    try:
        log_rho = brentq(residual, lo, hi, xtol=1e-10)
    except ValueError as exc:
        raise CalibrationError(
            f"no kappa ratio in [{-np.exp(hi):.3g}, {-np.exp(lo):.3g}] puts the K minimum "
            f"at {target_fwhm * 1e9:.3g} nm"
        ) from exc
    rho = -float(np.exp(log_rho))
    final = replace(pm, kappa_s=ks, kappa_i=rho * ks)
    w, k = fwhm_at_min_k(pump, final, search_bounds, **grid_opts)
    return CalibrationResult(
        kappa_s=float(ks),
        kappa_i=float(rho * ks),
        ratio=rho,
        fwhm_at_min=w,
        K_min=k,
        target_fwhm=float(target_fwhm),
        zero_halfwidth=float(zero_halfwidth),
    )
