"""Unit conversions between the wavelength world of the lab and the
angular-frequency world used internally."""

import numpy as np

C = 299_792_458.0  # m/s, exact


def wavelength_to_omega(wavelength):
    return 2.0 * np.pi * C / np.asarray(wavelength, dtype=float)


def omega_to_wavelength(omega):
    return 2.0 * np.pi * C / np.asarray(omega, dtype=float)


def bandwidth_wavelength_to_omega(delta_wavelength, center_wavelength):
    """Convert a (small) wavelength interval to angular frequency using
    ``|d omega / d lambda| = 2 pi c / lambda**2`` at the center wavelength."""
    return 2.0 * np.pi * C * delta_wavelength / center_wavelength**2


def bandwidth_omega_to_wavelength(delta_omega, center_wavelength):
    return delta_omega * center_wavelength**2 / (2.0 * np.pi * C)


# Conventional fiber dispersion units: ps / (nm km) -> s / m / m
PS_PER_NM_KM = 1e-12 / (1e-9 * 1e3)
