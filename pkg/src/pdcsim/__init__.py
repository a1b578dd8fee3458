"""Simulation toolkit for an engineered pulsed type-II PDC two-mode squeezer.

The package follows the chain source -> modes -> state -> detectors:

* :mod:`pdcsim.jsa` builds the joint spectral amplitude of the pair source,
* :mod:`pdcsim.schmidt` splits it into broadband Schmidt modes,
* :mod:`pdcsim.squeezer` models the resulting multimode squeezed vacuum,
* :mod:`pdcsim.detection` simulates click detectors (g2 and gain experiments),
* :mod:`pdcsim.spectrometer` simulates the dispersive-fiber spectrometer,
* :mod:`pdcsim.cli` ties everything to a config-driven command line.
"""

__version__ = "0.1.0"

from pdcsim.errors import PDCSimError
from pdcsim.jsa import (
    FrequencyGrid,
    JointSpectralAmplitude,
    PhasematchingModel,
    PumpEnvelope,
    build_jsa,
    joint_spectral_intensity,
    jsi_correlation,
    marginal_spectrum,
)
from pdcsim.schmidt import (
    SchmidtDecomposition,
    decompose,
    effective_mode_number,
    g2_low_gain,
    pump_width_sweep,
    reconstruct,
)
from pdcsim.squeezer import (
    SqueezerState,
    g2_analytic,
    mean_photon_number,
    mean_photon_to_squeezing_db,
    photon_number_distribution,
)
from pdcsim.detection import (
    DetectorModel,
    ExperimentResult,
    click_g2,
    click_probability,
    simulate_g2_experiment,
    simulate_gain_measurement,
)
from pdcsim.spectrometer import (
    SpectrometerConfig,
    reconstruct_jsi,
    similarity,
    simulate_spectrometer,
)

__all__ = [
    "PDCSimError",
    "FrequencyGrid",
    "JointSpectralAmplitude",
    "PhasematchingModel",
    "PumpEnvelope",
    "build_jsa",
    "joint_spectral_intensity",
    "jsi_correlation",
    "marginal_spectrum",
    "SchmidtDecomposition",
    "decompose",
    "effective_mode_number",
    "g2_low_gain",
    "pump_width_sweep",
    "reconstruct",
    "SqueezerState",
    "g2_analytic",
    "mean_photon_number",
    "mean_photon_to_squeezing_db",
    "photon_number_distribution",
    "DetectorModel",
    "ExperimentResult",
    "click_g2",
    "click_probability",
    "simulate_g2_experiment",
    "simulate_gain_measurement",
    "SpectrometerConfig",
    "reconstruct_jsi",
    "similarity",
    "simulate_spectrometer",
]
