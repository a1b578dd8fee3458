"""Binary (click / no-click) detection of the squeezer output.

Analytic click probabilities use the thermal generating function
``<(1 - eta)^n> = 1 / (1 + eta n)`` per mode. Monte-Carlo experiments follow
the photons: sample per-mode photon numbers, route each photon at the
beamsplitter, thin by detector efficiency, and OR with independent background
clicks. Click tallies are integers, so results do not depend on block order.

Background model
----------------
A detector clicks if a signal photon is registered (prob. ``s``) or a
background event fires (prob. ``b``, independent of everything else). Then
``P(no click) = (1 - s)(1 - b)``, which inverts to ``s = (p - b) / (1 - b)``.
For the coincidence, ``P(no click 1 and no click 2) = (1-b1)(1-b2)(1 - s1 - s2 + sc)``
and inclusion-exclusion ``pc = p1 + p2 - 1 + P(neither)`` give::

    sc = (pc - p1 - p2 + 1) / ((1 - b1)(1 - b2)) - 1 + s1 + s2

which for ``b1 = b2 = b`` reduces to
``sc = (pc - b^2 - b(1 - b)(s1 + s2)) / (1 - b)^2``.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from pdcsim import rng as _rng
from pdcsim.errors import DomainError, NegativeCorrected
from pdcsim.squeezer import SqueezerState, mean_photon_number, sample_block

SATURATION_WARN = 0.2


class SaturationWarning(UserWarning):
    """Click probability too high for the linear p/eta photon-number estimate."""


@dataclass(frozen=True)
class DetectorModel:
    """Bucket detector with efficiency ``efficiency`` and a per-pulse
    background click probability (dark counts plus fluorescence)."""

    efficiency: float = 0.25
    background: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"efficiency must be in [0, 1], got {self.efficiency}")
        if not 0.0 <= self.background < 1.0:
            raise ValueError(f"background must be in [0, 1), got {self.background}")


@dataclass(frozen=True)
class ExperimentResult:
    pulses: int
    p1: float
    p2: float
    pc: float
    g2_raw: float
    g2_corrected: float
    standard_error: float
    n1: int = 0
    n2: int = 0
    nc: int = 0
    seed: int | None = None

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class CorrectedProbabilities:
    p1: float
    p2: float
    pc: float
    g2: float
    no_signal: bool = False


def click_probability(state: SqueezerState, det: DetectorModel) -> float:
    """Analytic click probability for the full beam hitting one detector."""
    n = state.mode_photons
    p_none = (1.0 - det.background) * np.prod(1.0 / (1.0 + det.efficiency * n))
    return float(1.0 - p_none)


def click_g2(state: SqueezerState, detectors, splitter_ratio=0.5) -> float:
    """Exact expected ``pc / (p1 p2)`` of the click experiment.

    Differs from :func:`pdcsim.squeezer.g2_analytic` once ``eta * <n>`` is not
    small: click detectors saturate and the coincidence rate falls behind.
    """
    det1, det2 = (detectors, detectors) if isinstance(detectors, DetectorModel) else detectors
    n = state.mode_photons
    e1 = det1.efficiency * splitter_ratio
    e2 = det2.efficiency * (1.0 - splitter_ratio)
    q1 = (1.0 - det1.background) * np.prod(1.0 / (1.0 + e1 * n))
    q2 = (1.0 - det2.background) * np.prod(1.0 / (1.0 + e2 * n))
    q12 = (1.0 - det1.background) * (1.0 - det2.background) * np.prod(1.0 / (1.0 + (e1 + e2) * n))
    p1, p2 = 1.0 - q1, 1.0 - q2
    return g2_estimator(p1, p2, 1.0 - q1 - q2 + q12)


def mean_photon_estimate(p_click, efficiency):
    """Linear estimate ``<n> ~ p_click / eta``, valid far from saturation.

    Warns with :class:`SaturationWarning` above ``p_click = 0.2``.
    """
    if not 0.0 < efficiency <= 1.0:
        raise DomainError(f"efficiency must be in (0, 1], got {efficiency}")
    if not 0.0 <= p_click < 1.0:
        raise DomainError(f"click probability must be in [0, 1), got {p_click}")
    if p_click > SATURATION_WARN:
        warnings.warn(f"p_click={p_click:.3g} > {SATURATION_WARN}: estimate is biased low",
                      SaturationWarning, stacklevel=2)
    return p_click / efficiency


def g2_estimator(p1, p2, pc):
    if p1 * p2 == 0:
        raise DomainError("g2 undefined: a single-detector click probability is zero")
    return pc / (p1 * p2)


def g2_standard_error(pulses, p1, p2, pc):
    """Delta-method standard error of ``pc / (p1 p2)`` from per-pulse Bernoulli tallies.

    With ``g = pc / (p1 p2)``::

        N Var(g) = g^2 (1/pc - 1/p1 - 1/p2 + 2g - 1)
                 = pc / (p1 p2)^2 - g^2 (1/p1 + 1/p2 + 1 - 2g)

    The second form stays finite at ``pc = 0``, where it gives 0.
    """
    if p1 * p2 == 0:
        return float("nan")
    g = pc / (p1 * p2)
    var = (pc / (p1 * p2) ** 2 - g**2 * (1.0 / p1 + 1.0 / p2 + 1.0 - 2.0 * g)) / pulses
    return float(np.sqrt(max(var, 0.0)))


def background_correct(p1, p2, pc, background):
    """Remove independent background clicks from measured probabilities.

    ``background`` is one probability for both detectors or a pair
    ``(b1, b2)``. See the module docstring for the derivation.

    Raises:
        NegativeCorrected: a corrected probability comes out negative.
    """
    b1, b2 = (background, background) if np.isscalar(background) else background
    s1 = (p1 - b1) / (1.0 - b1)
    s2 = (p2 - b2) / (1.0 - b2)
    sc = (pc - p1 - p2 + 1.0) / ((1.0 - b1) * (1.0 - b2)) - 1.0 + s1 + s2
    # inclusion-exclusion cancels to O(1e-16) noise when everything is background
    tol = 1e-12
    if s1 < -tol or s2 < -tol or sc < -tol:
        raise NegativeCorrected(
            f"corrected probabilities (p1'={s1:.3g}, p2'={s2:.3g}, pc'={sc:.3g}) are negative; "
            "inputs are inconsistent with the background level")
    s1, s2, sc = max(s1, 0.0), max(s2, 0.0), max(sc, 0.0)
    if s1 * s2 == 0.0:
        return CorrectedProbabilities(s1, s2, sc, float("nan"), no_signal=True)
    return CorrectedProbabilities(s1, s2, sc, sc / (s1 * s2))


def _g2_block(state, det1, det2, ratio, seed, block, size):
    photons = sample_block(state, seed, block, _rng.BLOCK_SIZE)[:size].sum(axis=1)
    g = _rng.substream(seed, _rng.DETECTION, block)
    arm1 = g.binomial(photons, ratio)
    arm2 = photons - arm1
    c1 = g.binomial(arm1, det1.efficiency) > 0
    c2 = g.binomial(arm2, det2.efficiency) > 0
    c1 |= g.random(size) < det1.background
    c2 |= g.random(size) < det2.background
    return (int(np.count_nonzero(c1)), int(np.count_nonzero(c2)),
            int(np.count_nonzero(c1 & c2)))


def simulate_g2_experiment(state: SqueezerState, detectors, pulses: int, rng_seed: int,
                           splitter_ratio=0.5, n_jobs=1) -> ExperimentResult:
    """Monte-Carlo Hanbury Brown-Twiss measurement on the signal beam.

    The idler is discarded; the signal beam is split with transmission
    ``splitter_ratio`` onto ``detectors = (det1, det2)`` (a single
    :class:`DetectorModel` is used for both).
    """
    if pulses < 1:
        raise ValueError("pulses must be >= 1")
    if not 0.0 <= splitter_ratio <= 1.0:
        raise ValueError("splitter_ratio must be in [0, 1]")
    det1, det2 = (detectors, detectors) if isinstance(detectors, DetectorModel) else detectors

    jobs = [(b, stop - start) for b, start, stop in _rng.blocks(pulses)]
    run = lambda job: _g2_block(state, det1, det2, splitter_ratio, rng_seed, *job)  # noqa: E731
    if n_jobs == 1:
        tallies = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as ex:
            tallies = list(ex.map(run, jobs))
    n1, n2, nc = (int(sum(t[i] for t in tallies)) for i in range(3))

    p1, p2, pc = n1 / pulses, n2 / pulses, nc / pulses
    g2_raw = g2_estimator(p1, p2, pc) if n1 and n2 else float("nan")
    try:
        g2_corr = background_correct(p1, p2, pc, (det1.background, det2.background)).g2
    except NegativeCorrected:
        g2_corr = float("nan")
    return ExperimentResult(
        pulses=pulses, p1=p1, p2=p2, pc=pc, g2_raw=g2_raw, g2_corrected=g2_corr,
        standard_error=g2_standard_error(pulses, p1, p2, pc),
        n1=n1, n2=n2, nc=nc, seed=rng_seed,
    )


def _gain_point(state, det, seed, index, pulses):
    clicks = 0
    for b, start, stop in _rng.blocks(pulses):
        size = stop - start
        photons = sample_block(state, seed, b, _rng.BLOCK_SIZE,
                               stream=(_rng.GAIN_PHOTONS, index))[:size].sum(axis=1)
        g = _rng.substream(seed, _rng.GAIN, index, b)
        hit = g.binomial(photons, det.efficiency) > 0
        hit |= g.random(size) < det.background
        clicks += int(np.count_nonzero(hit))
    return clicks


def simulate_gain_measurement(coefficients, det: DetectorModel, pump_powers, scale,
                              pulses_per_point: int, rng_seed: int):
    """Click probability of the whole signal beam against pump power.

    Returns a structured array with fields ``power``, ``p_click``,
    ``n_estimate`` (``p_click / eta``) and ``n_analytic``.
    """
    powers = np.asarray(pump_powers, dtype=float)
    if np.any(powers < 0):
        raise ValueError("pump powers must be non-negative")
    if det.efficiency == 0:
        raise DomainError("gain measurement needs a non-zero detector efficiency")
    out = np.zeros(powers.size, dtype=[(k, float) for k in
                                       ("power", "p_click", "n_estimate", "n_analytic")])
    for idx, p in enumerate(powers):
        state = SqueezerState(coefficients, scale * np.sqrt(p))
        clicks = _gain_point(state, det, rng_seed, idx, pulses_per_point)
        p_click = clicks / pulses_per_point
        out[idx] = (p, p_click, p_click / det.efficiency, mean_photon_number(state))
    return out
