"""Multimode two-mode squeezed vacuum produced by the decomposed PDC Hamiltonian.

Each Schmidt pair ``(A_k, B_k)`` is an independent two-mode squeezer with
squeezing ``r_k = B * c_k``. Its marginals are thermal with mean
``n_k = sinh(r_k)**2``, and signal and idler photon numbers are equal pulse by
pulse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pdcsim import rng as _rng
from pdcsim.errors import CutoffTooSmall, ZeroGain

TAIL_TOL = 1e-9
_DB_PER_NEPER_FIELD = 20.0 * np.log10(np.e)


@dataclass(frozen=True)
class SqueezerState:
    """Schmidt coefficients plus an overall gain ``B`` (``B ~ sqrt(pump power)``)."""

    coefficients: np.ndarray
    gain: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=float)).copy()
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty vector")
        if np.any(c < 0):
            raise ValueError("Schmidt coefficients must be non-negative")
        if not self.gain >= 0:
            raise ValueError(f"gain must be >= 0, got {self.gain}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "gain", float(self.gain))

    @classmethod
    def from_decomposition(cls, dec, gain):
        return cls(dec.coefficients, gain)

    @property
    def squeezing(self):
        return self.gain * self.coefficients

    @property
    def mode_photons(self):
        return np.sinh(self.squeezing) ** 2

    @property
    def lambdas(self):
        return np.tanh(self.squeezing)


def mean_photon_number(state: SqueezerState) -> float:
    return float(np.sum(state.mode_photons))


def gain_curve(coefficients, pump_powers, scale):
    """Mean photon number against pump power, with ``B = scale * sqrt(P)``.

    Returns a structured array with fields ``power``, ``gain``,
    ``n_multimode``, ``n_single_mode`` (``c = [1]``) and ``n_linear``
    (``B**2 * sum c_k**2``, the small-gain/many-mode limit).
    """
    c = np.asarray(coefficients, dtype=float)
    p = np.asarray(pump_powers, dtype=float)
    if np.any(p < 0):
        raise ValueError("pump powers must be non-negative")
    b = scale * np.sqrt(p)
    out = np.zeros(p.size, dtype=[(k, float) for k in
                                  ("power", "gain", "n_multimode", "n_single_mode", "n_linear")])
    out["power"] = p
    out["gain"] = b
    out["n_multimode"] = np.sum(np.sinh(np.outer(b, c)) ** 2, axis=1)
    out["n_single_mode"] = np.sinh(b) ** 2
    out["n_linear"] = b**2 * np.sum(c**2)
    return out


def mean_photon_to_squeezing_db(n_mean) -> float:
    """Two-mode squeezing in dB of a single-mode squeezer with mean photon
    number ``n_mean`` per beam: ``20 r log10(e)`` with ``r = asinh(sqrt(n))``."""
    if n_mean < 0:
        raise ValueError("mean photon number must be >= 0")
    return float(_DB_PER_NEPER_FIELD * np.arcsinh(np.sqrt(n_mean)))


def g2_analytic(state: SqueezerState) -> float:
    """Marginal g2 of one beam: ``1 + sum n_k^2 / (sum n_k)^2``."""
    n = state.mode_photons
    total = n.sum()
    if state.gain == 0 or total == 0:
        raise ZeroGain("g2 is undefined for the vacuum (B = 0)")
    return float(1.0 + np.sum(n**2) / total**2)


def _required_cutoff(n, tol):
    q = n / (1.0 + n)
    q = q[q > 0]
    if q.size == 0:
        return 1
    return int(np.ceil(np.log(tol) / np.log(q.max()))) + 1


def photon_number_distribution(state: SqueezerState, cutoff: int) -> np.ndarray:
    """P(N) for the total photon number N in one beam, ``N = 0..cutoff``.

    Convolution of per-mode geometric laws ``P_k(n) = n_k^n / (1 + n_k)^(n+1)``.

    Raises:
        CutoffTooSmall: a single mode, or the convolved total, leaves more
            than ``1e-9`` of probability beyond ``cutoff``.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    n = state.mode_photons
    q = n / (1.0 + n)
    if np.any(q ** (cutoff + 1) >= TAIL_TOL):
        need = _required_cutoff(n, TAIL_TOL)
        raise CutoffTooSmall(f"cutoff {cutoff} too small for mode tails; need about {need}", need)

    k = np.arange(cutoff + 1)
    dist = np.zeros(cutoff + 1)
    dist[0] = 1.0
    for qk in q[q > 0]:
        pk = (1.0 - qk) * qk**k
        dist = np.convolve(dist, pk)[: cutoff + 1]
    lost = 1.0 - dist.sum()
    if lost >= TAIL_TOL:
        need = cutoff
        while True:
            need *= 2
            try:
                photon_number_distribution(state, need)
                break
            except CutoffTooSmall:
                continue
        raise CutoffTooSmall(
            f"cutoff {cutoff} leaves {lost:.2e} of total probability uncovered; need about {need}", need)
    return dist


def _geometric_inverse_cdf(u, q):
    """Inverse CDF of ``P(n) = (1 - q) q^n`` for uniforms ``u`` in [0, 1)."""
    out = np.zeros(u.shape, dtype=np.int64)
    live = q > 0
    if np.any(live):
        out[:, live] = np.floor(np.log1p(-u[:, live]) / np.log(q[live])).astype(np.int64)
    return out


def sample_block(state: SqueezerState, seed: int, block: int, size: int,
                 stream=(_rng.PHOTONS,)) -> np.ndarray:
    """Per-mode photon numbers for ``size`` pulses of one substream block."""
    q = state.mode_photons / (1.0 + state.mode_photons)
    g = _rng.substream(seed, *stream, block)
    u = g.random((size, q.size))
    return _geometric_inverse_cdf(u, q)


def sample_photon_numbers(state: SqueezerState, rng_seed: int, pulses=1, first_pulse=0):
    """Per-mode photon numbers for pulses ``first_pulse .. first_pulse + pulses - 1``.

    Returns ``(signal, idler)`` arrays of shape ``(pulses, n_modes)``. The two
    arrays are equal element by element: each pair mode emits photons only in
    pairs. Pulse ``p`` always sees the same numbers for a given seed,
    independent of how the range is chunked.
    """
    bs = _rng.BLOCK_SIZE
    out = np.empty((pulses, state.coefficients.size), dtype=np.int64)
    stop = first_pulse + pulses
    pos = 0
    for b in range(first_pulse // bs, (stop - 1) // bs + 1 if pulses else 0):
        lo, hi = max(first_pulse, b * bs), min(stop, (b + 1) * bs)
        block = sample_block(state, rng_seed, b, bs)
        out[pos : pos + hi - lo] = block[lo - b * bs : hi - b * bs]
        pos += hi - lo
    return out, out.copy()
