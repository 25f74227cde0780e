"""Detector temporal envelopes and the timelike-loop interpolation they set.

A clock delay ``delta_t`` picked up on a timelike loop is observable only to
the extent the detectors can resolve it.  The interpolation parameter is the
normalized overlap of the two detectors' temporal amplitude envelopes,

    xi = integral G1*(tau + delta_t) G2(tau) dtau
         / integral G1*(tau) G2(tau) dtau,

evaluated here by adaptive quadrature.  For identical unit-norm Gaussian
envelopes of width sigma this reduces to exp(-delta_t^2 / (4 sigma^2)): a
shift well inside the coherence time gives xi near 1 (ordinary quantum
mechanics), a shift far outside it gives xi near 0 (full decoherence).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .circuits import OtcElement

QUAD_RELTOL = 1e-9
DENOMINATOR_FLOOR = 1e-12


@dataclass(frozen=True)
class WavePacket:
    """Real Gaussian amplitude envelope, unit norm by construction.

    `width` is the standard deviation of the amplitude envelope itself (in
    seconds); carrier frequency and chirp are not modeled.
    """

    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")

    def amplitude(self, tau):
        """Envelope value, normalized so the squared envelope integrates to 1."""
        norm = (np.pi * self.width ** 2) ** -0.25
        return norm * np.exp(-((tau - self.center) ** 2) / (2.0 * self.width ** 2))


def _cross_overlap(g1: WavePacket, g2: WavePacket, shift: float) -> float:
    span = 8.0 * max(g1.width, g2.width)
    lo = min(g1.center - shift, g2.center) - span
    hi = max(g1.center - shift, g2.center) + span
    value, _ = integrate.quad(
        lambda tau: g1.amplitude(tau + shift) * g2.amplitude(tau),
        lo,
        hi,
        epsabs=0.0,
        epsrel=QUAD_RELTOL,
        limit=200,
    )
    return value


def xi_overlap(g1: WavePacket, g2: WavePacket, delta_t: float) -> float:
    """Normalized shifted overlap of two detector envelopes.

    Returns a value in [0, 1] for equal packets; tiny negative round-off is
    clamped to 0.  Raises ValueError when the unshifted overlap in the
    denominator is below 1e-12 (the normalization is then meaningless).
    Unequal packets are allowed but the ratio is only guaranteed to stay
    within [0, 1] for equal ones, so a warning is issued.
    """
    if g1.width != g2.width or g1.center != g2.center:
        warnings.warn("unequal detector envelopes: normalized overlap may exceed 1")
    denominator = _cross_overlap(g1, g2, 0.0)
    if abs(denominator) < DENOMINATOR_FLOOR:
        raise ValueError("unshifted envelope overlap %.3e too small to normalize against" % denominator)
    value = _cross_overlap(g1, g2, delta_t) / denominator
    if value < 0.0 and value > -1e-12:
        value = 0.0
    return value


def equal_gaussian_xi(sigma: float, delta_t: float) -> float:
    """Closed form exp(-delta_t^2 / (4 sigma^2)) for equal-width packets.

    Obtained by completing the square in the product of two shifted Gaussian
    envelopes; the quadrature route must agree with this to 1e-9.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return float(np.exp(-(delta_t ** 2) / (4.0 * sigma ** 2)))


def xi_to_map(xi: float, modes=(0,), time_shift: float = 0.0) -> OtcElement:
    """Package an overlap value as a circuit element for the given modes."""
    return OtcElement(tuple(modes), xi=float(xi), time_shift=time_shift)


def element_from_packets(g1: WavePacket, g2: WavePacket, delta_t: float, modes=(0,)) -> OtcElement:
    """Full chain: envelopes + delay -> xi -> circuit element."""
    return xi_to_map(xi_overlap(g1, g2, delta_t), modes=modes, time_shift=delta_t)
