"""Continuous-variable circuit simulator with timelike-curve elements.

Two engines compute the same circuits: an exact Gaussian covariance engine
(:mod:`otcsim.gaussian`, :mod:`otcsim.timelike`) and a brute-force truncated
Fock-space engine (:mod:`otcsim.fock`) used as an independent oracle.
:mod:`otcsim.experiments` packages the headline circuits (deterministic
noise reduction, iterated uncertainty-product suppression, coherent-state
read-out) and :mod:`otcsim.cli` runs them from JSON manifests.
"""

from .circuits import (
    Beamsplitter,
    Circuit,
    Displacement,
    OtcElement,
    Rotation,
    Squeezer,
    load_circuit,
    run_circuit,
    save_circuit,
)
from .gaussian import (
    GaussianState,
    beamsplit,
    coherent,
    displace,
    homodyne_sample,
    partial_trace,
    quad_stats,
    rotate,
    squeeze,
    tensor,
    vacuum,
)
from .timelike import otc_map, xi_map
from .wavepacket import WavePacket, xi_overlap, xi_to_map

__version__ = "0.1.0"

__all__ = [
    "Beamsplitter",
    "Circuit",
    "Displacement",
    "GaussianState",
    "OtcElement",
    "Rotation",
    "Squeezer",
    "WavePacket",
    "beamsplit",
    "coherent",
    "displace",
    "homodyne_sample",
    "load_circuit",
    "otc_map",
    "partial_trace",
    "quad_stats",
    "rotate",
    "run_circuit",
    "save_circuit",
    "squeeze",
    "tensor",
    "vacuum",
    "xi_map",
    "xi_overlap",
    "xi_to_map",
    "__version__",
]
