"""Circuit description: ordered gate lists over named modes.

A :class:`Circuit` is a plain list of elements applied left to right.  Linear
elements (:class:`Displacement`, :class:`Rotation`, :class:`Squeezer`,
:class:`Beamsplitter`) act symplectically; an :class:`OtcElement` marks a set
of modes traversing a timelike curve and dispatches to the nonlinear maps in
:mod:`otcsim.timelike`.

Circuits serialize to a versioned JSON document with one entry per element
(kind, modes, parameters); see ``circuit_to_dict`` for the schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import gaussian, timelike

CIRCUIT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Displacement:
    mode: int
    alpha: complex


@dataclass(frozen=True)
class Rotation:
    mode: int
    angle: float


@dataclass(frozen=True)
class Squeezer:
    mode: int
    r: float
    angle: float = 0.0


@dataclass(frozen=True)
class Beamsplitter:
    mode_a: int
    mode_b: int
    transmissivity: float = 0.5


@dataclass(frozen=True)
class OtcElement:
    """Modes traversing a timelike curve.

    xi interpolates between the fully decohering open-timelike-curve limit
    (xi = 0) and ordinary evolution (xi = 1).  ``time_shift`` is the proper
    time gained on the loop; it is metadata only (no dynamics here) and is
    what detector wavepacket overlaps translate into xi.
    """

    modes: tuple
    xi: float = 0.0
    time_shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(self.modes) == 0:
            raise ValueError("OtcElement needs at least one mode")
        if len(set(self.modes)) != len(self.modes):
            raise ValueError("OtcElement modes must be distinct")
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError("xi must lie in [0, 1]")


LINEAR_KINDS = (Displacement, Rotation, Squeezer, Beamsplitter)


@dataclass(frozen=True)
class Circuit:
    num_modes: int
    elements: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.num_modes < 1:
            raise ValueError("circuit needs at least one mode")
        for el in self.elements:
            for m in _element_modes(el):
                if not 0 <= m < self.num_modes:
                    raise ValueError("element %r references mode %d outside arity %d" % (el, m, self.num_modes))


def _element_modes(el):
    if isinstance(el, Displacement) or isinstance(el, Rotation) or isinstance(el, Squeezer):
        return (el.mode,)
    if isinstance(el, Beamsplitter):
        return (el.mode_a, el.mode_b)
    if isinstance(el, OtcElement):
        return el.modes
    raise TypeError("unknown circuit element %r" % (el,))


def run_circuit(circuit: Circuit, state: gaussian.GaussianState) -> gaussian.GaussianState:
    """Apply a circuit to a Gaussian state, left to right.

    OTC elements dispatch to :func:`otcsim.timelike.xi_map` (which reduces to
    the pure decoherence map at xi = 0).
    """
    if state.num_modes != circuit.num_modes:
        raise ValueError("state has %d modes, circuit expects %d" % (state.num_modes, circuit.num_modes))
    for el in circuit.elements:
        if isinstance(el, Displacement):
            state = gaussian.displace(state, el.mode, el.alpha)
        elif isinstance(el, Rotation):
            state = gaussian.rotate(state, el.mode, el.angle)
        elif isinstance(el, Squeezer):
            state = gaussian.squeeze(state, el.mode, el.r, el.angle)
        elif isinstance(el, Beamsplitter):
            state = gaussian.beamsplit(state, el.mode_a, el.mode_b, el.transmissivity)
        elif isinstance(el, OtcElement):
            state = timelike.xi_map(state, el.modes, el.xi)
        else:
            raise TypeError("unknown circuit element %r" % (el,))
    return state


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _element_to_dict(el) -> dict:
    if isinstance(el, Displacement):
        return {"kind": "displacement", "mode": el.mode, "alpha": [el.alpha.real, el.alpha.imag]}
    if isinstance(el, Rotation):
        return {"kind": "rotation", "mode": el.mode, "angle": el.angle}
    if isinstance(el, Squeezer):
        return {"kind": "squeezer", "mode": el.mode, "r": el.r, "angle": el.angle}
    if isinstance(el, Beamsplitter):
        return {"kind": "beamsplitter", "modes": [el.mode_a, el.mode_b], "transmissivity": el.transmissivity}
    if isinstance(el, OtcElement):
        return {"kind": "otc", "modes": list(el.modes), "xi": el.xi, "time_shift": el.time_shift}
    raise TypeError("unknown circuit element %r" % (el,))


def _element_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "displacement":
        re, im = d["alpha"]
        return Displacement(int(d["mode"]), complex(re, im))
    if kind == "rotation":
        return Rotation(int(d["mode"]), float(d["angle"]))
    if kind == "squeezer":
        return Squeezer(int(d["mode"]), float(d["r"]), float(d.get("angle", 0.0)))
    if kind == "beamsplitter":
        a, b = d["modes"]
        return Beamsplitter(int(a), int(b), float(d.get("transmissivity", 0.5)))
    if kind == "otc":
        return OtcElement(tuple(int(m) for m in d["modes"]), float(d.get("xi", 0.0)), float(d.get("time_shift", 0.0)))
    raise ValueError("unknown element kind %r" % (kind,))


def circuit_to_dict(circuit: Circuit) -> dict:
    return {
        "version": CIRCUIT_SCHEMA_VERSION,
        "num_modes": circuit.num_modes,
        "elements": [_element_to_dict(el) for el in circuit.elements],
    }


def circuit_from_dict(d: dict) -> Circuit:
    version = d.get("version")
    if version != CIRCUIT_SCHEMA_VERSION:
        raise ValueError("unsupported circuit schema version %r" % (version,))
    return Circuit(int(d["num_modes"]), tuple(_element_from_dict(e) for e in d["elements"]))


def save_circuit(circuit: Circuit, path):
    with open(path, "w") as fh:
        json.dump(circuit_to_dict(circuit), fh, indent=2)
        fh.write("\n")


def load_circuit(path) -> Circuit:
    with open(path) as fh:
        return circuit_from_dict(json.load(fh))
