"""Linear-optical circuits: directional couplers, phase shifters, loss taps.

A directional coupler with transmissivity eta acts on its mode pair as

    [[ sqrt(eta),          i sqrt(1 - eta) ],
     [ i sqrt(1 - eta),    sqrt(eta)       ]]

and creation operators transform as a_k^dag -> sum_j U[j, k] a_j^dag, i.e.
columns index input modes and rows index output modes.  Loss is modeled as a
coupler into a fresh environment mode, which keeps the compiled matrix
unitary on the enlarged space.

The four-mode reconfigurable circuit reproduced here (modes 0..3, inputs
labeled a, b, c, d and outputs i, j, k, l) is

    DC2(1,2) . [DC3(0,1) (+) DC4(2,3)] . Phase(phi, 2) . DC1(1,2)

with device values eta1 = eta2 = 1/2 and eta3 = eta4 = 1/3.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np


@dataclass(frozen=True)
class DirectionalCoupler:
    eta: float
    modes: tuple[int, int]

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if self.modes[0] == self.modes[1]:
            raise ValueError("coupler needs two distinct modes")


@dataclass(frozen=True)
class PhaseShifter:
    phi: float
    mode: int


@dataclass(frozen=True)
class LossTap:
    """Routes amplitude sqrt(1 - transmission) into a dedicated environment mode."""

    transmission: float
    mode: int
    env_mode: int

    def __post_init__(self):
        if not 0.0 <= self.transmission <= 1.0:
            raise ValueError(f"transmission must lie in [0, 1], got {self.transmission}")
        if self.mode == self.env_mode:
            raise ValueError("loss tap needs a distinct environment mode")


Element = Union[DirectionalCoupler, PhaseShifter, LossTap]


@dataclass(frozen=True)
class Interferometer:
    """Ordered element list on mode_count modes (environment modes included).

    labels maps port names to mode indices; both input-side and output-side
    names may point at the same index.
    """

    mode_count: int
    elements: tuple[Element, ...] = ()
    labels: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for elem in self.elements:
            for m in _element_modes(elem):
                if not 0 <= m < self.mode_count:
                    raise ValueError(f"element {elem} references mode {m} outside 0..{self.mode_count - 1}")

    @property
    def signal_mode_count(self) -> int:
        """Mode count excluding loss-tap environment modes."""
        return self.mode_count - sum(isinstance(e, LossTap) for e in self.elements)


def _element_modes(elem: Element) -> tuple[int, ...]:
    if isinstance(elem, DirectionalCoupler):
        return elem.modes
    if isinstance(elem, PhaseShifter):
        return (elem.mode,)
    return (elem.mode, elem.env_mode)


def dc_matrix(eta: float) -> np.ndarray:
    """2x2 directional-coupler matrix for transmissivity eta."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    t = math.sqrt(eta)
    r = 1j * math.sqrt(1.0 - eta)
    return np.array([[t, r], [r, t]], dtype=np.complex128)


def element_matrix(elem: Element, mode_count: int) -> np.ndarray:
    """Element embedded into the identity on mode_count modes."""
    u = np.eye(mode_count, dtype=np.complex128)
    if isinstance(elem, DirectionalCoupler):
        block = dc_matrix(elem.eta)
        idx = list(elem.modes)
        u[np.ix_(idx, idx)] = block
    elif isinstance(elem, PhaseShifter):
        u[elem.mode, elem.mode] = complex(math.cos(elem.phi), math.sin(elem.phi))
    else:
        block = dc_matrix(elem.transmission)
        idx = [elem.mode, elem.env_mode]
        u[np.ix_(idx, idx)] = block
    return u


def compile_circuit(circ: Interferometer) -> np.ndarray:
    """Total mode transformation: later elements multiply from the left."""
    u = np.eye(circ.mode_count, dtype=np.complex128)
    for elem in circ.elements:
        u = element_matrix(elem, circ.mode_count) @ u
    return u


def chip_circuit(eta1: float, eta2: float, eta3: float, eta4: float, phi: float) -> Interferometer:
    """The four-mode heralding circuit; see the module docstring for layout."""
    elements = (
        DirectionalCoupler(eta1, (1, 2)),
        PhaseShifter(phi, 2),
        DirectionalCoupler(eta3, (0, 1)),
        DirectionalCoupler(eta4, (2, 3)),
        DirectionalCoupler(eta2, (1, 2)),
    )
    labels = {"a": 0, "b": 1, "c": 2, "d": 3, "i": 0, "j": 1, "k": 2, "l": 3}
    return Interferometer(4, elements, labels)


@dataclass(frozen=True)
class ChipParams:
    """Coupler transmissivities and heater phase of the four-mode circuit."""

    eta1: float = 0.5
    eta2: float = 0.5
    eta3: float = 1.0 / 3.0
    eta4: float = 1.0 / 3.0
    phi: float = 0.0

    def circuit(self) -> Interferometer:
        return chip_circuit(self.eta1, self.eta2, self.eta3, self.eta4, self.phi)

    def matrix(self) -> np.ndarray:
        return compile_circuit(self.circuit())

    def with_phi(self, phi: float) -> "ChipParams":
        return replace(self, phi=phi)


def with_loss(circ: Interferometer, mode: int, transmission: float) -> Interferometer:
    """Appends a loss tap on the given mode, enlarging the circuit by one mode."""
    if not 0 <= mode < circ.mode_count:
        raise ValueError(f"mode {mode} out of range")
    tap = LossTap(transmission, mode, circ.mode_count)
    return Interferometer(circ.mode_count + 1, circ.elements + (tap,), dict(circ.labels))


# -- serialization ---------------------------------------------------------
#
# {"modes": M, "labels": {...}, "elements": [
#    {"type": "dc", "eta": 0.5, "modes": [1, 2]},
#    {"type": "phase", "phi": 1.57, "mode": 2},
#    {"type": "loss", "t": 0.667, "mode": 0}]}
#
# "modes" counts signal modes only; environment modes for loss taps are
# assigned in element order after the signal modes on load.


def circuit_to_json_dict(circ: Interferometer) -> dict:
    elements = []
    for elem in circ.elements:
        if isinstance(elem, DirectionalCoupler):
            elements.append({"type": "dc", "eta": elem.eta, "modes": list(elem.modes)})
        elif isinstance(elem, PhaseShifter):
            elements.append({"type": "phase", "phi": elem.phi, "mode": elem.mode})
        else:
            elements.append({"type": "loss", "t": elem.transmission, "mode": elem.mode})
    return {"modes": circ.signal_mode_count, "labels": dict(circ.labels), "elements": elements}


def circuit_from_json_dict(data: dict) -> Interferometer:
    base_modes = int(data["modes"])
    n_loss = sum(1 for e in data.get("elements", []) if e["type"] == "loss")
    elements: list[Element] = []
    next_env = base_modes
    for entry in data.get("elements", []):
        kind = entry["type"]
        if kind == "dc":
            elements.append(DirectionalCoupler(float(entry["eta"]), tuple(entry["modes"])))
        elif kind == "phase":
            elements.append(PhaseShifter(float(entry["phi"]), int(entry["mode"])))
        elif kind == "loss":
            elements.append(LossTap(float(entry["t"]), int(entry["mode"]), next_env))
            next_env += 1
        else:
            raise ValueError(f"unknown element type {kind!r}")
    labels = {str(k): int(v) for k, v in data.get("labels", {}).items()}
    return Interferometer(base_modes + n_loss, tuple(elements), labels)


def circuit_to_json(circ: Interferometer) -> str:
    return json.dumps(circuit_to_json_dict(circ), indent=2, sort_keys=True)


def circuit_from_json(text: str) -> Interferometer:
    return circuit_from_json_dict(json.loads(text))
