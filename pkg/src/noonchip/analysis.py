"""Phase-fringe scans, super-resolution checks, and the reverse-pass readout.

A fringe scan sweeps the heater phase and records the probability of one
detection pattern.  An N-photon path-entangled state picks up phase N times
faster than a single photon, so its fringe period shrinks by 1/N; the period
estimator measures that super-resolution without assuming it.

The reverse pass sends a two-mode state back through the central coupler and
extracts the result at the outer couplers, converting a |2,0> + |0,2>
superposition into a deterministic |1,1> coincidence; any dephasing between
the two branches shows up as a drop of that coincidence probability to 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import evolve, herald
from .circuit import (
    ChipParams,
    DirectionalCoupler,
    Interferometer,
    PhaseShifter,
    compile_circuit,
    with_loss,
)
from .fock import FockState, Occupation, marginal_distribution


@dataclass(frozen=True)
class FringeSample:
    phi: float
    probability: float
    pattern: Mapping[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class FringeScenario:
    """A phase sweep: chip settings, input state, and the counted pattern.

    The pattern maps mode index to the demanded photon count; modes not
    listed are summed over.
    """

    chip: ChipParams
    input_state: FockState
    pattern: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(
            self, "pattern", {int(m): int(n) for m, n in dict(self.pattern).items()}
        )
        if not self.pattern:
            raise ValueError("fringe pattern needs at least one mode")


def fringe_scan(scenario: FringeScenario, phi_grid: Iterable[float]) -> list[FringeSample]:
    """Probability of the detection pattern at each phase setting."""
    modes = sorted(scenario.pattern)
    wanted = tuple(scenario.pattern[m] for m in modes)
    samples = []
    for phi in phi_grid:
        chip = scenario.chip.with_phi(float(phi))
        state = evolve.apply(chip.matrix(), scenario.input_state)
        prob = marginal_distribution(state, modes).get(wanted, 0.0)
        samples.append(FringeSample(float(phi), prob, dict(scenario.pattern)))
    return samples


def probe_fringe_scan(
    state: FockState,
    pattern: Occupation,
    theta_grid: Iterable[float],
    coupler_eta: float = 0.5,
) -> list[FringeSample]:
    """Interrogates a two-mode state with a phase and a probe coupler.

    Applies phase theta on the first mode followed by a coupler of the given
    transmissivity, then records the probability of the exact two-mode
    pattern.  An |N::0> component produces cos(N theta) fringes.
    """
    if state.mode_count != 2:
        raise ValueError("probe scan expects a two-mode state")
    samples = []
    wanted = tuple(int(n) for n in pattern)
    for theta in theta_grid:
        probe = Interferometer(
            2, (PhaseShifter(float(theta), 0), DirectionalCoupler(coupler_eta, (0, 1)))
        )
        evolved = evolve.apply(compile_circuit(probe), state)
        prob = abs(evolved.amplitude(wanted)) ** 2
        samples.append(FringeSample(float(theta), prob, {0: wanted[0], 1: wanted[1]}))
    return samples


# -- period estimation ---------------------------------------------------------

MIN_FRINGE_SAMPLES = 8

#: spectral peaks below this fraction of the mean level count as "no fringe"
FLAT_THRESHOLD = 1e-9


def _sinusoid_residual(phis: np.ndarray, values: np.ndarray, freq: float) -> float:
    """Least-squares residual of a constant-plus-sinusoid model at freq."""
    design = np.column_stack(
        [
            np.ones_like(phis),
            np.cos(2.0 * np.pi * freq * phis),
            np.sin(2.0 * np.pi * freq * phis),
        ]
    )
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    misfit = values - design @ coef
    return float(misfit @ misfit)


def fringe_period(samples: Sequence[FringeSample] | Sequence[tuple[float, float]]) -> float | None:
    """Dominant oscillation period of a uniformly spaced fringe scan.

    Locates the spectral peak, then refines the frequency by fitting a
    constant plus one sinusoid (golden-section search within one bin of the
    peak).  Returns None when the samples carry no oscillation; raises on
    fewer than MIN_FRINGE_SAMPLES points or a non-uniform grid.
    """
    pairs = [
        (s.phi, s.probability) if isinstance(s, FringeSample) else (float(s[0]), float(s[1]))
        for s in samples
    ]
    if len(pairs) < MIN_FRINGE_SAMPLES:
        raise ValueError(
            f"need at least {MIN_FRINGE_SAMPLES} samples to estimate a period, got {len(pairs)}"
        )
    pairs.sort()
    phis = np.array([p for p, _ in pairs])
    values = np.array([v for _, v in pairs])
    steps = np.diff(phis)
    dt = steps.mean()
    if dt <= 0.0 or np.max(np.abs(steps - dt)) > 1e-9 * max(abs(dt), 1.0):
        raise ValueError("fringe samples must lie on a uniform phase grid")

    spectrum = np.abs(np.fft.rfft(values - values.mean()))
    scale = np.mean(np.abs(values)) + 1.0
    if spectrum.size < 2 or spectrum[1:].max() <= FLAT_THRESHOLD * scale * len(values):
        return None
    peak = 1 + int(np.argmax(spectrum[1:]))

    span = len(values) * dt
    lo = max(0.25, peak - 1.0) / span
    hi = (peak + 1.0) / span
    inv_golden = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_golden * (b - a)
    d = a + inv_golden * (b - a)
    f_c, f_d = _sinusoid_residual(phis, values, c), _sinusoid_residual(phis, values, d)
    for _ in range(90):
        if f_c < f_d:
            b, d, f_d = d, c, f_c
            c = b - inv_golden * (b - a)
            f_c = _sinusoid_residual(phis, values, c)
        else:
            a, c, f_c = c, d, f_d
            d = a + inv_golden * (b - a)
            f_d = _sinusoid_residual(phis, values, d)
    frequency = 0.5 * (a + b)
    return float(1.0 / frequency)


def precision_bounds(n_photons: int) -> tuple[float, float]:
    """(shot-noise limit, Heisenberg limit) phase uncertainties for n photons."""
    if n_photons < 1:
        raise ValueError("need at least one photon")
    return 1.0 / math.sqrt(n_photons), 1.0 / n_photons


# -- reverse pass ----------------------------------------------------------------


@dataclass(frozen=True)
class ReverseResult:
    """Extraction statistics of the reverse pass.

    detection_distribution covers photon counts on the two extraction ports,
    including partial-extraction outcomes; conditional_distribution restricts
    to full extraction of all photons.
    """

    detection_distribution: dict[Occupation, float]
    full_extraction_probability: float
    conditional_distribution: dict[Occupation, float]
    herald_probability: float | None = None


Ensemble = Sequence[tuple[float, FockState]]


def _reverse_distribution(
    state: FockState, eta2: float, eta3: float, eta4: float
) -> dict[Occupation, float]:
    """Joint extraction-port distribution for one pure two-mode state."""
    if state.mode_count != 2:
        raise ValueError("reverse pass expects a two-mode state")
    swapped = FockState(
        2, {(occ[1], occ[0]): amp for occ, amp in state.amplitudes.items()}
    )
    reverse = Interferometer(2, (DirectionalCoupler(eta2, (0, 1)),))
    # extraction: the outer couplers tap each arm with amplitude sqrt(1 - eta)
    reverse = with_loss(reverse, 0, 1.0 - eta3)
    reverse = with_loss(reverse, 1, 1.0 - eta4)
    embedded = FockState(
        4, {occ + (0, 0): amp for occ, amp in swapped.amplitudes.items()}
    )
    out = evolve.apply(compile_circuit(reverse), embedded)
    return marginal_distribution(out, (0, 1))


def reverse_pass(
    state_or_ensemble: FockState | Ensemble,
    eta2: float = 0.5,
    eta3: float = 1.0 / 3.0,
    eta4: float = 1.0 / 3.0,
) -> ReverseResult:
    """Sends a two-mode state backward through the central coupler and taps
    the outer couplers; mixtures are handled as weighted ensembles."""
    if isinstance(state_or_ensemble, FockState):
        ensemble: Ensemble = ((1.0, state_or_ensemble),)
    else:
        ensemble = tuple(state_or_ensemble)
        weight_sum = sum(w for w, _ in ensemble)
        if abs(weight_sum - 1.0) > 1e-9:
            raise ValueError(f"ensemble weights sum to {weight_sum:.10g}, expected 1")

    totals: dict[Occupation, float] = {}
    photon_totals = set()
    for weight, state in ensemble:
        photon_totals.update(state.photon_sectors())
        for occ, p in _reverse_distribution(state, eta2, eta3, eta4).items():
            totals[occ] = totals.get(occ, 0.0) + weight * p

    n_total = max(photon_totals, default=0)
    full = {occ: p for occ, p in totals.items() if sum(occ) == n_total}
    p_full = sum(full.values())
    conditional = {occ: p / p_full for occ, p in full.items()} if p_full > 0.0 else {}
    return ReverseResult(totals, p_full, conditional)


def sagnac_scenario(
    eta1: float,
    eta2: float,
    eta3: float,
    eta4: float,
    phi: float,
    input_state: FockState | None = None,
    pattern: herald.HeraldPattern | None = None,
) -> ReverseResult:
    """Full round trip: herald a state on the forward pass, then read it out
    through the reverse pass.

    Defaults to the two-pair input and single-photon heralds, for which the
    ideal heralded state is (|2,0> + |0,2>)/sqrt(2) and the readout gives a
    |1,1> coincidence with certainty.
    """
    chip = ChipParams(eta1, eta2, eta3, eta4, phi)
    if input_state is None:
        input_state = FockState.basis_state((0, 2, 2, 0))
    if pattern is None:
        pattern = herald.HeraldPattern({0: 1, 3: 1})
    forward = herald.heralded_output(chip, input_state, pattern)
    if forward.is_null:
        return ReverseResult({}, 0.0, {}, herald_probability=0.0)
    result = reverse_pass(forward.conditional_state, eta2, eta3, eta4)
    return ReverseResult(
        result.detection_distribution,
        result.full_extraction_probability,
        result.conditional_distribution,
        herald_probability=forward.probability,
    )
