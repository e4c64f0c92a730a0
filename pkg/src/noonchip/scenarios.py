"""Named scenario configurations and their runners.

A ScenarioConfig captures one reproducible computation: circuit settings, an
input state, optional herald pattern, detection topology, and sweep settings.
Configs serialize to JSON and round-trip identically, and every preset below
reproduces one of the chip's benchmark curves:

* fig2a          heralded two-photon path entanglement at phi = 0
* fig2b-sagnac   readout of the heralded state through the reverse pass
* fig3a          single-photon fringe, period 2 pi
* fig3b          heralded four-photon fringe, period pi (sixfold coincidence)
* fig3b-4point   the same at only four phase settings (no period fit)
* fig4           heralded |4::0> generation at phi = pi/2
* fig4-contamination   higher-order-pair contamination of the fig4 signature
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import analysis, detect, evolve, herald, source
from .circuit import ChipParams, Interferometer, circuit_from_json_dict, compile_circuit
from .fock import FockState


class ConfigError(ValueError):
    """A scenario configuration is malformed or inconsistent."""


class NumericError(RuntimeError):
    """A computation produced numerically invalid results."""


@dataclass
class ScenarioConfig:
    name: str
    kind: str  # simulate | sagnac | fringe | contamination
    circuit: dict
    input: dict
    herald: dict[str, int] | None = None
    detection: dict | None = None
    sweep: dict | None = None
    signal_photons: int | None = None
    seed: int = 0

    KINDS = ("simulate", "sagnac", "fringe", "contamination")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}")
        if not isinstance(self.circuit, dict) or len(self.circuit) != 1:
            raise ConfigError("circuit must give exactly one of: chip, file, inline")
        if next(iter(self.circuit)) not in ("chip", "file", "inline"):
            raise ConfigError("circuit must give exactly one of: chip, file, inline")
        if not isinstance(self.input, dict) or len(self.input) != 1:
            raise ConfigError("input must give exactly one of: occupation, state, spdc")
        if next(iter(self.input)) not in ("occupation", "state", "spdc"):
            raise ConfigError("input must give exactly one of: occupation, state, spdc")
        if self.kind == "fringe" and not self.sweep:
            raise ConfigError("fringe scenarios need a sweep block")
        if self.kind == "contamination" and self.signal_photons is None:
            raise ConfigError("contamination scenarios need signal_photons")

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config fields: {', '.join(sorted(extra))}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_json_dict(data)

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        file = Path(path)
        if not file.is_file():
            raise ConfigError(f"config file not found: {file}")
        return cls.from_json(file.read_text())

    # -- resolution ---------------------------------------------------------

    def chip_params(self) -> ChipParams:
        if "chip" not in self.circuit:
            raise ConfigError(f"{self.kind} scenarios need circuit.chip settings")
        try:
            return ChipParams(**self.circuit["chip"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad chip settings: {exc}") from exc

    def interferometer(self, base_dir: Path | None = None) -> Interferometer:
        if "chip" in self.circuit:
            return self.chip_params().circuit()
        if "inline" in self.circuit:
            return circuit_from_json_dict(self.circuit["inline"])
        file = Path(self.circuit["file"])
        if base_dir is not None and not file.is_absolute():
            file = base_dir / file
        if not file.is_file():
            raise ConfigError(f"circuit file not found: {file}")
        return circuit_from_json_dict(json.loads(file.read_text()))

    def input_state(self, mode_count: int) -> FockState:
        if "occupation" in self.input:
            occ = self.input["occupation"]
            if len(occ) != mode_count:
                raise ConfigError(
                    f"input occupation has {len(occ)} modes, circuit has {mode_count}"
                )
            return FockState.basis_state(occ)
        if "state" in self.input:
            state = FockState.from_json_dict(self.input["state"])
            if state.mode_count != mode_count:
                raise ConfigError(
                    f"input state has {state.mode_count} modes, circuit has {mode_count}"
                )
            return state
        params = self.spdc_params()
        if mode_count != 4:
            raise ConfigError("the pair-source input is defined on the four-mode chip")
        return source.spdc_chip_input(params)

    def spdc_params(self) -> source.SpdcParams:
        if "spdc" not in self.input:
            raise ConfigError("this scenario needs a pair-source input block")
        try:
            return source.SpdcParams(**self.input["spdc"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad pair-source settings: {exc}") from exc

    def herald_pattern(self) -> herald.HeraldPattern | None:
        if self.herald is None:
            return None
        try:
            return herald.HeraldPattern({int(m): int(n) for m, n in self.herald.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad herald pattern: {exc}") from exc

    def detection_topology(
        self, base_dir: Path | None = None
    ) -> tuple[list[detect.SplitterTree], detect.DetectorModel] | None:
        if self.detection is None:
            return None
        if "preset" in self.detection:
            name = self.detection["preset"]
            if name not in detect.TOPOLOGY_PRESETS:
                raise ConfigError(f"unknown detection preset {name!r}")
            return detect.TOPOLOGY_PRESETS[name]()
        if "inline" in self.detection:
            return detect.topology_from_json_dict(self.detection["inline"])
        if "file" in self.detection:
            file = Path(self.detection["file"])
            if base_dir is not None and not file.is_absolute():
                file = base_dir / file
            if not file.is_file():
                raise ConfigError(f"detection topology file not found: {file}")
            return detect.topology_from_json_dict(json.loads(file.read_text()))
        raise ConfigError("detection must give one of: preset, file, inline")

    def sweep_grid(self) -> np.ndarray:
        if not self.sweep:
            raise ConfigError("scenario has no sweep block")
        if self.sweep.get("parameter", "phi") != "phi":
            raise ConfigError("only phi sweeps are supported")
        grid = self.sweep.get("grid")
        if grid is None:
            raise ConfigError("sweep needs an explicit grid")
        return np.asarray([float(x) for x in grid])

    def sweep_pattern(self) -> dict[int, int]:
        if not self.sweep or "pattern" not in self.sweep:
            raise ConfigError("sweep needs a detection pattern")
        return {int(m): int(n) for m, n in self.sweep["pattern"].items()}


# -- presets -----------------------------------------------------------------


def _chip_block(phi: float = 0.0) -> dict:
    return {
        "chip": {
            "eta1": 0.5,
            "eta2": 0.5,
            "eta3": 1.0 / 3.0,
            "eta4": 1.0 / 3.0,
            "phi": phi,
        }
    }


def _dense_grid() -> list[float]:
    return [4.0 * math.pi * i / 256 for i in range(256)]


def preset(name: str) -> ScenarioConfig:
    """One of the named benchmark scenarios; raises ConfigError if unknown."""
    herald_il = {"0": 1, "3": 1}
    presets: dict[str, dict] = {
        "fig2a": dict(
            kind="simulate",
            circuit=_chip_block(0.0),
            input={"occupation": [0, 2, 2, 0]},
            herald=herald_il,
            detection={"preset": "paper-6fold"},
        ),
        "fig4": dict(
            kind="simulate",
            circuit=_chip_block(math.pi / 2.0),
            input={"occupation": [0, 3, 3, 0]},
            herald=herald_il,
            detection={"preset": "paper-6fold"},
        ),
        "fig2b-sagnac": dict(
            kind="sagnac",
            circuit=_chip_block(0.0),
            input={"occupation": [0, 2, 2, 0]},
            herald=herald_il,
        ),
        "fig3a": dict(
            kind="fringe",
            circuit=_chip_block(0.0),
            input={"occupation": [0, 1, 0, 0]},
            sweep={"parameter": "phi", "grid": _dense_grid(), "pattern": {"1": 1}},
        ),
        "fig3b": dict(
            kind="fringe",
            circuit=_chip_block(0.0),
            input={"occupation": [0, 3, 3, 0]},
            sweep={
                "parameter": "phi",
                "grid": _dense_grid(),
                "pattern": {"0": 1, "1": 4, "2": 0, "3": 1},
            },
        ),
        "fig3b-4point": dict(
            kind="fringe",
            circuit=_chip_block(0.0),
            input={"occupation": [0, 3, 3, 0]},
            sweep={
                "parameter": "phi",
                "grid": [math.pi / 2.0, math.pi, 3.0 * math.pi / 2.0, 2.0 * math.pi],
                "pattern": {"0": 1, "1": 4, "2": 0, "3": 1},
            },
        ),
        "fig4-contamination": dict(
            kind="contamination",
            circuit=_chip_block(math.pi / 2.0),
            input={"spdc": {"xi": 0.085, "n_max": 4, "overlap": 1.0}},
            herald=herald_il,
            detection={"preset": "paper-6fold"},
            signal_photons=4,
        ),
    }
    if name not in presets:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(presets))}"
        )
    return ScenarioConfig(name=name, **presets[name])


PRESET_NAMES = (
    "fig2a",
    "fig2b-sagnac",
    "fig3a",
    "fig3b",
    "fig3b-4point",
    "fig4",
    "fig4-contamination",
)


# -- runners -------------------------------------------------------------------


def _dump_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


@dataclass
class ScenarioOutput:
    """Result of a scenario run: summary lines plus named output files."""

    summary: list[str]
    files: dict[str, str | bytes] = field(default_factory=dict)
    distributions: dict[str, dict] = field(default_factory=dict)


def _distribution_files(
    output: ScenarioOutput, stem: str, dist: Mapping, fmt: str
) -> None:
    if fmt == "json":
        body = {detect.format_outcome(k): float(v) for k, v in dist.items()}
        output.files[f"{stem}.json"] = _dump_json(body)
    else:
        rows = sorted((detect.format_outcome(k), float(v)) for k, v in dist.items())
        lines = ["outcome,probability"] + [f"{k},{v!r}" for k, v in rows]
        output.files[f"{stem}.csv"] = "\n".join(lines) + "\n"


def run_simulate(config: ScenarioConfig, fmt: str = "csv", base_dir: Path | None = None) -> ScenarioOutput:
    if config.kind == "sagnac":
        return run_sagnac(config, fmt)
    if config.kind != "simulate":
        raise ConfigError(f"expected a simulate scenario, got kind {config.kind!r}")
    circ = config.interferometer(base_dir)
    matrix = compile_circuit(circ)
    # user inputs address signal modes; loss-tap environment modes start empty
    state = config.input_state(circ.signal_mode_count)
    if state.mode_count != circ.mode_count:
        pad = circ.mode_count - state.mode_count
        state = FockState(
            circ.mode_count,
            {occ + (0,) * pad: a for occ, a in state.amplitudes.items()},
        )
    evolved = evolve.apply(matrix, state)
    pattern = config.herald_pattern()
    output = ScenarioOutput(summary=[])
    if pattern is None:
        dist = {occ: abs(a) ** 2 for occ, a in evolved.amplitudes.items()}
        output.summary.append(f"output distribution over {len(dist)} occupations")
        output.files["state.json"] = _dump_json(evolved.to_json_dict())
        _distribution_files(output, "distribution", dist, fmt)
        output.distributions["distribution"] = dist
        return output
    result = herald.project(evolved, pattern)
    output.files["herald.json"] = _dump_json(result.to_json_dict())
    output.summary.append(f"herald probability: {result.probability!r}")
    if result.is_null:
        output.summary.append("herald impossible for this input (flagged, empty state)")
        output.distributions["distribution"] = {}
        return output
    state_out = result.conditional_state
    dist = {occ: abs(a) ** 2 for occ, a in state_out.amplitudes.items()}
    output.files["state.json"] = _dump_json(state_out.to_json_dict())
    _distribution_files(output, "distribution", dist, fmt)
    output.distributions["distribution"] = dist
    output.summary.append(
        f"conditional state on modes {result.kept_modes}: {len(state_out)} terms"
    )
    for occ, p in sorted(dist.items()):
        output.summary.append(f"  {detect.format_outcome(occ)}  {p!r}")
    return output


def run_sagnac(config: ScenarioConfig, fmt: str = "csv") -> ScenarioOutput:
    chip = config.chip_params()
    circ = chip.circuit()
    state = config.input_state(circ.mode_count)
    pattern = config.herald_pattern()
    result = analysis.sagnac_scenario(
        chip.eta1, chip.eta2, chip.eta3, chip.eta4, chip.phi,
        input_state=state,
        pattern=pattern,
    )
    output = ScenarioOutput(summary=[])
    body = {
        "herald_probability": result.herald_probability,
        "full_extraction_probability": result.full_extraction_probability,
        "detection_distribution": {
            detect.format_outcome(k): v
            for k, v in sorted(result.detection_distribution.items())
        },
        "conditional_distribution": {
            detect.format_outcome(k): v
            for k, v in sorted(result.conditional_distribution.items())
        },
    }
    output.files["sagnac.json"] = _dump_json(body)
    _distribution_files(output, "distribution", result.conditional_distribution, fmt)
    output.distributions["distribution"] = result.conditional_distribution
    output.summary.append(f"herald probability: {result.herald_probability!r}")
    output.summary.append(
        f"full extraction probability: {result.full_extraction_probability!r}"
    )
    for occ, p in sorted(result.conditional_distribution.items()):
        output.summary.append(f"  {detect.format_outcome(occ)}  {p!r}")
    return output


def run_fringe(config: ScenarioConfig, fmt: str = "csv") -> ScenarioOutput:
    if config.kind != "fringe":
        raise ConfigError(f"expected a fringe scenario, got kind {config.kind!r}")
    chip = config.chip_params()
    circ = chip.circuit()
    state = config.input_state(circ.mode_count)
    scenario = analysis.FringeScenario(chip, state, config.sweep_pattern())
    grid = config.sweep_grid()
    samples = analysis.fringe_scan(scenario, grid)

    output = ScenarioOutput(summary=[])
    lines = ["phi,probability"] + [f"{s.phi!r},{s.probability!r}" for s in samples]
    if fmt == "json":
        output.files["fringe.json"] = _dump_json(
            {"samples": [{"phi": s.phi, "probability": s.probability} for s in samples]}
        )
    else:
        output.files["fringe.csv"] = "\n".join(lines) + "\n"

    note = None
    period = None
    try:
        period = analysis.fringe_period(samples)
    except ValueError as exc:
        note = f"insufficient for fit: {exc}"
    if period is None and note is None:
        note = "no fringe: samples are constant"
    output.files["period.json"] = _dump_json(
        {"period": period, "samples": len(samples), "note": note}
    )
    if period is not None:
        output.summary.append(f"fringe period: {period!r}")
    else:
        output.summary.append(note)
    output.distributions["fringe"] = {s.phi: s.probability for s in samples}
    return output


def run_contamination(config: ScenarioConfig, fmt: str = "csv", base_dir: Path | None = None) -> ScenarioOutput:
    if config.kind != "contamination":
        raise ConfigError(f"expected a contamination scenario, got kind {config.kind!r}")
    chip = config.chip_params()
    params = config.spdc_params()
    pattern = config.herald_pattern()
    if pattern is None:
        raise ConfigError("contamination scenarios need a herald pattern")
    topology = config.detection_topology(base_dir)
    trees, model = topology if topology is not None else (None, None)
    try:
        report = source.contamination_report(
            chip, params, pattern, int(config.signal_photons), trees, model
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    output = ScenarioOutput(summary=[])
    output.files["contamination.json"] = _dump_json(report.to_json_dict())
    output.summary.append(
        f"target sector: {report.target_sector} pairs "
        f"({report.herald_photons} herald + {report.signal_photons} signal photons)"
    )
    output.summary.append(f"true event probability: {report.true_event_probability!r}")
    output.summary.append(f"false event probability: {report.false_event_probability!r}")
    output.summary.append(f"false-to-true ratio: {report.false_to_true_ratio!r}")
    for sector in report.sectors:
        if sector.mislabeled:
            channels = ", ".join(
                f"{detect.format_outcome(occ)} ({rate!r})"
                for occ, rate in sorted(sector.interpreted_rates.items())
            )
            output.summary.append(
                f"sector {sector.n_pairs} mislabeled as target; interpreted counts: {channels}"
            )
    return output
