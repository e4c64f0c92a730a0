"""Splitter cascades, click statistics, rate correction, fidelity."""

import itertools
import math

import numpy as np
import pytest

from noonchip import detect
from noonchip.circuit import ChipParams
from noonchip.detect import (
    DetectorModel,
    SplitterTree,
    cascade_resolve_probability,
    click_distribution,
    fidelity,
    normalize_rates,
    occupancy_rates,
    paper_6fold_topology,
    sample_click_patterns,
    simulated_reference_distribution,
    topology_from_json,
    topology_to_json_dict,
)
from noonchip.fock import FockState, marginal_distribution
from noonchip.herald import HeraldPattern, heralded_output


def uniform_tree(mode, k, prefix="D"):
    return SplitterTree(mode, tuple((f"{prefix}{i}", 1.0 / k) for i in range(k)))


def test_tree_validation():
    with pytest.raises(ValueError):
        SplitterTree(0, (("A", 0.5), ("A", 0.5)))  # duplicate ids
    with pytest.raises(ValueError):
        SplitterTree(0, (("A", 0.7), ("B", 0.6)))  # probabilities exceed one
    with pytest.raises(ValueError):
        SplitterTree(0, (("A", -0.1),))
    tree = SplitterTree(0, (("A", 0.5), ("B", 0.25)))
    assert tree.loss == pytest.approx(0.25)
    assert tree.detector_ids() == ("A", "B")
    assert tree.leaf_probability("B") == 0.25


def test_cascade_resolution_uniform_four():
    tree = uniform_tree(1, 4)
    # two, three, and four photons on distinct leaves of the 1/4 fan-out
    assert cascade_resolve_probability(tree, 2, ("D0", "D1")) == pytest.approx(
        1 / 8, abs=1e-12
    )
    assert cascade_resolve_probability(tree, 3, ("D0", "D1", "D2")) == pytest.approx(
        3 / 32, abs=1e-12
    )
    assert cascade_resolve_probability(
        tree, 4, ("D0", "D1", "D2", "D3")
    ) == pytest.approx(3 / 32, abs=1e-12)


def test_cascade_resolution_joint_split():
    # a (3, 1) split across two uniform fan-outs resolves with 3/32 * 1/4
    j, k = uniform_tree(1, 4, "J"), uniform_tree(2, 4, "K")
    p = cascade_resolve_probability(j, 3, ("J0", "J1", "J2"))
    p *= cascade_resolve_probability(k, 1, ("K0",))
    assert p == pytest.approx(3 / 128, abs=1e-12)


def test_cascade_resolution_against_enumeration():
    # oracle: enumerate every way n labeled photons route to leaves
    rng = np.random.default_rng(19)
    for k in (2, 3, 4):
        for n in range(1, min(k, 4) + 1):
            raw = rng.random(k)
            probs = raw / raw.sum() * rng.uniform(0.6, 1.0)  # leave some loss
            tree = SplitterTree(0, tuple((f"D{i}", float(p)) for i, p in enumerate(probs)))
            targets = [f"D{i}" for i in range(n)]
            want = 0.0
            for assign in itertools.product(range(k), repeat=n):
                if sorted(assign) == list(range(n)):
                    want += math.prod(probs[i] for i in assign)
            got = cascade_resolve_probability(tree, n, targets)
            assert got == pytest.approx(want, abs=1e-12)


def test_cascade_resolution_validation():
    tree = uniform_tree(0, 4)
    with pytest.raises(ValueError):
        cascade_resolve_probability(tree, 2, ("D0", "D0"))
    with pytest.raises(ValueError):
        cascade_resolve_probability(tree, 3, ("D0", "D1"))
    with pytest.raises(ValueError):
        cascade_resolve_probability(tree, 1, ("nope",))


def test_click_distribution_two_photons_two_leaves():
    dist = click_distribution(FockState.basis_state((2,)), [uniform_tree(0, 2)])
    assert dist[frozenset({"D0", "D1"})] == pytest.approx(0.5, abs=1e-12)
    assert dist[frozenset({"D0"})] == pytest.approx(0.25, abs=1e-12)
    assert dist[frozenset({"D1"})] == pytest.approx(0.25, abs=1e-12)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)


def test_click_distribution_efficiency_and_loss():
    tree = SplitterTree(0, (("D", 0.75),))  # 25 percent routed to loss
    dist = click_distribution(
        FockState.basis_state((1,)), [tree], DetectorModel(efficiency=0.8)
    )
    assert dist[frozenset({"D"})] == pytest.approx(0.6, abs=1e-12)
    assert dist[frozenset()] == pytest.approx(0.4, abs=1e-12)


def test_click_distribution_dark_counts_on_vacuum():
    dist = click_distribution(
        FockState.basis_state((0,)),
        [uniform_tree(0, 2)],
        DetectorModel(dark_count_prob=0.1),
    )
    assert dist[frozenset()] == pytest.approx(0.81, abs=1e-12)
    assert dist[frozenset({"D0"})] == pytest.approx(0.09, abs=1e-12)
    assert dist[frozenset({"D0", "D1"})] == pytest.approx(0.01, abs=1e-12)


def test_click_distribution_brute_force_two_photons():
    # independent check: route each photon, then thin each detector
    p0, p1 = 0.5, 0.3  # loss 0.2
    eff = {"D0": 0.9, "D1": 0.7}
    tree = SplitterTree(0, (("D0", p0), ("D1", p1)))
    dist = click_distribution(
        FockState.basis_state((2,)), [tree], DetectorModel(efficiency=eff)
    )
    want: dict[frozenset, float] = {}
    for a, b in itertools.product(("D0", "D1", None), repeat=2):
        route = (p0 if a == "D0" else p1 if a == "D1" else 0.2) * (
            p0 if b == "D0" else p1 if b == "D1" else 0.2
        )
        hits = {"D0": (a, b).count("D0"), "D1": (a, b).count("D1")}
        for c0 in (0, 1):
            for c1 in (0, 1):
                pr = route
                for det, c in (("D0", c0), ("D1", c1)):
                    p_click = 1.0 - (1.0 - eff[det]) ** hits[det]
                    pr *= p_click if c else 1.0 - p_click
                if pr == 0.0:
                    continue
                key = frozenset(d for d, c in (("D0", c0), ("D1", c1)) if c)
                want[key] = want.get(key, 0.0) + pr
    assert set(dist) == set(want)
    for key, value in want.items():
        assert dist[key] == pytest.approx(value, abs=1e-12)


def test_number_resolving_response():
    tree = SplitterTree(0, (("D", 1.0),))
    dist = click_distribution(
        FockState.basis_state((2,)),
        [tree],
        DetectorModel(efficiency=0.8, number_resolving=True),
    )
    assert dist[frozenset({("D", 2)})] == pytest.approx(0.64, abs=1e-12)
    assert dist[frozenset({("D", 1)})] == pytest.approx(0.32, abs=1e-12)
    assert dist[frozenset()] == pytest.approx(0.04, abs=1e-12)


def test_paper_topology_shape():
    trees, model = paper_6fold_topology()
    assert [t.mode for t in trees] == [0, 1, 2, 3]
    assert trees[0].detector_ids() == ("Di",)
    assert len(trees[1].detector_ids()) == 4
    assert len(trees[2].detector_ids()) == 4
    assert trees[3].detector_ids() == ("Dl",)
    for t in trees[1:3]:
        assert all(p == 0.25 for _, p in t.leaves)
    assert not model.number_resolving


def test_sampling_matches_exact_distribution():
    res = heralded_output(
        ChipParams(), FockState.basis_state((0, 2, 2, 0)), HeraldPattern({0: 1, 3: 1})
    )
    trees = [uniform_tree(0, 4, "J"), uniform_tree(1, 4, "K")]
    model = DetectorModel(efficiency=0.9)
    exact = click_distribution(res.conditional_state, trees, model)
    shots = 30000
    counts = sample_click_patterns(res.conditional_state, trees, model, seed=21, shots=shots)
    assert sum(counts.values()) == shots
    emp = {k: v / shots for k, v in counts.items()}
    tv = 0.5 * sum(abs(emp.get(k, 0.0) - p) for k, p in exact.items())
    tv += 0.5 * sum(p for k, p in emp.items() if k not in exact)
    assert tv < 0.02
    again = sample_click_patterns(res.conditional_state, trees, model, seed=21, shots=shots)
    assert counts == again


def test_normalize_rates_efficiency_correction():
    # detector A saw half the singles of B, so A patterns weigh double
    counts = {frozenset({"A", "X"}): 100.0, frozenset({"B", "X"}): 100.0}
    singles = {"A": 500.0, "B": 1000.0, "X": 1000.0}
    rates = normalize_rates(counts, singles)
    ratio = rates[frozenset({"A", "X"})] / rates[frozenset({"B", "X"})]
    assert ratio == pytest.approx(2.0, abs=1e-12)
    assert sum(rates.values()) == pytest.approx(1.0, abs=1e-12)


def test_normalize_rates_resolution_correction():
    trees = [uniform_tree(0, 4, "J")]
    counts = {frozenset({"J0", "J1"}): 10.0, frozenset({"J0",}): 10.0}
    singles = {f"J{i}": 100.0 for i in range(4)}
    rates = normalize_rates(counts, singles, trees=trees)
    # two-detector pattern is divided by 2! (1/4)^2 = 1/8, single by 1/4
    ratio = rates[frozenset({"J0", "J1"})] / rates[frozenset({"J0"})]
    assert ratio == pytest.approx((1 / 4) / (1 / 8), abs=1e-12)


def test_normalize_rates_flags_zero_singles():
    with pytest.raises(ValueError):
        normalize_rates({frozenset({"A"}): 1.0}, {"A": 0.0})
    with pytest.raises(ValueError):
        normalize_rates({frozenset({"A"}): 1.0}, {"B": 5.0})


def test_occupancy_rates_multiplicity():
    trees = [uniform_tree(0, 4, "J"), uniform_tree(1, 4, "K")]
    # six equal-rate pair patterns on J collapse onto occupancy (2, 0)
    rates = {frozenset(pair): 1.0 for pair in itertools.combinations([f"J{i}" for i in range(4)], 2)}
    rates[frozenset({"K0", "K1"})] = 1.0
    occ = occupancy_rates(rates, trees)
    # (2,0): 6 patterns / C(4,2) = 1 unit; (0,2): 1 pattern / 6
    assert occ[(2, 0)] / occ[(0, 2)] == pytest.approx(6.0, abs=1e-12)
    assert sum(occ.values()) == pytest.approx(1.0, abs=1e-12)


def test_rate_workflow_round_trip():
    # click, correct, aggregate, post-select on the known photon number;
    # unit efficiency recovers the exact marginal
    res = heralded_output(
        ChipParams(), FockState.basis_state((0, 2, 2, 0)), HeraldPattern({0: 1, 3: 1})
    )
    state = res.conditional_state
    trees = [uniform_tree(0, 4, "J"), uniform_tree(1, 4, "K")]
    ideal = marginal_distribution(state, (0, 1))

    def round_trip(model):
        dist = click_distribution(state, trees, model)
        counts = {pat: p * 1e7 for pat, p in dist.items() if pat}
        singles: dict[str, float] = {}
        for pat, c in counts.items():
            for d in pat:
                singles[d] = singles.get(d, 0.0) + c
        occ = occupancy_rates(normalize_rates(counts, singles, trees=trees), trees)
        kept = {o: r for o, r in occ.items() if sum(o) == 2}
        total = sum(kept.values())
        return {o: r / total for o, r in kept.items()}

    exact = round_trip(DetectorModel())
    assert fidelity(exact, ideal) == pytest.approx(1.0, abs=1e-12)

    eff = {f"J{i}": 0.9 if i == 0 else 1.0 for i in range(4)}
    eff.update({f"K{i}": 0.95 for i in range(4)})
    skew = round_trip(DetectorModel(efficiency=eff))
    assert fidelity(skew, ideal) > 0.9999


def test_fidelity_values():
    assert fidelity({"a": 1.0}, {"a": 0.5, "b": 0.5}) == pytest.approx(
        math.sqrt(0.5), abs=1e-12
    )
    p = {"a": 0.25, "b": 0.75}
    assert fidelity(p, p) == pytest.approx(1.0, abs=1e-12)
    assert fidelity(p, {"b": 0.75, "a": 0.25}) == fidelity({"b": 0.75, "a": 0.25}, p)


def test_fidelity_validation():
    with pytest.raises(ValueError):
        fidelity({"a": 0.7}, {"a": 1.0})  # first argument not normalized
    with pytest.raises(ValueError):
        fidelity({"a": 1.5, "b": -0.5}, {"a": 1.0})


def test_reference_distribution_perturbed_couplers():
    ideal = simulated_reference_distribution(
        0.5, 0.5, FockState.basis_state((0, 2, 2, 0)), HeraldPattern({0: 1, 3: 1}), math.pi / 2
    )
    measured = simulated_reference_distribution(
        0.542, 0.530, FockState.basis_state((0, 2, 2, 0)), HeraldPattern({0: 1, 3: 1}), math.pi / 2
    )
    f = fidelity(measured, ideal)
    assert f > 0.99
    assert f == pytest.approx(0.998310, abs=1e-5)


def test_reference_distribution_common_herald_coupler_drops_out():
    a = simulated_reference_distribution(
        0.5, 0.5, FockState.basis_state((0, 2, 2, 0)), HeraldPattern({0: 1, 3: 1}), 0.4
    )
    b = simulated_reference_distribution(
        0.5,
        0.5,
        FockState.basis_state((0, 2, 2, 0)),
        HeraldPattern({0: 1, 3: 1}),
        0.4,
        eta34=0.4,
    )
    assert set(a) == set(b)
    for occ in a:
        assert a[occ] == pytest.approx(b[occ], abs=1e-12)


def test_topology_json_round_trip():
    trees, model = paper_6fold_topology()
    data = topology_to_json_dict(trees, model)
    back_trees, back_model = topology_from_json(__import__("json").dumps(data))
    assert [t.mode for t in back_trees] == [t.mode for t in trees]
    for a, b in zip(back_trees, trees):
        assert a.leaves == b.leaves
    assert back_model.number_resolving == model.number_resolving
