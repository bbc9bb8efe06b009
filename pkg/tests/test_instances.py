from pathlib import Path
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from submax.core.oracle import FunctionOracle, ModularOracle, Subset
from submax.core.rng import SplitMix64
from submax.models.instance import CoverageInstance, CutInstance, DirectedCutInstance
from submax.services.instances import (
    InstanceParseError,
    InstanceValidationError,
    all_graphs,
    build_oracle,
    check_submodular,
    fingerprint,
    instance_id,
    parse,
    random_instance,
    read_instance,
    serialize,
    write_instance,
)

GOLDEN = Path(__file__).parent / "golden"

K3_TEXT = '{"kind":"cut","m":3,"edges":[[0,1,1.0],[1,2,1.0],[0,2,1.0]]}'
COVERAGE_TEXT = '{"kind":"coverage","m":2,"universe":2,"weights":[1.0,1.0],"sets":[[0],[0,1]]}'


def test_cut_oracle_values():
    f = build_oracle(parse(K3_TEXT))
    assert f.evaluate(Subset.from_indices([0], 3)) == 2.0
    assert f.evaluate(Subset.full(3)) == 0.0


def test_directed_cut_counts_leaving_arcs_only():
    inst = DirectedCutInstance(m=2, edges=[(0, 1, 3.0), (1, 0, 5.0)])
    f = build_oracle(inst)
    assert f.evaluate(Subset.from_indices([0], 2)) == 3.0
    assert f.evaluate(Subset.from_indices([1], 2)) == 5.0


def test_coverage_oracle_values():
    f = build_oracle(parse(COVERAGE_TEXT))
    assert f.evaluate(Subset.from_indices([0], 2)) == 1.0
    assert f.evaluate(Subset.from_indices([1], 2)) == 2.0
    assert f.evaluate(Subset.full(2)) == 2.0
    assert f.evaluate(Subset.empty(2)) == 0.0


def test_coverage_oracle_beyond_int64_masks():
    inst = random_instance("random-coverage", 70, 7, {"universe": 16, "density": 0.3})
    f = build_oracle(inst)
    last = Subset.from_indices([69], 70)
    assert f.evaluate(last) == pytest.approx(sum(inst.weights[k] for k in inst.sets[69]))
    assert f.evaluate(Subset.full(70)) == pytest.approx(
        sum(w for k, w in enumerate(inst.weights) if any(k in s for s in inst.sets))
    )


def test_instance_labels_reach_the_oracle():
    inst = parse('{"kind":"coverage","m":2,"universe":2,"weights":[1.0,1.0],"sets":[[0],[0,1]],"labels":["a","b"]}')
    ground = build_oracle(inst).ground_set()
    assert ground.label(Subset.full(2)) == ["a", "b"]
    with pytest.raises(InstanceParseError):
        parse('{"kind":"cut","m":2,"labels":["a","a"]}')


def test_documented_texts_round_trip():
    assert serialize(parse(K3_TEXT)) == K3_TEXT
    assert serialize(parse(COVERAGE_TEXT)) == COVERAGE_TEXT


def test_file_round_trip(tmp_path):
    inst = random_instance("random-cut", 6, 1)
    path = tmp_path / "inst.json"
    write_instance(inst, path)
    assert read_instance(path) == inst


def test_parse_rejects_negative_weight():
    with pytest.raises(InstanceParseError) as info:
        parse('{"kind":"cut","m":2,"edges":[[0,1,-1.0]]}')
    assert "edges" in info.value.location


def test_parse_rejects_out_of_range_endpoint():
    with pytest.raises(InstanceParseError, match="out of range"):
        parse('{"kind":"cut","m":2,"edges":[[0,2,1.0]]}')


def test_parse_rejects_self_loop_and_bad_coverage():
    with pytest.raises(InstanceParseError):
        parse('{"kind":"cut","m":2,"edges":[[1,1,1.0]]}')
    with pytest.raises(InstanceParseError):
        parse('{"kind":"coverage","m":1,"universe":1,"weights":[1.0],"sets":[[3]]}')


def test_parse_reports_position_of_malformed_json():
    with pytest.raises(InstanceParseError) as info:
        parse('{"kind": "cut",\n "m": }')
    assert info.value.line == 2
    assert info.value.column is not None
    assert info.value.original_exception is not None


def test_parse_rejects_unknown_kind():
    with pytest.raises(InstanceParseError):
        parse('{"kind":"knapsack","m":2}')


def test_random_cut_is_deterministic():
    a = random_instance("random-cut", 6, 1, {"p": 0.5})
    b = random_instance("random-cut", 6, 1, {"p": 0.5})
    assert serialize(a) == serialize(b)
    assert a.seed == 1
    assert serialize(a) != serialize(random_instance("random-cut", 6, 2, {"p": 0.5}))


def test_random_cut_with_p_one_is_complete():
    inst = random_instance("random-cut", 4, 7, {"p": 1.0, "weight_low": 1.0, "weight_high": 1.0})
    assert [(u, v) for u, v, _ in inst.edges] == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert all(w == 1.0 for _, _, w in inst.edges)


def test_random_instance_rejects_bad_params():
    with pytest.raises(InstanceValidationError):
        random_instance("random-cut", 4, 0, {"p": 1.5})
    with pytest.raises(InstanceValidationError):
        random_instance("random-cut", 4, 0, {"weight_low": 2.0, "weight_high": 1.0})
    with pytest.raises(InstanceValidationError):
        random_instance("random-cut", 0, 0)


def test_random_coverage_golden():
    """Pins the coverage system of (m=5, seed=3, universe=8, density=0.4)."""
    inst = random_instance("random-coverage", 5, 3, {"universe": 8, "density": 0.4})
    assert isinstance(inst, CoverageInstance)
    assert len(inst.sets) == 5 and inst.universe == 8
    pinned = read_instance(GOLDEN / "random_coverage_m5_s3.json")
    assert pinned == inst
    assert inst.sets == [[5], [0, 1, 2, 7], [2, 3], [0, 3, 6, 7], [0, 4, 7]]


def test_all_graphs_enumerates_every_edge_set():
    graphs = list(all_graphs(3))
    assert len(graphs) == 8
    assert graphs[0].edges == []
    assert len(graphs[-1].edges) == 3
    assert graphs[5].name == "graph3-5"
    assert len(list(all_graphs(1))) == 1


def test_instance_ids():
    assert instance_id(random_instance("random-cut", 5, 9)) == "random-cut-m5-s9"
    assert instance_id(CutInstance(m=2, name="pair")) == "pair"
    anon = CutInstance(m=2, edges=[(0, 1, 1.0)])
    assert instance_id(anon) == f"cut-m2-{fingerprint(anon)[:12]}"


def test_cut_symmetry():
    f = build_oracle(random_instance("random-cut", 7, 11))
    values = f.evaluate_many(np.arange(1 << 7))
    np.testing.assert_allclose(values, values[::-1])


def test_cuts_and_coverage_are_submodular():
    for seed in range(5):
        for kind in ("random-cut", "random-coverage"):
            verdict = check_submodular(build_oracle(random_instance(kind, 8, seed)))
            assert verdict.passed, (kind, seed, verdict)
            assert verdict.mode == "exhaustive"
            assert verdict.checked == 28 * 2**6


def test_square_of_size_is_rejected_with_witness():
    verdict = check_submodular(FunctionOracle(4, lambda s: float(s.size**2)))
    assert not verdict.passed
    w = verdict.witness
    assert (w.s, w.j, w.k) == ([], 0, 1)
    assert (w.lhs, w.rhs) == (2.0, 4.0)


def test_negative_values_are_reported():
    verdict = check_submodular(ModularOracle([1.0, -2.0]))
    assert not verdict.passed
    assert verdict.negative_set == [1]
    assert verdict.negative_value == -2.0
    assert verdict.witness is None


def test_modular_passes_both_modes():
    oracle = ModularOracle([0.5, 1.0, 2.0, 0.0])
    assert check_submodular(oracle).passed
    sampled = check_submodular(oracle, mode="sampled", trials=200, rng=SplitMix64(5))
    assert sampled.passed
    assert sampled.checked == 200
    assert oracle.ledger.count == 16 + 4 * 200


def test_sampled_mode_finds_supermodularity():
    verdict = check_submodular(
        FunctionOracle(6, lambda s: float(s.size**2)), mode="sampled", trials=50, rng=SplitMix64(1)
    )
    assert not verdict.passed
    assert verdict.witness is not None


def test_exhaustive_cap_comes_from_settings():
    with patch("submax.services.instances.get_settings") as mock_settings:
        mock_settings.return_value = MagicMock(max_exhaustive_submodular_m=4, float_tolerance=1e-9)
        with pytest.raises(InstanceValidationError):
            check_submodular(ModularOracle([1.0] * 5))
