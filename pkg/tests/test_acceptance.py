"""Full-corpus acceptance runs; deselect with ``-m 'not slow'``."""

import json
import logging
import math
from pathlib import Path

import numpy as np
import pytest

from submax.core.oracle import shift
from submax.core.rng import SplitMix64, derive_seed
from submax.models.bench import BenchConfig
from submax.services.bench import emit, run, scaling_experiment
from submax.services.exact import brute_force_opt
from submax.services.instances import all_graphs, build_oracle, check_submodular, random_instance
from submax.services.localsearch import (
    LsConfig,
    double_greedy_det,
    double_greedy_rand,
    is_approx_local_max,
    ls_approx_local_max,
)
from submax.services.recursive import AlgConfig, alg, check_query_recursion, node_optima, verify_trace

pytestmark = pytest.mark.slow

GOLDEN = Path(__file__).parent / "golden"
EPS = 0.05
TOL = 1e-9
logger = logging.getLogger(__name__)


def corpus():
    yield from all_graphs(5)
    for i in range(500):
        yield random_instance("random-cut", 3 + i % 8, derive_seed(1, i))
    for i in range(500):
        yield random_instance("random-coverage", 3 + i % 8, derive_seed(2, i))


def test_corpus_guarantees():
    count = 0
    for inst in corpus():
        count += 1
        exact = brute_force_opt(build_oracle(inst))
        opt = exact.opt_value
        f = build_oracle(inst)
        endpoints = f.evaluate(f.empty()) + f.evaluate(f.full())

        assert check_submodular(build_oracle(inst)).passed, inst

        two = alg(build_oracle(inst), AlgConfig(epsilon=EPS, nrounds=2))
        assert two.value >= (0.4 - EPS - TOL) * opt, inst

        zero = alg(build_oracle(inst), AlgConfig(epsilon=EPS, nrounds=0))
        assert zero.value >= (1 / (3 * (1 + EPS)) - TOL) * (opt + endpoints), inst

        shifted = shift(build_oracle(inst))
        ls = ls_approx_local_max(shifted, LsConfig(epsilon=EPS))
        assert is_approx_local_max(shifted, ls.set, EPS, mode="exhaustive"), inst

        report = verify_trace(two.trace, node_optima(build_oracle(inst), two.trace), EPS)
        assert report.passed, (inst, report.failures)
        assert all(c.passed for c in check_query_recursion(two.trace, EPS)), inst

        assert f.evaluate(double_greedy_det(f)) >= (1 / 3 - TOL) * opt, inst
    assert count == 1024 + 1000


def test_randomized_double_greedy_half():
    trials = 1000
    for i in range(20):
        inst = random_instance("random-coverage", 8, derive_seed(3, i))
        opt = brute_force_opt(build_oracle(inst)).opt_value
        f = build_oracle(inst)
        values = np.array(
            [f.evaluate(double_greedy_rand(f, SplitMix64(derive_seed(i, t)))) for t in range(trials)]
        )
        sigma = values.std(ddof=1)
        assert values.mean() >= 0.5 * opt - 3 * sigma / math.sqrt(trials), inst


def test_bench_determinism_on_corpus_sample():
    cfg = BenchConfig(
        generators=[
            {"kind": "random-cut", "m": 8, "seed": 100, "count": 10},
            {"kind": "random-coverage", "m": 8, "seed": 200, "count": 10},
        ],
        suites=[{"suite": "all-graphs", "m": 4}],
        algorithms=["alg@0", "alg@2", "ls", "dg-det", "dg-rand"],
        epsilons=[0.05, 0.2],
        trials=20,
        verify=True,
    )
    first, second = run(cfg), run(cfg)
    assert emit(first) == emit(second)
    assert emit(first, "json") == emit(second, "json")
    assert not first.verification_failed
    assert not first.errors


def test_scaling_slope_golden():
    fit = scaling_experiment("random-cut", [8, 16, 32, 64], 0.1, nrounds=2)
    logger.info("random-cut query scaling slope %.4f", fit.slope)
    assert fit.slope <= 3.5
    pinned = json.loads((GOLDEN / "scaling_random_cut.json").read_text(encoding="utf-8"))
    assert (pinned["family"], pinned["epsilon"], pinned["nrounds"]) == (fit.family, fit.epsilon, fit.nrounds)
    assert fit.sizes == pinned["sizes"]
    assert fit.queries == pinned["queries"]
    assert fit.slope == pytest.approx(pinned["slope"], rel=1e-9)
