import math

import numpy as np
import pytest

from conftest import line_instance, plane_instance
from swapcluster import ObjectiveSpec, SearchConfig, enumerate_moves, exact, local_search, local_search_lq
from swapcluster.search import acceptance_factor, local_search_gkm, local_search_ufl


def test_single_swap_example():
    inst = line_instance([0, 0, 2], cands=[0, 1, 2], k=1)
    trace = local_search_lq(inst, SearchConfig(rho=1), initial=[0])
    assert trace.final.open == (1,)
    assert trace.final.total_cost == 3.0
    assert trace.certified_local_opt


def test_optimal_start_is_fixed_point():
    inst = line_instance([0, 0, 2], cands=[0, 1, 2], k=1)
    trace = local_search_lq(inst, SearchConfig(rho=1), initial=[1])
    assert trace.iterations == 0 and trace.certified_local_opt


def test_rho_equal_k_reaches_optimum():
    rng = np.random.default_rng(3)
    for seed in range(10):
        inst = plane_instance(rng.uniform(size=(8, 2)), k=3).with_seed(seed)
        trace = local_search(inst, SearchConfig(rho=3))
        assert trace.final.total_cost == pytest.approx(exact(inst).best_cost, rel=1e-9)


def test_costs_strictly_decrease():
    rng = np.random.default_rng(8)
    inst = plane_instance(rng.uniform(size=(12, 2)), k=3)
    trace = local_search(inst, SearchConfig(rho=1, init="first-k"))
    for step in trace.steps:
        assert step.cost_after < step.cost_before
    costs = [trace.initial.total_cost] + [s.cost_after for s in trace.steps]
    assert costs[-1] == trace.final.total_cost


def test_ufl_drops_expensive_centre():
    inst = line_instance([0, 2], family="ufl", q=2, costs=[1, 10])
    trace = local_search_ufl(inst, SearchConfig(rho=1), initial=[0, 1])
    assert trace.steps[0].drop == (1,) and trace.steps[0].add == ()
    assert trace.steps[0].cost_after - trace.steps[0].cost_before == -6.0
    assert trace.final.open == (0,) and trace.final.total_cost == 5.0


def test_ufl_free_opening_keeps_needed_centres():
    inst = line_instance([0, 1, 5], cands=[0, 1, 5, 9], family="ufl", q=2, costs=[0, 0, 0, 0])
    trace = local_search_ufl(inst, SearchConfig(rho=1))
    assert {0, 1, 2} <= set(trace.final.open)
    assert trace.final.total_cost == 0.0


def test_ufl_single_candidate():
    inst = line_instance([0, 3], cands=[1], family="ufl", costs=[2.0])
    trace = local_search_ufl(inst, SearchConfig(rho=1))
    assert trace.final.open == (0,) and trace.iterations == 0


def test_gkm_example():
    inst = line_instance([0, 2], family="gkm", k=2, q=2, costs=[1, 10])
    trace = local_search_gkm(inst, SearchConfig(rho=2))
    assert trace.final.open == (0,) and trace.final.total_cost == 5.0


def test_gkm_free_opening_matches_kmedian():
    rng = np.random.default_rng(4)
    xy = rng.uniform(size=(9, 2))
    lq = plane_instance(xy, k=3, q=1)
    gkm = lq.with_objective(ObjectiveSpec.gkm(3, 1.0))
    start = [0, 4, 7]
    a = local_search(lq, SearchConfig(rho=1), start)
    b = local_search(gkm, SearchConfig(rho=1), start)
    assert a.final.total_cost == b.final.total_cost
    assert a.final.open == b.final.open


def test_gkm_huge_costs_open_one_median():
    xs = [0.0, 1.0, 2.0, 7.0]
    inst = line_instance(xs, family="gkm", k=4, q=1, costs=[1e6] * 4)
    trace = local_search_gkm(inst, SearchConfig(rho=4), initial=[0, 1, 2, 3])
    assert len(trace.final.open) == 1
    best = min(sum(abs(x - c) for x in xs) for c in xs)
    assert trace.final.total_cost == best + 1e6


def test_move_counts():
    inst = line_instance([0, 1, 5], k=2)
    assert list(enumerate_moves(inst, [0, 1], 1)) == [((0,), (2,)), ((1,), (2,))]
    assert list(enumerate_moves(inst, [0, 1], 0)) == []
    four = line_instance([0, 1, 5, 6], k=2)
    assert len(list(enumerate_moves(four, [0, 1], 2))) == 5


def test_ufl_moves_canonical_order():
    inst = line_instance([0, 1, 5], family="ufl")
    got = list(enumerate_moves(inst, [0, 1], 1))
    assert got[:3] == [((), (2,)), ((0,), ()), ((1,), ())]
    sizes = [len(d) + len(a) for d, a in got]
    assert sizes == sorted(sizes)


def test_scaled_factors():
    inst = line_instance([0, 1, 5], k=2)
    assert acceptance_factor(inst, SearchConfig(acceptance="scaled", epsilon=0.3)) == pytest.approx(0.85)
    ufl = line_instance([0, 1, 5], family="ufl")
    assert acceptance_factor(ufl, SearchConfig(acceptance="scaled", epsilon=0.3)) == pytest.approx(0.95)


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(rho=0)
    with pytest.raises(ValueError):
        SearchConfig(acceptance="scaled")
    with pytest.raises(ValueError):
        local_search(line_instance([0, 1], k=1), SearchConfig(rho=3))


@pytest.mark.parametrize("improvement", ["first", "best"])
def test_parallel_matches_serial(improvement):
    rng = np.random.default_rng(9)
    inst = plane_instance(rng.uniform(size=(14, 2)), k=3).with_seed(5)
    serial = local_search(inst, SearchConfig(rho=2, improvement=improvement))
    par = local_search(inst, SearchConfig(rho=2, improvement=improvement, parallel_moves=True, workers=3, window=7))
    assert [(s.drop, s.add) for s in serial.steps] == [(s.drop, s.add) for s in par.steps]
    assert serial.final.total_cost == par.final.total_cost


def test_seed_determinism():
    rng = np.random.default_rng(2)
    inst = plane_instance(rng.uniform(size=(12, 2)), k=3)
    a = local_search(inst, SearchConfig(rho=1, seed=17))
    b = local_search(inst, SearchConfig(rho=1, seed=17))
    assert a.initial.open == b.initial.open and a.final.open == b.final.open


def test_scaled_iteration_bound():
    rng = np.random.default_rng(12)
    for seed in range(20):
        inst = plane_instance(rng.uniform(size=(10, 2)), k=3).with_seed(seed)
        trace = local_search(inst, SearchConfig(rho=1, acceptance="scaled", epsilon=0.3, init="arbitrary"))
        opt = exact(inst).best_cost
        bound = math.ceil(math.log(trace.initial.total_cost / opt) / math.log(1 / (1 - 0.3 / 3)))
        assert trace.iterations <= bound


def test_max_iterations_stops_early():
    rng = np.random.default_rng(1)
    inst = plane_instance(rng.uniform(size=(12, 2)), k=3)
    trace = local_search(inst, SearchConfig(rho=1, init="first-k", max_iterations=1))
    assert trace.iterations <= 1
