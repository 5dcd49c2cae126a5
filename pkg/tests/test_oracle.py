import itertools

import numpy as np
import pytest

from conftest import line_instance, plane_instance
from swapcluster import ObjectiveSpec, OracleLimitError, SearchConfig, exact_gkm, exact_lq, exact_ufl, local_search
from swapcluster.objective import solution_cost


def test_line_fixture():
    res = exact_lq(line_instance([0, 1, 5], k=2))
    assert res.best_cost == 1.0
    assert res.best_sets == [(0, 2), (1, 2)]
    assert res.enumerated == 3


def test_all_open():
    inst = line_instance([0, 1, 5, 7], k=4)
    assert exact_lq(inst).best_cost == solution_cost(inst, range(4)) == 0.0


def test_single_point():
    assert exact_lq(line_instance([2.5], k=1)).best_cost == 0.0


def test_ufl_example():
    res = exact_ufl(line_instance([0, 2], family="ufl", q=2, costs=[1, 10]))
    assert res.best_sets == [(0,)] and res.best_cost == 5.0


def test_ufl_forced_single():
    assert exact_ufl(line_instance([4.0], family="ufl", costs=[3.0])).best_cost == 3.0


def test_gkm_free_matches_lq():
    rng = np.random.default_rng(0)
    xy = rng.uniform(size=(8, 2))
    lq = plane_instance(xy, k=3, q=1)
    gkm = lq.with_objective(ObjectiveSpec.gkm(3, 1.0))
    assert exact_gkm(gkm).best_cost == pytest.approx(exact_lq(lq).best_cost, rel=1e-12)


def test_limit():
    inst = line_instance(list(range(20)), k=10)
    with pytest.raises(OracleLimitError) as err:
        exact_lq(inst, limit=1000)
    assert err.value.required == 184756


def test_best_sets_all_optimal_and_lower_bound():
    rng = np.random.default_rng(7)
    inst = plane_instance(rng.uniform(size=(9, 2)), k=3)
    res = exact_lq(inst)
    every = [solution_cost(inst, s) for s in itertools.combinations(range(9), 3)]
    assert res.best_cost == pytest.approx(min(every), rel=1e-12)
    for s in res.best_sets:
        assert solution_cost(inst, s) == pytest.approx(res.best_cost, rel=1e-12)


def test_oracle_below_local_search():
    rng = np.random.default_rng(5)
    for seed in range(10):
        inst = plane_instance(rng.uniform(size=(9, 2)), k=2).with_seed(seed)
        assert exact_lq(inst).best_cost <= local_search(inst, SearchConfig(rho=1)).final.total_cost * (1 + 1e-12)


def test_free_candidate_never_hurts_ufl():
    rng = np.random.default_rng(6)
    for _ in range(10):
        xs = rng.uniform(0, 10, size=5)
        cands = rng.uniform(0, 10, size=4)
        costs = rng.uniform(0, 5, size=4)
        base = exact_ufl(line_instance(xs, family="ufl", cands=cands, costs=costs)).best_cost
        more = exact_ufl(line_instance(xs, family="ufl", cands=np.append(cands, rng.uniform(0, 10)),
                                       costs=np.append(costs, 0.0))).best_cost
        assert more <= base + 1e-12


def test_wrong_family():
    with pytest.raises(ValueError):
        exact_ufl(line_instance([0, 1], k=1))
