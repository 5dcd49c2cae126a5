import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import line_instance, plane_instance
from swapcluster import (CandidateSet, InfeasibleError, Instance, Metric, ObjectiveSpec, PointSet, assign_all,
                         cost_delta_swap)
from swapcluster.objective import apply_move, solution_cost


def test_assign_tie_goes_to_lower_id():
    inst = line_instance([0, 2, 4], k=2)
    sol = assign_all(inst, [0, 2])
    assert sol.assign.tolist() == [0, 0, 2]
    assert sol.total_cost == 4.0


def test_single_colocated_point_costs_nothing():
    assert assign_all(line_instance([3.0], k=1), [0]).total_cost == 0.0


def test_ufl_cost_includes_opening():
    inst = line_instance([0, 2], family="ufl", q=2, costs=[1, 10])
    sol = assign_all(inst, [0])
    assert sol.total_cost == 5.0
    assert sol.opening_cost == 1.0


def test_delta_single_swap():
    inst = line_instance([0, 0, 2], cands=[0, 1, 2], k=1)
    sol = assign_all(inst, [0])
    assert sol.total_cost == 4.0
    assert cost_delta_swap(inst, sol, drop=[0], add=[1]) == -1.0


def test_delta_identity_move():
    inst = line_instance([0, 0, 2], cands=[0, 1, 2], k=1)
    assert cost_delta_swap(inst, assign_all(inst, [2])) == 0.0


def test_delta_ufl_add():
    inst = line_instance([0, 2], family="ufl", q=2, costs=[1, 10])
    assert cost_delta_swap(inst, assign_all(inst, [0]), add=[1]) == 6.0  # candidate 1 sits at x=2


def test_infeasible_sizes():
    inst = line_instance([0, 1, 5], k=2)
    with pytest.raises(InfeasibleError):
        assign_all(inst, [0])
    with pytest.raises(InfeasibleError):
        cost_delta_swap(inst, assign_all(inst, [0, 1]), add=[2])
    with pytest.raises(InfeasibleError):
        assign_all(line_instance([0, 1], family="gkm", k=1, costs=[0, 0]), [0, 1])


def test_bad_move_arguments():
    inst = line_instance([0, 1, 5], k=2)
    sol = assign_all(inst, [0, 1])
    with pytest.raises(ValueError):
        cost_delta_swap(inst, sol, drop=[2], add=[0])
    with pytest.raises(ValueError):
        cost_delta_swap(inst, sol, drop=[0], add=[1])


def test_objective_validation():
    with pytest.raises(ValueError):
        ObjectiveSpec.lq(0.5, 1)
    with pytest.raises(ValueError):
        ObjectiveSpec.lq(2, 0)
    assert ObjectiveSpec("ufl", 1.0, 7).k is None


def test_ufl_lq_ignore_each_others_fields():
    inst = line_instance([0, 2], k=1, cands=[0, 2], costs=[5.0, 5.0])
    assert assign_all(inst, [0]).total_cost == 4.0


@st.composite
def moves(draw):
    n = draw(st.integers(1, 9))
    m = draw(st.integers(2, 9))
    k = draw(st.integers(1, m - 1))
    seed = draw(st.integers(0, 2**32 - 1))
    q = draw(st.sampled_from([1.0, 1.5, 2.0, 3.0]))
    rng = np.random.default_rng(seed)
    pts = rng.uniform(size=(n, 2))
    cands = rng.uniform(size=(m, 2))
    w = rng.uniform(0, 3, size=n)
    open_ids = sorted(rng.choice(m, size=k, replace=False).tolist())
    closed = [c for c in range(m) if c not in open_ids]
    r = draw(st.integers(1, min(k, len(closed))))
    drop = sorted(rng.choice(open_ids, size=r, replace=False).tolist())
    add = sorted(rng.choice(closed, size=r, replace=False).tolist())
    return pts, cands, w, q, k, open_ids, drop, add


@settings(max_examples=200, deadline=None)
@given(moves())
def test_incremental_delta_matches_recompute(case):
    pts, cands, w, q, k, open_ids, drop, add = case
    inst = Instance(PointSet.from_coords(pts, w), CandidateSet.from_coords(cands), Metric.euclidean(2),
                    ObjectiveSpec.lq(q, k))
    sol = assign_all(inst, open_ids)
    after = sorted(set(open_ids) - set(drop) | set(add))
    expected = solution_cost(inst, after) - sol.total_cost
    got = cost_delta_swap(inst, sol, drop, add)
    assert got == pytest.approx(expected, rel=1e-9, abs=1e-9 * max(sol.total_cost, 1.0))
    moved = apply_move(inst, sol, drop, add)
    fresh = assign_all(inst, after)
    assert np.array_equal(moved.assign, fresh.assign)


def test_inequality_for_squares():
    rng = np.random.default_rng(5)
    x, y = rng.normal(size=(2, 10_000)) * 1e3
    assert np.all((x + y) ** 2 <= 2 * (x * x + y * y) * (1 + 1e-12))


@pytest.mark.parametrize("q", [1.0, 2.0, 2.5])
def test_scaling_distances(q):
    rng = np.random.default_rng(11)
    xy = rng.uniform(size=(7, 2))
    lam = 3.7
    base, scaled = plane_instance(xy, k=2, q=q), plane_instance(xy * lam, k=2, q=q)
    subsets = list(itertools.combinations(range(7), 2))
    a = np.array([solution_cost(base, s) for s in subsets])
    b = np.array([solution_cost(scaled, s) for s in subsets])
    np.testing.assert_allclose(b, a * lam**q, rtol=1e-12)
    assert np.argmin(a) == np.argmin(b)
