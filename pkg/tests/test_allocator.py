import math

import numpy as np
import pytest

from siac.allocator import (
    Allocation,
    allocate,
    allocate_equal,
    allocate_grid_oracle,
    allocate_kkt,
    allocate_pg,
    project_simplex,
    weighted_outage,
)
from siac.channel import ChannelParams
from siac.errors import LengthMismatchError


def test_project_simplex_feasible_point_fixed():
    np.testing.assert_allclose(project_simplex(np.array([1.0, 1.0]), 2.0), [1.0, 1.0])


def test_project_simplex_hand_solved_case():
    # projection of (3,1) onto {x>=0, sum=2}: shift by tau=1, clip -> (2,0)
    np.testing.assert_allclose(project_simplex(np.array([3.0, 1.0]), 2.0), [2.0, 0.0])


def test_project_simplex_properties(rng):
    for _ in range(50):
        n = int(rng.integers(1, 12))
        v = rng.standard_normal(n) * rng.uniform(0.1, 10)
        total = float(rng.uniform(0.1, 20))
        x = project_simplex(v, total)
        assert np.all(x >= 0)
        assert x.sum() == pytest.approx(total, rel=1e-12)
        np.testing.assert_allclose(project_simplex(x, total), x, atol=1e-12)


def test_project_simplex_zero_total():
    np.testing.assert_array_equal(project_simplex(np.array([3.0, -1.0]), 0.0), [0.0, 0.0])


def test_weighted_outage_precomputed_outages(params_c1):
    # powers chosen so the outages are exactly 0.5 and 0.1
    p = np.array([1.0 / math.log(2.0), 1.0 / math.log(10.0 / 9.0)])
    assert weighted_outage([2.0, 3.0], p, params_c1) == pytest.approx(1.3, abs=1e-12)


def test_weighted_outage_zero_weights(params_c1):
    assert weighted_outage([0.0, 0.0], [0.3, 7.0], params_c1) == 0.0


def test_weighted_outage_equal_unit_case(params_c1):
    got = weighted_outage([1.0, 1.0], [1.0, 1.0], params_c1)
    assert got == pytest.approx(2 * (1 - math.exp(-1)), abs=1e-12)


def test_weighted_outage_length_mismatch(params_c1):
    with pytest.raises(LengthMismatchError):
        weighted_outage([1.0], [1.0, 2.0], params_c1)


def test_allocation_budget_invariant():
    with pytest.raises(ValueError):
        Allocation(np.array([1.0, 1.0]), 3.0, 0.0, "equal")
    with pytest.raises(ValueError):
        Allocation(np.array([-0.1, 3.1]), 3.0, 0.0, "equal")


def test_allocate_equal_cases(params_c1):
    alloc = allocate_equal(20, 10.0)
    np.testing.assert_allclose(alloc.powers, 0.5)
    assert allocate_equal(1, 4.0).powers.tolist() == [4.0]
    assert allocate_equal(2, 0.0).powers.tolist() == [0.0, 0.0]
    with_obj = allocate_equal(2, 2.0, [1.0, 1.0], params_c1)
    assert with_obj.objective == pytest.approx(2 * (1 - math.exp(-1)), abs=1e-12)


def test_kkt_symmetric_instance(params_c1):
    alloc, report = allocate_kkt([1.0, 1.0], 2.0, params_c1)
    np.testing.assert_allclose(alloc.powers, [1.0, 1.0], atol=1e-9)
    assert report.converged
    assert report.residual <= 1e-8
    assert alloc.method == "kkt"


def test_kkt_zero_weight_rule(params_c1):
    alloc, _ = allocate_kkt([0.0, 1.0], 2.0, params_c1)
    np.testing.assert_allclose(alloc.powers, [0.0, 2.0], atol=1e-12)


def test_kkt_asymmetric_vs_oracle(params_c1):
    alloc, report = allocate_kkt([1.0, 2.0], 4.0, params_c1)
    oracle = allocate_grid_oracle([1.0, 2.0], 4.0, params_c1, 1e-3)
    assert report.converged
    assert alloc.powers[1] > alloc.powers[0]
    assert alloc.objective <= oracle.objective + 1e-6
    assert abs(alloc.objective - oracle.objective) <= 0.01 * oracle.objective + 1e-4
    # the stationary point sits where the grid put it
    np.testing.assert_allclose(alloc.powers, oracle.powers, atol=2 * 4.0 * 1e-3)


def test_kkt_objective_matches_weighted_outage(params_c1):
    alloc, _ = allocate_kkt([1.0, 2.0, 3.0], 6.0, params_c1)
    assert alloc.objective == pytest.approx(
        weighted_outage([1.0, 2.0, 3.0], alloc.powers, params_c1), abs=1e-12
    )


def test_kkt_infeasible_interior_falls_back(params_c1):
    # P below N*c/2: no all-active solution on the convex branch
    alloc, report = allocate_kkt([1.0, 1.0], 0.5, params_c1, seed=5)
    assert not report.converged
    assert alloc.method == "pg"
    oracle = allocate_grid_oracle([1.0, 1.0], 0.5, params_c1, 1e-3)
    assert alloc.objective <= oracle.objective + 0.01 * oracle.objective + 1e-4


def test_kkt_rejects_degenerate_input(params_c1):
    with pytest.raises(ValueError):
        allocate_kkt([0.0, 0.0], 1.0, params_c1)
    with pytest.raises(ValueError):
        allocate_kkt([1.0], 0.0, params_c1)
    with pytest.raises(ValueError):
        allocate_kkt([-1.0, 1.0], 1.0, params_c1)


def test_pg_symmetric_instance(params_c1):
    alloc, _ = allocate_pg([1.0, 1.0, 1.0, 1.0], 4.0, params_c1, seed=2)
    np.testing.assert_allclose(alloc.powers, 1.0, atol=1e-6)
    assert alloc.method == "pg"


def test_pg_never_worse_than_equal(params_c1, rng):
    for i in range(20):
        n = int(rng.integers(2, 12))
        w = rng.uniform(0.0, 5.0, n)
        if not np.any(w > 0):
            w[0] = 1.0
        p_total = float(rng.uniform(0.2, 10.0))
        alloc, _ = allocate_pg(w, p_total, params_c1, seed=i)
        equal_obj = weighted_outage(w, np.full(n, p_total / n), params_c1)
        assert alloc.objective <= equal_obj + 1e-9


def test_pg_deep_nonconvex_matches_oracle(params_c1):
    alloc, _ = allocate_pg([5.0, 1.0, 1.0], 1.2, params_c1, seed=7)
    oracle = allocate_grid_oracle([5.0, 1.0, 1.0], 1.2, params_c1, 1e-3)
    assert abs(alloc.objective - oracle.objective) <= 1e-3


def test_pg_concentrates_under_starved_budget(params_c1):
    # equal weights but tiny budget: abandoning one frame beats splitting
    alloc, _ = allocate_pg([1.0, 1.0], 0.6, params_c1, seed=3)
    assert sorted(alloc.powers.tolist()) == pytest.approx([0.0, 0.6], abs=1e-9)


def test_oracle_single_frame(params_c1):
    oracle = allocate_grid_oracle([2.5], 3.0, params_c1)
    assert oracle.powers.tolist() == [3.0]
    assert oracle.method == "oracle"


def test_oracle_symmetric_within_grid_step(params_c1):
    oracle = allocate_grid_oracle([1.0, 1.0], 4.0, params_c1, 1e-3)
    assert abs(oracle.powers[0] - oracle.powers[1]) <= 2 * 4.0 * 1e-3


def test_oracle_validation(params_c1):
    with pytest.raises(ValueError):
        allocate_grid_oracle([1.0] * 5, 1.0, params_c1)
    with pytest.raises(ValueError):
        allocate_grid_oracle([1.0], 1.0, params_c1, resolution=0.0)


def test_allocate_front_door_beats_equal(params_c1, rng):
    for i in range(10):
        n = int(rng.integers(2, 21))
        w = rng.uniform(0.0, 10.0, n)
        if not np.any(w > 0):
            w[0] = 1.0
        p_total = float(rng.uniform(0.5, 12.0))
        alloc, report = allocate(w, p_total, params_c1, seed=i)
        equal_obj = weighted_outage(w, np.full(n, p_total / n), params_c1)
        assert alloc.objective <= equal_obj + 1e-9
        assert np.all(alloc.powers[np.asarray(w) == 0.0] == 0.0)
        assert abs(alloc.powers.sum() - p_total) <= 1e-9 * p_total
        assert report.residual >= 0.0


def test_allocate_monotone_in_weights(params_c1, rng):
    for i in range(10):
        w = rng.uniform(0.01, 10.0, 12)
        alloc, _ = allocate(w, float(rng.uniform(1.0, 10.0)), params_c1, seed=i)
        order = np.argsort(w, kind="stable")
        assert np.all(np.diff(alloc.powers[order]) >= -1e-8)


def test_allocate_scaling_invariance_spot(params_c1, rng):
    w = rng.uniform(0.1, 10.0, 8)
    base, _ = allocate(w, 3.0, params_c1, seed=4)
    for k in (0.1, 7.0):
        scaled, _ = allocate(k * w, 3.0, params_c1, seed=4)
        np.testing.assert_allclose(scaled.powers, base.powers, atol=1e-6)
        assert scaled.objective == pytest.approx(k * base.objective, rel=1e-9)


def test_allocate_accepts_importance_vector(params_c1):
    from siac.importance import ImportanceVector

    vec = ImportanceVector(np.array([1.0, 3.0]), "count")
    alloc, _ = allocate(vec, 2.0, params_c1)
    assert alloc.powers[1] > alloc.powers[0]
    assert weighted_outage(vec, alloc, params_c1) == pytest.approx(alloc.objective, abs=1e-12)
