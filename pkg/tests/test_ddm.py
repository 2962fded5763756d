import numpy as np
import pytest

from cogsim import ddm


def test_direct_example():
    traj = ddm.build_trajectory(0.9, 2.0, f=5)
    assert traj.n_steps == 10
    assert traj.values[0] == 0.5
    assert traj.values[10] == 0.9
    assert traj.delta_p == pytest.approx(0.04)


def test_minimal_two_point_trajectory():
    traj = ddm.build_trajectory(0.51, 0.2, f=5)
    assert traj.n_steps == 1
    assert traj.values[0] == 0.5
    assert traj.values[1] == 0.51


@pytest.mark.parametrize("k", [2.0, 6.0, 10.0])
def test_midpoint_symmetry_even_steps(k):
    traj = ddm.build_trajectory(0.9, 2.0, f=5, steepness=k)
    assert traj.n_steps % 2 == 0
    mid = traj.values[traj.n_steps // 2]
    assert mid == pytest.approx((0.5 + 0.9) / 2, abs=1e-12)


def test_strict_monotonicity_random_draws():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        r_p = rng.uniform(0.5001, 1.0)
        r_t = rng.uniform(0.2, 10.0)
        k = rng.uniform(0.5, 12.0)
        traj = ddm.build_trajectory(r_p, r_t, f=5, steepness=k)
        assert (np.diff(traj.values) > 0).all()
        assert traj.values[0] == 0.5
        assert traj.values[-1] == r_p


def test_delta_identity():
    # delta_p is the correctly-rounded quotient (R_p - S_p) / (f * R_t);
    # the product identity holds to the last representable bit.
    import math

    rng = np.random.default_rng(11)
    for _ in range(1000):
        r_p = rng.uniform(0.5001, 1.0)
        r_t = rng.uniform(0.2, 10.0)
        traj = ddm.build_trajectory(r_p, r_t, f=5)
        target = r_p - 0.5
        assert abs(traj.delta_p * (5 * r_t) - target) <= math.ulp(target)
        assert traj.delta_p == target / (5 * r_t)


def test_shape_endpoints_machine_precision():
    for k in (1.0, 6.0, 20.0):
        g = ddm._shape(np.array([0.0, 1.0]), k)
        assert g[0] == 0.0
        assert g[1] == 1.0


def test_degenerate_boundary_clamped(caplog):
    traj = ddm.build_trajectory(0.5, 1.0, f=5)
    assert traj.r_p == 0.51
    assert traj.delta_p > 0


def test_out_of_range_inputs_rejected():
    with pytest.raises(ValueError):
        ddm.build_trajectory(1.2, 1.0)
    with pytest.raises(ValueError):
        ddm.build_trajectory(0.9, 0.1)
    with pytest.raises(ValueError):
        ddm.build_trajectory(0.9, 11.0)
    with pytest.raises(ValueError):
        ddm.build_trajectory(0.9, 1.0, f=0)


def test_round_half_up_quantization():
    # 0.5 frames rounds up: R_t=0.3 at f=5 gives 1.5 -> 2 steps.
    assert ddm.build_trajectory(0.9, 0.3, f=5).n_steps == 2


def test_csv_rows():
    traj = ddm.build_trajectory(0.8, 1.0, f=5)
    rows = traj.to_csv_rows()
    assert rows[0] == (0, 0.5)
    assert rows[-1][0] == traj.n_steps
    assert rows[-1][1] == pytest.approx(0.8)
