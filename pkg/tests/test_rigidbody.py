import numpy as np
import pytest

from chdp.rigidbody import (
    RigidBodyState,
    coadjoint_drift,
    euler_rhs,
    evolve_rigidbody,
    hat,
)


class TestHat:
    def test_zero(self):
        assert np.array_equal(hat([0, 0, 0]), np.zeros((3, 3)))

    def test_unit_x(self):
        m = hat([1, 0, 0])
        assert m[1, 2] == -1.0 and m[2, 1] == 1.0
        assert np.max(np.abs(m + m.T)) == 0.0

    def test_cross_product_identity(self, rng):
        for _ in range(10):
            x, y = rng.standard_normal(3), rng.standard_normal(3)
            assert np.max(np.abs(hat(x) @ y - np.cross(x, y))) <= 1e-14


class TestEulerRhs:
    def test_spherical_inertia(self, rng):
        state = RigidBodyState.from_rest_attitude(rng.standard_normal(3), [2.0, 2.0, 2.0])
        assert np.max(np.abs(euler_rhs(state))) <= 1e-15

    def test_principal_axis_equilibrium(self):
        state = RigidBodyState.from_rest_attitude([0.0, 3.0, 0.0], [1.0, 2.0, 3.0])
        assert np.max(np.abs(euler_rhs(state))) == 0.0

    def test_hand_computed_value(self):
        state = RigidBodyState.from_rest_attitude([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
        assert np.allclose(euler_rhs(state), [-1.0, 1.0, -1.0 / 3.0], atol=1e-15)


class TestStateValidation:
    def test_rejects_non_orthogonal(self):
        bad = np.eye(3)
        bad[0, 1] = 1e-3
        with pytest.raises(ValueError, match="orthogonal"):
            RigidBodyState(bad, np.ones(3), np.ones(3))

    def test_rejects_reflection(self):
        refl = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ValueError, match="determinant"):
            RigidBodyState(refl, np.ones(3), np.ones(3))

    def test_rejects_bad_inertia(self):
        with pytest.raises(ValueError, match="inertia"):
            RigidBodyState.from_rest_attitude(np.ones(3), [1.0, -2.0, 3.0])


@pytest.fixture(scope="module")
def reference_run():
    state = RigidBodyState.from_rest_attitude([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    return evolve_rigidbody(state, dt=1e-3, t_end=10.0)


class TestEvolve:
    def test_principal_axis_rotation(self):
        state = RigidBodyState.from_rest_attitude([2.0, 0.0, 0.0], [1.0, 2.0, 3.0])
        traj = evolve_rigidbody(state, dt=1e-2, t_end=1.0)
        assert np.max(np.abs(traj.omega - traj.omega[0])) <= 1e-12
        # uniform rotation about axis 1: R(t) e1 = e1
        assert np.max(np.abs(traj.attitude[:, :, 0] - np.array([1.0, 0.0, 0.0]))) <= 1e-9

    def test_spatial_momentum_constant(self, reference_run):
        drift = np.max(np.linalg.norm(
            reference_run.spatial_momentum - reference_run.spatial_momentum[0], axis=1))
        assert drift <= 1e-8

    def test_energy_and_casimir_constant(self, reference_run):
        energy_drift = np.max(np.abs(reference_run.energy - reference_run.energy[0]))
        assert energy_drift <= 1e-8
        casimir = np.einsum("ti,ti->t", reference_run.body_momentum,
                            reference_run.body_momentum)
        assert np.max(np.abs(casimir - casimir[0])) <= 1e-8

    def test_attitude_stays_orthonormal(self, reference_run):
        sample = reference_run.attitude[::500]
        defects = [np.max(np.abs(r.T @ r - np.eye(3))) for r in sample]
        assert max(defects) <= 1e-9

    def test_coadjoint_drift_small(self, reference_run):
        assert coadjoint_drift(reference_run) <= 1e-8

    def test_coadjoint_drift_spherical(self):
        state = RigidBodyState.from_rest_attitude([0.3, -0.2, 0.5], [2.0, 2.0, 2.0])
        traj = evolve_rigidbody(state, dt=1e-2, t_end=2.0)
        assert coadjoint_drift(traj) <= 1e-10

    def test_coadjoint_drift_zero_velocity(self):
        state = RigidBodyState.from_rest_attitude([0.0, 0.0, 0.0], [1.0, 2.0, 3.0])
        traj = evolve_rigidbody(state, dt=1e-2, t_end=1.0)
        assert coadjoint_drift(traj) == 0.0

    def test_rk4_order_on_omega(self):
        state = RigidBodyState.from_rest_attitude([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

        def final_omega(dt):
            return evolve_rigidbody(state, dt=dt, t_end=2.0).omega[-1]

        ref = final_omega(5e-4)
        e1 = np.linalg.norm(final_omega(8e-3) - ref)
        e2 = np.linalg.norm(final_omega(4e-3) - ref)
        assert 14.0 <= e1 / e2 <= 18.0
