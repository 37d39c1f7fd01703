import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from cotrack import geometry
from cotrack.geometry import DegenerateRotationError, Pose


def random_pose(rng, rot_scale=2.5, trans_scale=5.0):
    phi = rng.normal(size=3)
    norm = np.linalg.norm(phi)
    phi = phi / norm * rng.uniform(0.0, rot_scale)
    return Pose(Rotation.from_rotvec(phi).as_matrix(), rng.normal(scale=trans_scale, size=3))


def random_twist(rng, rot_scale=2.5, trans_scale=5.0):
    phi = rng.normal(size=3)
    phi = phi / np.linalg.norm(phi) * rng.uniform(0.0, rot_scale)
    return np.concatenate([phi, rng.normal(scale=trans_scale, size=3)])


class TestFromXyzYaw:
    def test_identity(self):
        p = Pose.from_xyzyaw(0, 0, 0, 0)
        assert p.almost_equal(Pose.identity())

    def test_quarter_turn_maps_x_to_y(self):
        p = Pose.from_xyzyaw(1, 2, 0, np.pi / 2)
        assert np.allclose(p.rotation @ np.array([1, 0, 0]), [0, 1, 0])
        assert np.allclose(p.translation, [1, 2, 0])

    def test_matches_axis_angle_oracle(self):
        # Oracle: independent axis-angle rotation about +z.
        x, y, z, yaw = 3.5, -1.2, 0.3, 0.7
        p = Pose.from_xyzyaw(x, y, z, yaw)
        oracle = Rotation.from_rotvec([0, 0, yaw]).as_matrix()
        assert np.allclose(p.rotation, oracle, atol=1e-12)
        assert np.allclose(p.translation, [x, y, z])


class TestComposeInverseBetween:
    def test_compose_identity(self):
        rng = np.random.default_rng(0)
        p = random_pose(rng)
        assert Pose.identity().compose(p).almost_equal(p)
        assert p.compose(Pose.identity()).almost_equal(p)

    def test_compose_with_inverse_is_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            p = random_pose(rng)
            assert p.compose(p.inverse()).almost_equal(Pose.identity(), tol=1e-9)

    def test_pure_translation_additivity(self):
        a = Pose(np.eye(3), [1, 0, 0])
        b = Pose(np.eye(3), [0, 2, 0])
        assert a.compose(b).almost_equal(Pose(np.eye(3), [1, 2, 0]))

    def test_inverse_identity(self):
        assert Pose.identity().inverse().almost_equal(Pose.identity())

    def test_inverse_pure_translation(self):
        p = Pose(np.eye(3), [1, 2, 3])
        assert p.inverse().almost_equal(Pose(np.eye(3), [-1, -2, -3]))

    def test_inverse_matches_matrix_solve_oracle(self):
        # Oracle: generic 4x4 inverse via a linear solve.
        p = Pose.from_xyzyaw(1, 0, 0, np.pi / 2)
        oracle = np.linalg.solve(p.matrix(), np.eye(4))
        assert np.allclose(p.inverse().matrix(), oracle, atol=1e-12)

    def test_between_self_is_identity(self):
        rng = np.random.default_rng(2)
        p = random_pose(rng)
        assert p.between(p).almost_equal(Pose.identity())

    def test_between_identity_is_other(self):
        rng = np.random.default_rng(3)
        p = random_pose(rng)
        assert Pose.identity().between(p).almost_equal(p)

    def test_between_recomposition(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            a, b = random_pose(rng), random_pose(rng)
            assert a.compose(a.between(b)).almost_equal(b, tol=1e-9)

    def test_associativity(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a, b, c = random_pose(rng), random_pose(rng), random_pose(rng)
            left = a.compose(b).compose(c)
            right = a.compose(b.compose(c))
            assert left.almost_equal(right, tol=1e-9)

    def test_frame_consistency(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            x, b = random_pose(rng), random_pose(rng)
            assert x.between(x.compose(b)).almost_equal(b, tol=1e-9)

    def test_orthonormality_after_long_chain(self):
        rng = np.random.default_rng(7)
        p = Pose.identity()
        step = random_pose(rng, rot_scale=0.01, trans_scale=0.1)
        for _ in range(10_000):
            p = p.compose(step)
        defect = np.linalg.norm(p.rotation.T @ p.rotation - np.eye(3))
        assert defect < 1e-9


class TestExpLog:
    def test_exp_zero_is_identity(self):
        assert Pose.exp(np.zeros(6)).almost_equal(Pose.identity())

    def test_exp_pure_yaw(self):
        theta = 0.8
        p = Pose.exp([0, 0, theta, 0, 0, 0])
        assert p.almost_equal(Pose.from_xyzyaw(0, 0, 0, theta), tol=1e-12)

    def test_log_exp_round_trip(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            v = random_twist(rng)
            assert np.allclose(Pose.exp(v).log(), v, atol=1e-9)

    def test_exp_matches_scipy_rotation(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            v = random_twist(rng)
            p = Pose.exp(v)
            assert np.allclose(p.rotation, Rotation.from_rotvec(v[:3]).as_matrix(), atol=1e-12)

    def test_log_matches_scipy_rotation(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            p = random_pose(rng, rot_scale=3.0)
            assert np.allclose(p.log()[:3], Rotation.from_matrix(p.rotation).as_rotvec(), atol=1e-9)

    def test_log_near_pi_round_trips(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            theta = rng.uniform(3.0, np.pi - 1e-5)
            v = np.concatenate([theta * axis, rng.normal(size=3)])
            assert np.allclose(Pose.exp(v).log(), v, atol=1e-7)

    def test_log_degenerate_raises(self):
        rot = Rotation.from_rotvec([np.pi, 0, 0]).as_matrix()
        with pytest.raises(DegenerateRotationError):
            Pose(rot, np.zeros(3)).log()


class TestBatchedHelpers:
    def test_batched_exp_log_match_scalar(self):
        rng = np.random.default_rng(12)
        twists = np.stack([random_twist(rng) for _ in range(40)])
        mats = geometry.se3_exp(twists)
        back = geometry.se3_log(mats)
        assert np.allclose(back, twists, atol=1e-9)
        for i in range(40):
            assert np.allclose(mats[i], Pose.exp(twists[i]).matrix(), atol=1e-12)

    def test_batched_inverse(self):
        rng = np.random.default_rng(13)
        mats = geometry.se3_exp(np.stack([random_twist(rng) for _ in range(20)]))
        invs = geometry.se3_inv(mats)
        assert np.allclose(invs @ mats, np.eye(4), atol=1e-12)

    def test_adjoint_moves_twists_across_frames(self):
        rng = np.random.default_rng(14)
        for _ in range(30):
            tf = random_pose(rng).matrix()
            xi = random_twist(rng, rot_scale=1e-4, trans_scale=1e-4)
            lhs = geometry.se3_log(tf @ geometry.se3_exp(xi) @ geometry.se3_inv(tf))
            rhs = geometry.se3_adjoint(tf) @ xi
            assert np.allclose(lhs, rhs, atol=1e-10)

    def test_right_jacobian_inv_matches_finite_differences(self):
        # Oracle: exp(xi + J_r(xi) d) ~ exp(xi) exp(d); invert the FD estimate.
        rng = np.random.default_rng(15)
        h = 1e-6
        for _ in range(30):
            xi = random_twist(rng, rot_scale=2.5, trans_scale=2.0)
            base = geometry.se3_exp(xi)
            jr_fd = np.zeros((6, 6))
            for k in range(6):
                d = np.zeros(6)
                d[k] = h
                plus = geometry.se3_log(geometry.se3_inv(base) @ geometry.se3_exp(xi + d))
                minus = geometry.se3_log(geometry.se3_inv(base) @ geometry.se3_exp(xi - d))
                jr_fd[:, k] = (plus - minus) / (2 * h)
            jr_inv = geometry.se3_right_jacobian_inv(xi)
            assert np.allclose(jr_inv @ jr_fd, np.eye(6), atol=1e-4)

    def test_left_jacobian_inverse_is_inverse(self):
        rng = np.random.default_rng(16)
        xis = np.stack([random_twist(rng) for _ in range(30)])
        jl = geometry.se3_left_jacobian(xis)
        jli = geometry.se3_left_jacobian_inv(xis)
        assert np.allclose(jl @ jli, np.eye(6), atol=1e-9)


class TestSerialization:
    def test_kitti_row_round_trip(self):
        rng = np.random.default_rng(17)
        p = random_pose(rng)
        assert Pose.from_kitti_row(p.kitti_row()).almost_equal(p, tol=1e-12)

    def test_yaw_extraction(self):
        for yaw in [-3.0, -1.2, 0.0, 0.4, 3.1]:
            assert abs(Pose.from_xyzyaw(0, 0, 0, yaw).yaw() - yaw) < 1e-12
