"""SE(3) rigid transforms and their Lie-algebra maps.

Twist layout is (rx, ry, rz, tx, ty, tz): rotation vector first (radians),
translation second (meters).  All array helpers broadcast over leading axes,
so the solver can evaluate whole factor groups in one call.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Below this rotation angle the closed forms are replaced by Taylor series.
_SMALL_ANGLE = 1e-7
# Logarithm is rejected this close to pi, where the axis is not unique.
MAX_LOG_ANGLE = np.pi - 1e-6
# Orthonormality defect that triggers re-projection onto SO(3).
_ORTHO_TOL = 1e-10


class DegenerateRotationError(ValueError):
    """Rotation angle too close to pi for a unique logarithm."""


def hat(v):
    """Skew-symmetric matrix of a 3-vector, batched over leading axes."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def _angle(phi):
    return np.linalg.norm(phi, axis=-1)


def so3_exp(phi):
    """Rodrigues formula, batched."""
    phi = np.asarray(phi, dtype=float)
    theta = _angle(phi)[..., None, None]
    k = hat(phi)
    k2 = k @ k
    small = theta < _SMALL_ANGLE
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(small, 1.0 - theta**2 / 6.0, np.sin(theta) / np.where(small, 1.0, theta))
        b = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(theta)) / np.where(small, 1.0, theta**2))
    return np.eye(3) + a * k + b * k2


def so3_log(rot):
    """Rotation vector of a rotation matrix, batched.

    Raises DegenerateRotationError when the angle is within 1e-6 of pi.
    """
    rot = np.asarray(rot, dtype=float)
    trace = rot[..., 0, 0] + rot[..., 1, 1] + rot[..., 2, 2]
    cos_theta = np.clip((trace - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(cos_theta)
    if np.any(theta >= MAX_LOG_ANGLE):
        raise DegenerateRotationError("rotation angle within 1e-6 of pi")
    vee = 0.5 * np.stack(
        [
            rot[..., 2, 1] - rot[..., 1, 2],
            rot[..., 0, 2] - rot[..., 2, 0],
            rot[..., 1, 0] - rot[..., 0, 1],
        ],
        axis=-1,
    )
    small = theta < _SMALL_ANGLE
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(small, 1.0 + theta**2 / 6.0, theta / np.where(small, 1.0, np.sin(theta)))
    phi = vee * scale[..., None]

    # Near pi the sine-based extraction loses the axis; recover it from the
    # symmetric part instead.  Rare, so handled per element.
    near_pi = theta > 2.9
    if np.any(near_pi):
        flat_rot = rot.reshape(-1, 3, 3)
        flat_phi = phi.reshape(-1, 3)
        flat_theta = theta.reshape(-1)
        flat_vee = vee.reshape(-1, 3)
        for i in np.nonzero(near_pi.reshape(-1))[0]:
            r = flat_rot[i]
            th = flat_theta[i]
            sym = 0.5 * (r + r.T)
            nnt = (sym - np.cos(th) * np.eye(3)) / (1.0 - np.cos(th))
            axis = np.sqrt(np.clip(np.diag(nnt), 0.0, 1.0))
            k = int(np.argmax(axis))
            for j in range(3):
                if j != k and axis[k] > 0:
                    axis[j] = nnt[k, j] / axis[k]
            if np.dot(axis, flat_vee[i]) < 0:
                axis = -axis
            norm = np.linalg.norm(axis)
            flat_phi[i] = th * axis / norm
        phi = flat_phi.reshape(phi.shape)
    return phi


def so3_left_jacobian(phi):
    phi = np.asarray(phi, dtype=float)
    theta = _angle(phi)[..., None, None]
    k = hat(phi)
    k2 = k @ k
    small = theta < _SMALL_ANGLE
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(theta)) / np.where(small, 1.0, theta**2))
        b = np.where(small, 1.0 / 6.0 - theta**2 / 120.0, (theta - np.sin(theta)) / np.where(small, 1.0, theta**3))
    return np.eye(3) + a * k + b * k2


def so3_left_jacobian_inv(phi):
    phi = np.asarray(phi, dtype=float)
    theta = _angle(phi)[..., None, None]
    k = hat(phi)
    k2 = k @ k
    small = theta < _SMALL_ANGLE
    # c = 1/theta^2 - cot(theta/2)/(2 theta); stable up to pi.
    with np.errstate(invalid="ignore", divide="ignore"):
        half = np.where(small, 1.0, theta) / 2.0
        c = np.where(
            small,
            1.0 / 12.0 + theta**2 / 720.0,
            1.0 / np.where(small, 1.0, theta**2) - np.cos(half) / (np.sin(half) * 2.0 * np.where(small, 1.0, theta)),
        )
    return np.eye(3) - 0.5 * k + c * k2


def se3_exp(xi):
    """Exponential map from a 6-twist to a 4x4 transform, batched."""
    xi = np.asarray(xi, dtype=float)
    phi = xi[..., :3]
    rho = xi[..., 3:]
    out = np.zeros(xi.shape[:-1] + (4, 4))
    out[..., :3, :3] = so3_exp(phi)
    out[..., :3, 3] = (so3_left_jacobian(phi) @ rho[..., None])[..., 0]
    out[..., 3, 3] = 1.0
    return out


def se3_log(tf):
    """Logarithm map from a 4x4 transform to a 6-twist, batched."""
    tf = np.asarray(tf, dtype=float)
    phi = so3_log(tf[..., :3, :3])
    rho = (so3_left_jacobian_inv(phi) @ tf[..., :3, 3:4])[..., 0]
    return np.concatenate([phi, rho], axis=-1)


def se3_inv(tf):
    """Inverse of a rigid transform, batched."""
    tf = np.asarray(tf, dtype=float)
    rt = np.swapaxes(tf[..., :3, :3], -1, -2)
    out = np.zeros_like(tf)
    out[..., :3, :3] = rt
    out[..., :3, 3] = -(rt @ tf[..., :3, 3:4])[..., 0]
    out[..., 3, 3] = 1.0
    return out


def se3_identity():
    return np.eye(4)


def se3_adjoint(tf):
    """Adjoint matrix mapping twists across a frame change, batched.

    Satisfies tf @ exp(xi) @ inv(tf) == exp(adjoint(tf) @ xi).
    """
    tf = np.asarray(tf, dtype=float)
    rot = tf[..., :3, :3]
    out = np.zeros(tf.shape[:-2] + (6, 6))
    out[..., :3, :3] = rot
    out[..., 3:, 3:] = rot
    out[..., 3:, :3] = hat(tf[..., :3, 3]) @ rot
    return out


def _se3_q(phi, rho):
    """Coupling block of the SE(3) left Jacobian."""
    theta = _angle(phi)[..., None, None]
    ph = hat(phi)
    rh = hat(rho)
    small = theta < _SMALL_ANGLE
    t = np.where(small, 1.0, theta)
    with np.errstate(invalid="ignore", divide="ignore"):
        c1 = np.where(small, 1.0 / 6.0 - theta**2 / 120.0, (t - np.sin(t)) / t**3)
        c2 = np.where(small, -1.0 / 24.0 + theta**2 / 720.0, (1.0 - theta**2 / 2.0 - np.cos(t)) / t**4)
        c3 = np.where(small, -1.0 / 120.0, (t - np.sin(t) - t**3 / 6.0) / t**5)
    m1 = ph @ rh + rh @ ph + ph @ rh @ ph
    m2 = ph @ ph @ rh + rh @ ph @ ph - 3.0 * (ph @ rh @ ph)
    m3 = ph @ rh @ ph @ ph + ph @ ph @ rh @ ph
    return 0.5 * rh + c1 * m1 - c2 * m2 - 0.5 * (c2 - 3.0 * c3) * m3


def se3_left_jacobian(xi):
    xi = np.asarray(xi, dtype=float)
    phi = xi[..., :3]
    rho = xi[..., 3:]
    j3 = so3_left_jacobian(phi)
    out = np.zeros(xi.shape[:-1] + (6, 6))
    out[..., :3, :3] = j3
    out[..., 3:, 3:] = j3
    out[..., 3:, :3] = _se3_q(phi, rho)
    return out


def se3_left_jacobian_inv(xi):
    xi = np.asarray(xi, dtype=float)
    phi = xi[..., :3]
    rho = xi[..., 3:]
    j3i = so3_left_jacobian_inv(phi)
    out = np.zeros(xi.shape[:-1] + (6, 6))
    out[..., :3, :3] = j3i
    out[..., 3:, 3:] = j3i
    out[..., 3:, :3] = -j3i @ _se3_q(phi, rho) @ j3i
    return out


def se3_right_jacobian_inv(xi):
    return se3_left_jacobian_inv(-np.asarray(xi, dtype=float))


def _project_rotation(rot):
    u, _, vt = np.linalg.svd(rot)
    out = u @ vt
    if np.linalg.det(out) < 0:
        u[:, -1] = -u[:, -1]
        out = u @ vt
    return out


@dataclass
class Pose:
    """A rigid transform: 3x3 rotation plus 3-vector translation.

    Construction re-projects onto SO(3) whenever the orthonormality defect
    exceeds 1e-10, so long composition chains stay valid group elements.
    """

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.rotation = np.array(self.rotation, dtype=float)
        self.translation = np.array(self.translation, dtype=float).reshape(3)
        if self.rotation.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {self.rotation.shape}")
        defect = self.rotation.T @ self.rotation - np.eye(3)
        if np.linalg.norm(defect) > _ORTHO_TOL:
            self.rotation = _project_rotation(self.rotation)

    @classmethod
    def identity(cls) -> "Pose":
        return cls()

    @classmethod
    def from_xyzyaw(cls, x: float, y: float, z: float, yaw: float) -> "Pose":
        c, s = np.cos(yaw), np.sin(yaw)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return cls(rot, np.array([x, y, z], dtype=float))

    @classmethod
    def from_matrix(cls, mat) -> "Pose":
        mat = np.asarray(mat, dtype=float)
        return cls(mat[:3, :3], mat[:3, 3])

    @classmethod
    def exp(cls, twist) -> "Pose":
        return cls.from_matrix(se3_exp(np.asarray(twist, dtype=float).reshape(6)))

    def log(self) -> np.ndarray:
        """Twist such that Pose.exp(twist) reproduces this pose."""
        return se3_log(self.matrix())

    def matrix(self) -> np.ndarray:
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out

    def compose(self, other: "Pose") -> "Pose":
        """This transform followed by `other` expressed in this frame."""
        return Pose(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)

    def inverse(self) -> "Pose":
        rt = self.rotation.T
        return Pose(rt, -rt @ self.translation)

    def between(self, other: "Pose") -> "Pose":
        """Relative transform taking this pose to `other` (self^-1 * other)."""
        rt = self.rotation.T
        return Pose(rt @ other.rotation, rt @ (other.translation - self.translation))

    def apply(self, point) -> np.ndarray:
        """Map a 3D point from this pose's frame into the parent frame."""
        return self.rotation @ np.asarray(point, dtype=float).reshape(3) + self.translation

    def yaw(self) -> float:
        return float(np.arctan2(self.rotation[1, 0], self.rotation[0, 0]))

    def rotation_angle(self) -> float:
        cos_theta = np.clip((np.trace(self.rotation) - 1.0) / 2.0, -1.0, 1.0)
        return float(np.arccos(cos_theta))

    def kitti_row(self) -> np.ndarray:
        """Row-major 3x4 [R|t] as 12 floats."""
        return np.hstack([self.rotation, self.translation[:, None]]).reshape(12)

    @classmethod
    def from_kitti_row(cls, row) -> "Pose":
        row = np.asarray(row, dtype=float).reshape(3, 4)
        return cls(row[:, :3], row[:, 3])

    def almost_equal(self, other: "Pose", tol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, atol=tol)
            and np.allclose(self.translation, other.translation, atol=tol)
        )

    def __repr__(self) -> str:
        t = self.translation
        return f"Pose(t=[{t[0]:.4g}, {t[1]:.4g}, {t[2]:.4g}], yaw={self.yaw():.4g})"


def compose(a: Pose, b: Pose) -> Pose:
    return a.compose(b)


def inverse(a: Pose) -> Pose:
    return a.inverse()


def between(a: Pose, b: Pose) -> Pose:
    return a.between(b)


def exp_map(twist) -> Pose:
    return Pose.exp(twist)


def log_map(pose: Pose) -> np.ndarray:
    return pose.log()
