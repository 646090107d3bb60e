"""Per-leg 6D constant-velocity cubature filter with an analytic
inverse-kinematics measurement model.

Joint rates from encoder differencing are spiky; filtering the hip-to-foot
Cartesian state against the measured (angles, rates) through the analytic IK
keeps the velocity observation smooth without ever forming model Jacobians.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import LegGeometry
from .legkin import fk_position, fk_velocity

DT_MAX_DEFAULT = 0.1
DET_EPS = 1e-9
R_INFLATE = 1e6
P0_POS = 1e-4
P0_VEL = 1e-1


class Unreachable(Exception):
    """Target outside the reachable workspace of the IK branch."""


class SingularJacobian(Exception):
    """IK Jacobian too close to singular for the rate solve."""


@dataclass
class CkfLegState:
    """Filter state for one leg: x = (position, velocity), covariance, stamp."""

    x: np.ndarray
    P: np.ndarray
    t: float


@dataclass
class CkfNoise:
    """Process covariance (per second of elapsed time) and measurement covariance."""

    q_cov: np.ndarray
    r_cov: np.ndarray

    @classmethod
    def from_diagonals(cls, q_pos=1e-6, q_vel=0.3, r_angle=2.5e-7, r_rate=0.3):
        q = np.diag([q_pos] * 3 + [q_vel] * 3)
        r = np.diag([r_angle] * 3 + [r_rate] * 3)
        return cls(q, r)


def ik_measurement(x, geom: LegGeometry, clamp_tol=kernels.CLAMP_TOL):
    """Map a (position, velocity) state to (joint angles, joint rates).

    Inverse of (fk_position, fk_velocity) on the supported branch: knee folded
    back, foot on its own lateral side. Raises Unreachable when an
    inverse-trig argument leaves its domain by more than clamp_tol, and
    SingularJacobian when the rate solve is ill-posed.
    """
    x = np.asarray(x, dtype=float)
    lh, lt, _, _, side = geom.kernel_args()
    l2 = geom.l2
    t1, t2, t3, viol = kernels.ik_joints(x[0], x[1], x[2], lh, lt, l2, side)
    if viol > clamp_tol:
        raise Unreachable("position outside workspace (domain overshoot %g)" % viol)
    d1, d2, d3, ok = kernels.ik_rates(t1, t2, t3, x[3], x[4], x[5],
                                      lh, lt, l2, side, DET_EPS)
    if not ok:
        raise SingularJacobian("IK Jacobian determinant below %g" % DET_EPS)
    return np.array([t1, t2, t3, d1, d2, d3])


def cubature_points(x, P):
    """Equal-weight spherical-radial point set: x +- sqrt(n) * chol(P) columns."""
    n = x.shape[0]
    S, ok = kernels.chol_lower(P)
    if not ok:
        raise np.linalg.LinAlgError("covariance not positive definite")
    sq = np.sqrt(float(n))
    pts = np.empty((2 * n, n))
    for j in range(n):
        pts[j] = x + sq * S[:, j]
        pts[j + n] = x - sq * S[:, j]
    return pts


def cubature_step(x, P, dt, z, q_cov, r_cov, h):
    """Generic constant-velocity cubature filter step with measurement map h.

    Mirrors the compiled per-leg kernel but takes any callable h; used for
    the linear-model equivalence tests and as the reference the kernel is
    checked against. Raises LinAlgError instead of recovering.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    half = n // 2
    w = 1.0 / (2 * n)

    pts = cubature_points(x, P)
    pts_pred = pts.copy()
    pts_pred[:, :half] += dt * pts[:, half:]
    x_pred = w * pts_pred.sum(axis=0)
    dev = pts_pred - x_pred
    p_pred = q_cov + w * (dev.T @ dev)

    pts2 = cubature_points(x_pred, p_pred)
    zs = np.array([h(p) for p in pts2])
    z_pred = w * zs.sum(axis=0)
    dz = zs - z_pred
    dx = pts2 - x_pred
    pzz = r_cov + w * (dz.T @ dz)
    pxz = w * (dx.T @ dz)

    gain = np.linalg.solve(pzz.T, pxz.T).T
    x_post = x_pred + gain @ (np.asarray(z, dtype=float) - z_pred)
    p_post = p_pred - gain @ pzz @ gain.T
    p_post = 0.5 * (p_post + p_post.T)
    return x_post, p_post


def initial_state(q, geom: LegGeometry, t):
    """Filter state at first sight of a leg: FK position, zero velocity."""
    x = np.zeros(6)
    x[:3] = fk_position(q, geom)
    P = np.diag([P0_POS] * 3 + [P0_VEL] * 3)
    return CkfLegState(x, P, t)


def ckf_step(state: CkfLegState, z, t_now, noise: CkfNoise, geom: LegGeometry,
             dt_max=DT_MAX_DEFAULT):
    """One filter cycle for one leg against measured (angles, rates).

    The time step is truncated to zero when it exceeds dt_max (timestamp
    anomalies); process noise scales with the elapsed time. Covariance
    failures recover by resetting to the diagonal prior, never by aborting.

    Returns (new_state, status_bitmask).
    """
    dt = t_now - state.t
    if abs(dt) > dt_max:
        dt = 0.0
    q_eff = noise.q_cov * dt
    lh, lt, _, _, side = geom.kernel_args()
    x, P, status = kernels.ckf_leg_step(
        state.x, state.P, dt, np.asarray(z, dtype=float), q_eff, noise.r_cov,
        lh, lt, geom.l2, side, DET_EPS, R_INFLATE, P0_POS, P0_VEL)
    return CkfLegState(x, P, t_now), status


@dataclass
class LegVelocityFilter:
    """One filter engine servicing every leg by swapping per-leg cached state.

    When disabled, update() passes the raw forward-kinematics velocity
    through untouched.
    """

    geometries: list
    noise: CkfNoise = field(default_factory=CkfNoise.from_diagonals)
    enabled: bool = True
    dt_max: float = DT_MAX_DEFAULT
    states: dict = field(default_factory=dict)
    status_counts: dict = field(default_factory=dict)

    def reset(self):
        self.states.clear()
        self.status_counts.clear()

    def update(self, stamp, joint_readings):
        """Advance every leg one cycle; returns the per-leg foot velocity."""
        out = []
        for i, (geom, reading) in enumerate(zip(self.geometries, joint_readings)):
            if not self.enabled:
                out.append(fk_velocity(reading.q, reading.dq, geom))
                continue
            st = self.states.get(i)
            if st is None:
                st = initial_state(reading.q, geom, stamp)
            z = np.concatenate([reading.q, reading.dq])
            st, status = ckf_step(st, z, stamp, self.noise, geom, self.dt_max)
            self.states[i] = st
            if status:
                self.status_counts[status] = self.status_counts.get(status, 0) + 1
            out.append(st.x[3:].copy())
        return out


__all__ = ["CkfLegState", "CkfNoise", "Unreachable", "SingularJacobian",
           "ik_measurement", "cubature_points", "cubature_step", "ckf_step",
           "initial_state", "LegVelocityFilter"]
