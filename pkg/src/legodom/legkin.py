"""Closed-form leg kinematics: FK, Jacobian, torque-to-force mapping, and the
rounded-foot rolling bias model."""

import numpy as np

from . import kernels
from .geometry import LegGeometry


class SingularConfiguration(Exception):
    """Jacobian too close to singular for the force solve."""


def fk_position(q, geom: LegGeometry):
    """Hip-to-end-effector position in the body frame."""
    return kernels.fk_position(np.asarray(q, dtype=float), *geom.kernel_args())


def fk_velocity(q, dq, geom: LegGeometry):
    """Hip-to-end-effector velocity; equals jacobian(q) @ dq."""
    return kernels.fk_velocity(np.asarray(q, dtype=float),
                               np.asarray(dq, dtype=float), *geom.kernel_args())


def jacobian(q, geom: LegGeometry):
    """Geometric Jacobian mapping joint rates to body-frame foot velocity."""
    return kernels.leg_jacobian(np.asarray(q, dtype=float), *geom.kernel_args())


def foot_force_body(q, tau, geom: LegGeometry, sigma_min=1e-6):
    """Quasi-static end-effector force from joint torques, (J J^T)^-1 J tau.

    Raises SingularConfiguration when the smallest singular value of the
    Jacobian is below sigma_min; callers should skip contact gating for the
    leg in that cycle.
    """
    f, ok = kernels.foot_force(np.asarray(q, dtype=float),
                               np.asarray(tau, dtype=float),
                               *geom.kernel_args(), sigma_min)
    if not ok:
        raise SingularConfiguration(
            "leg Jacobian smallest singular value below %g" % sigma_min)
    return f


def rolling_bias(radius, a1, a2):
    """Sagittal anchor bias of a rounded foot that rolls instead of pivoting.

    a1/a2 are the shank pitch angles at touchdown and lift-off. Returns
    (dx, dz): the displacement error committed by modelling the rounded foot
    as a rigid shank extension with a fixed contact point. Linear in radius.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    dx = radius * (np.cos(a1) - np.cos(a2) - (a2 - a1))
    dz = radius * (-np.sin(a1) + np.sin(a2))
    return dx, dz


__all__ = ["fk_position", "fk_velocity", "jacobian", "foot_force_body",
           "rolling_bias", "SingularConfiguration"]
