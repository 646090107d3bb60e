"""Heading from multi-contact geometry and the gain-scheduled yaw correction.

With two or more stationary contacts, the bearing of the world-frame baseline
between two anchors compared against the tilt-compensated body-frame baseline
reveals the absolute yaw, independent of IMU integration.
"""

import numpy as np

from .geometry import rot_x, rot_y, wrap_angle


class InsufficientContacts(Exception):
    """Fewer than two stance legs; no yaw constraint this cycle."""


class DegenerateMean(Exception):
    """Pairwise angles cancelled antipodally; treat as no constraint."""


def pairwise_yaw(anchors, feet_body, roll, pitch, min_baseline=0.02):
    """Yaw implied by each unordered pair of stance legs.

    anchors: world-frame contact points; feet_body: body-frame end-effector
    positions of the same legs. Body baselines are tilt-compensated with
    Ry(pitch) Rx(roll) so only the heading difference remains. Pairs whose
    planar baseline is shorter than min_baseline in either frame are skipped
    (bearing ill-conditioned).
    """
    if len(anchors) < 2:
        raise InsufficientContacts("need at least two stance legs")
    r_tilt = rot_y(pitch) @ rot_x(roll)
    out = []
    n = len(anchors)
    for i in range(n):
        for j in range(i + 1, n):
            vw = np.asarray(anchors[j], dtype=float) - np.asarray(anchors[i], dtype=float)
            vb = r_tilt @ (np.asarray(feet_body[j], dtype=float) -
                           np.asarray(feet_body[i], dtype=float))
            if np.hypot(vw[0], vw[1]) < min_baseline or np.hypot(vb[0], vb[1]) < min_baseline:
                continue
            out.append(wrap_angle(np.arctan2(vw[1], vw[0]) - np.arctan2(vb[1], vb[0])))
    return out


def circular_mean(angles):
    """Wrap-safe mean angle, atan2 of summed sines and cosines."""
    if len(angles) == 0:
        raise ValueError("circular_mean of empty list")
    ss = float(np.sum(np.sin(angles)))
    cc = float(np.sum(np.cos(angles)))
    if abs(ss) <= 1e-12 and abs(cc) <= 1e-12:
        raise DegenerateMean("antipodal cancellation")
    return float(np.arctan2(ss, cc))


def apply_yaw_correction(yaw, yaw_kin, n_contacts, n_full, now,
                         full_support_since, alpha0, ramp_time):
    """Blend the kinematic heading into the yaw state with a scheduled gain.

    Below full support (n_contacts < n_full) the accumulation timer resets and
    the gain stays at alpha0. At full support the gain ramps linearly from
    alpha0 to 1 over ramp_time, measured from when full support was first
    seen, so prolonged standing pins the heading to the contact geometry.

    Returns (corrected_yaw, full_support_since).
    """
    err = wrap_angle(yaw_kin - yaw)
    if n_contacts < n_full:
        full_support_since = None
        alpha = alpha0
    else:
        if full_support_since is None:
            full_support_since = now
        alpha = alpha0 + (now - full_support_since) * (1.0 - alpha0) / ramp_time
        alpha = min(1.0, max(0.0, alpha))
    return wrap_angle(yaw + alpha * err), full_support_since


__all__ = ["pairwise_yaw", "circular_mean", "apply_yaw_correction",
           "InsufficientContacts", "DegenerateMean"]
