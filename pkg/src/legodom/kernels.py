"""Hot numeric kernels: leg kinematics, analytic IK, and the per-leg cubature filter step.

Every function here is written in a numba-compatible subset of numpy (explicit
loops, no fancy indexing) and gets JIT-compiled at import unless the
``LEGODOM_BACKEND`` environment variable selects the pure-numpy path:

  LEGODOM_BACKEND=auto   (default) use numba when importable, else plain python
  LEGODOM_BACKEND=numba  require numba, raise if missing
  LEGODOM_BACKEND=numpy  never JIT; run the same source as plain python

The two paths execute the identical scalar operation sequence; results agree
to a few ulps (compiled libm trig may differ from numpy's in the last bit),
pinned by `tests/test_backends.py`.
Linear algebra inside the filter step is hand-rolled (Cholesky, triangular
solves, 3x3 Cramer) so no exception can escape a compiled frame and the
operation order is fixed.
"""

import os

import numpy as np

_BACKEND = os.environ.get("LEGODOM_BACKEND", "auto").lower()
if _BACKEND not in ("auto", "numba", "numpy"):
    raise ValueError("LEGODOM_BACKEND must be one of auto/numba/numpy, got %r" % _BACKEND)

NUMBA_ENABLED = False
if _BACKEND != "numpy":
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:
        if _BACKEND == "numba":
            raise

if NUMBA_ENABLED:
    def _jit(fn):
        return _njit(cache=True)(fn)
else:
    def _jit(fn):
        return fn

# tolerance inside the hip-roll radical; keeps the square root real when the
# target grazes the branch boundary
EPS_RADICAL = 1e-12
# trig arguments clamped up to this overshoot are treated as rounding noise
CLAMP_TOL = 1e-9

TWO_PI = 2.0 * np.pi

# status bits returned by ckf_leg_step
CKF_CHOL_RESET = 1
CKF_RATE_FALLBACK = 2
CKF_CLAMPED = 4
CKF_UPDATE_SKIPPED = 8


@_jit
def wrap_pi(a):
    """Wrap an angle to (-pi, pi]."""
    w = a % TWO_PI
    if w > np.pi:
        w -= TWO_PI
    return w


@_jit
def fk_position(q, lh, lt, lc, rw, side):
    """Hip-to-end-effector vector in the body frame for one 3-DoF leg.

    The wheel radius enters only the lateral row's reach and as a constant
    vertical offset; the sagittal row never sees it. That asymmetry is part
    of the kinematic convention this estimator is built around and is kept
    verbatim.
    """
    c1 = np.cos(q[0])
    s1 = np.sin(q[0])
    c2 = np.cos(q[1])
    s2 = np.sin(q[1])
    c23 = np.cos(q[1] + q[2])
    s23 = np.sin(q[1] + q[2])
    out = np.empty(3)
    out[0] = -(lc * s23 + lt * s2)
    out[1] = side * lh * c1 + (lc + rw) * s1 * c23 + lt * c2 * s1
    out[2] = side * lh * s1 - lc * c1 * c23 - lt * c1 * c2 + rw
    return out


@_jit
def leg_jacobian(q, lh, lt, lc, rw, side):
    """3x3 geometric Jacobian of fk_position with respect to the joint angles."""
    c1 = np.cos(q[0])
    s1 = np.sin(q[0])
    c2 = np.cos(q[1])
    s2 = np.sin(q[1])
    c23 = np.cos(q[1] + q[2])
    s23 = np.sin(q[1] + q[2])
    J = np.empty((3, 3))
    J[0, 0] = 0.0
    J[0, 1] = -(lc * c23 + lt * c2)
    J[0, 2] = -(lc * c23)
    J[1, 0] = (lc + rw) * c1 * c23 + lt * c1 * c2 - side * lh * s1
    J[1, 1] = -(lc + rw) * s1 * s23 - lt * s1 * s2
    J[1, 2] = -(lc + rw) * s1 * s23
    J[2, 0] = lc * s1 * c23 + lt * c2 * s1 + side * lh * c1
    J[2, 1] = lc * c1 * s23 + lt * c1 * s2
    J[2, 2] = lc * c1 * s23
    return J


@_jit
def fk_velocity(q, dq, lh, lt, lc, rw, side):
    """Hip-to-end-effector velocity; identical to leg_jacobian(q) @ dq."""
    J = leg_jacobian(q, lh, lt, lc, rw, side)
    out = np.zeros(3)
    for i in range(3):
        acc = 0.0
        for j in range(3):
            acc += J[i, j] * dq[j]
        out[i] = acc
    return out


@_jit
def jacobian_sigma_min(J):
    """Smallest singular value of a 3x3 Jacobian."""
    s = np.linalg.svd(J)[1]
    return s[2]


@_jit
def foot_force(q, tau, lh, lt, lc, rw, side, sigma_min):
    """End-effector force in the body frame from joint torques.

    Solves (J J^T) f = J tau. Returns (f, ok); ok is False when the smallest
    singular value of J is below sigma_min, in which case f is zeros and the
    caller must treat the leg as ungateable this cycle.
    """
    J = leg_jacobian(q, lh, lt, lc, rw, side)
    if jacobian_sigma_min(J) < sigma_min:
        return np.zeros(3), False
    M = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            acc = 0.0
            for k in range(3):
                acc += J[i, k] * J[j, k]
            M[i, j] = acc
    b = np.empty(3)
    for i in range(3):
        acc = 0.0
        for k in range(3):
            acc += J[i, k] * tau[k]
        b[i] = acc
    f = _solve3(M, b)
    return f, True


@_jit
def _solve3(A, b):
    """Cramer solve of a 3x3 system; caller guarantees A is well conditioned."""
    d = (A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
         - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
         + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0]))
    x = np.empty(3)
    x[0] = (b[0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
            - A[0, 1] * (b[1] * A[2, 2] - A[1, 2] * b[2])
            + A[0, 2] * (b[1] * A[2, 1] - A[1, 1] * b[2])) / d
    x[1] = (A[0, 0] * (b[1] * A[2, 2] - A[1, 2] * b[2])
            - b[0] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
            + A[0, 2] * (A[1, 0] * b[2] - b[1] * A[2, 0])) / d
    x[2] = (A[0, 0] * (A[1, 1] * b[2] - b[1] * A[2, 1])
            - A[0, 1] * (A[1, 0] * b[2] - b[1] * A[2, 0])
            + b[0] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0])) / d
    return x


@_jit
def _det3(A):
    return (A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
            - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
            + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0]))


@_jit
def ik_joints(px, py, pz, lh, lt, l2, side):
    """Analytic inverse kinematics for the hip-to-end-effector position.

    Returns (t1, t2, t3, viol) where viol is the largest amount by which any
    inverse-trig argument had to be clamped into its domain; viol <= CLAMP_TOL
    means the target is inside the reachable workspace for this branch.

    The planar sub-solver measures the sagittal offset with the opposite sign
    from fk_position's first row (its Jacobian is the row-negated forward one),
    so px is negated on entry; that makes ik_joints(fk_position(q)) == q on
    the branch with the knee folded back and the foot on its own lateral side.
    """
    x = -px
    y = py
    z = pz
    viol = 0.0

    rho2 = y * y + z * z
    rad = EPS_RADICAL + 4.0 * lh * lh * z * z - 4.0 * rho2 * (lh * lh - y * y)
    if rad < 0.0:
        rad = 0.0
    arg1 = (2.0 * lh * z + np.sqrt(rad)) / (2.0 * rho2)
    if arg1 > 1.0:
        if arg1 - 1.0 > viol:
            viol = arg1 - 1.0
        arg1 = 1.0
    elif arg1 < -1.0:
        if -1.0 - arg1 > viol:
            viol = -1.0 - arg1
        arg1 = -1.0
    t1 = side * np.arcsin(arg1)

    zb = z - side * lh * np.sin(t1)
    yb = y - side * lh * np.cos(t1)
    rb = np.sqrt(yb * yb + zb * zb)
    r2 = rb * rb + x * x
    r = np.sqrt(r2)

    arg3 = (lt * lt + l2 * l2 - r2) / (2.0 * lt * l2)
    if arg3 > 1.0:
        if arg3 - 1.0 > viol:
            viol = arg3 - 1.0
        arg3 = 1.0
    elif arg3 < -1.0:
        if -1.0 - arg3 > viol:
            viol = -1.0 - arg3
        arg3 = -1.0
    t3 = -np.pi + np.arccos(arg3)

    arg2 = (r2 + lt * lt - l2 * l2) / (2.0 * r * lt)
    if arg2 > 1.0:
        if arg2 - 1.0 > viol:
            viol = arg2 - 1.0
        arg2 = 1.0
    elif arg2 < -1.0:
        if -1.0 - arg2 > viol:
            viol = -1.0 - arg2
        arg2 = -1.0
    t2 = np.arctan2(x, rb) + np.arccos(arg2)

    return t1, t2, t3, viol


@_jit
def ik_jacobian(t1, t2, t3, lh, lt, l2, side):
    """Jacobian of the planar IK convention (sagittal row negated vs leg_jacobian)."""
    c1 = np.cos(t1)
    s1 = np.sin(t1)
    c2 = np.cos(t2)
    s2 = np.sin(t2)
    c23 = np.cos(t2 + t3)
    s23 = np.sin(t2 + t3)
    J = np.empty((3, 3))
    J[0, 0] = 0.0
    J[0, 1] = l2 * c23 + lt * c2
    J[0, 2] = l2 * c23
    J[1, 0] = -side * lh * s1 + l2 * c1 * c23 + lt * c2 * c1
    J[1, 1] = -l2 * s1 * s23 - lt * s1 * s2
    J[1, 2] = -l2 * s1 * s23
    J[2, 0] = side * lh * c1 + l2 * s1 * c23 + lt * c2 * s1
    J[2, 1] = l2 * c1 * s23 + lt * c1 * s2
    J[2, 2] = l2 * c1 * s23
    return J


@_jit
def ik_rates(t1, t2, t3, vx, vy, vz, lh, lt, l2, side, det_eps):
    """Joint rates implied by a Cartesian velocity through the IK Jacobian.

    Returns (d1, d2, d3, ok). ok False means the Jacobian determinant fell
    below det_eps; rates are zeros then (caller decides the fallback policy).
    The sagittal component is negated to match ik_joints' convention.
    """
    J = ik_jacobian(t1, t2, t3, lh, lt, l2, side)
    d = _det3(J)
    if np.abs(d) < det_eps:
        return 0.0, 0.0, 0.0, False
    b = np.empty(3)
    b[0] = -vx
    b[1] = vy
    b[2] = vz
    th = _solve3(J, b)
    return th[0], th[1], th[2], True


@_jit
def chol_lower(A):
    """Lower Cholesky factor with an explicit success flag (no exceptions)."""
    n = A.shape[0]
    L = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            acc = A[i, j]
            for k in range(j):
                acc -= L[i, k] * L[j, k]
            if i == j:
                if acc <= 0.0:
                    return L, False
                L[i, i] = np.sqrt(acc)
            else:
                L[i, j] = acc / L[j, j]
    return L, True


@_jit
def _ik_h(xs, lh, lt, l2, side, det_eps):
    """Measurement map for one filter state: (position, velocity) -> (angles, rates).

    Trig arguments are clamped hard so sigma points slightly outside the
    workspace still produce a finite measurement; flags report how bad it was.
    """
    t1, t2, t3, viol = ik_joints(xs[0], xs[1], xs[2], lh, lt, l2, side)
    d1, d2, d3, ok = ik_rates(t1, t2, t3, xs[3], xs[4], xs[5], lh, lt, l2, side, det_eps)
    z = np.empty(6)
    z[0] = t1
    z[1] = t2
    z[2] = t3
    z[3] = d1
    z[4] = d2
    z[5] = d3
    return z, viol, (not ok)


@_jit
def ckf_leg_step(x, P, dt, z, Q, R, lh, lt, l2, side, det_eps, r_inflate,
                 p0_pos, p0_vel):
    """One constant-velocity cubature filter step for a single leg.

    x: (6,) position+velocity state, P: (6,6) covariance, dt: already
    truncated time step, z: (6,) measured joint angles and rates, Q: process
    covariance for this step, R: measurement covariance.

    Equal-weight spherical-radial points (2n, weight 1/2n) are drawn from the
    prior, pushed through the constant-velocity map, redrawn from the
    prediction and pushed through the analytic IK measurement. A failed
    Cholesky resets the covariance to the diagonal prior (p0_pos, p0_vel)
    instead of aborting; a near-singular IK Jacobian zeroes the rate rows of
    that sigma point and inflates the rate block of R by r_inflate. The
    posterior mean's lateral coordinate is snapped to the leg's side.

    Returns (x_post, P_post, status bitmask).
    """
    n = 6
    m2 = 12
    sq = np.sqrt(6.0)
    status = 0

    S, ok = chol_lower(P)
    if not ok:
        P = np.zeros((n, n))
        for i in range(3):
            P[i, i] = p0_pos
            P[i + 3, i + 3] = p0_vel
        S, ok = chol_lower(P)
        status |= CKF_CHOL_RESET

    # prior points through the process map
    XP = np.empty((m2, n))
    for j in range(n):
        for i in range(n):
            XP[j, i] = x[i] + sq * S[i, j]
            XP[j + n, i] = x[i] - sq * S[i, j]
    for m in range(m2):
        for i in range(3):
            XP[m, i] = XP[m, i] + dt * XP[m, i + 3]

    xbar = np.zeros(n)
    for m in range(m2):
        for i in range(n):
            xbar[i] += XP[m, i]
    for i in range(n):
        xbar[i] /= m2

    Pm = np.zeros((n, n))
    for m in range(m2):
        for i in range(n):
            di = XP[m, i] - xbar[i]
            for j in range(n):
                Pm[i, j] += di * (XP[m, j] - xbar[j])
    for i in range(n):
        for j in range(n):
            Pm[i, j] = Pm[i, j] / m2 + Q[i, j]

    S2, ok = chol_lower(Pm)
    if not ok:
        Pm = np.zeros((n, n))
        for i in range(3):
            Pm[i, i] = p0_pos
            Pm[i + 3, i + 3] = p0_vel
        S2, ok = chol_lower(Pm)
        status |= CKF_CHOL_RESET

    # predicted points through the measurement map
    X2 = np.empty((m2, n))
    for j in range(n):
        for i in range(n):
            X2[j, i] = xbar[i] + sq * S2[i, j]
            X2[j + n, i] = xbar[i] - sq * S2[i, j]

    ZP = np.empty((m2, n))
    rate_fallback = False
    for m in range(m2):
        zm, viol, sing = _ik_h(X2[m], lh, lt, l2, side, det_eps)
        if viol > CLAMP_TOL:
            status |= CKF_CLAMPED
        if sing:
            rate_fallback = True
        for i in range(n):
            ZP[m, i] = zm[i]

    Ru = R.copy()
    if rate_fallback:
        status |= CKF_RATE_FALLBACK
        for i in range(3, 6):
            Ru[i, i] = Ru[i, i] * r_inflate

    zbar = np.zeros(n)
    for m in range(m2):
        for i in range(n):
            zbar[i] += ZP[m, i]
    for i in range(n):
        zbar[i] /= m2

    Pzz = np.zeros((n, n))
    Pxz = np.zeros((n, n))
    for m in range(m2):
        for i in range(n):
            dzi = ZP[m, i] - zbar[i]
            dxi = X2[m, i] - xbar[i]
            for j in range(n):
                dzj = ZP[m, j] - zbar[j]
                Pzz[i, j] += dzi * dzj
                Pxz[i, j] += dxi * dzj
    for i in range(n):
        for j in range(n):
            Pzz[i, j] = Pzz[i, j] / m2 + Ru[i, j]
            Pxz[i, j] /= m2

    Lz, ok = chol_lower(Pzz)
    if not ok:
        # innovation covariance unusable; keep the prediction
        status |= CKF_UPDATE_SKIPPED
        xo = xbar.copy()
        xo[1] = side * np.abs(xo[1])
        return xo, Pm, status

    # K^T = Pzz^{-1} Pxz^T via two triangular solves
    KT = np.empty((n, n))
    for col in range(n):
        yv = np.empty(n)
        for i in range(n):
            acc = Pxz[col, i]
            for k in range(i):
                acc -= Lz[i, k] * yv[k]
            yv[i] = acc / Lz[i, i]
        for i in range(n - 1, -1, -1):
            acc = yv[i]
            for k in range(i + 1, n):
                acc -= Lz[k, i] * KT[k, col]
            KT[i, col] = acc / Lz[i, i]

    xo = np.empty(n)
    for i in range(n):
        acc = xbar[i]
        for j in range(n):
            acc += KT[j, i] * (z[j] - zbar[j])
        xo[i] = acc

    # P_post = Pm - K Pzz K^T
    KP = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc += KT[k, i] * Pzz[k, j]
            KP[i, j] = acc
    Po = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            acc = Pm[i, j]
            for k in range(n):
                acc -= KP[i, k] * KT[k, j]
            Po[i, j] = acc
    for i in range(n):
        for j in range(i + 1, n):
            v = 0.5 * (Po[i, j] + Po[j, i])
            Po[i, j] = v
            Po[j, i] = v

    xo[1] = side * np.abs(xo[1])
    return xo, Po, status


def load_kernels(backend):
    """Load an independent copy of this module pinned to the given backend.

    Used by the benchmark and the backend-parity tests to hold the numba and
    numpy variants side by side in one process.
    """
    import importlib.util

    saved = os.environ.get("LEGODOM_BACKEND")
    os.environ["LEGODOM_BACKEND"] = backend
    try:
        spec = importlib.util.spec_from_file_location(
            "legodom._kernels_" + backend, os.path.abspath(__file__))
        mod = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(mod)
    finally:
        if saved is None:
            del os.environ["LEGODOM_BACKEND"]
        else:
            os.environ["LEGODOM_BACKEND"] = saved
    return mod
