"""Benchmark the compiled kernels against the pure-numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--n 20000]

Loads both backend variants side by side (independent of LEGODOM_BACKEND)
and times the hot kernels plus a full estimator replay per backend.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from legodom.kernels import load_kernels  # noqa: E402


def time_fn(fn, args_list, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n):
    nb = load_kernels("numba")
    pure = load_kernels("numpy")
    if not nb.NUMBA_ENABLED:
        print("numba unavailable; nothing to compare")
        return

    rng = np.random.default_rng(0)
    lh, lt, lc, rw, side = 0.0955, 0.213, 0.213, 0.0, 1.0
    l2 = lc + rw
    qs = [np.array([rng.uniform(-0.18, 0.18), rng.uniform(-0.1, 1.0),
                    rng.uniform(-1.9, -0.9)]) for _ in range(n)]
    taus = [rng.normal(scale=20, size=3) for _ in range(n)]

    cases = {}
    cases["fk_position"] = [(q, lh, lt, lc, rw, side) for q in qs]
    cases["leg_jacobian"] = [(q, lh, lt, lc, rw, side) for q in qs]
    cases["foot_force"] = [(q, tau, lh, lt, lc, rw, side, 1e-6)
                           for q, tau in zip(qs, taus)]
    cases["ik_joints"] = []
    for q in qs:
        p = nb.fk_position(q, lh, lt, lc, rw, side)
        cases["ik_joints"].append((p[0], p[1], p[2], lh, lt, l2, side))

    ckf_n = max(200, n // 10)
    ckf_args = []
    Q = np.diag([1e-8] * 3 + [1e-4] * 3)
    R = np.diag([2.5e-7] * 3 + [0.3] * 3)
    for q in qs[:ckf_n]:
        x = np.zeros(6)
        x[:3] = nb.fk_position(q, lh, lt, lc, rw, side)
        P = np.diag([1e-5] * 3 + [1e-2] * 3)
        z = np.concatenate([q, rng.normal(scale=0.3, size=3)])
        ckf_args.append((x, P, 0.002, z, Q, R, lh, lt, l2, side, 1e-9, 1e6,
                         1e-4, 1e-1))
    cases["ckf_leg_step"] = ckf_args

    print(f"{'kernel':<14} {'calls':>7} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, args_list in cases.items():
        getattr(nb, name)(*args_list[0])  # warm the JIT outside the timer
        t_nb = time_fn(getattr(nb, name), args_list)
        t_np = time_fn(getattr(pure, name), args_list)
        print(f"{name:<14} {len(args_list):>7} {t_nb:>9.4f}s {t_np:>9.4f}s "
              f"{t_np / t_nb:>7.1f}x")


def bench_replay():
    code = (
        "import time, numpy as np\n"
        "from legodom import EstimatorConfig, Estimator, preset_plan, generate_gait\n"
        "import legodom.kernels as K\n"
        "plan = preset_plan('walk_line'); plan.waypoints=[(0.0,0.0),(3.0,0.0)]\n"
        "res = generate_gait(plan)\n"
        "cfg = EstimatorConfig(initial_position=[0,0,plan.body_height], ikvel_enabled=True)\n"
        "est = Estimator(cfg)\n"
        "est.step(res.frames[0])\n"
        "t0 = time.perf_counter()\n"
        "rest = res.frames[1:]\n"
        "for fr in rest: est.step(fr)\n"
        "dt = time.perf_counter()-t0\n"
        "print('%s: %d frames in %.2fs (%.0f us/frame)' % "
        "('numba' if K.NUMBA_ENABLED else 'numpy', len(rest), dt, 1e6*dt/len(rest)))\n"
    )
    print("\nfull replay, per-leg filter enabled:")
    for backend in ("numba", "numpy"):
        env = dict(os.environ, LEGODOM_BACKEND=backend)
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True)
        sys.stdout.write(out.stdout or out.stderr)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000, help="calls per kernel")
    ap.add_argument("--skip-replay", action="store_true")
    opts = ap.parse_args()
    bench_kernels(opts.n)
    if not opts.skip_replay:
        bench_replay()
