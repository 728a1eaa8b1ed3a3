"""Compare the compiled and numpy kernel backends on realistic operator sizes.

Usage::

    python3 benchmarks/bench_kernels.py [--L 21] [--delta-exp 13] [--steps 100] [--repeat 3]

The operator is first grown by ``--steps`` Trotter steps of the tilted-field
Ising chain, then one further Trotter step is timed on each backend.  Results
are checked for bitwise agreement.
"""

import argparse
import time

import numpy as np

from spd import kernels
from spd.evolution import step_rotations, apply_rotation, trotter_step
from spd.models import build_tilted_ising, local_energy


def grow(L, delta, steps, dt):
    H = build_tilted_ising(L)
    s = local_energy((L + 1) // 2, L)
    for _ in range(steps):
        s = trotter_step(s, H, dt, delta)
    return H, s


def time_step(s, H, dt, delta, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = trotter_step(s, H, dt, delta)
        best = min(best, time.perf_counter() - t0)
    return best, out


def time_merge(s, repeat):
    k = kernels.active()
    best = np.inf
    half = s.rows[::2].copy(), s.coeffs[::2].copy()
    other = s.rows[1::2].copy(), s.coeffs[1::2].copy()
    for _ in range(repeat):
        t0 = time.perf_counter()
        k.merge(half[0], half[1], other[0], other[1], 0.0)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, default=21)
    ap.add_argument("--delta-exp", type=int, default=13)
    ap.add_argument("--steps", type=int, default=100)
    ap.add_argument("--dt", type=float, default=0.02)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    delta = 2.0 ** -args.delta_exp
    names = kernels.available()
    with kernels.use(names[0]):
        H, s = grow(args.L, delta, args.steps, args.dt)
    n_gates = len(step_rotations(H, args.dt))
    print(f"L={args.L} delta=2^-{args.delta_exp} N={len(s)} gates/step={n_gates}")
    print(f"{'backend':<8} {'step [s]':>10} {'ns/term/gate':>13} {'merge [s]':>10}")
    results = {}
    for name in names:
        with kernels.use(name):
            dt_step, out = time_step(s, H, args.dt, delta, args.repeat)
            dt_merge = time_merge(s, args.repeat)
        results[name] = (dt_step, out)
        per = dt_step / (len(s) * n_gates) * 1e9
        print(f"{name:<8} {dt_step:>10.4f} {per:>13.2f} {dt_merge:>10.4f}")
    if len(results) == 2:
        (ta, a), (tb, b) = results.values()
        print(f"speedup {names[0]} over {names[1]}: {tb / ta:.1f}x; bitwise equal: {a == b}")


if __name__ == "__main__":
    main()
