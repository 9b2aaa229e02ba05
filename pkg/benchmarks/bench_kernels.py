"""Throughput comparison of the physics backends.

Rolls the same constant-wrench trajectory through every importable backend
(pure Python, compiled extension) and reports steps per second. The two
implementations are written to agree bit for bit, so the final states are
also compared.

    python3 benchmarks/bench_kernels.py --steps 1000000 --repeats 3
"""

import argparse
import sys
import time

import numpy as np

from palmland.kernels import load_backends

MASS = 0.1
PARAMS = (MASS, 1.0e-4, 1.0e-4, 2.0e-4, 0.05, 12.0, 0.05)
HOVER_THRUST = MASS * 9.81
DT = 0.002


def start_state() -> np.ndarray:
    state = np.zeros(13)
    state[2] = 1.0   # hover height
    state[6] = 1.0   # unit quaternion
    state[12] = 2.0  # yaw spin keeps the attitude update busy
    return state


def rollout(mod, n: int) -> np.ndarray:
    state = start_state()
    ok = mod.physics_run(state, 0.0, 0.0, HOVER_THRUST, 0.0, 0.0, 0.0,
                         *PARAMS, DT, 0.0, n)
    if not ok:
        raise RuntimeError(f"{mod.BACKEND} backend went non-finite")
    return state


def best_time(mod, n: int, repeats: int) -> float:
    rollout(mod, min(n, 1000))  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        rollout(mod, n)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=1_000_000,
                        help="physics steps per timed rollout")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timed repeats; the best one counts")
    args = parser.parse_args(argv)

    backends = load_backends()
    print(f"{args.steps} steps of dt={DT}, best of {args.repeats}:\n")
    rates = {}
    finals = {}
    for name in sorted(backends):
        seconds = best_time(backends[name], args.steps, args.repeats)
        rates[name] = args.steps / seconds
        finals[name] = rollout(backends[name], args.steps)
        print(f"  {name:<10} {rates[name]:>12,.0f} steps/s "
              f"({seconds * 1e3:8.1f} ms)")

    if "compiled" in rates and "python" in rates:
        print(f"\nspeedup: {rates['compiled'] / rates['python']:.1f}x "
              "(compiled over pure python)")
        if np.array_equal(finals["compiled"], finals["python"]):
            print("final states bit-identical across backends")
        else:
            print("ERROR: backends disagree on the final state",
                  file=sys.stderr)
            return 1
    else:
        print("\nonly one backend importable; no comparison")
    return 0


if __name__ == "__main__":
    sys.exit(main())
