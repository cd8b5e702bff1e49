"""Time the unit-chain kernel on both backends.

    python benchmarks/bench_kernels.py [--particles 100] [--units 200] [--repeat 50]

One call integrates a whole swarm, which is what a single PSO iteration costs.
"""

import argparse
import time

import numpy as np

from beamswarm import _kernels
from beamswarm.beam import BeamGeometry


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--particles", type=int, default=100)
    ap.add_argument("--units", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()

    beam = BeamGeometry.uniform(0.18, 1.15e-3, 45.36e9, 0.025, args.units)
    flex = beam.flexibility()
    rng = np.random.default_rng(0)
    guesses = rng.uniform([-0.18, -0.18, -np.pi], [0.18, 0.18, np.pi], size=(args.particles, 3))

    def call(backend):
        return lambda: _kernels.integrate_chain(flex, 6.958, -5 * np.pi / 6, 0.0, beam.unit_length, guesses, backend=backend)

    backends = ["numpy"]
    if _kernels.HAS_NUMBA:
        call(None)()  # compile
        backends.insert(0, "numba")
    print(f"{'backend':<8} {'best [ms]':>10} {'per particle [us]':>18}")
    results = {}
    for name in backends:
        t = best_of(call(None if name == "numba" else "numpy"), args.repeat)
        results[name] = t
        print(f"{name:<8} {t * 1e3:>10.3f} {t * 1e6 / args.particles:>18.2f}")
    if len(results) == 2:
        print(f"speed-up: {results['numpy'] / results['numba']:.1f}x")


if __name__ == "__main__":
    main()
