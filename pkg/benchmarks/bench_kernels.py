#!/usr/bin/env python3
"""Time the ODE kernel with numba and with the pure-Python fallback.

Each backend runs in its own interpreter so the PWMELNIKOV_NO_NUMBA flag
takes effect before the kernels are imported.  Compile time is excluded:
one warm-up revolution is run before timing.
"""
import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
from pwmelnikov import _kernels as K, simulate as sim
from pwmelnikov.roots import construct_max_zeros
spec = construct_max_zeros(2, 1, [0.6, 1.0, 1.5]).spec
reps, samples = int(sys.argv[1]), int(sys.argv[2])
sim.displacement_map(spec, 1e-3, 1.0)
t0 = time.perf_counter()
for k in range(reps):
    sim.displacement_map(spec, 1e-3, 0.5 + k / reps)
per_rev = (time.perf_counter() - t0) / reps
t0 = time.perf_counter()
cycles = sim.find_limit_cycles(spec, 1e-3, (0.3, 2.0), samples)
scan = time.perf_counter() - t0
print(json.dumps({"numba": K.HAVE_NUMBA, "per_revolution": per_rev, "scan": scan, "cycles": len(cycles)}))
"""


def run(no_numba, reps, samples):
    env = dict(os.environ)
    if no_numba:
        env["PWMELNIKOV_NO_NUMBA"] = "1"
    else:
        env.pop("PWMELNIKOV_NO_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", WORKER, str(reps), str(samples)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--reps", type=int, default=20, help="revolutions timed per backend")
    p.add_argument("--samples", type=int, default=40, help="grid size of the cycle scan")
    args = p.parse_args()
    fast = run(False, args.reps, args.samples)
    slow = run(True, max(2, args.reps // 10), args.samples)
    print(f"{'backend':<10}{'revolution [ms]':>18}{'cycle scan [s]':>17}{'cycles':>8}")
    for name, r in (("numba", fast), ("python", slow)):
        print(f"{name:<10}{1e3 * r['per_revolution']:>18.2f}{r['scan']:>17.2f}{r['cycles']:>8}")
    if fast["numba"]:
        print(f"speedup: {slow['per_revolution'] / fast['per_revolution']:.0f}x per revolution, "
              f"{slow['scan'] / fast['scan']:.0f}x per scan")
    else:
        print("numba unavailable; both rows ran the fallback")


if __name__ == "__main__":
    main()
