"""Time the hot kernels under numba and under the numpy fallback.

    python benchmarks/bench_kernels.py [--paths 20000] [--repeat 3]

Each backend runs in its own interpreter because the backend is fixed at
import time by LEVYREC_DISABLE_NUMBA.
"""
import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from levyrec import backend_name
from levyrec.special import j0, one_minus_j0
from levyrec.quadrature import wynn_epsilon
from levyrec.rng import stream_keys, uniform_array, _uniform
from levyrec.families import stable, annulus
from levyrec.montecarlo import SimConfig, simulate_levy_paths

paths, repeat = int(sys.argv[1]), int(sys.argv[2])

def best(fn):
    fn()  # warm-up, includes compilation
    times = []
    for _ in range(repeat):
        t = time.perf_counter(); fn(); times.append(time.perf_counter() - t)
    return min(times)

x = np.linspace(0.0, 200.0, 1_000_000)
partial = np.cumsum((-1.0) ** np.arange(60) / (np.arange(60) + 1.0))
keys = stream_keys(1, np.arange(1_000_000), 0)
ctr = np.arange(1_000_000, dtype=np.uint64)
cfg = SimConfig(horizon=1000, small_jump_cutoff=0.5, path_count=paths, seed=1, probe_radius=3,
                probe_times=tuple(np.geomspace(1, 1000, 64)))
cauchy, ann = stable(1.0), annulus(c=1.0)
res = {
    "backend": backend_name(),
    "j0 (1e6 points)": best(lambda: j0(x)),
    "1-j0 (1e6 points)": best(lambda: one_minus_j0(x)),
    "wynn epsilon (60 terms) x1000": best(lambda: [wynn_epsilon(partial) for _ in range(1000)]),
    "uniforms (1e6)": best(lambda: uniform_array(keys, ctr)),
    f"cauchy paths ({paths})": best(lambda: simulate_levy_paths(cauchy.triplet, cfg, stable_alpha=1.0)),
    f"annulus+BM paths ({paths})": best(lambda: simulate_levy_paths(ann.triplet, cfg)),
}
print(json.dumps(res))
"""


def run(disable, paths, repeat):
    env = dict(os.environ, LEVYREC_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", WORKER, str(paths), str(repeat)], env=env, check=True,
                         capture_output=True, text=True).stdout
    return json.loads(out.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    t0 = time.perf_counter()
    fast, slow = run(False, args.paths, args.repeat), run(True, args.paths, args.repeat)
    print(f"{'kernel':36s} {fast['backend']:>10s} {slow['backend']:>10s} {'speedup':>8s}")
    for k in fast:
        if k == "backend":
            continue
        print(f"{k:36s} {fast[k]:10.4f} {slow[k]:10.4f} {slow[k] / fast[k]:8.1f}x")
    print(f"total wall time {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
