"""Compare the numba and pure-numpy backends on the hot kernels.

Each backend runs in its own interpreter because the backend is fixed at import:

    python3 benchmarks/bench_kernels.py [--samples 1000000] [--repeat 3]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from prescribed_area import BACKEND
from prescribed_area import _kernels as K
from prescribed_area.field import FieldConfig, certify_V1

m, repeat = int(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
s = rng.uniform(-0.9, 0.9, m)
rho = rng.uniform(0.0, 0.5, m)
ry = rng.uniform(0.01, 1.0, m)
out = {"backend": BACKEND}

def timed(fn):
    fn()  # warm-up, includes compilation for numba
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best

out["div_coeffs"] = timed(lambda: K.div_coeffs(-1, 3, 1.2, 0.5, s, rho, ry))
out["div_coeffs_sphere"] = timed(lambda: K.div_coeffs(1, 3, 0.6, 0.3, 0.3 * s, 0.3 * rho, 0.5 * ry))
out["w_coeffs"] = timed(lambda: K.w_coeffs(-1, 3, 1.2, 0.5, s, rho, ry))
out["area_A_k5"] = timed(lambda: K.area_A(1, 5, ry))
cfg = FieldConfig.create(-1, 4, 3, 1.2, 0.5)
out["certify_V1"] = timed(lambda: certify_V1(cfg, samples=min(m, 200_000), seed=1))
print(json.dumps(out))
"""


def run(backend: str, samples: int, repeat: int) -> dict:
    env = dict(os.environ, PRESCRIBED_AREA_BACKEND=backend)
    res = subprocess.run([sys.executable, "-c", WORKER, str(samples), str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    results = [run(b, args.samples, args.repeat) for b in ("numba", "numpy")]
    keys = [k for k in results[0] if k != "backend"]
    print(f"{'kernel':<18}" + "".join(f"{r['backend']:>12}" for r in results) + f"{'speedup':>10}")
    for k in keys:
        a, b = results[0][k], results[1][k]
        print(f"{k:<18}{a:>11.3f}s{b:>11.3f}s{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
