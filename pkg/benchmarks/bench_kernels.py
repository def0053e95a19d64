"""Time the Monte Carlo detector kernels with and without numba.

Each backend runs in its own interpreter because the backend is chosen at
import time from ``BIBC_DISABLE_NUMBA``. JIT compilation is excluded by a
warm-up call. Both runs use the same seed, so their statistics are also
compared.

    python3 benchmarks/bench_kernels.py [--trials 500] [--detector full|p2only]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _worker(trials: int, detector: str, mode: str) -> dict:
    from bibc import _kernels
    from bibc.metrics import Scenario, simulate_statistics
    from bibc.scene import Scene, synthesize_channels
    from bibc.waveform import calibrate_powers, make_phase_plan, make_waveforms

    ch = synthesize_channels(Scene(bd_position=(3.0, 3.0)))
    plan = make_phase_plan(1, 2)
    p1, p2 = calibrate_powers(ch, plan, 100.0, 10**0.2)
    scn = Scenario(ch, plan, make_waveforms(16, 16, plan, p1, p2), 3, mode, detector)
    simulate_statistics(scn, 2, seed=99)  # warm-up / JIT
    t0 = time.perf_counter()
    h0, h1 = simulate_statistics(scn, trials, seed=0)
    elapsed = time.perf_counter() - t0
    return {
        "backend": _kernels.backend(),
        "seconds": elapsed,
        "per_statistic_ms": 1e3 * elapsed / (2 * trials),
        "h0": h0.tolist(),
        "h1": h1.tolist(),
    }


def _spawn(disable: bool, args) -> dict:
    env = dict(os.environ, BIBC_DISABLE_NUMBA="1" if disable else "0")
    cmd = [sys.executable, __file__, "--worker", "--trials", str(args.trials),
           "--detector", args.detector, "--mode", args.mode]
    out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--detector", choices=("full", "p2only"), default="full")
    ap.add_argument("--mode", choices=("none", "perfect", "estimated"), default="estimated")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        print(json.dumps(_worker(args.trials, args.detector, args.mode)))
        return 0

    runs = [_spawn(False, args), _spawn(True, args)]
    print(f"{args.trials} trials x 2 hypotheses, detector={args.detector}, projection={args.mode}")
    print(f"{'backend':<8} {'total [s]':>10} {'per stat [ms]':>14}")
    for r in runs:
        print(f"{r['backend']:<8} {r['seconds']:>10.3f} {r['per_statistic_ms']:>14.3f}")
    a, b = runs
    if a["backend"] == b["backend"]:
        print("note: numba unavailable, both runs used the numpy path")
    else:
        print(f"speed-up {b['seconds'] / a['seconds']:.2f}x")
    diff = max(
        np.max(np.abs(np.subtract(a[k], b[k])) / np.maximum(1.0, np.abs(b[k]))) for k in ("h0", "h1")
    )
    print(f"max relative statistic difference {diff:.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
