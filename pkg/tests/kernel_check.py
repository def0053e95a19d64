"""Compare the Monte Carlo kernels against the reference estimators.

Run as a script (optionally with the numba-disable flag set); prints the
backend and the worst relative statistic error over random instances.
"""

import sys

import numpy as np

from bibc import _kernels
from bibc.reader import (
    cyclic_h1_estimate,
    estimate_gab_h0,
    glrt_log,
    p2only_estimate_hdl_h0,
    p2only_glrt_log,
    p2only_h1_estimate,
)

sys.path.insert(0, __file__.rsplit("/", 1)[0])
from conftest import Instance  # noqa: E402


def kernel_stats(inst, eps=1e-8, iters=50):
    info, obs = inst.info, inst.obs
    Q = np.ascontiguousarray(info.Q)
    g = np.ascontiguousarray(info.plan.gamma_d)
    full = _kernels.glrt_full(
        obs.Yp, obs.Y, info.Phi, info.Psi, Q, info.lam, g, info.alpha_p, info.alpha_d, eps, iters
    )
    p2 = _kernels.glrt_p2only(obs.Y, info.Psi, Q, info.lam, g, info.alpha_d, eps, iters)
    return full, p2


def reference_stats(inst, eps=1e-8, iters=50):
    info, obs = inst.info, inst.obs
    h1 = cyclic_h1_estimate(obs, info, eps, iters)
    full = glrt_log(obs, info, estimate_gab_h0(obs, info), h1)
    d1 = p2only_h1_estimate(obs, info, eps, iters)
    p2 = p2only_glrt_log(obs, info, p2only_estimate_hdl_h0(obs, info), d1)
    return (full, h1.iterations), (p2, d1.iterations)


def worst_error(seeds=range(40)):
    worst = 0.0
    for seed in seeds:
        inst = Instance(seed)
        for (k, _), (r, _) in zip(kernel_stats(inst), reference_stats(inst)):
            worst = max(worst, abs(k - r) / max(1.0, abs(r)))
    return worst


if __name__ == "__main__":
    print(_kernels.backend(), float(worst_error()))
