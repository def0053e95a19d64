import numpy as np
import pytest

from bibc.emitter import build_projector
from bibc.reader import ReaderSideInfo
from bibc.scene import ChannelSet
from bibc.waveform import Observation, complex_normal, make_phase_plan, make_waveforms


def crandn(rng, *shape):
    return complex_normal(rng, shape)


class Instance:
    """Small random system: channels, waveforms, projector, observations."""

    def __init__(self, seed, M=None, N=None, K=None, noise=1.0, hypothesis=1, J_p=None, J_d=None):
        rng = np.random.default_rng(seed)
        self.M = M or int(rng.integers(2, 7))
        self.N = N or int(rng.integers(2, 7))
        self.K = int(rng.integers(0, self.M)) if K is None else K
        J_p = J_p or int(rng.integers(1, 3))
        J_d = J_d or 2 * int(rng.integers(1, 3))
        tau_p = self.N + int(rng.integers(0, 3))
        tau_d = self.M + int(rng.integers(0, 3))
        self.plan = make_phase_plan(J_p, J_d, tau_p, tau_d)
        self.ch = ChannelSet(
            G_AB=crandn(rng, self.N, self.M),
            g_AC=crandn(rng, self.M, 1),
            g_CB=crandn(rng, self.N, 1),
        )
        self.wf = make_waveforms(self.M, self.N, self.plan, float(rng.uniform(0.5, 2)), float(rng.uniform(0.5, 2)))
        G_noisy = self.ch.G_AB + 0.3 * crandn(rng, self.N, self.M)
        self.projector = build_projector(G_noisy, self.K)
        self.info = ReaderSideInfo.from_parts(self.wf, self.projector, self.plan)
        Ps = self.projector.P_s
        Yp = (self.ch.G_BA @ self.wf.Phi)[None] + noise * crandn(rng, J_p, self.M, tau_p)
        tx = Ps @ self.wf.Psi
        Y = np.broadcast_to(self.ch.G_AB @ tx, (J_d, self.N, tau_d)).copy()
        if hypothesis:
            Y += self.plan.gamma_d[:, None, None] * (self.ch.cascade @ tx)[None]
        Y += noise * crandn(rng, J_d, self.N, tau_d)
        self.obs = Observation(Yp=Yp, Y=Y)
        self.rng = rng

    @property
    def H_BL(self):
        return self.ch.cascade @ self.projector.P_s


@pytest.fixture
def instance_factory():
    return Instance
