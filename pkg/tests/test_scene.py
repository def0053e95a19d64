import numpy as np
import pytest

from bibc.numerics import InvalidInputError
from bibc.scene import (
    ChannelSet,
    InvalidSceneError,
    Scene,
    antenna_positions,
    mean_path_gains,
    normalize_backscatter,
    steering_vector,
    synthesize_channels,
)


def test_antenna_positions_two_elements():
    pos = antenna_positions(Scene(M=2), "A")
    np.testing.assert_allclose(pos, [[0, -0.025], [0, 0.025]], atol=1e-15)


def test_antenna_positions_single_element_at_center():
    np.testing.assert_allclose(antenna_positions(Scene(N=1), "B"), [[6.0, 0.0]])


def test_antenna_positions_sixteen():
    pos = antenna_positions(Scene(), "A")
    assert pos.shape == (16, 2)
    np.testing.assert_allclose(pos[[0, -1], 1], [-0.375, 0.375], atol=1e-14)
    np.testing.assert_allclose(np.diff(pos[:, 1]), 0.05, atol=1e-14)


def test_single_path_phase_wraps():
    sc = Scene(M=1, N=1, g_smc=0.0)
    ch = synthesize_channels(sc)
    assert ch.G_AB[0, 0] == pytest.approx(1 / 6, abs=1e-12)


def _brute_entry(src, dst, sc):
    # LoS plus reflection through an explicitly constructed point on the reflector
    lam = sc.wavelength
    d = np.hypot(*(dst - src))
    h1, h2 = src[1] - sc.reflector_y, dst[1] - sc.reflector_y
    x_r = src[0] + (dst[0] - src[0]) * h1 / (h1 + h2)
    r = np.array([x_r, sc.reflector_y])
    d2 = np.hypot(*(r - src)) + np.hypot(*(dst - r))
    return np.exp(-2j * np.pi * d / lam) / d + sc.g_smc * np.exp(-2j * np.pi * d2 / lam) / d2


def test_channels_match_reflection_point_construction():
    rng = np.random.default_rng(4)
    for _ in range(5):
        sc = Scene(
            M=int(rng.integers(1, 6)),
            N=int(rng.integers(1, 6)),
            panA_center=(rng.uniform(-2, 2), rng.uniform(-1, 1)),
            panB_center=(rng.uniform(4, 8), rng.uniform(-1, 1)),
            bd_position=(rng.uniform(0, 6), rng.uniform(1, 10)),
            reflector_y=-rng.uniform(2, 6),
            g_smc=rng.uniform(0, 1),
        )
        ch = synthesize_channels(sc)
        A, B = antenna_positions(sc, "A"), antenna_positions(sc, "B")
        C = np.asarray(sc.bd_position)
        G = np.array([[_brute_entry(a, b, sc) for a in A] for b in B])
        np.testing.assert_allclose(ch.G_AB, G, rtol=1e-10)
        np.testing.assert_allclose(ch.g_AC[:, 0], [_brute_entry(a, C, sc) for a in A], rtol=1e-10)
        np.testing.assert_allclose(ch.g_CB[:, 0], [_brute_entry(C, b, sc) for b in B], rtol=1e-10)


def test_los_only_modulus_is_inverse_distance():
    sc = Scene(g_smc=0.0, M=4, N=3)
    ch = synthesize_channels(sc)
    A, B = antenna_positions(sc, "A"), antenna_positions(sc, "B")
    d = np.linalg.norm(B[:, None] - A[None], axis=-1)
    np.testing.assert_allclose(np.abs(ch.G_AB), 1 / d, rtol=1e-12)


def test_reciprocity_views():
    ch = synthesize_channels(Scene(M=4, N=3))
    assert np.array_equal(ch.G_BA, ch.G_AB.T)
    assert np.array_equal(ch.g_CA, ch.g_AC)
    assert np.array_equal(ch.g_BC, ch.g_CB)


@pytest.mark.parametrize(
    "M, N, expected",
    [(16, 16, (2.33, 1.25, 0.79, 0.30)), (8, 16, (1.81, 0.59, 0.47))],
)
def test_singular_value_anchor(M, N, expected):
    s = np.linalg.svd(synthesize_channels(Scene(M=M, N=N)).G_AB, compute_uv=False)
    np.testing.assert_allclose(s[: len(expected)], expected, atol=0.05)


def test_reflector_must_be_below_everything():
    with pytest.raises(InvalidSceneError):
        synthesize_channels(Scene(reflector_y=0.0))
    with pytest.raises(InvalidSceneError):
        synthesize_channels(Scene(bd_position=(3.0, -5.0)))
    with pytest.raises(InvalidSceneError):
        Scene(M=0)


def test_steering_vector_examples():
    np.testing.assert_allclose(steering_vector(0.0, 5, 0.5)[:, 0], np.ones(5))
    np.testing.assert_allclose(steering_vector(np.pi / 6, 2, 0.5)[:, 0], [1, 1j], atol=1e-15)
    g = steering_vector(0.7, 16, 0.5)
    assert g.shape == (16, 1)
    assert np.linalg.norm(g) ** 2 == pytest.approx(16)


def test_mean_path_gains_fixture():
    ch = ChannelSet(G_AB=np.eye(2), g_AC=np.ones((2, 1)), g_CB=2 * np.ones((2, 1)))
    assert mean_path_gains(ch)[0] == pytest.approx(0.5)
    ch = ChannelSet(G_AB=np.ones((3, 16)), g_AC=np.exp(1j * np.arange(16))[:, None], g_CB=2 * np.ones((3, 1)))
    assert mean_path_gains(ch) == pytest.approx((1.0, 1.0, 4.0))


def test_mean_path_gains_recomputed():
    ch = synthesize_channels(Scene())
    b = mean_path_gains(ch)
    direct = (
        sum(abs(x) ** 2 for x in ch.G_AB.ravel()) / 256,
        sum(abs(x) ** 2 for x in ch.g_AC.ravel()) / 16,
        sum(abs(x) ** 2 for x in ch.g_CB.ravel()) / 16,
    )
    np.testing.assert_allclose(b, direct, rtol=1e-12)


def test_normalize_backscatter():
    ch = ChannelSet(G_AB=np.eye(2), g_AC=np.ones((2, 1)), g_CB=2 * np.exp(1j * np.arange(2))[:, None])
    out = normalize_backscatter(ch)
    np.testing.assert_allclose(out.g_CB, ch.g_CB / 2)
    assert out.G_AB is ch.G_AB
    again = normalize_backscatter(out)
    np.testing.assert_allclose(again.g_CB, out.g_CB)
    np.testing.assert_allclose(again.g_AC, out.g_AC)
    table = normalize_backscatter(synthesize_channels(Scene()))
    _, b_ac, b_cb = mean_path_gains(table)
    assert abs(b_ac - 1) < 1e-12 and abs(b_cb - 1) < 1e-12
    with pytest.raises(InvalidInputError):
        normalize_backscatter(ChannelSet(G_AB=np.eye(2), g_AC=np.zeros((2, 1)), g_CB=np.ones((2, 1))))


def test_far_bd_channel_approaches_los():
    base = Scene()
    dist = []
    for y in (23.0, 26.0, 30.0):
        full = synthesize_channels(base.with_bd((3.0, y))).g_CB[:, 0]
        los = synthesize_channels(Scene(g_smc=0.0, bd_position=(3.0, y))).g_CB[:, 0]
        full, los = full / np.linalg.norm(full), los / np.linalg.norm(los)
        # distance between the spanned lines, blind to a common phase
        dist.append(np.sqrt(1 - abs(np.vdot(full, los)) ** 2))
    assert dist[0] > dist[1] > dist[2]
