"""Geometry and near-field channel synthesis.

Both panels are uniform linear arrays laid out along the y axis, so the
broadside of each panel points along +x. A single specular reflector is
the horizontal line ``y = reflector_y``; its contribution is computed with
one image source per transmitter.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .numerics import InvalidInputError


class InvalidSceneError(ValueError):
    pass


@dataclass(frozen=True)
class Scene:
    panA_center: tuple[float, float] = (0.0, 0.0)
    panB_center: tuple[float, float] = (6.0, 0.0)
    M: int = 16
    N: int = 16
    d_ant: float = 0.5
    wavelength: float = 0.1
    bd_position: tuple[float, float] = (3.0, 10.0)
    reflector_y: float = -4.0
    g_smc: float = 0.5

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise InvalidSceneError(f"antenna counts must be >= 1, got M={self.M}, N={self.N}")
        if not self.wavelength > 0 or not self.d_ant > 0:
            raise InvalidSceneError("wavelength and d_ant must be positive")

    def with_bd(self, position) -> "Scene":
        return replace(self, bd_position=(float(position[0]), float(position[1])))


@dataclass(frozen=True)
class ChannelSet:
    """Direct and backscatter channels; reverse links are views."""

    G_AB: np.ndarray  # N x M
    g_AC: np.ndarray  # M x 1
    g_CB: np.ndarray  # N x 1

    @property
    def G_BA(self) -> np.ndarray:
        return self.G_AB.T

    @property
    def g_CA(self) -> np.ndarray:
        return self.g_AC

    @property
    def g_BC(self) -> np.ndarray:
        return self.g_CB

    @property
    def cascade(self) -> np.ndarray:
        """Backscatter cascade ``g_CB g_AC^T`` (N x M)."""
        return self.g_CB @ self.g_AC.T

    @property
    def M(self) -> int:
        return self.G_AB.shape[1]

    @property
    def N(self) -> int:
        return self.G_AB.shape[0]


def antenna_positions(scene: Scene, panel: str) -> np.ndarray:
    """Element positions (count x 2) of panel ``"A"`` or ``"B"``, increasing y."""
    if panel == "A":
        center, count = scene.panA_center, scene.M
    elif panel == "B":
        center, count = scene.panB_center, scene.N
    else:
        raise ValueError(f"panel must be 'A' or 'B', got {panel!r}")
    offsets = (np.arange(count) - (count - 1) / 2.0) * scene.d_ant * scene.wavelength
    pos = np.empty((count, 2))
    pos[:, 0] = center[0]
    pos[:, 1] = center[1] + offsets
    return pos


def _path_channel(src: np.ndarray, dst: np.ndarray, scene: Scene) -> np.ndarray:
    """LoS plus specular channel from every ``src`` to every ``dst`` (len(dst) x len(src))."""
    k = 2.0 * np.pi / scene.wavelength
    d = np.linalg.norm(dst[:, None, :] - src[None, :, :], axis=-1)
    image = src.copy()
    image[:, 1] = 2.0 * scene.reflector_y - image[:, 1]
    d_img = np.linalg.norm(dst[:, None, :] - image[None, :, :], axis=-1)
    if np.any(d == 0):
        raise InvalidSceneError("BD coincides with an antenna element")
    return np.exp(-1j * k * d) / d + scene.g_smc * np.exp(-1j * k * d_img) / d_img


def synthesize_channels(scene: Scene) -> ChannelSet:
    """Near-field channels with one specular reflection; gains ``1/d^2`` per path."""
    pa = antenna_positions(scene, "A")
    pb = antenna_positions(scene, "B")
    bd = np.asarray(scene.bd_position, dtype=float)[None, :]
    lowest = min(pa[:, 1].min(), pb[:, 1].min(), bd[0, 1])
    if not scene.reflector_y < lowest:
        raise InvalidSceneError(
            f"reflector_y={scene.reflector_y} must lie strictly below all antennas and the BD (min y={lowest})"
        )
    G_AB = _path_channel(pa, pb, scene)
    g_AC = _path_channel(pa, bd, scene).T
    g_CB = _path_channel(bd, pb, scene)
    return ChannelSet(G_AB=G_AB, g_AC=g_AC, g_CB=g_CB)


def steering_vector(theta: float, M: int, d_ant: float) -> np.ndarray:
    """ULA steering vector (M x 1); entry m is ``exp(j m 2 pi d_ant sin(theta))``."""
    m = np.arange(M)
    return np.exp(1j * m * 2.0 * np.pi * d_ant * np.sin(theta))[:, None]


def mean_path_gains(ch: ChannelSet) -> tuple[float, float, float]:
    """Mean-square gains ``(beta_BA, beta_AC, beta_CB)``."""
    M, N = ch.M, ch.N
    beta_ba = float(np.linalg.norm(ch.G_AB) ** 2 / (M * N))
    beta_ac = float(np.linalg.norm(ch.g_AC) ** 2 / M)
    beta_cb = float(np.linalg.norm(ch.g_CB) ** 2 / N)
    return beta_ba, beta_ac, beta_cb


def normalize_backscatter(ch: ChannelSet) -> ChannelSet:
    """Rescale ``g_AC`` and ``g_CB`` to unit mean-square gain; phases kept."""
    _, beta_ac, beta_cb = mean_path_gains(ch)
    if beta_ac == 0 or beta_cb == 0:
        raise InvalidInputError("cannot normalize a zero backscatter channel")
    return ChannelSet(
        G_AB=ch.G_AB,
        g_AC=ch.g_AC / np.sqrt(beta_ac),
        g_CB=ch.g_CB / np.sqrt(beta_cb),
    )
