"""
Constellations, channel realizations and the augmented index-modulation
symbol set.

Complex quantities are held as ``complex128`` numpy arrays (an explicit
real/imaginary pair per entry). All containers are frozen and their arrays
are marked read-only, so they can be shared between threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ENERGY_TOL = 1e-12

CONSTELLATION_ALIASES = {
    "bpsk": ("psk", 2),
    "qpsk": ("psk", 4),
    "qam4": ("qam", 4),
    "qam16": ("qam", 16),
    "qam64": ("qam", 64),
}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Constellation:
    """Ordered symbol alphabet with unit average energy."""

    kind: str
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128).ravel()
        if pts.size < 1:
            raise ValueError("constellation needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("constellation points must be finite")
        energy = np.mean(np.abs(pts) ** 2)
        if abs(energy - 1.0) > ENERGY_TOL:
            raise ValueError(f"average energy is {energy!r}, expected 1")
        diff = np.abs(pts[:, None] - pts[None, :]) + np.eye(pts.size)
        if np.any(diff == 0):
            raise ValueError("constellation points must be pairwise distinct")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def order(self) -> int:
        return int(self.points.size)

    def __eq__(self, other):
        if not isinstance(other, Constellation):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash((self.kind, self.points.tobytes()))


def build_constellation(kind: str, order: int) -> Constellation:
    """
    Build a unit-energy PSK or square QAM alphabet.

    Point order is fixed: BPSK is ``(+1, -1)``; higher PSK orders start at
    angle pi/4 and go counterclockwise; QAM is a row-major grid scanned from
    the top row (largest imaginary part) left to right.

    Parameters
    ----------
    kind : {"psk", "qam"}
    order : int
        Number of points S.
    """
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise ValueError(f"unsupported constellation order {order!r}")
    kind = kind.lower()
    if kind == "psk":
        if order < 2:
            raise ValueError("PSK needs order >= 2")
        if order == 2:
            pts = np.array([1.0 + 0j, -1.0 + 0j])
        else:
            k = np.arange(order)
            pts = np.exp(1j * (np.pi / 4 + 2 * np.pi * k / order))
    elif kind == "qam":
        m = math.isqrt(order)
        if m * m != order:
            raise ValueError(f"QAM order must be a perfect square, got {order}")
        levels = 2.0 * np.arange(m) - (m - 1)
        re, im = np.meshgrid(levels, levels[::-1])
        pts = (re + 1j * im).ravel()
        if order > 1:
            pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
        else:
            pts = np.array([1.0 + 0j])
    else:
        raise ValueError(f"unsupported constellation kind {kind!r}")
    return Constellation(kind, pts)


def custom_constellation(points: Sequence) -> Constellation:
    """Normalize arbitrary points (complex or ``[re, im]`` pairs) to unit energy."""
    arr = np.asarray(points, dtype=np.complex128)
    if arr.ndim == 2 and arr.shape[1] == 2 and not np.any(arr.imag):
        pts = arr[:, 0].real + 1j * arr[:, 1].real
    else:
        pts = arr.ravel()
    energy = np.mean(np.abs(pts) ** 2)
    if not np.isfinite(energy) or energy <= 0:
        raise ValueError("custom constellation has zero or non-finite energy")
    return Constellation("custom", pts / np.sqrt(energy))


def parse_constellation(spec: str) -> Constellation:
    """
    Resolve a constellation name (``bpsk``, ``qpsk``, ``qam16``, ``qam64``,
    ``psk8``...) or a JSON list of ``[re, im]`` points.
    """
    text = spec.strip()
    if text.startswith("["):
        return custom_constellation(json.loads(text))
    key = text.lower()
    if key in CONSTELLATION_ALIASES:
        return build_constellation(*CONSTELLATION_ALIASES[key])
    for kind in ("psk", "qam"):
        if key.startswith(kind) and key[len(kind):].isdigit():
            return build_constellation(kind, int(key[len(kind):]))
    raise ValueError(f"unknown constellation {spec!r}")


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """r x t complex channel matrix; column ``l`` is the hop vector h_l."""

    matrix: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.matrix, dtype=np.complex128)
        if h.ndim != 2 or h.shape[0] < 1 or h.shape[1] < 1:
            raise ValueError(f"channel must be a non-empty 2-D matrix, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise ValueError("channel entries must be finite")
        object.__setattr__(self, "matrix", _frozen(h))

    @property
    def r(self) -> int:
        return self.matrix.shape[0]

    @property
    def t(self) -> int:
        return self.matrix.shape[1]

    def column(self, l_idx: int) -> np.ndarray:
        return self.matrix[:, l_idx]

    def __eq__(self, other):
        if not isinstance(other, ChannelRealization):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.matrix.shape, self.matrix.tobytes()))


@dataclass(frozen=True)
class SnrPoint:
    """Average SNR, kept both as linear gamma and in dB."""

    gamma: float
    db: float

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma!r}")
        if abs(10.0 * math.log10(self.gamma) - self.db) > 1e-9:
            raise ValueError("db and gamma are inconsistent")

    @classmethod
    def from_db(cls, db: float) -> "SnrPoint":
        return cls(10.0 ** (db / 10.0), float(db))

    @classmethod
    def from_linear(cls, gamma: float) -> "SnrPoint":
        return cls(float(gamma), 10.0 * math.log10(gamma))


@dataclass(frozen=True, eq=False)
class AugmentedSymbolSet:
    """
    The tS effective points ``x_sl = h_l * s``.

    Rows of ``vectors`` are ordered l-major: flat index ``k = l * S + s``.
    """

    vectors: np.ndarray
    t: int
    S: int
    index_map: tuple = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.complex128)
        if v.ndim != 2 or v.shape[0] != self.t * self.S:
            raise ValueError(f"expected {self.t * self.S} vectors, got shape {v.shape}")
        object.__setattr__(self, "vectors", _frozen(v))
        object.__setattr__(
            self, "index_map", tuple((k % self.S, k // self.S) for k in range(v.shape[0]))
        )

    @property
    def r(self) -> int:
        return self.vectors.shape[1]

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    def flat_index(self, s_idx: int, l_idx: int) -> int:
        if not (0 <= s_idx < self.S and 0 <= l_idx < self.t):
            raise IndexError(f"(s, l) = ({s_idx}, {l_idx}) out of range")
        return l_idx * self.S + s_idx

    def pair(self, k: int) -> tuple[int, int]:
        """Inverse of :meth:`flat_index`, returns ``(s_idx, l_idx)``."""
        return self.index_map[k]


def augment(channel: ChannelRealization, constellation: Constellation) -> AugmentedSymbolSet:
    h = channel.matrix
    s = constellation.points
    # (t, S, r) -> (t*S, r), l-major
    vectors = (h.T[:, None, :] * s[None, :, None]).reshape(-1, h.shape[0])
    return AugmentedSymbolSet(vectors, channel.t, constellation.order)


def pairwise_sq_distances(aug: AugmentedSymbolSet) -> np.ndarray:
    """Matrix of ``||x_k - x_k'||^2``; symmetric with an exact zero diagonal."""
    x = aug.vectors
    diff = x[:, None, :] - x[None, :, :]
    d2 = np.sum(diff.real ** 2 + diff.imag ** 2, axis=-1)
    return d2
