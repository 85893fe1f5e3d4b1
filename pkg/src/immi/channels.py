"""Rayleigh channel ensembles and the JSON channel file format."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import ChannelRealization


class ChannelFileError(ValueError):
    """Malformed or inconsistent channel file."""


@dataclass(frozen=True)
class ChannelEnsemble:
    realizations: tuple
    dist: str = "fixed"
    seed: int | None = None

    def __post_init__(self):
        reals = tuple(self.realizations)
        if not reals:
            raise ValueError("ensemble needs at least one realization")
        shape = reals[0].matrix.shape
        for i, h in enumerate(reals):
            if h.matrix.shape != shape:
                raise ValueError(
                    f"realization {i} has shape {h.matrix.shape}, expected {shape}"
                )
        if self.dist not in ("rayleigh", "fixed", "file"):
            raise ValueError(f"unknown ensemble distribution {self.dist!r}")
        object.__setattr__(self, "realizations", reals)

    @property
    def r(self) -> int:
        return self.realizations[0].r

    @property
    def t(self) -> int:
        return self.realizations[0].t

    def __len__(self):
        return len(self.realizations)

    def __iter__(self):
        return iter(self.realizations)

    def __getitem__(self, i):
        return self.realizations[i]


def rayleigh_ensemble(r: int, t: int, n: int, seed: int) -> ChannelEnsemble:
    """
    ``n`` i.i.d. r x t matrices with CN(0, 1) entries (variance 1/2 per real
    dimension). Generated from a PCG64 stream seeded with ``seed``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if r < 1 or t < 1:
        raise ValueError("r and t must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.standard_normal((n, r, t, 2)) * np.sqrt(0.5)
    mats = z[..., 0] + 1j * z[..., 1]
    return ChannelEnsemble(tuple(ChannelRealization(m) for m in mats), "rayleigh", seed)


def channel_to_json(h: ChannelRealization) -> dict:
    m = h.matrix
    return {
        "r": h.r,
        "t": h.t,
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def channel_from_json(obj, index: int = 0) -> ChannelRealization:
    where = f"channel {index}"
    if not isinstance(obj, dict) or not {"r", "t", "entries"} <= obj.keys():
        raise ChannelFileError(f"{where}: expected an object with keys r, t, entries")
    r, t, entries = obj["r"], obj["t"], obj["entries"]
    if not isinstance(entries, list) or len(entries) != r:
        raise ChannelFileError(f"{where}: expected {r} rows in entries")
    rows = []
    for i, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != t:
            raise ChannelFileError(f"{where}: row {i} must hold {t} [re, im] pairs")
        vals = []
        for pair in row:
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ChannelFileError(f"{where}: row {i} has an entry that is not [re, im]")
            vals.append(complex(float(pair[0]), float(pair[1])))
        rows.append(vals)
    try:
        return ChannelRealization(np.array(rows, dtype=np.complex128))
    except ValueError as exc:
        raise ChannelFileError(f"{where}: {exc}") from None


def save_channels(ensemble: ChannelEnsemble | Sequence[ChannelRealization], path) -> None:
    """Write a JSON array of channel objects. Floats use shortest round-trip repr."""
    payload = [channel_to_json(h) for h in ensemble]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_channels(path) -> ChannelEnsemble:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelFileError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno} (offset {exc.pos}): {exc.msg}"
        ) from None
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list) or not data:
        raise ChannelFileError(f"{path}: expected a non-empty array of channel objects")
    reals = [channel_from_json(obj, i) for i, obj in enumerate(data)]
    r, t = reals[0].r, reals[0].t
    for i, h in enumerate(reals):
        if (h.r, h.t) != (r, t):
            raise ChannelFileError(
                f"{path}: channel {i} is {h.r}x{h.t}, expected {r}x{t} like channel 0"
            )
    return ChannelEnsemble(tuple(reals), "file", None)
