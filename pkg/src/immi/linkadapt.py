"""
MI-based link adaptation: average per-symbol MI over a block and pick the
highest-rate MCS whose MI threshold is met.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .closed_form import kernel_for, mi_first_order, mi_second_order
from .model import (
    CONSTELLATION_ALIASES,
    ChannelRealization,
    Constellation,
    SnrPoint,
    augment,
)


class McsTableError(ValueError):
    pass


@dataclass(frozen=True)
class McsEntry:
    id: str
    kind: str
    order: int
    coding_rate: float
    min_mi_bits: float

    def __post_init__(self):
        if not 0.0 < self.coding_rate <= 1.0:
            raise McsTableError(f"{self.id}: coding_rate must be in (0, 1]")
        if not (self.min_mi_bits >= 0 and math.isfinite(self.min_mi_bits)):
            raise McsTableError(f"{self.id}: min_mi_bits must be finite and >= 0")
        if self.order < 1:
            raise McsTableError(f"{self.id}: order must be >= 1")

    def spectral_efficiency(self, t: int) -> float:
        """Bits per channel use: coding rate times log2(t S)."""
        return self.coding_rate * math.log2(t * self.order)


@dataclass(frozen=True)
class McsTable:
    entries: tuple
    t: int

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise McsTableError("MCS table is empty")
        for e in entries:
            if e.min_mi_bits > math.log2(self.t * e.order):
                raise McsTableError(
                    f"{e.id}: min_mi_bits {e.min_mi_bits} exceeds log2(t*S) = {math.log2(self.t * e.order)}"
                )
        for a, b in zip(entries, entries[1:]):
            if not b.spectral_efficiency(self.t) > a.spectral_efficiency(self.t):
                raise McsTableError(f"{b.id}: spectral efficiency not strictly increasing")
            if not b.min_mi_bits > a.min_mi_bits:
                raise McsTableError(f"{b.id}: min_mi_bits not strictly increasing")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_entries(cls, entries: Iterable[McsEntry], t: int) -> "McsTable":
        """Sort by spectral efficiency, then validate."""
        ordered = sorted(entries, key=lambda e: e.spectral_efficiency(t))
        return cls(tuple(ordered), t)


def _entry_from_json(obj, i: int) -> McsEntry:
    try:
        kind = str(obj["constellation"]).lower()
        order = obj.get("order")
        if kind in CONSTELLATION_ALIASES:
            kind, alias_order = CONSTELLATION_ALIASES[kind]
            order = alias_order if order is None else order
        return McsEntry(
            id=str(obj["id"]),
            kind=kind,
            order=int(order),
            coding_rate=float(obj["coding_rate"]),
            min_mi_bits=float(obj["min_mi_bits"]),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise McsTableError(f"entry {i}: missing or malformed field ({exc})") from None


def load_mcs_table(path, t: int) -> McsTable:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise McsTableError(
                f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from None
    if not isinstance(data, list):
        raise McsTableError(f"{path}: expected a JSON array of MCS entries")
    return McsTable.from_entries([_entry_from_json(o, i) for i, o in enumerate(data)], t)


def symbol_mi(channel: ChannelRealization, snr: SnrPoint, constellation: Constellation,
              method: str = "first_order") -> float:
    aug = augment(channel, constellation)
    kernel = kernel_for(aug, snr.gamma)
    if method == "first_order":
        return mi_first_order(kernel)
    if method == "second_order":
        return mi_second_order(kernel, aug)
    raise ValueError(f"unsupported method {method!r} for link adaptation")


def effective_mi(block: Sequence[tuple], constellation: Constellation,
                 method: str = "first_order") -> float:
    """Arithmetic mean of the closed-form MI of each ``(channel, snr)`` symbol."""
    if not block:
        raise ValueError("block must be non-empty")
    shapes = {h.matrix.shape for h, _ in block}
    if len(shapes) > 1:
        raise ValueError(f"block mixes channel shapes {sorted(shapes)}")
    values = [symbol_mi(h, snr, constellation, method) for h, snr in block]
    return float(np.mean(values))


def select_mcs(eff_mi: float, table: McsTable) -> McsEntry | None:
    """Highest spectral-efficiency entry with ``min_mi_bits <= eff_mi``, else None."""
    chosen = None
    for entry in table.entries:
        if entry.min_mi_bits <= eff_mi:
            chosen = entry
        else:
            break
    return chosen
