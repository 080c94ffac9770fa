"""DFT beam codebook and analog beamformers built from beam selections."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class DftCodebook:
    """Unitary M-point DFT matrix; row ``n`` is the ``n``-th analog beam."""

    order: int
    entries: np.ndarray = field(repr=False)

    @property
    def beams(self) -> np.ndarray:
        return self.entries


@dataclass(frozen=True)
class BeamSelection:
    """Ordered, distinct, zero-based beam indices (one per RF chain)."""

    indices: tuple[int, ...]

    def __init__(self, indices: Sequence[int]):
        idx = tuple(int(i) for i in indices)
        if len(idx) == 0:
            raise ValueError("beam selection must contain at least one index")
        if len(set(idx)) != len(idx):
            raise ValueError(f"duplicate beam index in selection {list(idx)}")
        if min(idx) < 0:
            raise ValueError(f"negative beam index in selection {list(idx)}")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def validate_for(self, order: int) -> None:
        if len(self.indices) > order:
            raise ValueError(
                f"selection has {len(self.indices)} beams but codebook has only {order}"
            )
        bad = [i for i in self.indices if i >= order]
        if bad:
            raise ValueError(f"beam index {bad[0]} out of range for M={order}")


@dataclass(frozen=True)
class AnalogBeamformer:
    """N_s x M matrix whose rows are the selected DFT beams."""

    matrix: np.ndarray = field(repr=False)
    source: BeamSelection

    @property
    def n_rf(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.matrix.shape[1]


def build_dft(M: int) -> DftCodebook:
    """Build the normalized DFT codebook, ``U[m, n] = exp(j 2 pi m n / M) / sqrt(M)``."""
    M = int(M)
    if M < 1:
        raise ValueError(f"codebook order must be >= 1, got {M}")
    n = np.arange(M)
    # reduce m*n mod M before the exponential so large products stay exact
    phase = 2.0 * np.pi * (np.outer(n, n) % M) / M
    U = np.exp(1j * phase) / np.sqrt(M)
    U.setflags(write=False)
    return DftCodebook(order=M, entries=U)


def analog_beamformer(cb: DftCodebook, sel: BeamSelection | Sequence[int]) -> AnalogBeamformer:
    if not isinstance(sel, BeamSelection):
        sel = BeamSelection(sel)
    sel.validate_for(cb.order)
    F = cb.entries[list(sel.indices), :].copy()
    F.setflags(write=False)
    return AnalogBeamformer(matrix=F, source=sel)


def beam_projection_powers(cb: DftCodebook, v: np.ndarray) -> np.ndarray:
    """Power of ``v`` captured by each DFT beam, ``|u_n v|**2`` for every row ``u_n``.

    The powers sum to ``||v||**2`` since the codebook is unitary.
    """
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.shape[0] != cb.order:
        raise ValueError(f"expected a length-{cb.order} vector, got shape {v.shape}")
    return np.abs(cb.entries @ v) ** 2
