"""Ricean multiuser channel draws and analog-beamformed effective channels.

Randomness is organized in independent substreams keyed by ``(seed, tag)``
so that any realization can be reproduced on its own, in any order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from dftbeam.codebook import AnalogBeamformer

_LOS_STREAM = 0
_DROP_STREAM = 1


def _stream(seed: int, *key: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))


def _cn(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """i.i.d. CN(0, 1) samples."""
    x = rng.standard_normal(shape + (2,))
    return (x[..., 0] + 1j * x[..., 1]) / np.sqrt(2.0)


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


@dataclass(frozen=True)
class RiceanParams:
    """Large-scale gains, Ricean factors (both linear) and the fixed LoS matrix."""

    betas: np.ndarray
    kappas: np.ndarray
    los: np.ndarray = field(repr=False)

    def __post_init__(self):
        betas = np.atleast_1d(np.asarray(self.betas, dtype=float))
        kappas = np.atleast_1d(np.asarray(self.kappas, dtype=float))
        los = np.asarray(self.los, dtype=complex)
        if los.ndim != 2:
            raise ValueError("LoS matrix must be two-dimensional (M x N_u)")
        n_users = los.shape[1]
        if betas.shape != (n_users,) or kappas.shape != (n_users,):
            raise ValueError(
                f"betas/kappas must have one entry per user ({n_users}), "
                f"got {betas.shape} and {kappas.shape}"
            )
        if not np.all(np.isfinite(betas)) or np.any(betas <= 0):
            raise ValueError("large-scale gains must be positive and finite")
        if not np.all(np.isfinite(kappas)) or np.any(kappas < 0):
            raise ValueError("Ricean factors must be non-negative and finite")
        for name, arr in (("betas", betas), ("kappas", kappas), ("los", los)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_antennas(self) -> int:
        return self.los.shape[0]

    @property
    def n_users(self) -> int:
        return self.los.shape[1]

    @property
    def los_weights(self) -> np.ndarray:
        """Per-user LoS amplitude, sqrt(K / (K + 1))."""
        return np.sqrt(self.kappas / (self.kappas + 1.0))

    @property
    def nlos_weights(self) -> np.ndarray:
        """Per-user diffuse amplitude, sqrt(1 / (K + 1))."""
        return np.sqrt(1.0 / (self.kappas + 1.0))

    @property
    def mean(self) -> np.ndarray:
        """Mean of G, i.e. the LoS part scaled by sqrt(K/(K+1)) sqrt(beta)."""
        return self.los * (self.los_weights * np.sqrt(self.betas))

    @classmethod
    def uniform(cls, los: np.ndarray, beta: float = 1.0, kappa: float = 0.0) -> "RiceanParams":
        n_users = np.asarray(los).shape[1]
        return cls(np.full(n_users, beta), np.full(n_users, kappa), los)


@dataclass(frozen=True)
class LosModel:
    """How the deterministic LoS matrix is generated.

    ``kind`` is ``"gaussian"`` (i.i.d. CN(0,1) entries, fixed after the draw) or
    ``"ula"`` (half-wavelength steering vectors at ``angles`` radians).
    """

    kind: str = "gaussian"
    angles: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("gaussian", "ula"):
            raise ValueError(f"unknown LoS model {self.kind!r}")
        angles = tuple(float(a) for a in self.angles)
        if self.kind == "ula":
            if any(not (-np.pi / 2 <= a <= np.pi / 2) for a in angles):
                raise ValueError("ULA angles must lie in [-pi/2, pi/2] radians")
        object.__setattr__(self, "angles", angles)


def gen_los(model: LosModel, M: int, n_users: int, seed: int = 0) -> np.ndarray:
    """Generate the M x N_u LoS matrix for ``model``."""
    if n_users < 1 or M < n_users:
        raise ValueError(f"need M >= N_u >= 1, got M={M}, N_u={n_users}")
    if model.kind == "gaussian":
        return _cn(_stream(seed, _LOS_STREAM), (M, n_users))
    if len(model.angles) != n_users:
        raise ValueError(f"ULA model needs {n_users} angles, got {len(model.angles)}")
    m = np.arange(M)[:, None]
    return np.exp(1j * np.pi * m * np.sin(np.asarray(model.angles))[None, :])


def _nlos_draw(seed: int, drop: int, M: int, n_users: int) -> np.ndarray:
    return _cn(_stream(seed, _DROP_STREAM, int(drop)), (M, n_users))


def sample_channel(p: RiceanParams, seed: int, drop: int) -> np.ndarray:
    """One channel realization G = H D^{1/2} for drop ``drop`` of stream ``seed``."""
    Hw = _nlos_draw(seed, drop, p.n_antennas, p.n_users)
    H = p.los * p.los_weights + Hw * p.nlos_weights
    return H * np.sqrt(p.betas)


def sample_channels(p: RiceanParams, seed: int, drops: Sequence[int] | int) -> np.ndarray:
    """Stack of realizations, shape (n_drops, M, N_u)."""
    if isinstance(drops, (int, np.integer)):
        drops = range(int(drops))
    Hw = np.stack([_nlos_draw(seed, d, p.n_antennas, p.n_users) for d in drops])
    H = p.los * p.los_weights + Hw * p.nlos_weights
    return H * np.sqrt(p.betas)


def effective_channel(F: AnalogBeamformer | np.ndarray, G: np.ndarray) -> np.ndarray:
    """G_eq = F G; ``G`` may carry leading drop axes."""
    Fm = F.matrix if isinstance(F, AnalogBeamformer) else np.asarray(F)
    G = np.asarray(G)
    if Fm.shape[1] != G.shape[-2]:
        raise ValueError(
            f"beamformer has {Fm.shape[1]} columns but channel has {G.shape[-2]} antennas"
        )
    return Fm @ G
