"""Exact ergodic rates by Monte-Carlo averaging over seeded channel drops.

Per-drop rate functions accept a single effective channel (N_s x N_u) or a
stack of them with a leading drop axis. Drops whose Gram matrix has condition
number above ``COND_LIMIT`` are discarded and counted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from dftbeam.channel import RiceanParams, effective_channel, sample_channels
from dftbeam.codebook import AnalogBeamformer
from dftbeam.schemes import (
    DL_MRT_LT,
    DL_MRT_ST,
    DL_ZF_LT,
    DL_ZF_ST,
    UL_MRC,
    UL_ZF,
    normalize_scheme,
)

COND_LIMIT = 1e12


class DegenerateDropError(ArithmeticError):
    """A drop whose Gram / precoder matrix is numerically singular."""


@dataclass(frozen=True)
class McConfig:
    drops: int = 1000
    seed: int = 0

    def __post_init__(self):
        if int(self.drops) < 1:
            raise ValueError(f"drops must be >= 1, got {self.drops}")
        if int(self.seed) < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class LinkPowers:
    """Uplink per-user power and downlink total power (unit noise, so these are SNRs)."""

    p_avg: float = 1.0
    p_total: float = 1.0

    def __post_init__(self):
        if not (self.p_avg > 0 and self.p_total > 0):
            raise ValueError("link powers must be positive")

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "LinkPowers":
        p = 10.0 ** (snr_db / 10.0)
        return cls(p, p)


@dataclass(frozen=True)
class PrecoderDrop:
    wbar: np.ndarray
    rho: np.ndarray


@dataclass(frozen=True)
class RateReport:
    scheme: str
    per_user: np.ndarray
    stderr: np.ndarray
    drops: int = 0
    discarded: int = 0
    sum_stderr: float = 0.0
    sum: float = field(init=False)

    def __post_init__(self):
        per_user = np.asarray(self.per_user, dtype=float)
        object.__setattr__(self, "per_user", per_user)
        object.__setattr__(self, "stderr", np.asarray(self.stderr, dtype=float))
        object.__setattr__(self, "sum", float(np.sum(per_user)))


# ---------------------------------------------------------------- per drop

def _as_stack(geq) -> tuple[np.ndarray, bool]:
    geq = np.asarray(geq, dtype=complex)
    if geq.ndim == 2:
        return geq[None], True
    if geq.ndim != 3:
        raise ValueError(f"effective channel must be 2-D or 3-D, got {geq.ndim}-D")
    return geq, False


def _gram(geq: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(geq, -1, -2)) @ geq


def _inv_gram_diag(geq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal of (G^H G)^{-1} per drop and the mask of well-conditioned drops."""
    n_s, n_u = geq.shape[-2:]
    if n_s < n_u:
        raise ValueError(f"ZF needs N_s >= N_u, got N_s={n_s}, N_u={n_u}")
    A = _gram(geq)
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(A)
    ok = np.isfinite(cond) & (cond <= COND_LIMIT)
    A = np.where(ok[:, None, None], A, np.eye(n_u))
    diag = np.real(np.diagonal(np.linalg.inv(A), axis1=-2, axis2=-1))
    return diag, ok


def _single(rates: np.ndarray, ok: np.ndarray, single: bool):
    if single:
        if not ok[0]:
            raise DegenerateDropError("singular effective-channel Gram matrix")
        return rates[0]
    return rates, ok


def ul_zf_drop_rate(geq, pw: LinkPowers):
    """ZF receiver rates, ``log2(1 + p_avg / [(G^H G)^{-1}]_kk)`` per user.

    For a stack of drops returns ``(rates, valid_mask)``.
    """
    stack, single = _as_stack(geq)
    diag, ok = _inv_gram_diag(stack)
    rates = np.log2(1.0 + pw.p_avg / diag)
    return _single(rates, ok, single)


def _mrc_sinr(stack: np.ndarray, p: float) -> np.ndarray:
    A = _gram(stack)
    norms2 = np.real(np.diagonal(A, axis1=-2, axis2=-1))
    cross = np.abs(A) ** 2
    interf = cross.sum(axis=-1) - norms2**2
    denom = p * interf + norms2
    with np.errstate(divide="ignore", invalid="ignore"):
        sinr = np.where(norms2 > 0, p * norms2**2 / denom, 0.0)
    return sinr


def ul_mrc_drop_rate(geq, pw: LinkPowers) -> np.ndarray:
    """MRC receiver rates; a zero column gives that user rate 0."""
    stack, single = _as_stack(geq)
    rates = np.log2(1.0 + _mrc_sinr(stack, pw.p_avg))
    return rates[0] if single else rates


def zf_precoder(geq: np.ndarray) -> np.ndarray:
    """Unnormalized ZF precoder G^* (G^T G^*)^{-1}."""
    g_conj = np.conj(np.asarray(geq, dtype=complex))
    n_u = g_conj.shape[-1]
    A = np.swapaxes(geq, -1, -2) @ g_conj
    cond = np.linalg.cond(A)
    if np.any(~np.isfinite(cond) | (cond > COND_LIMIT)):
        raise DegenerateDropError("singular G^T G^* in ZF precoder")
    return g_conj @ np.linalg.solve(A, np.broadcast_to(np.eye(n_u), A.shape))


def dl_zf_precoder_drop(geq: np.ndarray, norm: str) -> PrecoderDrop:
    """ZF precoder for one drop with short-term per-stream normalization.

    ``norm='long'`` is not defined for a single drop (it needs the ensemble
    average) so only ``'short'`` is accepted here.
    """
    if norm != "short":
        raise ValueError("per-drop precoder only supports short-term normalization")
    W = zf_precoder(geq)
    n_u = W.shape[-1]
    rho = 1.0 / (np.sqrt(n_u) * np.linalg.norm(W, axis=0))
    return PrecoderDrop(W, rho)


def dl_zf_short_drop_rate(geq, pw: LinkPowers):
    """ZF precoder with per-stream normalization: ``log2(1 + P rho_k^2)``."""
    stack, single = _as_stack(geq)
    diag, ok = _inv_gram_diag(stack)
    n_u = stack.shape[-1]
    rates = np.log2(1.0 + pw.p_total / (n_u * diag))
    return _single(rates, ok, single)


def _mrt_sinr(stack: np.ndarray, p: float, rho2: np.ndarray) -> np.ndarray:
    A = _gram(stack)
    norms2 = np.real(np.diagonal(A, axis1=-2, axis2=-1))
    cross = np.abs(A) ** 2
    weighted = cross * rho2[..., None, :]
    interf = weighted.sum(axis=-1) - rho2 * norms2**2
    return p * rho2 * norms2**2 / (p * interf + 1.0)


def dl_mrt_drop_rate(geq, pw: LinkPowers, rho2=None):
    """MRT precoder rates for one drop or a stack.

    ``rho2`` (scalar or per-user) fixes the normalization; ``None`` selects
    short-term ``rho_k^2 = 1 / (N_u ||g_k||^2)``.
    """
    stack, single = _as_stack(geq)
    n_u = stack.shape[-1]
    if rho2 is None:
        norms2 = np.sum(np.abs(stack) ** 2, axis=-2)
        ok = np.all(norms2 > 0, axis=-1)
        safe = np.where(norms2 > 0, norms2, 1.0)
        r2 = 1.0 / (n_u * safe)
    else:
        ok = np.ones(stack.shape[0], dtype=bool)
        r2 = np.broadcast_to(np.asarray(rho2, dtype=float), (stack.shape[0], n_u))
    rates = np.log2(1.0 + _mrt_sinr(stack, pw.p_total, r2))
    return _single(rates, ok, single)


# ------------------------------------------------------------- MC drivers

def expected_geq_power(p: RiceanParams, F: AnalogBeamformer) -> float:
    """E||G_eq||_F^2 = sum_i beta_i (K_i ||F hbar_i||^2 + N_s) / (K_i + 1), exactly."""
    proj = np.sum(np.abs(F.matrix @ p.los) ** 2, axis=0)
    chi3 = p.kappas * proj + F.n_rf
    return float(np.sum(p.betas / (p.kappas + 1.0) * chi3))


def draw_effective(p: RiceanParams, F: AnalogBeamformer, mc: McConfig) -> np.ndarray:
    """Effective channels for drops ``0 .. mc.drops - 1``, shape (drops, N_s, N_u)."""
    return effective_channel(F, sample_channels(p, mc.seed, mc.drops))


def _report(scheme: str, rates: np.ndarray, ok: np.ndarray) -> RateReport:
    kept = rates[ok]
    n = kept.shape[0]
    n_u = rates.shape[1]
    if n == 0:
        raise DegenerateDropError("every drop was degenerate")
    mean = kept.mean(axis=0)
    if n > 1:
        stderr = kept.std(axis=0, ddof=1) / np.sqrt(n)
        sum_stderr = float(kept.sum(axis=1).std(ddof=1) / np.sqrt(n))
    else:
        stderr = np.zeros(n_u)
        sum_stderr = 0.0
    return RateReport(scheme, mean, stderr, drops=n, discarded=int(rates.shape[0] - n),
                      sum_stderr=sum_stderr)


def exact_from_drops(scheme: str, geq: np.ndarray, pw: LinkPowers,
                     mrt_rho2: float | None = None) -> RateReport:
    """Monte-Carlo rate report from precomputed effective channels.

    ``mrt_rho2`` is the long-term MRT normalization and is required for
    ``DL-MRT-LT``.
    """
    scheme = normalize_scheme(scheme)
    geq = np.asarray(geq, dtype=complex)
    if scheme == UL_ZF:
        rates, ok = ul_zf_drop_rate(geq, pw)
    elif scheme == UL_MRC:
        rates = ul_mrc_drop_rate(geq, pw)
        ok = np.ones(rates.shape[0], dtype=bool)
    elif scheme == DL_ZF_ST:
        rates, ok = dl_zf_short_drop_rate(geq, pw)
    elif scheme == DL_ZF_LT:
        n_s, n_u = geq.shape[-2:]
        if n_s <= n_u:
            raise ValueError("long-term ZF normalization needs N_s > N_u")
        # pass 1: E||Wbar||_F^2 = E trace((G^H G)^{-1}) over the same drops
        diag, ok = _inv_gram_diag(geq)
        if not np.any(ok):
            raise DegenerateDropError("every drop was degenerate")
        rho2 = 1.0 / float(np.mean(diag[ok].sum(axis=1)))
        per_user = np.full(n_u, np.log2(1.0 + pw.p_total * rho2))
        n_ok = int(ok.sum())
        return RateReport(scheme, per_user, np.zeros(n_u), drops=n_ok,
                          discarded=int(geq.shape[0] - n_ok))
    elif scheme == DL_MRT_ST:
        rates, ok = dl_mrt_drop_rate(geq, pw)
    else:
        if mrt_rho2 is None:
            raise ValueError("DL-MRT-LT needs the long-term normalization rho^2")
        rates, ok = dl_mrt_drop_rate(geq, pw, rho2=mrt_rho2)
    return _report(scheme, rates, ok)


def exact_rate(scheme: str, p: RiceanParams, F: AnalogBeamformer, pw: LinkPowers,
               mc: McConfig) -> RateReport:
    """Exact (Monte-Carlo) ergodic rate of any of the six schemes."""
    scheme = normalize_scheme(scheme)
    geq = draw_effective(p, F, mc)
    rho2 = 1.0 / expected_geq_power(p, F) if scheme == DL_MRT_LT else None
    return exact_from_drops(scheme, geq, pw, mrt_rho2=rho2)


def mc_rate(kind: str, p: RiceanParams, F: AnalogBeamformer, pw: LinkPowers,
            mc: McConfig) -> RateReport:
    """Uplink ZF or MRC ergodic rate averaged over ``mc.drops`` seeded drops."""
    scheme = normalize_scheme(kind)
    if scheme not in (UL_ZF, UL_MRC):
        raise ValueError(f"mc_rate covers uplink schemes only, got {kind!r}")
    return exact_rate(scheme, p, F, pw, mc)


def _norm_scheme(prefix: str, norm: str) -> str:
    if norm not in ("long", "short"):
        raise ValueError(f"normalization must be 'long' or 'short', got {norm!r}")
    return f"{prefix}-{'LT' if norm == 'long' else 'ST'}"


def dl_zf_rate(p: RiceanParams, F: AnalogBeamformer, pw: LinkPowers, norm: str,
               mc: McConfig) -> RateReport:
    """Downlink ZF rate with long-term (ensemble) or short-term (per drop) scaling."""
    return exact_rate(_norm_scheme("DL-ZF", norm), p, F, pw, mc)


def dl_mrt_rate(p: RiceanParams, F: AnalogBeamformer, pw: LinkPowers, norm: str,
                mc: McConfig) -> RateReport:
    """Downlink MRT rate; long-term scaling uses the exact E||G_eq||_F^2."""
    return exact_rate(_norm_scheme("DL-MRT", norm), p, F, pw, mc)
