"""Closed-form ergodic-rate approximations and their limiting forms.

Every formula depends on the analog beamformer only through the projected
LoS matrix ``F @ hbar`` and the number of RF chains, so the core evaluators
take that projection directly; ``approx_rate`` is the F-facing wrapper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from dftbeam.channel import RiceanParams
from dftbeam.codebook import AnalogBeamformer
from dftbeam.linkrates import LinkPowers, RateReport
from dftbeam.schemes import (
    DL_MRT_LT,
    DL_MRT_ST,
    DL_ZF_LT,
    DL_ZF_ST,
    SCHEMES,
    UL_MRC,
    UL_ZF,
    normalize_scheme,
)

__all__ = [
    "SCHEMES",
    "SigmaHat",
    "ChiSet",
    "digamma",
    "sigma_hat",
    "epsilon_factors",
    "chi_set",
    "approx_rate",
    "approx_from_projection",
    "rayleigh_rate",
    "los_limit_rate",
]

# Bernoulli-number coefficients B_2n / (2n) of the asymptotic digamma series
_DIGAMMA_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x: float) -> float:
    """Digamma function for ``x > 0``.

    Shifts the argument up with ``psi(x) = psi(x + 1) - 1/x`` until it is at
    least 6, then sums the asymptotic expansion.
    """
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise ValueError(f"digamma is only defined here for finite x > 0, got {x}")
    shift = 0.0
    while x < 6.0:
        shift += 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    for c in reversed(_DIGAMMA_ASYMPTOTIC):
        series = series * inv2 + c
    return math.log(x) - 0.5 / x - series * inv2 - shift


def _wishart_gain(n_rf: int, n_users: int) -> float:
    return math.exp(digamma(n_rf - n_users + 1))


@dataclass(frozen=True)
class SigmaHat:
    """Central-Wishart surrogate covariance and its leave-one-out submatrices."""

    full: np.ndarray
    leave_one_out: tuple[np.ndarray, ...] = field(repr=False)
    eigen_full: np.ndarray = field(repr=False)
    eigen_loo: tuple[np.ndarray, ...] = field(repr=False)

    @classmethod
    def from_matrix(cls, S: np.ndarray) -> "SigmaHat":
        """Wrap an arbitrary Hermitian positive-definite matrix."""
        S = np.asarray(S, dtype=complex)
        n = S.shape[0]
        loo = tuple(np.delete(np.delete(S, k, axis=0), k, axis=1) for k in range(n))
        eig_loo = tuple(np.linalg.eigvalsh(L) if L.size else np.empty(0) for L in loo)
        return cls(S, loo, np.linalg.eigvalsh(S), eig_loo)


def _sigma_hat_matrix(proj: np.ndarray, kappas: np.ndarray) -> np.ndarray:
    n_rf = proj.shape[0]
    T = proj * np.sqrt(kappas / (kappas + 1.0))
    S = np.diag(1.0 / (kappas + 1.0)) + (np.conj(T.T) @ T) / n_rf
    return 0.5 * (S + np.conj(S.T))


def _loo_matrix(proj: np.ndarray, kappas: np.ndarray, k: int) -> np.ndarray:
    keep = [j for j in range(proj.shape[1]) if j != k]
    return _sigma_hat_matrix(proj[:, keep], kappas[keep])


def sigma_hat_from_projection(proj: np.ndarray, kappas: np.ndarray) -> SigmaHat:
    proj = np.asarray(proj, dtype=complex)
    kappas = np.asarray(kappas, dtype=float)
    full = _sigma_hat_matrix(proj, kappas)
    n_u = full.shape[0]
    loo = tuple(_loo_matrix(proj, kappas, k) for k in range(n_u))
    eig = np.linalg.eigvalsh(full)
    eig_loo = tuple(
        np.linalg.eigvalsh(S) if S.size else np.empty(0) for S in loo
    )
    return SigmaHat(full, loo, eig, eig_loo)


def sigma_hat(p: RiceanParams, F: AnalogBeamformer) -> SigmaHat:
    """Build the surrogate covariance for the given channel statistics and beams."""
    if F.n_rf < p.n_users:
        raise ValueError(f"need N_s >= N_u, got N_s={F.n_rf}, N_u={p.n_users}")
    return sigma_hat_from_projection(F.matrix @ p.los, p.kappas)


def epsilon_factors(sh: SigmaHat) -> np.ndarray:
    """Ratio of the full eigenvalue product to each leave-one-out product."""
    full = np.prod(sh.eigen_full)
    return np.array([full / np.prod(e) for e in sh.eigen_loo])


def _inv_diag(S: np.ndarray) -> np.ndarray:
    """Diagonal of S^{-1} for Hermitian positive-definite S via Cholesky solves."""
    n = S.shape[0]
    factor = scipy.linalg.cho_factor(S, lower=True)
    cols = scipy.linalg.cho_solve(factor, np.eye(n, dtype=S.dtype))
    return np.real(np.diagonal(cols))


@dataclass(frozen=True)
class ChiSet:
    chi3: np.ndarray
    chi1: np.ndarray
    chi2: np.ndarray


def chi_from_projection(proj: np.ndarray, kappas: np.ndarray) -> ChiSet:
    proj = np.asarray(proj, dtype=complex)
    kappas = np.asarray(kappas, dtype=float)
    n_rf = proj.shape[0]
    power = np.sum(np.abs(proj) ** 2, axis=0)
    chi3 = kappas * power + n_rf
    chi1 = chi3**2 + 2.0 * chi3 - n_rf
    cross = np.abs(np.conj(proj.T) @ proj) ** 2
    chi2 = np.outer(kappas, kappas) * cross + chi3[:, None] + chi3[None, :] - n_rf
    np.fill_diagonal(chi2, np.nan)
    return ChiSet(chi3, chi1, chi2)


def chi_set(p: RiceanParams, F: AnalogBeamformer) -> ChiSet:
    """Second- and fourth-order moment terms of the beamformed channel."""
    return chi_from_projection(F.matrix @ p.los, p.kappas)


def _off_diag_sum(M: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    mask = ~np.eye(n, dtype=bool)
    return np.where(mask, M, 0.0).sum(axis=1)


def _report(scheme: str, per_user) -> RateReport:
    per_user = np.asarray(per_user, dtype=float)
    return RateReport(scheme, per_user, np.zeros_like(per_user))


def approx_from_projection(scheme: str, proj: np.ndarray, betas, kappas,
                           pw: LinkPowers) -> RateReport:
    """Evaluate one closed form from the projected LoS matrix ``F @ hbar``.

    ``proj`` has one row per RF chain and one column per user.
    """
    scheme = normalize_scheme(scheme)
    proj = np.asarray(proj, dtype=complex)
    betas = np.asarray(betas, dtype=float)
    kappas = np.asarray(kappas, dtype=float)
    n_rf, n_u = proj.shape

    if scheme in (UL_MRC, DL_MRT_LT, DL_MRT_ST):
        chi = chi_from_projection(proj, kappas)
        scale = betas / (kappas + 1.0)
        if scheme == UL_MRC:
            P = pw.p_avg
            num = P * scale * chi.chi1
            den = _off_diag_sum(P * scale[None, :] * chi.chi2) + chi.chi3
        elif scheme == DL_MRT_LT:
            P = pw.p_total
            num = P * scale**2 * chi.chi1
            interf = _off_diag_sum(P * np.outer(scale, scale) * chi.chi2)
            den = interf + np.sum(scale * chi.chi3)
        else:
            P = pw.p_total
            a = P * scale / n_u
            num = a * chi.chi3
            den = a * _off_diag_sum(chi.chi2 / chi.chi3[None, :]) + 1.0
        return _report(scheme, np.log2(1.0 + num / den))

    if n_rf < n_u:
        raise ValueError(f"ZF schemes need N_s >= N_u, got N_s={n_rf}, N_u={n_u}")
    sh = sigma_hat_from_projection(proj, kappas)
    if scheme == UL_ZF:
        eps = epsilon_factors(sh)
        gain = _wishart_gain(n_rf, n_u)
        return _report(scheme, np.log2(1.0 + pw.p_avg * betas * eps * gain))

    inv_diag = _inv_diag(sh.full) / betas
    P = pw.p_total
    if scheme == DL_ZF_LT:
        if n_rf <= n_u:
            raise ValueError("long-term ZF approximation needs N_s > N_u")
        rate = np.log2(1.0 + P * (n_rf - n_u) / np.sum(inv_diag))
        return _report(scheme, np.full(n_u, rate))
    # DL_ZF_ST
    return _report(scheme, np.log2(1.0 + P * (n_rf - n_u + 1) / (n_u * inv_diag)))


def approx_rate(scheme: str, p: RiceanParams, F: AnalogBeamformer, pw: LinkPowers) -> RateReport:
    """Closed-form approximate ergodic rate of ``scheme`` for fixed beams ``F``."""
    if F.n_antennas != p.n_antennas:
        raise ValueError("beamformer and LoS matrix disagree on the antenna count")
    return approx_from_projection(scheme, F.matrix @ p.los, p.betas, p.kappas, pw)


def rayleigh_rate(scheme: str, betas, n_rf: int, n_users: int, pw: LinkPowers) -> RateReport:
    """Uplink rate approximations with no LoS component (beam choice is irrelevant)."""
    scheme = normalize_scheme(scheme)
    betas = np.broadcast_to(np.asarray(betas, dtype=float), (n_users,))
    P = pw.p_avg
    if scheme == UL_ZF:
        if n_rf < n_users:
            raise ValueError("ZF needs N_s >= N_u")
        return _report(scheme, np.log2(1.0 + P * betas * _wishart_gain(n_rf, n_users)))
    if scheme == UL_MRC:
        others = P * (betas.sum() - betas)
        return _report(scheme, np.log2(1.0 + P * betas * (n_rf + 1) / (others + 1.0)))
    raise ValueError(f"Rayleigh reduction is defined for uplink schemes only, got {scheme}")


def los_limit_rate(scheme: str, betas, los_projections, n_rf: int, n_users: int,
                   pw: LinkPowers) -> RateReport:
    """Pure-LoS rate limits, valid when the beamformed LoS columns are orthogonal.

    ``los_projections`` holds ``||F hbar_k||^2`` per user.
    """
    scheme = normalize_scheme(scheme)
    betas = np.broadcast_to(np.asarray(betas, dtype=float), (n_users,))
    q = np.asarray(los_projections, dtype=float)
    if q.shape != (n_users,) or np.any(q < 0):
        raise ValueError("need one non-negative projected power per user")
    if scheme == UL_ZF:
        gain = _wishart_gain(n_rf, n_users)
        return _report(scheme, np.log2(1.0 + pw.p_avg * betas * (q / n_rf) * gain))
    if scheme == UL_MRC:
        return _report(scheme, np.log2(1.0 + pw.p_avg * betas * q))
    P = pw.p_total
    if scheme == DL_ZF_LT:
        if n_rf <= n_users:
            raise ValueError("long-term ZF limit needs N_s > N_u")
        if np.any(q == 0):
            raise ValueError("long-term ZF limit diverges with a zero projection")
        rate = np.log2(1.0 + P * (n_rf - n_users) / (n_rf * np.sum(1.0 / (betas * q))))
        return _report(scheme, np.full(n_users, rate))
    if scheme == DL_ZF_ST:
        return _report(scheme, np.log2(1.0 + P * (n_rf - n_users + 1) * betas * q / (n_rf * n_users)))
    if scheme == DL_MRT_LT:
        return _report(scheme, np.log2(1.0 + P * betas**2 * q**2 / np.sum(betas * q)))
    return _report(scheme, np.log2(1.0 + P * betas * q / n_users))
