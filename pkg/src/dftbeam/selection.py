"""Analog beam selection: exhaustive search, per-user projected power, two-step.

All three schemes work from long-term channel knowledge only (LoS matrix,
Ricean factors, large-scale gains). The LoS projections onto every DFT beam
are computed once per context and reused by every candidate evaluation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from dftbeam.approx import approx_from_projection
from dftbeam.channel import RiceanParams
from dftbeam.codebook import BeamSelection, DftCodebook
from dftbeam.linkrates import LinkPowers
from dftbeam.schemes import normalize_scheme

EXHAUSTIVE = "exhaustive"
PER_USER = "per_user"
TWO_STEP = "two_step"
SELECTORS = (EXHAUSTIVE, PER_USER, TWO_STEP)

DEFAULT_BUDGET = 10_000_000


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SelectionContext:
    params: RiceanParams
    codebook: DftCodebook
    scheme: str
    powers: LinkPowers
    n_rf: int
    margin: int = 1
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "scheme", normalize_scheme(self.scheme))
        n_u = self.params.n_users
        M = self.codebook.order
        if self.params.n_antennas != M:
            raise ValueError(f"LoS matrix has {self.params.n_antennas} rows, codebook order is {M}")
        if not (n_u <= self.n_rf <= M):
            raise ValueError(f"need N_u <= N_s <= M, got N_u={n_u}, N_s={self.n_rf}, M={M}")
        if self.margin < 1:
            raise ValueError(f"margin n must be >= 1, got {self.margin}")

    @property
    def n_users(self) -> int:
        return self.params.n_users

    @property
    def chains_per_user(self) -> int:
        """C = floor(N_s / N_u)."""
        return self.n_rf // self.n_users

    @cached_property
    def projections(self) -> np.ndarray:
        """U @ hbar: LoS of every user projected on every beam, shape (M, N_u)."""
        return self.codebook.entries @ self.params.los

    def objective(self, indices) -> float:
        # The rate is a set function; a canonical row order keeps it bit-exact.
        rows = self.projections[sorted(indices)]
        report = approx_from_projection(
            self.scheme, rows, self.params.betas, self.params.kappas, self.powers
        )
        return report.sum


@dataclass(frozen=True)
class SelectionResult:
    selection: BeamSelection
    comparisons: int
    theoretical_comparisons: int
    objective: float
    selector: str
    margin: int | None = None
    step1: tuple[int, ...] = field(default=(), repr=False)


def comparison_count(selector: str, M: int, n_rf: int, n_users: int, margin: int = 1) -> int:
    """Number of comparisons each selection scheme needs (exact integer)."""
    if not (1 <= n_users <= n_rf <= M):
        raise ValueError(f"need 1 <= N_u <= N_s <= M, got N_u={n_users}, N_s={n_rf}, M={M}")
    if selector == EXHAUSTIVE:
        return int(M) ** int(n_rf)
    if selector == PER_USER:
        return M * n_users
    if selector == TWO_STEP:
        if margin < 1:
            raise ValueError("margin n must be >= 1")
        L = n_users * (n_rf // n_users + margin)
        # sum over removal rounds of the surviving candidates, L down to N_s + 1
        return M * n_users + (L * L + L - n_rf * n_rf - n_rf) // 2
    raise ValueError(f"unknown selector {selector!r}; expected one of {SELECTORS}")


def exhaustive_search(ctx: SelectionContext) -> SelectionResult:
    """Best N_s-subset of distinct beams under the context's rate approximation.

    Subsets are enumerated in lexicographic order and only a strictly better
    objective replaces the incumbent, so ties go to the smallest index list.
    """
    M, n_rf = ctx.codebook.order, ctx.n_rf
    n_candidates = math.comb(M, n_rf)
    if n_candidates > ctx.budget:
        raise SearchBudgetExceeded(
            f"exhaustive search over C({M},{n_rf}) = {n_candidates} candidates "
            f"exceeds the budget of {ctx.budget}"
        )
    best, best_val = None, -math.inf
    count = 0
    for combo in itertools.combinations(range(M), n_rf):
        val = ctx.objective(combo)
        count += 1
        if val > best_val:
            best, best_val = combo, val
    return SelectionResult(
        selection=BeamSelection(best),
        comparisons=count,
        theoretical_comparisons=comparison_count(EXHAUSTIVE, M, n_rf, ctx.n_users),
        objective=float(best_val),
        selector=EXHAUSTIVE,
    )


def _strongest_beams(ctx: SelectionContext, quotas: list[int]) -> tuple[list[int], int]:
    """Give user k its ``quotas[k]`` strongest beams not already claimed."""
    taken: set[int] = set()
    chosen: list[int] = []
    count = 0
    power = np.abs(ctx.projections) ** 2
    M = ctx.codebook.order
    for k, quota in enumerate(quotas):
        count += M
        order = np.argsort(-power[:, k], kind="stable")
        got = 0
        for beam in order:
            if got == quota:
                break
            beam = int(beam)
            if beam in taken:
                continue
            taken.add(beam)
            chosen.append(beam)
            got += 1
    return chosen, count


def per_user_selection(ctx: SelectionContext) -> SelectionResult:
    """Each user takes the beams carrying most of its LoS power.

    The first N_u - 1 users get C beams each and the last user the remaining
    N_s - C (N_u - 1); a beam already claimed goes to the next strongest.
    """
    C, n_u = ctx.chains_per_user, ctx.n_users
    quotas = [C] * (n_u - 1) + [ctx.n_rf - C * (n_u - 1)]
    chosen, count = _strongest_beams(ctx, quotas)
    M = ctx.codebook.order
    return SelectionResult(
        selection=BeamSelection(chosen),
        comparisons=count,
        theoretical_comparisons=comparison_count(PER_USER, M, ctx.n_rf, n_u),
        objective=ctx.objective(chosen),
        selector=PER_USER,
    )


def two_step_selection(ctx: SelectionContext) -> SelectionResult:
    """Over-select C + n beams per user, then greedily drop the surplus.

    Each removal round tries deleting every surviving beam (order preserved)
    and drops the one whose removal keeps the approximated rate highest;
    ties drop the earliest position.
    """
    C, n_u, n = ctx.chains_per_user, ctx.n_users, ctx.margin
    M = ctx.codebook.order
    L = n_u * (C + n)
    if L > M:
        raise ValueError(
            f"two-step needs N_u (C + n) = {L} <= M = {M}; reduce the margin n"
        )
    survivors, count = _strongest_beams(ctx, [C + n] * n_u)
    step1 = tuple(survivors)
    while len(survivors) > ctx.n_rf:
        best_pos, best_val = -1, -math.inf
        for pos in range(len(survivors)):
            val = ctx.objective(survivors[:pos] + survivors[pos + 1:])
            count += 1
            if val > best_val:
                best_pos, best_val = pos, val
        del survivors[best_pos]
    return SelectionResult(
        selection=BeamSelection(survivors),
        comparisons=count,
        theoretical_comparisons=comparison_count(TWO_STEP, M, ctx.n_rf, n_u, n),
        objective=float(best_val),
        selector=TWO_STEP,
        margin=n,
        step1=step1,
    )


def select(ctx: SelectionContext, selector: str) -> SelectionResult:
    if selector == EXHAUSTIVE:
        return exhaustive_search(ctx)
    if selector == PER_USER:
        return per_user_selection(ctx)
    if selector == TWO_STEP:
        return two_step_selection(ctx)
    raise ValueError(f"unknown selector {selector!r}")
