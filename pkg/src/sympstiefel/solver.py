"""Riemannian gradient descent with non-monotone backtracking line search.

Each iteration retracts along the antigradient with a Barzilai-Borwein
trial step, backtracking by a fixed factor until the trial point both lies
in the retraction domain and passes the non-monotone sufficient-decrease
test against a decaying average of past function values.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .manifold import FEASIBILITY_TOL, MetricSpec, SymplecticStiefel
from .matkit import MatrixOverflowError
from .retraction import (
    CayleyGradientStep,
    DomainError,
    QuasiGeodesicStep,
    RetractionKind,
)

__all__ = [
    "StepRule",
    "Termination",
    "LineSearchConfig",
    "StopConfig",
    "NonMonotoneState",
    "IterationRow",
    "SolveReport",
    "trial_step",
    "nonmonotone_accept",
    "nonmonotone_update",
    "solve",
]


class StepRule(Enum):
    BB1 = "BB1"
    BB2 = "BB2"
    ABB = "ABB"
    MODIFIED_RATIO = "ModifiedRatio"


class Termination(Enum):
    GRAD_TOL = "GradTol"
    STEP_AND_FUN_TOL = "StepAndFunTol"
    MAX_ITER = "MaxIter"
    LINE_SEARCH_FAILURE = "LineSearchFailure"

    @property
    def converged(self) -> bool:
        return self in (Termination.GRAD_TOL, Termination.STEP_AND_FUN_TOL)


@dataclass(frozen=True)
class LineSearchConfig:
    """Sufficient-decrease, backtracking and trial-step parameters."""

    beta: float = 1e-4
    delta: float = 0.1
    alpha: float = 0.85
    gamma_min: float = 1e-15
    gamma_max: float = 1e15
    step_rule: StepRule = StepRule.ABB
    max_backtracks: int = 50

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0 < self.gamma_min < self.gamma_max:
            raise ValueError("require 0 < gamma_min < gamma_max")

    def clamp(self, gamma: float) -> float:
        return max(self.gamma_min, min(gamma, self.gamma_max))


@dataclass(frozen=True)
class StopConfig:
    """Termination tolerances and the iteration cap."""

    eps_grad: float = 1e-5
    eps_x: float = 1e-5
    eps_f: float = 1e-8
    max_iter: int = 1000

    def __post_init__(self):
        if min(self.eps_grad, self.eps_x, self.eps_f) <= 0 or self.max_iter <= 0:
            raise ValueError("tolerances and max_iter must be positive")


@dataclass(frozen=True)
class NonMonotoneState:
    """Running average c of past function values with weight q."""

    c: float
    q: float = 1.0


def nonmonotone_update(
    state: NonMonotoneState, f_new: float, alpha: float
) -> NonMonotoneState:
    """Advance (q, c): q' = alpha q + 1, c' = (alpha q c + f_new) / q'."""
    q_new = alpha * state.q + 1.0
    c_new = (alpha * state.q * state.c + f_new) / q_new
    return NonMonotoneState(c=c_new, q=q_new)


def nonmonotone_accept(
    f_trial: float, state: NonMonotoneState, t: float, inner_grad_dir: float, beta: float
) -> bool:
    """Sufficient decrease: f_trial <= c + beta t g(grad, Z), with Z the direction."""
    return f_trial <= state.c + beta * t * inner_grad_dir


def trial_step(
    S: np.ndarray,
    Y: np.ndarray,
    k: int,
    rule: StepRule,
    cfg: LineSearchConfig,
    f_curr: float | None = None,
    f_prev: float | None = None,
    dir_deriv: float | None = None,
) -> float:
    """Trial step size gamma_k from the secant pair, clamped to [gamma_min, gamma_max].

    S = X^k - X^{k-1} and Y = grad^k - grad^{k-1}; both BB formulas use the
    Euclidean inner product. Zero denominators yield gamma_max.
    """
    if rule is StepRule.ABB:
        rule = StepRule.BB1 if k % 2 == 1 else StepRule.BB2
    if rule is StepRule.BB1:
        sy = abs(float(np.sum(S * Y)))
        gamma = cfg.gamma_max if sy == 0.0 else float(np.sum(S * S)) / sy
    elif rule is StepRule.BB2:
        yy = float(np.sum(Y * Y))
        gamma = cfg.gamma_max if yy == 0.0 else abs(float(np.sum(S * Y))) / yy
    elif rule is StepRule.MODIFIED_RATIO:
        if f_curr is None or f_prev is None or dir_deriv is None:
            raise ValueError("ModifiedRatio needs f_curr, f_prev and dir_deriv")
        gamma = (
            cfg.gamma_max
            if dir_deriv == 0.0
            else 2.0 * abs(f_curr - f_prev) / abs(dir_deriv)
        )
    else:
        raise ValueError(f"unknown step rule {rule!r}")
    return cfg.clamp(gamma)


@dataclass(frozen=True)
class IterationRow:
    """One logged iterate: values at X^k plus the step accepted from it."""

    k: int
    fval: float
    gradf: float
    feasi: float
    t: float
    backtracks: int
    c: float
    q: float


@dataclass
class SolveReport:
    rows: list[IterationRow]
    termination: Termination
    X: np.ndarray
    fun_evals: int
    grad_evals: int
    runtime: float
    degraded: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return self.rows[-1].k

    @property
    def final(self) -> IterationRow:
        return self.rows[-1]

    @property
    def total_backtracks(self) -> int:
        return sum(r.backtracks for r in self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def _make_step(manifold, kind: RetractionKind, X, grad_factors):
    """Curve t -> R_X(t Z) with Z = -grad f(X), reusable across backtracks."""
    if kind is RetractionKind.QUASI_GEODESIC:
        return QuasiGeodesicStep(manifold, X, -grad_factors.grad)
    if kind is RetractionKind.CAYLEY_LOWRANK:
        return CayleyGradientStep(manifold, X, grad_factors.p_f, grad_factors.e_rho)
    raise ValueError(f"{kind} is a test oracle, not a solver retraction")


def solve(
    problem,
    x0: np.ndarray,
    metric: MetricSpec | None = None,
    retraction: RetractionKind = RetractionKind.CAYLEY_LOWRANK,
    ls: LineSearchConfig | None = None,
    stop: StopConfig | None = None,
) -> SolveReport:
    """Minimize problem.f over Sp(2p, 2n) starting from the feasible point x0.

    Terminates when ||grad f||_F <= eps_grad, when both the scaled step norm
    and the relative function change fall below (eps_x, eps_f), at max_iter,
    or with a line-search-failure status when backtracking exhausts. A
    DomainError from the Cayley curve is treated exactly like a failed
    decrease test: shrink t and retry.
    """
    metric = metric or MetricSpec.default()
    ls = ls or LineSearchConfig()
    stop = stop or StopConfig()
    man = SymplecticStiefel(problem.n, problem.p)
    man._check_ambient(x0, "initial point")

    t_start = time.perf_counter()
    sqrt_2n = math.sqrt(2 * problem.n)

    X = np.array(x0, dtype=float, copy=True)
    f = float(problem.f(X))
    fe = 1
    gr = man.riemannian_gradient(X, problem.egrad(X), metric)
    ge = 1
    state = NonMonotoneState(c=f, q=1.0)
    gamma = ls.clamp(f)  # gamma_0 = f(X^0), clamped

    rows: list[IterationRow] = []
    degraded = False
    X_prev = grad_prev = None
    f_prev = None
    k = 0

    def log(t: float, h: int, gradnorm: float, feasi: float):
        rows.append(
            IterationRow(
                k=k, fval=f, gradf=gradnorm, feasi=feasi, t=t, backtracks=h,
                c=state.c, q=state.q,
            )
        )

    while True:
        gradnorm = float(np.linalg.norm(gr.grad))
        feasi = man.check_symplectic(X)
        if feasi > FEASIBILITY_TOL:
            degraded = True

        if gradnorm <= stop.eps_grad:
            log(0.0, 0, gradnorm, feasi)
            termination = Termination.GRAD_TOL
            break
        if k >= stop.max_iter:
            log(0.0, 0, gradnorm, feasi)
            termination = Termination.MAX_ITER
            break

        inner_gd = -man.inner(X, metric, gr.grad, gr.grad)  # g(grad, -grad)
        if k >= 1:
            gamma = trial_step(
                X - X_prev, gr.grad - grad_prev, k, ls.step_rule, ls,
                f_curr=f, f_prev=f_prev, dir_deriv=inner_gd,
            )
        step = _make_step(man, retraction, X, gr)

        h = 0
        t = gamma
        accepted = False
        while True:
            try:
                X_trial = step.at(t)
            except (DomainError, MatrixOverflowError):
                # out of the numerical retraction domain: shrink t like a
                # failed decrease test
                X_trial = None
            if X_trial is not None:
                # overly long trial steps may evaluate to inf; the acceptance
                # test rejects them like any insufficient decrease
                with np.errstate(over="ignore", invalid="ignore"):
                    f_trial = float(problem.f(X_trial))
                fe += 1
                if nonmonotone_accept(f_trial, state, t, inner_gd, ls.beta):
                    accepted = True
                    break
            h += 1
            t = gamma * ls.delta**h
            if h > ls.max_backtracks or t < ls.gamma_min:
                break

        if not accepted:
            log(0.0, h, gradnorm, feasi)
            termination = Termination.LINE_SEARCH_FAILURE
            break

        log(t, h, gradnorm, feasi)
        X_prev, grad_prev, f_prev = X, gr.grad, f
        X, f = X_trial, f_trial
        gr = man.riemannian_gradient(X, problem.egrad(X), metric)
        ge += 1
        state = nonmonotone_update(state, f, ls.alpha)
        k += 1

        step_small = float(np.linalg.norm(X - X_prev)) / sqrt_2n < stop.eps_x
        fun_small = abs(f_prev - f) / (abs(f_prev) + 1.0) < stop.eps_f
        if step_small and fun_small:
            gradnorm = float(np.linalg.norm(gr.grad))
            feasi = man.check_symplectic(X)
            if feasi > FEASIBILITY_TOL:
                degraded = True
            log(0.0, 0, gradnorm, feasi)
            termination = Termination.STEP_AND_FUN_TOL
            break

    return SolveReport(
        rows=rows,
        termination=termination,
        X=X,
        fun_evals=fe,
        grad_evals=ge,
        runtime=time.perf_counter() - t_start,
        degraded=degraded,
    )
