"""LADMPSAP solvers for cLRSC and the MLAP / LRR baselines.

All three problems share one iteration skeleton over the per-view blocks
``(Z_i, E_i)`` and an optional consensus matrix ``A`` whose row ``i`` is
``vec(Z_i)^T``:

    cLRSC   sum_i ||E_i||_F^2   + lam_i ||Z_i||_*  +  tau ||A||_*
    MLAP    sum_i ||E_i||_{1,2} + lam_i ||Z_i||_*  +  tau ||A||_{1,2}
    LRR     ||E||_{1,2} (or ||E||_F^2) + lam ||Z||_*

each subject to ``X_i = X_i Z_i + E_i``. ``vec`` is column-major throughout.

The Z step is a linearized proximal step with weight ``rho * mu``; ``rho``
must exceed the squared operator norm of ``Z -> (X Z, vec Z)`` for the step to
majorize the augmented Lagrangian.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ContractViolation, NumericalFailure
from .prox import frobenius_error_prox, prox_l12_columns, svt

COUPLINGS = ("nuclear", "l12", None)
ERRORS = ("fro", "l12")


@dataclass
class SolverConfig:
    lambda_per_view: Union[float, Sequence[float]] = 0.5
    tau: float = 0.5
    mu0: float = 1e-2
    mu_max: float = 1e10
    rho: Optional[float] = None  # None -> 1.02 * bound, computed per solve
    gamma0: float = 1.1
    eps1: float = 1e-4
    eps2: float = 1e-4
    max_iters: int = 500

    def lambdas(self, c: int) -> list[float]:
        if np.isscalar(self.lambda_per_view):
            return [float(self.lambda_per_view)] * c
        lams = [float(v) for v in self.lambda_per_view]
        if len(lams) != c:
            raise ContractViolation(f"{len(lams)} lambda values given for {c} views")
        return lams

    def validate(self):
        lams = [self.lambda_per_view] if np.isscalar(self.lambda_per_view) else list(self.lambda_per_view)
        if any(not lam > 0 for lam in lams):
            raise ContractViolation("every lambda must be positive")
        if self.tau < 0:
            raise ContractViolation("tau must be nonnegative")
        if not self.mu0 > 0 or not self.mu_max > self.mu0:
            raise ContractViolation("need 0 < mu0 < mu_max")
        if not self.gamma0 > 1:
            raise ContractViolation("gamma0 must exceed 1")
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise ContractViolation("tolerances must be positive")
        if self.max_iters < 1:
            raise ContractViolation("max_iters must be >= 1")
        if self.rho is not None and not self.rho > 0:
            raise ContractViolation("rho must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        if not np.isscalar(self.lambda_per_view):
            d["lambda_per_view"] = [float(v) for v in self.lambda_per_view]
        return d


@dataclass
class SolverState:
    """Iterates of one solve. ``A`` and ``w`` are ``None`` without a consensus term."""

    X: list
    Z: list
    E: list
    Y: list
    A: Optional[np.ndarray]
    w: Optional[np.ndarray]
    mu: float
    rho: float
    coupling: Optional[str] = "nuclear"
    error: str = "fro"
    iter: int = 0

    def copy(self) -> "SolverState":
        return SolverState(
            X=self.X,
            Z=[z.copy() for z in self.Z],
            E=[e.copy() for e in self.E],
            Y=[y.copy() for y in self.Y],
            A=None if self.A is None else self.A.copy(),
            w=None if self.w is None else self.w.copy(),
            mu=self.mu,
            rho=self.rho,
            coupling=self.coupling,
            error=self.error,
            iter=self.iter,
        )

    @property
    def n_views(self) -> int:
        return len(self.X)


@dataclass
class StopCheck:
    feasibility: list  # ||X_i Z_i - X_i + E_i||_F / ||X_i||_F
    consensus: list  # ||A_(i,:) - vec(Z_i)^T|| / ||X_i||_F
    m: float

    def converged(self, cfg: SolverConfig) -> bool:
        return (
            max(self.feasibility) < cfg.eps1
            and max(self.consensus, default=0.0) < cfg.eps1
            and self.m < cfg.eps2
        )


@dataclass
class Diagnostics:
    iterations: int
    converged: bool
    rho: float
    x_norm: float
    final_mu: float
    history: list = field(default_factory=list)  # (max feasibility, max consensus, m, mu) per iteration


@dataclass
class CoefficientStack:
    Z: list
    A: Optional[np.ndarray]
    diagnostics: Diagnostics
    E: list = field(default_factory=list)


def vec(m: np.ndarray) -> np.ndarray:
    return m.reshape(-1, order="F")


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    return v.reshape(n, n, order="F")


def default_rho(views, coupled: bool) -> float:
    bound = max(np.linalg.norm(X, 2) ** 2 for X in views)
    return 1.02 * (bound + (1.0 if coupled else 0.0))


def init_state(views, cfg: SolverConfig, coupling="nuclear", error="fro") -> SolverState:
    views = [np.asarray(X, dtype=float) for X in views]
    if not views:
        raise ContractViolation("at least one view is required")
    n = views[0].shape[1]
    for i, X in enumerate(views):
        if X.ndim != 2 or X.shape[1] != n:
            raise ContractViolation(f"view {i} has shape {X.shape}, expected N={n} columns")
        if not np.all(np.isfinite(X)):
            raise ContractViolation(f"view {i} contains non-finite entries")
    if coupling not in COUPLINGS or error not in ERRORS:
        raise ContractViolation(f"unknown coupling/error kind {coupling!r}/{error!r}")
    cfg.validate()
    bound = max(np.linalg.norm(X, 2) ** 2 for X in views)
    rho = cfg.rho if cfg.rho is not None else default_rho(views, coupling is not None)
    if not rho > bound:
        raise ContractViolation(f"rho={rho:g} must exceed max ||X_i||_2^2 = {bound:g}")
    c = len(views)
    return SolverState(
        X=views,
        Z=[np.zeros((n, n)) for _ in views],
        E=[np.zeros_like(X) for X in views],
        Y=[np.zeros_like(X) for X in views],
        A=None if coupling is None else np.zeros((c, n * n)),
        w=None if coupling is None else np.zeros((c, n * n)),
        mu=cfg.mu0,
        rho=rho,
        coupling=coupling,
        error=error,
    )


def g_value(state: SolverState, i: int, Z=None) -> float:
    """The smooth part of the Z_i subproblem at ``Z`` (default: current Z_i)."""
    X, mu = state.X[i], state.mu
    Z = state.Z[i] if Z is None else Z
    r = X - X @ Z - state.E[i] + state.Y[i] / mu
    val = 0.5 * mu * np.sum(r * r)
    if state.coupling is not None:
        q = vec(Z) - state.A[i] + state.w[i] / mu
        val += 0.5 * mu * np.sum(q * q)
    return float(val)


def gradient_g(state: SolverState, i: int) -> np.ndarray:
    X, mu = state.X[i], state.mu
    Z = state.Z[i]
    grad = -mu * X.T @ (X - X @ Z - state.E[i] + state.Y[i] / mu)
    if state.coupling is not None:
        grad += unvec(mu * (vec(Z) - state.A[i]) + state.w[i], Z.shape[0])
    return grad


def z_update(state: SolverState, i: int, cfg: SolverConfig) -> np.ndarray:
    step = state.rho * state.mu
    lam = cfg.lambdas(state.n_views)[i]
    return svt(state.Z[i] - gradient_g(state, i) / step, lam / step)


def e_update(state: SolverState, i: int) -> np.ndarray:
    X, mu = state.X[i], state.mu
    r = X - X @ state.Z[i] + state.Y[i] / mu
    if state.error == "fro":
        return frobenius_error_prox(r, mu)
    return prox_l12_columns(r, 1.0 / mu)


def a_update(state: SolverState, cfg: SolverConfig) -> np.ndarray:
    B = np.stack([vec(z) for z in state.Z]) + state.w / state.mu
    if state.coupling == "nuclear":
        return svt(B, cfg.tau / state.mu)
    return prox_l12_columns(B, cfg.tau / state.mu)


def x_norm(state: SolverState) -> float:
    return math.sqrt(sum(float(np.sum(X * X)) for X in state.X))


def stopping_check(state: SolverState, prev: SolverState, cfg: SolverConfig) -> StopCheck:
    feas, cons = [], []
    deltas = []
    for i, X in enumerate(state.X):
        nx = np.linalg.norm(X)
        feas.append(np.linalg.norm(X @ state.Z[i] - X + state.E[i]) / nx)
        if state.A is not None:
            cons.append(np.linalg.norm(state.A[i] - vec(state.Z[i])) / nx)
        deltas.append(np.linalg.norm(state.Z[i] - prev.Z[i]))
        deltas.append(np.linalg.norm(state.E[i] - prev.E[i]))
    if state.A is not None:
        deltas.append(np.linalg.norm(state.A - prev.A))
    m = prev.mu * math.sqrt(state.rho) / x_norm(state) * max(deltas)
    return StopCheck([float(f) for f in feas], [float(c) for c in cons], float(m))


def multiplier_and_mu_update(state: SolverState, m: float, cfg: SolverConfig) -> SolverState:
    mu = state.mu
    for i, X in enumerate(state.X):
        state.Y[i] = state.Y[i] + mu * (X - X @ state.Z[i] - state.E[i])
        if state.w is not None:
            state.w[i] = state.w[i] + mu * (vec(state.Z[i]) - state.A[i])
    gamma = cfg.gamma0 if m < cfg.eps2 else 1.0
    state.mu = min(cfg.mu_max, gamma * mu)
    return state


def _check_iterates(state: SolverState):
    arrays = state.Z + state.E + ([] if state.A is None else [state.A])
    if not all(np.all(np.isfinite(a)) for a in arrays):
        raise NumericalFailure(
            f"non-finite iterate at iteration {state.iter}", iteration=state.iter
        )


def run_ladmpsap(
    views,
    cfg: SolverConfig,
    coupling="nuclear",
    error="fro",
    callback: Optional[Callable[[SolverState], None]] = None,
) -> CoefficientStack:
    """Run the shared iteration until both feasibility tests and the change
    test pass, or ``cfg.max_iters`` is reached (reported, not raised)."""
    state = init_state(views, cfg, coupling, error)
    diag = Diagnostics(iterations=0, converged=False, rho=state.rho, x_norm=x_norm(state), final_mu=state.mu)
    for k in range(cfg.max_iters):
        prev = state.copy()
        state.iter = k + 1
        state.Z = [z_update(prev, i, cfg) for i in range(state.n_views)]
        state.E = [e_update(state, i) for i in range(state.n_views)]
        if coupling is not None:
            state.A = a_update(state, cfg)
        _check_iterates(state)

        check = stopping_check(state, prev, cfg)
        diag.history.append((max(check.feasibility), max(check.consensus, default=0.0), check.m, state.mu))
        diag.iterations = k + 1
        if callback is not None:
            callback(state)
        if check.converged(cfg):
            diag.converged = True
            break
        multiplier_and_mu_update(state, check.m, cfg)
    diag.final_mu = state.mu
    return CoefficientStack(Z=state.Z, A=state.A, diagnostics=diag, E=state.E)


def _views_of(views):
    return views.views if hasattr(views, "views") else list(views)


def solve_clrsc(views, cfg: Optional[SolverConfig] = None, callback=None) -> CoefficientStack:
    """Collaborative low-rank representation: per-view LRR with Frobenius
    error, coupled by a nuclear norm on the stacked coefficients."""
    return run_ladmpsap(_views_of(views), cfg or SolverConfig(), "nuclear", "fro", callback)


def solve_mlap(views, cfg: Optional[SolverConfig] = None, callback=None) -> CoefficientStack:
    """Multi-task low-rank affinity pursuit: column-sparse errors and an l1,2
    coupling across views on every coefficient position."""
    return run_ladmpsap(_views_of(views), cfg or SolverConfig(), "l12", "l12", callback)


def solve_lrr(view, lam: Optional[float] = None, cfg: Optional[SolverConfig] = None, error="l12", callback=None) -> CoefficientStack:
    """Single-view low-rank representation, ``||E|| + lam ||Z||_*``.

    ``error="l12"`` is the column-sparse model; ``"fro"`` uses the squared
    Frobenius error of the collaborative objective.
    """
    cfg = cfg or SolverConfig()
    if lam is not None:
        cfg = SolverConfig(**{**cfg.to_dict(), "lambda_per_view": lam})
    elif not np.isscalar(cfg.lambda_per_view):
        raise ContractViolation("solve_lrr needs a single lambda")
    return run_ladmpsap([view], cfg, None, error, callback)
