"""Energy-minimising power allocation via the method of multipliers.

The problem: choose the transmit power matrix P to minimise traversal
energy subject to a delivered-data floor (D >= D_min, binding at the
optimum and therefore driven as the equality D = D_min) and a
per-segment power budget (column sums of P at most P_T).  The merit
function is the augmented Lagrangian

    phi(P, lam, sigma) = E(P) - lam . h(P) + sigma * h(P) . h(P)

minimised by projected gradient descent in an inner loop, with the
multipliers corrected and the penalty factor grown between cycles
according to how fast the residual norm shrinks:

  (a) ||h_now||_inf >= ||h_prev||_inf        -> grow sigma, keep lam
  (b) sigma grew last cycle, or the norm fell
      below a quarter of the previous one    -> lam <- lam - 2*sigma*h
  (c) otherwise                              -> grow sigma, keep lam

Inside the solver, powers are scaled by P_T and data by D_min so the
residual components are comparable under the max norm; results are
reported in physical units.

Budget handling: the literal formulation states the per-segment budget
as an equality, but enforcing it would pin the energy at P_T times the
traversal time and erase the optimisation gain, so by default the solver
treats budget rows as one-sided caps (residual clipped at zero below the
budget).  ``budget_mode="equality"`` restores the literal behaviour for
study.  The reported KKT residual always refers to the inequality-form
optimality system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .allocators import average_alloc
from .metrics import AllocationMatrix, GainTable, build_gain_table, total_energy
from .scenario import ScenarioConfig, SegmentSchedule, segment_boundaries


class InfeasibleDataFloor(ValueError):
    """The requested data floor exceeds what the full budget can deliver."""


def _linf(v) -> float:
    return float(np.max(np.abs(v))) if np.size(v) else 0.0


@dataclass(frozen=True)
class MultiplierState:
    """Multiplier vector, penalty factor, and solver hyperparameters."""

    lam: np.ndarray          # (2M+N-1,): data row first, then budget rows
    sigma: float = 1.0       # penalty factor, > 0
    gamma_growth: float = 4.0
    alpha_step: float | None = None   # None: backtracking halving from 1
    eps: float = 1e-4        # tolerance on the scaled residual max norm
    n_max: int = 100         # outer cycle cap
    inner_cap: int = 5000    # inner gradient steps per cycle
    eps_inner: float | None = None    # gradient-norm tolerance, defaults to eps
    sigma_grew: bool = False # bookkeeping for case (b); first cycle counts as flat
    converged: bool = False

    def __post_init__(self):
        if self.sigma <= 0 or self.gamma_growth <= 1 or self.eps <= 0:
            raise ValueError("require sigma > 0, gamma_growth > 1, eps > 0")

    @classmethod
    def initial(cls, cfg: ScenarioConfig, **overrides) -> "MultiplierState":
        lam = np.zeros(2 * cfg.num_relays + cfg.num_bins - 1)
        return cls(lam=lam, **overrides)


@dataclass(frozen=True)
class ConstraintResiduals:
    """Signed residuals in physical units: data row then budget rows."""

    h: np.ndarray   # h[0] = D - D_min [bits]; h[j] = colsum_j - P_T [W]

    @property
    def data_residual(self) -> float:
        return float(self.h[0])

    @property
    def budget_residuals(self) -> np.ndarray:
        return self.h[1:]


def data_floor(cfg: ScenarioConfig, sched: SegmentSchedule,
               table: GainTable | None = None) -> float:
    """Data floor [bits]: explicit override, else rho times the average scheme's data."""
    if cfg.d_min_bits is not None:
        return float(cfg.d_min_bits)
    if table is None:
        table = build_gain_table(cfg, sched)
    return cfg.rho * table.total_data(average_alloc(cfg, sched).p)


def constraint_residuals(alloc: AllocationMatrix, cfg: ScenarioConfig,
                         sched: SegmentSchedule, d_min: float,
                         table: GainTable | None = None) -> ConstraintResiduals:
    if table is None:
        table = build_gain_table(cfg, sched)
    h = np.empty(cfg.num_segments + 1)
    h[0] = table.total_data(alloc.p) - d_min
    h[1:] = alloc.column_sums() - cfg.p_t
    return ConstraintResiduals(h=h)


def augmented_lagrangian(alloc: AllocationMatrix, lam: np.ndarray, sigma: float,
                         cfg: ScenarioConfig, sched: SegmentSchedule, d_min: float,
                         table: GainTable | None = None) -> float:
    """Merit function E - lam.h + sigma*h.h with signed residuals (physical units)."""
    h = constraint_residuals(alloc, cfg, sched, d_min, table).h
    return total_energy(alloc, sched) - float(lam @ h) + sigma * float(h @ h)


def grad_augmented_lagrangian(alloc: AllocationMatrix, lam: np.ndarray, sigma: float,
                              cfg: ScenarioConfig, sched: SegmentSchedule, d_min: float,
                              table: GainTable | None = None) -> np.ndarray:
    """Entrywise gradient of the merit function; zero on inactive entries."""
    if table is None:
        table = build_gain_table(cfg, sched)
    h = constraint_residuals(alloc, cfg, sched, d_min, table).h
    dd = table.grad_total_data(alloc.p)                  # bits/W
    g = sched.durations[None, :] \
        + (-lam[0] + 2.0 * sigma * h[0]) * dd \
        + (-lam[1:] + 2.0 * sigma * h[1:])[None, :]
    return np.where(alloc.mask, g, 0.0)


class Problem:
    """Scaled view of one scenario's optimisation problem.

    Holds the precomputed gain table and the normalisation constants;
    powers are handled as x = P / P_T and data as D / D_min.  The merit
    function value, gradient, and residuals are all expressed in these
    scaled units so a single tolerance applies across constraint rows.
    """

    def __init__(self, cfg: ScenarioConfig, sched: SegmentSchedule, d_min: float,
                 table: GainTable | None = None, budget_mode: str = "cap"):
        if budget_mode not in ("cap", "equality"):
            raise ValueError("budget_mode must be 'cap' or 'equality'")
        if d_min <= 0.0:
            raise ValueError("the data floor must be positive")
        self.cfg = cfg
        self.sched = sched
        self.d_min = d_min
        self.table = build_gain_table(cfg, sched) if table is None else table
        self.budget_mode = budget_mode
        self.mask = self.table.mask
        self.t_norm = sched.durations / sched.total_time
        self.p_t = cfg.p_t
        # dD_scaled/dx = (P_T / D_min) * dD/dP
        self._dscale = self.p_t / d_min

    def to_scaled(self, p: np.ndarray) -> np.ndarray:
        return np.where(self.mask, p / self.p_t, 0.0)

    def to_physical(self, x: np.ndarray) -> AllocationMatrix:
        return AllocationMatrix(p=np.where(self.mask, x * self.p_t, 0.0),
                                mask=self.mask)

    def energy_scaled(self, x: np.ndarray) -> float:
        return float(self.t_norm @ x.sum(axis=0))

    def residuals_scaled(self, x: np.ndarray) -> np.ndarray:
        h = np.empty(x.shape[1] + 1)
        h[0] = self.table.total_data(x * self.p_t) / self.d_min - 1.0
        budget = x.sum(axis=0) - 1.0
        h[1:] = budget if self.budget_mode == "equality" else np.maximum(budget, 0.0)
        return h

    def phi(self, x: np.ndarray, lam: np.ndarray, sigma: float) -> float:
        h = self.residuals_scaled(x)
        return self.energy_scaled(x) - float(lam @ h) + sigma * float(h @ h)

    def grad_phi(self, x: np.ndarray, lam: np.ndarray, sigma: float) -> np.ndarray:
        h = self.residuals_scaled(x)
        dd = self.table.grad_total_data(x * self.p_t) * self._dscale
        coef = -lam[1:] + 2.0 * sigma * h[1:]
        if self.budget_mode == "cap":
            # below the cap the clipped budget rows contribute nothing
            coef = np.where(h[1:] > 0.0, coef, 0.0)
        g = self.t_norm[None, :] + (-lam[0] + 2.0 * sigma * h[0]) * dd + coef[None, :]
        return np.where(self.mask, g, 0.0)


@dataclass(frozen=True)
class InnerInfo:
    steps: int
    converged: bool
    reason: str            # "gradient" | "stall" | "cap"
    phi_start: float
    phi_end: float
    monotone: bool
    grad_norm: float


def inner_descent(problem: Problem, p0: AllocationMatrix, lam: np.ndarray,
                  sigma: float, state: MultiplierState) -> tuple[AllocationMatrix, InnerInfo]:
    """Minimise phi(., lam, sigma) by projected gradient descent from p0.

    Steps along d = -grad(phi); after every step, negative entries on the
    active mask are clipped to zero.  The stepsize either backtracks by
    halving from 1 until phi decreases (default) or stays fixed at
    ``state.alpha_step``.  Stops once the projected gradient norm falls
    below the tolerance, on a backtracking stall, or at the step cap; the
    last two flag the result rather than raising.
    """
    tol = state.eps if state.eps_inner is None else state.eps_inner
    x = np.maximum(problem.to_scaled(p0.p), 0.0)
    phi = problem.phi(x, lam, sigma)
    phi_start = phi
    monotone = True
    steps = 0
    converged, reason, gnorm = False, "cap", math.inf

    while steps < state.inner_cap:
        g = problem.grad_phi(x, lam, sigma)
        d = -g
        d[(x <= 0.0) & (d < 0.0)] = 0.0       # projected direction at the bound
        gnorm = float(np.linalg.norm(d))
        if gnorm <= tol:
            converged, reason = True, "gradient"
            break
        if state.alpha_step is not None:
            x_new = np.maximum(x + state.alpha_step * d, 0.0)
            phi_new = problem.phi(x_new, lam, sigma)
            if phi_new > phi:
                monotone = False
        else:
            alpha, phi_new, x_new = 1.0, None, None
            for _ in range(60):
                x_try = np.maximum(x + alpha * d, 0.0)
                phi_try = problem.phi(x_try, lam, sigma)
                if phi_try < phi:
                    x_new, phi_new = x_try, phi_try
                    break
                alpha *= 0.5
            if x_new is None:                  # cannot decrease: numerically stationary
                converged, reason = True, "stall"
                break
        x, phi = x_new, phi_new
        steps += 1

    return problem.to_physical(x), InnerInfo(
        steps=steps, converged=converged, reason=reason,
        phi_start=phi_start, phi_end=phi, monotone=monotone, grad_norm=gnorm,
    )


def update_state(state: MultiplierState, h_now: np.ndarray,
                 h_prev: np.ndarray | None) -> MultiplierState:
    """Apply the between-cycle penalty/multiplier correction rules.

    ``h_prev`` is None on the first cycle, which then counts as a
    multiplier-correction cycle (the penalty factor did not grow before
    it and any finite residual beats an undefined predecessor).
    """
    hinf = _linf(h_now)
    if hinf <= state.eps:
        return replace(state, converged=True)
    prev_inf = _linf(h_prev) if h_prev is not None else math.inf
    if hinf >= prev_inf:                                        # (a)
        return replace(state, sigma=state.gamma_growth * state.sigma, sigma_grew=True)
    if state.sigma_grew or hinf <= 0.25 * prev_inf:             # (b)
        return replace(state, lam=state.lam - 2.0 * state.sigma * h_now,
                       sigma_grew=False)
    return replace(state, sigma=state.gamma_growth * state.sigma, sigma_grew=True)  # (c)


@dataclass(frozen=True)
class CycleRecord:
    cycle: int
    h_inf: float
    sigma: float
    phi: float
    energy_j: float
    inner_steps: int
    inner_reason: str
    monotone: bool


@dataclass(frozen=True)
class SolveResult:
    alloc: AllocationMatrix
    converged: bool
    cycles: int
    d_min: float
    energy_j: float
    data_bits: float
    h_inf: float                   # scaled residual max norm at the solution
    lam: np.ndarray                # multiplier iterate (scaled units)
    lam_hat: np.ndarray            # first-order multiplier estimate lam - 2*sigma*h
    sigma: float
    history: tuple[CycleRecord, ...] = field(repr=False, default=())
    monotone: bool = True


def solve(cfg: ScenarioConfig, sched: SegmentSchedule | None = None,
          init: AllocationMatrix | None = None, d_min: float | None = None,
          state: MultiplierState | None = None, table: GainTable | None = None,
          budget_mode: str = "cap") -> tuple[AllocationMatrix, SolveResult]:
    """Run the full multiplier-penalty loop and return the best allocation.

    Raises :class:`InfeasibleDataFloor` when the floor exceeds the data the
    full-budget average allocation can deliver.  A run that exhausts the
    outer cycle budget returns its best iterate flagged as non-converged.
    """
    if sched is None:
        sched = segment_boundaries(cfg)
    if table is None:
        table = build_gain_table(cfg, sched)
    if d_min is None:
        d_min = data_floor(cfg, sched, table)
    if state is None:
        state = MultiplierState.initial(cfg)

    if d_min <= 0.0:
        # nothing to deliver: the zero matrix is exactly optimal
        zero = AllocationMatrix.zeros(cfg)
        lam = np.zeros(cfg.num_segments + 1)
        result = SolveResult(
            alloc=zero, converged=True, cycles=0, d_min=d_min,
            energy_j=0.0, data_bits=0.0, h_inf=0.0,
            lam=lam, lam_hat=lam, sigma=state.sigma,
        )
        return zero, result

    avg = average_alloc(cfg, sched)
    d_cap = table.total_data(avg.p)
    if d_min > d_cap * (1.0 + 1e-12):
        raise InfeasibleDataFloor(
            f"data floor {d_min:.6g} bits exceeds the {d_cap:.6g} bits deliverable "
            "at the full per-segment budget"
        )

    problem = Problem(cfg, sched, d_min, table, budget_mode=budget_mode)
    current = avg if init is None else init
    history: list[CycleRecord] = []
    h_prev = None
    best = None   # (hinf, energy, alloc, lam_hat, sigma)
    monotone = True

    cycles = 0
    while cycles <= state.n_max:
        current, info = inner_descent(problem, current, state.lam, state.sigma, state)
        monotone = monotone and info.monotone
        x = problem.to_scaled(current.p)
        h_now = problem.residuals_scaled(x)
        hinf = _linf(h_now)
        energy = total_energy(current, sched)
        history.append(CycleRecord(
            cycle=cycles, h_inf=hinf, sigma=state.sigma, phi=info.phi_end,
            energy_j=energy, inner_steps=info.steps, inner_reason=info.reason,
            monotone=info.monotone,
        ))
        lam_hat = state.lam - 2.0 * state.sigma * h_now
        # feasible-enough iterates compete on energy, infeasible ones on residual
        key = (0.0 if hinf <= state.eps else hinf, energy)
        if best is None or key < (best[0], best[1]):
            best = (*key, hinf, current, lam_hat, state.sigma)
        state = update_state(state, h_now, h_prev)
        if state.converged:
            break
        h_prev = h_now
        cycles += 1

    _, _, hinf, alloc, lam_hat, sigma = best
    # guard against marginal overspend: scale any column above the budget back
    sums = alloc.column_sums()
    over = sums > cfg.p_t
    if np.any(over):
        scale = np.where(over, cfg.p_t / np.where(over, sums, 1.0), 1.0)
        alloc = AllocationMatrix(p=alloc.p * scale[None, :], mask=alloc.mask)
        hinf = _linf(problem.residuals_scaled(problem.to_scaled(alloc.p)))

    result = SolveResult(
        alloc=alloc,
        converged=bool(hinf <= state.eps),
        cycles=len(history),
        d_min=d_min,
        energy_j=total_energy(alloc, sched),
        data_bits=table.total_data(alloc.p),
        h_inf=hinf,
        lam=state.lam,
        lam_hat=lam_hat,
        sigma=sigma,
        history=tuple(history),
        monotone=monotone,
    )
    return alloc, result


def kkt_residual(alloc: AllocationMatrix, lam: np.ndarray, cfg: ScenarioConfig,
                 sched: SegmentSchedule, d_min: float,
                 table: GainTable | None = None) -> float:
    """Inequality-form first-order optimality residual, in scaled units.

    ``lam`` follows the solver convention (data multiplier first, budget
    rows negated caps).  The residual is the max of the projected
    stationarity norm, complementary-slackness magnitudes, primal
    violations (data floor, budget caps, nonnegativity), and any
    wrong-signed multiplier excess.
    """
    if table is None:
        table = build_gain_table(cfg, sched)
    problem = Problem(cfg, sched, d_min, table)
    x = problem.to_scaled(alloc.p)
    h0 = table.total_data(alloc.p) / d_min - 1.0
    budget = x.sum(axis=0) - 1.0

    dd = table.grad_total_data(alloc.p) * problem._dscale
    stat = problem.t_norm[None, :] - lam[0] * dd - lam[1:][None, :]
    interior = alloc.mask & (x > 0.0)
    at_bound = alloc.mask & (x <= 0.0)
    stat_res = 0.0
    if np.any(interior):
        stat_res = float(np.max(np.abs(stat[interior])))
    if np.any(at_bound):
        stat_res = max(stat_res, float(np.max(np.maximum(-stat[at_bound], 0.0))))

    mu = -lam[1:]   # budget multipliers in the standard nonnegative sign
    comp = max(abs(lam[0] * h0), _linf(mu * budget))
    primal = max(max(-h0, 0.0), float(np.max(np.maximum(budget, 0.0), initial=0.0)),
                 float(np.max(np.maximum(-x, 0.0), initial=0.0)))
    dual = max(max(-lam[0], 0.0), float(np.max(np.maximum(-mu, 0.0), initial=0.0)))
    return max(stat_res, comp, primal, dual)
