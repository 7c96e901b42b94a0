"""Spectrum recovery from sub-Nyquist measurements.

Three convex programs over the partial inverse-DFT operator A (AA^H = I):

* basis pursuit denoising:  min ||r||_1        s.t. ||A r - y||_2 <= eta
* weighted group recovery:  min sum w_i||r_i||_2  s.t. ||A r - y||_2 <= eta
  (unit weights give the plain variable-length block-sparse program; a
  plan with every bin its own section degenerates to basis pursuit)
* the enhanced loop: re-solve the group program with weights
  w_i = 1/(p_i + delta), p_i the previous estimate's per-bin l1 mass in
  section i, until successive estimates move less than epsilon.

All programs are solved by consensus ADMM with the splitting r = z:
the r-update projects onto the measurement ball (closed form because the
operator has orthonormal rows), the z-update is the (block) soft
threshold, both matrix-free at O(N log N) per iteration. Measurements are
normalized to unit norm internally, so the penalty parameter is
scale-free and solutions scale exactly linearly with (y, eta).
"""

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels, sampling
from .bandplan import BandPlan

__all__ = [
    "BandPlan",
    "SolverOptions",
    "SpectrumEstimate",
    "ReweightState",
    "NoSparseSolutionError",
    "solve_bpdn",
    "solve_group",
    "update_weights",
    "solve_evlbs",
    "l0_oracle",
]

# absolute floors so the stopping tests stay meaningful when iterates
# shrink toward zero (measurements are unit-norm inside the solver)
_EPS_ABS = 1e-12
_FEAS_SLACK = 1e-3


class NoSparseSolutionError(RuntimeError):
    """Exhaustive support search found no exactly-fitting solution."""


@dataclass(frozen=True)
class SolverOptions:
    """Inner (ADMM) solver controls."""

    max_inner_iters: int = 2000
    inner_tol: float = 1e-6
    admm_rho: float = 1.0
    record_trace: bool = False

    def __post_init__(self):
        if self.max_inner_iters < 1:
            raise ValueError("max_inner_iters must be >= 1")
        if self.inner_tol <= 0:
            raise ValueError("inner_tol must be > 0")
        if self.admm_rho <= 0:
            raise ValueError("admm_rho must be > 0")


@dataclass(frozen=True)
class SpectrumEstimate:
    """Recovered spectrum plus solver diagnostics.

    converged means the primal/dual stopping test fired AND the returned
    iterate is feasible to within eta*(1 + 1e-3) plus a small absolute
    slack (the absolute term covers the eta = 0 equality-fit case).
    """

    r_hat: np.ndarray
    residual_norm: float
    objective: float
    inner_iters_used: int
    converged: bool
    trace: tuple | None = None

    def __post_init__(self):
        self.r_hat.flags.writeable = False


@dataclass(frozen=True)
class ReweightState:
    """State of the reweighting loop after outer iteration ``outer_iter``."""

    weights: np.ndarray
    powers: np.ndarray
    outer_iter: int
    residual_history: tuple = ()
    outer_converged: bool = False
    epsilon: float | None = None


def _zero_estimate(n, record_trace):
    return SpectrumEstimate(
        r_hat=np.zeros(n, dtype=np.complex128),
        residual_norm=0.0,
        objective=0.0,
        inner_iters_used=0,
        converged=True,
        trace=() if record_trace else None,
    )


def _admm_ball(y, pattern, prox, objective, eta, opts, warm=None):
    """Minimize ``objective`` subject to ||A r - y||_2 <= eta.

    prox(v, rho) must return argmin_z objective(z) + (rho/2)||z - v||^2.
    The penalty starts at opts.admm_rho and is rebalanced whenever the
    primal and dual residuals drift apart by more than 10x (doubling or
    halving, with the scaled dual variable adjusted to keep the same
    multiplier), which keeps the tail convergence healthy when the prox
    thresholds span orders of magnitude.

    Returns (estimate, (z, u, rho)) with iterates at the original scale so
    callers can warm-start a follow-up solve against the same y.
    """
    n = pattern.n
    scale = float(np.linalg.norm(y))
    if scale == 0.0:
        est = _zero_estimate(n, opts.record_trace)
        zeros = np.zeros(n, np.complex128)
        return est, (zeros, zeros.copy(), opts.admm_rho)

    yn = y / scale
    etan = eta / scale
    if warm is None:
        rho = opts.admm_rho
        z = np.zeros(n, dtype=np.complex128)
        u = np.zeros(n, dtype=np.complex128)
    else:
        z = warm[0] / scale
        u = warm[1] / scale
        rho = warm[2]

    trace = [] if opts.record_trace else None
    converged = False
    iters = 0
    for k in range(1, opts.max_inner_iters + 1):
        # r-update: project z - u onto the measurement ball. With AA^H = I
        # the least-squares correction lives entirely in range(A^H).
        v = z - u
        d = sampling.forward(v, pattern) - yn
        dn = np.linalg.norm(d)
        if dn > etan:
            r = v - sampling.adjoint(d * (1.0 - etan / dn), pattern)
        else:
            r = v
        # z-update: (block) soft threshold, then dual ascent
        z_prev = z
        z = prox(r + u, rho)
        u = u + r - z

        prim = np.linalg.norm(r - z)
        dual = rho * np.linalg.norm(z - z_prev)
        iters = k
        if trace is not None:
            zres = np.linalg.norm(sampling.forward(z, pattern) - yn)
            trace.append(
                {
                    "iter": k,
                    "objective": float(objective(z) * scale),
                    "primal_resid": float(prim * scale),
                    "dual_resid": float(dual * scale),
                    "eta_slack": float((zres - etan) * scale),
                }
            )
        prim_ok = prim <= opts.inner_tol * max(
            np.linalg.norm(r), np.linalg.norm(z)
        ) + _EPS_ABS
        dual_ok = dual <= opts.inner_tol * rho * np.linalg.norm(u) + _EPS_ABS
        if prim_ok and dual_ok:
            converged = True
            break
        if prim > 10.0 * dual and rho < 1e6:
            rho *= 2.0
            u *= 0.5
        elif dual > 10.0 * prim and rho > 1e-6:
            rho *= 0.5
            u *= 2.0

    # the returned iterate is z; its data residual is within O(inner_tol)
    # of the strictly feasible r-iterate, hence the absolute slack term
    # (which also covers the eta = 0 equality-fit case)
    residual_norm = float(np.linalg.norm(sampling.forward(z, pattern) - yn) * scale)
    feas_abs = 10.0 * opts.inner_tol * max(scale, float(np.linalg.norm(z)) * scale)
    feasible = residual_norm <= eta * (1.0 + _FEAS_SLACK) + feas_abs
    est = SpectrumEstimate(
        r_hat=z * scale,
        residual_norm=residual_norm,
        objective=float(objective(z) * scale),
        inner_iters_used=iters,
        converged=converged and feasible,
        trace=tuple(trace) if trace is not None else None,
    )
    return est, (z * scale, u * scale, rho)


def solve_bpdn(y, pattern, eta, opts=None):
    """l1 recovery with a noise-ball data constraint (eta = 0 gives exact fit)."""
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    opts = opts or SolverOptions()

    def prox(v, rho):
        return kernels.soft_threshold(v, 1.0 / rho)

    def objective(z):
        return np.sum(np.abs(z))

    est, _ = _admm_ball(y, pattern, prox, objective, eta, opts)
    return est


def _solve_group_warm(y, pattern, plan, weights, eta, opts, warm=None):
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    if plan.n != pattern.n:
        raise ValueError(f"plan covers {plan.n} bins, pattern has n={pattern.n}")
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (plan.k,):
        raise ValueError(f"need {plan.k} weights, got shape {w.shape}")
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    starts, stops = plan.starts, plan.stops

    def prox(v, rho):
        return kernels.group_soft_threshold(v, starts, stops, w / rho)

    def objective(z):
        return float(np.dot(w, kernels.section_norms(z, starts, stops)))

    return _admm_ball(y, pattern, prox, objective, eta, opts, warm=warm)


def solve_group(y, pattern, plan, weights, eta, opts=None):
    """Weighted sum-of-section-norms recovery under the noise-ball constraint."""
    opts = opts or SolverOptions()
    est, _ = _solve_group_warm(y, pattern, plan, weights, eta, opts)
    return est


def update_weights(state, estimate, plan, delta):
    """Reweight from the latest estimate: w_i = 1/(p_i + delta).

    p_i is the per-bin l1 mass of section i of the unit-energy-normalized
    estimate (sum of magnitudes divided by the section's bin count). The
    bin-count division keeps wide sections from looking powerful merely by
    being wide, and the energy normalization makes the update independent
    of the overall signal scale, so delta acts as a fixed floor.
    """
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    r = estimate.r_hat
    nrm = np.linalg.norm(r)
    rn = r / nrm if nrm > 0.0 else r
    widths = plan.stops - plan.starts
    p = kernels.section_l1(rn, plan.starts, plan.stops) / widths
    return replace(
        state,
        weights=1.0 / (p + delta),
        powers=p,
        outer_iter=state.outer_iter + 1,
    )


def solve_evlbs(y, pattern, plan, eta, delta, epsilon=None, max_outer=8, opts=None):
    """Iteratively reweighted group recovery.

    Outer iteration 1 is the unit-weight group solve; each later iteration
    reweights from the previous estimate and re-solves (warm-started).
    Stops when ||r_t - r_{t-1}||_2 <= epsilon or at max_outer. When
    epsilon is None it defaults to 0.05 * ||r_1||_2.

    Returns (estimate, state); state carries the final weights, the full
    residual history (entries for t = 2, 3, ...), and the stopping flag.
    """
    if max_outer < 1:
        raise ValueError(f"max_outer must be >= 1, got {max_outer}")
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    if epsilon is not None and epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    opts = opts or SolverOptions()

    state = ReweightState(
        weights=np.ones(plan.k),
        powers=np.zeros(plan.k),
        outer_iter=1,
    )
    est, warm = _solve_group_warm(y, pattern, plan, state.weights, eta, opts)
    eps = 0.05 * float(np.linalg.norm(est.r_hat)) if epsilon is None else epsilon

    merged_trace = None
    if opts.record_trace:
        merged_trace = [dict(rec, outer=1) for rec in est.trace]

    history = []
    outer_converged = False
    r_prev = est.r_hat
    for _ in range(2, max_outer + 1):
        state = update_weights(state, est, plan, delta)
        est, warm = _solve_group_warm(
            y, pattern, plan, state.weights, eta, opts, warm=warm
        )
        if merged_trace is not None:
            merged_trace.extend(
                dict(rec, outer=state.outer_iter) for rec in est.trace
            )
        resid = float(np.linalg.norm(est.r_hat - r_prev))
        history.append(resid)
        r_prev = est.r_hat
        if resid <= eps:
            outer_converged = True
            break

    if merged_trace is not None:
        est = replace(est, trace=tuple(merged_trace))
    state = replace(
        state,
        residual_history=tuple(history),
        outer_converged=outer_converged,
        epsilon=eps,
    )
    return est, state


def l0_oracle(y, dense_op, s_max):
    """Exhaustive sparsest exact fit over supports of size <= s_max.

    Test oracle only: cost is combinatorial, so N <= 20 and s_max <= 4.
    A support fits when its least-squares residual norm is below
    1e-8 * max(1, ||y||).
    """
    m, n = dense_op.shape
    if n > 20:
        raise ValueError(f"l0 oracle limited to N <= 20, got N={n}")
    if s_max > 4:
        raise ValueError(f"l0 oracle limited to s_max <= 4, got {s_max}")
    if len(y) != m:
        raise ValueError(f"operator has M={m} rows, y has length {len(y)}")
    tol = 1e-8 * max(1.0, float(np.linalg.norm(y)))
    if np.linalg.norm(y) <= tol:
        return np.zeros(n, dtype=np.complex128)
    for s in range(1, s_max + 1):
        for support in itertools.combinations(range(n), s):
            cols = dense_op[:, support]
            coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
            if np.linalg.norm(cols @ coef - y) <= tol:
                r = np.zeros(n, dtype=np.complex128)
                r[list(support)] = coef
                return r
    raise NoSparseSolutionError(
        f"no support of size <= {s_max} fits the measurements"
    )
