"""Per-batch power allocation: minimize importance-weighted outage on a budget.

The problem is min_{p >= 0, sum p = P} sum_i w_i * (1 - exp(-c/p_i)). Each
term is convex only where p_i > c/2, so the landscape splits in two regimes:

* budget rich enough that every active frame can sit on the convex branch:
  the first-order system w_i * (c/p_i^2) * exp(-c/p_i) = lambda has a unique
  root per frame for p_i >= c/2, and an outer bisection on lambda meets the
  budget (``allocate_kkt``);
* budget too small for that: the optimum abandons low-weight frames entirely
  (marginal value of the first watt in deep outage is ~0), which projected
  gradient descent with multiple starts plus a greedy support-pruning chain
  hunts down (``allocate_pg``).

``allocate`` runs both and never returns anything worse than the equal split.
``allocate_grid_oracle`` is the independent exhaustive check for tiny N; it
shares nothing with the solvers beyond the objective definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelParams
from .errors import LengthMismatchError

BUDGET_RTOL = 1e-9
# Inner root bracket p in [c/2, c*1e6], expressed in u = c/p.
_U_MIN = 1e-6
_U_MAX = 2.0
_INNER_ITERS = 14
_OUTER_ITERS = 64

# psi(u) = u^2 exp(-u) is increasing on (0, 2]; the grid seeds tight brackets
# for the inner root solve.
_U_GRID = np.linspace(_U_MIN, _U_MAX, 2049)
_PSI_GRID = _U_GRID * _U_GRID * np.exp(-_U_GRID)


@dataclass
class Allocation:
    """Per-frame powers summing to the budget, with the achieved objective."""

    powers: np.ndarray
    total: float
    objective: float
    method: str  # kkt | pg | oracle | equal

    def __post_init__(self):
        self.powers = np.asarray(self.powers, dtype=float)
        if np.any(self.powers < 0):
            raise ValueError("powers must be nonnegative")
        slack = abs(float(self.powers.sum()) - self.total)
        if slack > BUDGET_RTOL * max(self.total, 1e-300):
            raise ValueError(
                f"powers sum to {self.powers.sum()}, budget is {self.total}"
            )


@dataclass
class SolverReport:
    iterations: int = 0
    restarts: int = 0
    residual: float = 0.0
    converged: bool = False


def _weights_array(weights) -> np.ndarray:
    w = np.asarray(getattr(weights, "weights", weights), dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a nonempty vector")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("weights must be finite and nonnegative")
    return w


def _phi(p: np.ndarray, c: float) -> np.ndarray:
    """Marginal outage decrease (c/p^2) * exp(-c/p); 0 at p = 0 (its limit)."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    m = p > 0
    pm = p[m]
    out[m] = np.exp(-c / pm + math.log(c) - 2.0 * np.log(pm))
    return out


def _objective(w: np.ndarray, p: np.ndarray, c: float) -> float:
    out = np.ones_like(p)
    m = p > 0
    out[m] = -np.expm1(-c / p[m])
    return float(w @ out)


def weighted_outage(weights, powers, params: ChannelParams) -> float:
    """sum_i w_i * outage(p_i) for aligned weight and power vectors."""
    w = _weights_array(weights)
    p = np.asarray(getattr(powers, "powers", powers), dtype=float)
    if w.size != p.size:
        raise LengthMismatchError(f"{w.size} weights vs {p.size} powers")
    if np.any(p < 0):
        raise ValueError("powers must be nonnegative")
    return _objective(w, p, params.c)


def project_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x = total}, sort-and-threshold."""
    if total < 0:
        raise ValueError("total must be nonnegative")
    v = np.asarray(v, dtype=float)
    if total == 0:
        return np.zeros_like(v)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(v - tau, 0.0)


def _order_repair(w: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Reassign the power multiset so larger weights get larger powers.

    By the rearrangement inequality this never increases the objective, and it
    makes the monotonicity guarantee hold for strictly ordered weights.
    """
    order = np.argsort(w, kind="stable")
    out = np.empty_like(p)
    out[order] = np.sort(p)
    return out


def _branch_powers(lam: float, w_act: np.ndarray, c: float) -> np.ndarray:
    """Per-frame roots of w * (c/p^2) * exp(-c/p) = lam on the branch p >= c/2.

    In u = c/p the equation is psi(u) = u^2 exp(-u) = lam*c/w with psi
    increasing on (0, 2], so u lives in [1e-6, 2] (p in [c/2, c*1e6]). A grid
    lookup seeds a tight bracket and safeguarded Newton polishes all frames at
    once; targets below the bracket clamp to the p = c*1e6 end.
    """
    t = np.clip(lam * c / w_act, _PSI_GRID[0], _PSI_GRID[-1])
    idx = np.clip(np.searchsorted(_PSI_GRID, t), 1, _U_GRID.size - 1)
    lo = _U_GRID[idx - 1]
    hi = _U_GRID[idx]
    u = 0.5 * (lo + hi)
    for _ in range(_INNER_ITERS):
        e = np.exp(-u)
        f = u * u * e - t
        below = f < 0
        lo = np.where(f <= 0, u, lo)
        hi = np.where(~below, u, hi)  # exact hits collapse the bracket
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = u - f / (e * u * (2.0 - u))
        interior = np.isfinite(newton) & (newton > lo) & (newton < hi)
        u = np.where(interior, newton, 0.5 * (lo + hi))
    # two clamped Newton steps finish off any frame the hybrid loop left at
    # bisection precision (the step is clipped into the retained bracket)
    for _ in range(2):
        e = np.exp(-u)
        f = u * u * e - t
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = u - f / (e * u * (2.0 - u))
        u = np.clip(np.where(np.isfinite(newton), newton, u), lo, hi)
    return c / u


def _kkt_core(w_act: np.ndarray, p_total: float, c: float):
    """Solve the all-active stationarity system on the convex branch.

    Returns (powers, lambda, residual, evals) or None when no lambda puts all
    active frames at or beyond c/2 within the budget (the nonconvex regime).
    """
    peaks = w_act * (4.0 / c) * math.exp(-2.0)
    lam_cap = float(peaks.min())
    lam_lo = 1e-18 * float(peaks.max())

    def total_at(lam: float) -> float:
        return float(_branch_powers(lam, w_act, c).sum())

    if total_at(lam_cap) > p_total * (1 + 1e-12):
        return None
    evals = 2
    if total_at(lam_lo) < p_total:
        # Budget beyond the p <= c*1e6 bracket; powers saturate and rescale.
        lam = lam_lo
    else:
        lo, hi = lam_lo, lam_cap  # total_at(lo) >= P >= total_at(hi)
        for _ in range(_OUTER_ITERS):
            mid = math.sqrt(lo * hi)
            if total_at(mid) > p_total:
                lo = mid
            else:
                hi = mid
            evals += 1
        lam = math.sqrt(lo * hi)
    p = _branch_powers(lam, w_act, c)
    p *= p_total / p.sum()
    residual = float(np.max(np.abs(w_act * _phi(p, c) - lam)))
    return p, lam, residual, evals


def _scatter(n: int, active: np.ndarray, p_act: np.ndarray) -> np.ndarray:
    p = np.zeros(n)
    p[active] = p_act
    return p


def _validate_problem(weights, p_total: float) -> np.ndarray:
    w = _weights_array(weights)
    if not np.any(w > 0):
        raise ValueError("all weights are zero; the allocation problem is vacuous")
    if not p_total > 0:
        raise ValueError(f"p_total must be positive, got {p_total}")
    return w


def allocate_equal(n: int, p_total: float, weights=None, params: ChannelParams | None = None) -> Allocation:
    """The equal-priority baseline p_i = P/N.

    The objective is filled in when weights and params are supplied, else NaN.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if p_total < 0:
        raise ValueError(f"p_total must be nonnegative, got {p_total}")
    p = np.full(n, p_total / n)
    obj = float("nan")
    if weights is not None and params is not None:
        obj = weighted_outage(weights, p, params)
    return Allocation(p, p_total, obj, "equal")


def allocate_kkt(weights, p_total: float, params: ChannelParams, tol: float = 1e-8,
                 *, restarts: int = 8, max_iters: int = 10_000, seed: int = 0):
    """Stationarity solver: outer bisection on lambda, inner branch roots.

    Zero-weight frames get zero power. When the all-active interior system is
    infeasible (budget below the convex branch), the result comes from
    ``allocate_pg`` and the report carries converged=False for the KKT path.
    """
    w = _validate_problem(weights, p_total)
    c = params.c
    active = w > 0
    core = _kkt_core(w[active], p_total, c)
    if core is None:
        alloc, rep = allocate_pg(w, p_total, params, restarts=restarts, tol=tol,
                                 max_iters=max_iters, seed=seed)
        return alloc, replace(rep, converged=False)
    p_act, lam, residual, evals = core
    p = _scatter(w.size, active, p_act)
    p = _order_repair(w, p)
    alloc = Allocation(p, p_total, _objective(w, p, c), "kkt")
    return alloc, SolverReport(iterations=evals, restarts=0, residual=residual,
                               converged=residual <= tol)


def _descend(p0: np.ndarray, w: np.ndarray, p_total: float, c: float, max_iters: int):
    """Projected gradient descent with Armijo backtracking on the scaled simplex.

    Stops on a tiny projected step or a stalled objective; the caller snaps
    the winner onto the exact stationary point of its support afterwards, so
    the descent only has to settle the support and the basin.
    """
    p = project_simplex(p0, p_total)
    obj = _objective(w, p, c)
    g = -w * _phi(p, c)
    gmax = float(np.max(np.abs(g)))
    eta = (p_total / p.size) / gmax if gmax > 0 else p_total
    step_tol = 1e-8 * p_total
    iters = 0
    stalled = 0
    converged = False
    while iters < max_iters:
        iters += 1
        accepted = False
        for _ in range(64):
            cand = project_simplex(p - eta * g, p_total)
            d = cand - p
            dn = float(d @ d)
            if dn == 0.0:
                break
            obj_c = _objective(w, cand, c)
            if obj_c <= obj + float(g @ d) + 0.5 * dn / eta + 1e-15 * (1.0 + abs(obj)):
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            converged = True  # no productive step exists: stationary
            break
        stalled = stalled + 1 if obj - obj_c <= 1e-14 * (1.0 + abs(obj)) else 0
        p, obj = cand, obj_c
        g = -w * _phi(p, c)
        gmax = float(np.max(np.abs(g)))
        # cap the step so projection inputs stay within ~1e4 * budget;
        # beyond that, float granularity would erode the budget equality
        eta = min(eta * 2.0, 1e4 * p_total / gmax) if gmax > 0 else eta * 2.0
        if math.sqrt(dn) <= step_tol or stalled >= 8:
            converged = True
            break
    return p, obj, iters, converged


def allocate_pg(weights, p_total: float, params: ChannelParams, restarts: int = 8,
                tol: float = 1e-8, max_iters: int = 10_000, seed: int = 0):
    """Multi-start projected gradient with greedy support pruning.

    Starts: the equal split, the importance-proportional point, and seeded
    multiplicative perturbations of the proportional point. The pruning chain
    then repeatedly zeroes the lowest-weight active frame, redistributes its
    power, and re-solves (subset stationarity when feasible, plus a short
    descent), so budget-starved optima that abandon frames are reachable. The
    best objective wins; ties go to the earliest candidate.
    """
    w = _validate_problem(weights, p_total)
    c = params.c
    n = w.size
    active = w > 0
    wa = w[active]
    na = int(wa.size)

    candidates = []  # (objective, insertion order, active-frame powers, converged)
    total_iters = 0

    def record(p_act, obj, iters, converged):
        nonlocal total_iters
        total_iters += iters
        candidates.append((obj, len(candidates), p_act, converged))

    starts = [np.full(na, p_total / na), p_total * wa / wa.sum()]
    for k in range(2, max(restarts, 2)):
        rng = np.random.default_rng([seed, k])
        jitter = 1.0 + 0.5 * (2.0 * rng.random(na) - 1.0)
        pert = wa * jitter
        starts.append(p_total * pert / pert.sum())
    for s in starts[: max(restarts, 1)]:
        p_act, obj, iters, conv = _descend(s, wa, p_total, c, max_iters)
        record(p_act, obj, iters, conv)

    # Greedy support pruning along ascending weight (stable ties).
    best = min(candidates, key=lambda cnd: (cnd[0], cnd[1]))
    current = best[2].copy()
    alive = np.ones(na, dtype=bool)
    for j in np.argsort(wa, kind="stable")[:-1]:
        alive[j] = False
        cur = current.copy()
        cur[j] = 0.0
        live_mass = cur.sum()
        if live_mass > 1e-300:
            cur *= p_total / live_mass
        else:
            cur = np.where(alive, p_total / alive.sum(), 0.0)
        round_best = None
        sub = _kkt_core(wa[alive], p_total, c)
        if sub is not None:
            p_sub = np.zeros(na)
            p_sub[alive] = sub[0]
            obj_sub = _objective(wa, p_sub, c)
            record(p_sub, obj_sub, sub[3], True)
            round_best = (obj_sub, p_sub)
        p_act, obj, iters, conv = _descend(cur, wa, p_total, c, min(max_iters, 1200))
        record(p_act, obj, iters, conv)
        if round_best is None or obj < round_best[0]:
            round_best = (obj, p_act)
        current = round_best[1].copy()

    obj_w, _, p_w, conv_w = min(candidates, key=lambda cnd: (cnd[0], cnd[1]))

    # Snap onto the exact stationary point of the winning support when the
    # subset system is feasible; this also pins scale invariance down.
    support = p_w > 1e-12 * p_total
    if support.any():
        if int(support.sum()) == 1:
            p_snap = np.zeros(na)
            p_snap[support] = p_total
            obj_snap = _objective(wa, p_snap, c)
            if obj_snap <= obj_w + 1e-12 * (1.0 + abs(obj_w)):
                p_w, obj_w, conv_w = p_snap, obj_snap, True
        else:
            sub = _kkt_core(wa[support], p_total, c)
            if sub is not None:
                p_snap = np.zeros(na)
                p_snap[support] = sub[0]
                obj_snap = _objective(wa, p_snap, c)
                if obj_snap <= obj_w + 1e-12 * (1.0 + abs(obj_w)):
                    p_w, obj_w, conv_w = p_snap, obj_snap, True

    p = _scatter(n, active, p_w)
    p = _order_repair(w, p)
    obj_final = _objective(w, p, c)

    sup = p > 0
    if int(sup.sum()) > 1:
        marg = w[sup] * _phi(p[sup], c)
        lam_est = float(np.median(marg))
        residual = float(np.max(np.abs(marg - lam_est)))
    else:
        residual = 0.0
    alloc = Allocation(p, p_total, obj_final, "pg")
    return alloc, SolverReport(iterations=total_iters, restarts=max(restarts, 1),
                               residual=residual, converged=conv_w)


def allocate_grid_oracle(weights, p_total: float, params: ChannelParams,
                         resolution: float = 1e-3) -> Allocation:
    """Exhaustive search over the discretized simplex (step resolution*P).

    Independent verification oracle for N <= 4; complexity is
    O((1/resolution)^(N-1)) grid points, evaluated via an outage lookup table.
    """
    w = _weights_array(weights)
    n = w.size
    if n > 4:
        raise ValueError(f"grid oracle supports N <= 4, got N = {n}")
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    if not p_total > 0:
        raise ValueError(f"p_total must be positive, got {p_total}")
    c = params.c
    m = int(round(1.0 / resolution))
    step = p_total / m
    lut = np.ones(m + 1)
    ks = np.arange(1, m + 1, dtype=float)
    lut[1:] = -np.expm1(-c / (ks * step))

    if n == 1:
        return Allocation(np.array([p_total]), p_total, _objective(w, np.array([p_total]), c), "oracle")

    best_obj = math.inf
    best_k = None
    if n == 2:
        k0 = np.arange(m + 1)
        obj = w[0] * lut[k0] + w[1] * lut[m - k0]
        i = int(np.argmin(obj))
        best_obj, best_k = float(obj[i]), (i, m - i)
    elif n == 3:
        for a in range(m + 1):
            k1 = np.arange(m - a + 1)
            obj = w[0] * lut[a] + w[1] * lut[k1] + w[2] * lut[m - a - k1]
            i = int(np.argmin(obj))
            if obj[i] < best_obj:
                best_obj, best_k = float(obj[i]), (a, i, m - a - i)
    else:
        for a in range(m + 1):
            for b in range(m - a + 1):
                k2 = np.arange(m - a - b + 1)
                obj = w[0] * lut[a] + w[1] * lut[b] + w[2] * lut[k2] + w[3] * lut[m - a - b - k2]
                i = int(np.argmin(obj))
                if obj[i] < best_obj:
                    best_obj, best_k = float(obj[i]), (a, b, i, m - a - b - i)

    powers = np.array(best_k, dtype=float) * step
    return Allocation(powers, p_total, best_obj, "oracle")


def allocate(weights, p_total: float, params: ChannelParams, *, tol: float = 1e-8,
             restarts: int = 8, max_iters: int = 10_000, seed: int = 0):
    """Front door: KKT when it converges and is competitive, projected
    gradient otherwise, and never worse than the equal split."""
    w = _validate_problem(weights, p_total)
    c = params.c

    active = w > 0
    core = _kkt_core(w[active], p_total, c)
    kkt_alloc = None
    kkt_rep = None
    if core is not None:
        p_act, lam, residual, evals = core
        p = _order_repair(w, _scatter(w.size, active, p_act))
        kkt_alloc = Allocation(p, p_total, _objective(w, p, c), "kkt")
        kkt_rep = SolverReport(iterations=evals, residual=residual, converged=residual <= tol)

    pg_alloc, pg_rep = allocate_pg(w, p_total, params, restarts=restarts, tol=tol,
                                   max_iters=max_iters, seed=seed)

    if kkt_alloc is not None and kkt_rep.converged and kkt_alloc.objective <= pg_alloc.objective + tol:
        chosen, report = kkt_alloc, kkt_rep
    else:
        chosen, report = pg_alloc, pg_rep

    equal = allocate_equal(w.size, p_total, w, params)
    if equal.objective < chosen.objective:
        chosen, report = equal, SolverReport(iterations=0, residual=0.0, converged=True)
    return chosen, report
