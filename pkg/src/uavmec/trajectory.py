"""SCA trajectory updates for the L-UAVs and the H-UAV.

Every rate that depends on a UAV position is replaced by its first-order
lower bound in the squared horizontal distance phi,

    R_hat(phi) = R(phi_k) + slope_k * (phi - phi_k),

which is concave in the position because the slope is negative.  Each
``D / R`` term is then bounded above by the convex ``D / R_hat``, so the
convexified program is a majoriser of the true slot objective and every
accepted step is a descent step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .allocation import AllocationDecision
from .model import LOG2E
from .problem import SlotProblem
from .solver import ConvexProgram, solve


@dataclass(frozen=True)
class SurrogateRate:
    expansion_phi: float
    rate_at_expansion: float
    slope: float

    def __call__(self, phi):
        return self.rate_at_expansion + self.slope * (np.asarray(phi, dtype=float) - self.expansion_phi)


def surrogate_rate(phi_expansion, bandwidth, tx_power, delta, altitude_gap_sq) -> SurrogateRate:
    """Tangent of ``B log2(1 + P delta / (gap + phi))`` at ``phi_expansion``.

    ``delta`` is the channel gain over the noise power in the link band,
    ``gamma0 / (N0 B)``.
    """
    if min(bandwidth, tx_power, delta, altitude_gap_sq) <= 0 or phi_expansion < 0:
        raise ValueError("surrogate inputs must be positive")
    c = tx_power * delta
    x = altitude_gap_sq + phi_expansion
    rate = bandwidth * np.log2(1.0 + c / x)
    slope = -bandwidth * c * LOG2E / (x * (x + c))
    return SurrogateRate(float(phi_expansion), float(rate), float(slope))


@dataclass
class TrajectoryDecision:
    luav_next: np.ndarray  # (U, 2)
    huav_next: np.ndarray  # (2,)
    luav_traces: list = field(default_factory=list)  # true objective per SCA iterate, per L-UAV
    huav_trace: list = field(default_factory=list)
    flags: set = field(default_factory=set)


@dataclass
class _Links:
    """Inverse surrogate rates ``1 / R_hat_j(p)`` around fixed centres."""

    centres: np.ndarray  # (m, 2)
    r0: np.ndarray
    slope: np.ndarray
    phi0: np.ndarray

    @classmethod
    def expand(cls, centres, p_k, bandwidth, tx_power, gamma0, n0, gap_sq):
        centres = np.asarray(centres, dtype=float).reshape(-1, 2)
        phi0 = np.sum((centres - p_k) ** 2, axis=1)
        c = tx_power * gamma0 / (n0 * bandwidth)
        x = gap_sq + phi0
        r0 = bandwidth * np.log2(1.0 + c / x)
        slope = -bandwidth * c * LOG2E / (x * (x + c))
        return cls(centres, r0, slope, phi0)

    def eval(self, p):
        d = p - self.centres
        r = self.r0 + self.slope * (np.sum(d * d, axis=1) - self.phi0)
        dr = 2.0 * self.slope[:, None] * d
        return r, dr


def _inv_terms(links: _Links, p):
    """h_j = 1/r_j with gradients (m, 2) and Hessians (m, 2, 2)."""
    r, dr = links.eval(p)
    h = 1.0 / r
    gh = -dr / r[:, None] ** 2
    hh = 2.0 * dr[:, :, None] * dr[:, None, :] / r[:, None, None] ** 3
    hh[:, 0, 0] -= 2.0 * links.slope / r ** 2
    hh[:, 1, 1] -= 2.0 * links.slope / r ** 2
    return r, h, gh, hh


def _solve_convexified(links, weights, energy_w, anchor, rows, rhs, rho, p_start,
                       discs, tol):
    """Minimise ``sum_j w_j / R_hat_j(p) + energy_w |p - anchor|^2 + rho . s``.

    ``rows @ (1/R_hat(p)) - s <= rhs`` are the surrogate deadline rows
    (``s >= 0``), ``discs`` a list of (centre, radius) position constraints.
    """
    ns = rows.shape[0]
    n = 2 + ns

    cache = {}

    def base(x):
        # objective, Hessian and constraints are queried at the same point
        key = (x[0], x[1])
        if key not in cache:
            cache.clear()
            cache[key] = (x[:2],) + _inv_terms(links, x[:2])
        return cache[key]

    def objective(x):
        p, r, h, gh, _ = base(x)
        if np.any(r <= 0):
            return np.inf, np.zeros(n)
        d = p - anchor
        val = weights @ h + energy_w * d @ d + rho @ x[2:]
        grad = np.concatenate([weights @ gh + 2 * energy_w * d, rho])
        return val, grad

    def hessian(x):
        _, _, _, _, hh = base(x)
        H = np.zeros((n, n))
        H[:2, :2] = np.tensordot(weights, hh, axes=1) + 2 * energy_w * np.eye(2)
        return H

    nd = len(discs)

    def constraints(x):
        p, r, h, gh, _ = base(x)
        g = np.zeros(nd + ns)
        J = np.zeros((nd + ns, n))
        for i, (c, rad) in enumerate(discs):
            d = p - c
            g[i] = d @ d - rad * rad
            J[i, :2] = 2 * d
        if ns:
            if np.any(r <= 0):
                g[nd:] = np.inf
            else:
                g[nd:] = rows @ h - x[2:] - rhs
                J[nd:, :2] = rows @ gh
                J[nd:, 2:] = -np.eye(ns)
        return g, J

    def constraint_hessian(x, w):
        H = np.zeros((n, n))
        H[:2, :2] = 2 * np.sum(w[:nd]) * np.eye(2)
        if ns:
            _, _, _, _, hh = base(x)
            H[:2, :2] += np.tensordot(w[nd:] @ rows, hh, axes=1)
        return H

    x0 = np.concatenate([p_start, np.zeros(ns)])
    if ns:
        _, _, h, _, _ = base(x0)
        need = rows @ h - rhs
        x0[2:] = np.maximum(need, 0.0) + 1e-3 * (1.0 + np.abs(rhs))
    scale = max(1.0, abs(objective(x0)[0]))

    def scaled(x):
        val, grad = objective(x)
        return val / scale, grad / scale

    prog = ConvexProgram(n, scaled, lambda x: hessian(x) / scale,
                         lower=np.r_[-np.inf, -np.inf, np.zeros(ns)],
                         constraints=constraints, constraint_hessian=constraint_hessian)
    rep = solve(prog, x0, tol=tol, t0=100.0, mu=20.0)
    return rep.solution[:2]


def _sca(true_obj, build, p_init, prev, radius, cfg):
    """Generic SCA loop for one 2-D position.

    ``true_obj(p)`` returns the slot objective and the part of it that
    depends on this position (the block objective, which sets the relative
    stopping tolerance).  ``build(p_k)`` returns the arguments of
    :func:`_solve_convexified`
    (without the discs and start).  Each iteration first solves with the
    deadline rows that are late at ``p_k`` folded into the objective as
    linear terms and the others dropped; that program lies below the
    convexified one, so its minimiser is also the convexified minimiser when
    no row changes side, and only otherwise is the full program solved.
    Returns the best position and the trace of accepted true objectives.
    """
    p_k = np.array(p_init, dtype=float)
    best, _ = true_obj(p_k)
    trace = [best]
    if radius <= 0:
        return p_k, trace
    trust = min(radius, cfg.trust_radius)
    for _ in range(cfg.sca_max_iter):
        discs = [(prev, radius), (p_k, trust)]
        start = 0.5 * (prev + p_k)
        links, weights, energy_w, anchor, rows, rhs, rho = build(p_k)
        late = rows @ (1.0 / links.eval(p_k)[0]) > rhs
        folded = weights + rho[late] @ rows[late]
        p_new = _solve_convexified(links, folded, energy_w, anchor, rows[:0], rhs[:0], rho[:0],
                                   start, discs, cfg.solver_tol)
        if rows.shape[0]:
            r, _ = links.eval(p_new)
            t = rows @ (1.0 / r) if np.all(r > 0) else np.full(rhs.size, np.inf)
            if np.any(t[late] < rhs[late]) or np.any(t[~late] > rhs[~late]):
                p_new = _solve_convexified(links, weights, energy_w, anchor, rows, rhs, rho,
                                           start, discs, cfg.solver_tol)
        # the barrier keeps iterates strictly inside; clip round-off anyway
        d = p_new - prev
        dist = np.hypot(*d)
        if dist > radius:
            p_new = prev + d * (radius / dist)
        val, block = true_obj(p_new)
        if not val < best:
            break
        gain = best - val
        p_k, best = p_new, val
        trace.append(val)
        if gain < cfg.sca_rel_tol * abs(block):
            break
    return p_k, trace


def solve_subproblem2(problem: SlotProblem, decision: AllocationDecision, luav, backup):
    """SCA update of every L-UAV position with allocation and H-UAV fixed.

    The slot objective separates across L-UAVs, so each one is updated on its
    own; its block contains the uplink delays of its vehicles, its relay
    delay and energy towards the H-UAV, and its flight energy.
    """
    cfg = problem.cfg
    luav = np.array(luav, dtype=float)
    backup = np.asarray(backup, dtype=float)
    alpha, f_lu, f_hu = decision.alpha, decision.f_lu, decision.f_hu
    k = problem.k
    with np.errstate(divide="ignore", invalid="ignore"):
        comp = np.where(alpha > 0, problem.W * alpha / f_lu, 0.0) + \
            np.where(alpha < 1, problem.W * (1 - alpha) / f_hu, 0.0)
    traces = []
    for u in range(problem.n_u):
        idx = np.flatnonzero(problem.assoc == u)
        prev = problem.prev_luav[u]
        q = problem.queues[u]

        def true_obj(p, u=u, idx=idx, q=q):
            trial = luav.copy()
            trial[u] = p
            br = problem.evaluate(alpha, f_lu, f_hu, trial, backup)
            relay = problem.D[idx] * (1 - alpha[idx]) / br.r_lu2hu[u]
            late = np.maximum(br.delays[idx] - problem.tau[idx], 0.0)
            block = k * np.sum(problem.D[idx] / br.r_v2lu[idx] + relay) + \
                q * (br.e_tr[u] + br.e_flight[u]) + problem.rho[idx] @ late
            return br.objective, block

        if idx.size == 0 and q == 0:
            traces.append([true_obj(luav[u])[0]])
            continue
        relay_bits = problem.D[idx] * (1 - alpha[idx])
        hard = idx[problem.rho[idx] > 0]
        hard_pos = np.searchsorted(idx, hard)

        def build(p_k, idx=idx, q=q, relay_bits=relay_bits, hard=hard, hard_pos=hard_pos):
            v_links = _Links.expand(problem.snap.vehicle_positions[idx], p_k, cfg.b_v2lu,
                                    cfg.p_vehicle, cfg.gamma0, cfg.n0, cfg.h1 ** 2)
            h_link = _Links.expand(backup[None, :], p_k, cfg.b_lu2hu, cfg.p_luav,
                                   cfg.gamma0, cfg.n0, problem.backup.altitude_gap_sq)
            links = _Links(np.vstack([v_links.centres, h_link.centres]),
                           np.r_[v_links.r0, h_link.r0], np.r_[v_links.slope, h_link.slope],
                           np.r_[v_links.phi0, h_link.phi0])
            weights = np.r_[k * problem.D[idx], (k + q * cfg.p_luav) * relay_bits.sum()]
            energy_w = q * 0.5 * cfg.mass_luav / cfg.slot_len
            m = idx.size + 1
            if hard.size == 0:
                rows, rhs, rho = np.zeros((0, m)), np.zeros(0), np.zeros(0)
            else:
                rows = np.zeros((hard.size, m))
                rows[np.arange(hard.size), hard_pos] = problem.D[hard]
                rows[:, -1] = relay_bits[hard_pos]
                rhs = problem.tau[hard] - comp[hard]
                rho = problem.rho[hard]
            return links, weights, energy_w, prev, rows, rhs, rho

        p, trace = _sca(true_obj, build, luav[u], prev, cfg.s_luav_max * cfg.slot_len, cfg)
        luav[u] = p
        traces.append(trace)
    return luav, traces


def solve_subproblem3(problem: SlotProblem, decision: AllocationDecision, luav, backup):
    """SCA update of the upper-tier server position (held if it cannot move
    or nothing is offloaded to it)."""
    cfg = problem.cfg
    luav = np.asarray(luav, dtype=float)
    backup = np.array(backup, dtype=float)
    alpha, f_lu, f_hu = decision.alpha, decision.f_lu, decision.f_hu
    k = problem.k
    prev = problem.prev_backup

    relay_bits = problem.D * (1 - alpha)

    def true_obj(p):
        br = problem.evaluate(alpha, f_lu, f_hu, luav, p)
        relay = relay_bits / br.r_lu2hu[problem.assoc]
        block = k * relay.sum() + problem.queues @ br.e_tr + \
            problem.rho @ np.maximum(br.delays - problem.tau, 0.0)
        return br.objective, block

    load = np.bincount(problem.assoc, relay_bits, minlength=problem.n_u)
    radius = problem.backup.speed_max * cfg.slot_len
    if not np.any(load > 0) or radius <= 0:
        return backup, [true_obj(backup)[0]]

    r_vu, _ = problem.rates(luav, backup)
    with np.errstate(divide="ignore", invalid="ignore"):
        fixed = problem.D / r_vu + np.where(alpha > 0, problem.W * alpha / f_lu, 0.0) + \
            np.where(alpha < 1, problem.W * (1 - alpha) / f_hu, 0.0)
    active = np.flatnonzero(load > 0)
    hard = np.flatnonzero((problem.rho > 0) & (relay_bits > 0))
    col = {u: i for i, u in enumerate(active)}

    def build(p_k):
        links = _Links.expand(luav[active], p_k, cfg.b_lu2hu, cfg.p_luav, cfg.gamma0, cfg.n0,
                              problem.backup.altitude_gap_sq)
        weights = (k + problem.queues[active] * cfg.p_luav) * load[active]
        if hard.size == 0:
            rows, rhs, rho = np.zeros((0, active.size)), np.zeros(0), np.zeros(0)
        else:
            rows = np.zeros((hard.size, active.size))
            rows[np.arange(hard.size), [col[u] for u in problem.assoc[hard]]] = relay_bits[hard]
            rhs = problem.tau[hard] - fixed[hard]
            rho = problem.rho[hard]
        return links, weights, 0.0, prev, rows, rhs, rho

    return _sca(true_obj, build, backup, prev, radius, cfg)


def solve_trajectories(problem: SlotProblem, decision: AllocationDecision, luav, backup,
                       move_luav=True) -> TrajectoryDecision:
    if move_luav:
        luav, l_traces = solve_subproblem2(problem, decision, luav, backup)
    else:
        l_traces = []
    backup, h_trace = solve_subproblem3(problem, decision, luav, backup)
    return TrajectoryDecision(np.asarray(luav), np.asarray(backup), l_traces, h_trace)
