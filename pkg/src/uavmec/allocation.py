"""Task split ratios and CPU frequency allocation for fixed UAV positions.

For fixed split ratios the frequency problem is convex; for fixed
frequencies the objective is piecewise affine in each ratio, so the exact
minimiser sits at 0, 1 or the point where the task just meets its deadline.
The two are alternated until the objective stalls.

Frequencies are handled internally in GHz and workloads in Gcycles so the
Newton systems stay well scaled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .problem import SlotProblem
from .solver import ConvexProgram, InfeasibleProblem, bisect, solve

GIGA = 1e9


@dataclass
class AllocationDecision:
    alpha: np.ndarray
    f_lu: np.ndarray  # Hz
    f_hu: np.ndarray  # Hz
    objective: float = np.nan
    trace: list = field(default_factory=list)
    late: np.ndarray = None  # tasks expected to miss their deadline
    flags: set = field(default_factory=set)


def _cubic_alloc(L, k, q_kappa, cap):
    """Frequencies minimising sum K L/a + q kappa L a^2 subject to sum a <= cap."""
    free = (k / (2.0 * q_kappa)) ** (1.0 / 3.0)
    if free * L.size <= cap:
        return np.full(L.size, free)

    def freqs(lam):
        # root of 2 q kappa a^3 + (lam / L) a^2 - K = 0, Newton from above
        a = np.full(L.size, free)
        c = lam / L
        for _ in range(60):
            g = 2 * q_kappa * a ** 3 + c * a ** 2 - k
            step = g / (6 * q_kappa * a ** 2 + 2 * c * a)
            a = a - step
            if np.all(np.abs(step) <= 1e-13 * a):
                break
        return a

    hi = k * np.sum(np.sqrt(L)) ** 2 / cap ** 2
    lam = bisect(lambda lam: freqs(lam).sum() - cap, 0.0, hi, tol=1e-14 * max(hi, 1.0))
    a = freqs(lam)
    return a * min(1.0, cap / a.sum())


def _closed_form(problem: SlotProblem, L, H, l_idx, h_idx):
    """Minimiser of the frequency problem with deadline rows dropped."""
    cfg = problem.cfg
    a = np.zeros(l_idx.size)
    owner = problem.assoc[l_idx]
    for u in np.unique(owner):
        sel = owner == u
        Lu = L[sel]
        cap = cfg.f_luav_cap / GIGA
        q = problem.queues[u]
        if q > 0:
            a[sel] = _cubic_alloc(Lu, problem.k, q * problem.kappa_g, cap)
        else:
            a[sel] = cap * np.sqrt(Lu) / np.sqrt(Lu).sum()
    b = np.zeros(h_idx.size)
    if h_idx.size:
        b = problem.backup.f_cap / GIGA * np.sqrt(H) / np.sqrt(H).sum()
    return a, b


def _fixed_delay(problem: SlotProblem, alpha, r_vu, r_uh):
    return problem.D / r_vu + problem.D * (1 - alpha) / r_uh[problem.assoc]


def optimize_f_given_alpha(problem: SlotProblem, alpha, luav, backup, prev=None):
    """Optimal (f_lu, f_hu) in Hz for fixed split ratios and positions.

    Vehicles with ``alpha == 0`` get no L-UAV frequency and vice versa.  When
    ``prev`` frequencies are given, the better of the new and previous
    allocation is returned, so calling this inside a descent loop never
    increases the objective.  Raises :class:`InfeasibleProblem` if a hard
    energy cap cannot be met at these ratios.
    """
    cfg = problem.cfg
    alpha = np.asarray(alpha, dtype=float)
    r_vu, r_uh = problem.rates(luav, backup)
    l_idx = np.flatnonzero(alpha > 0)
    h_idx = np.flatnonzero(alpha < 1)
    L = problem.W[l_idx] * alpha[l_idx] / GIGA
    H = problem.W[h_idx] * (1 - alpha[h_idx]) / GIGA
    a, b = _closed_form(problem, L, H, l_idx, h_idx)

    slack = problem.tau - _fixed_delay(problem, alpha, r_vu, r_uh)
    s_idx = np.flatnonzero(problem.rho > 0)
    comp = np.zeros(problem.n_v)
    comp[l_idx] += L / a
    comp[h_idx] += H / b
    need_barrier = bool(np.any(comp[s_idx] > slack[s_idx]))

    cap_left = None
    if problem.energy_cap is not None:
        tx = np.bincount(problem.assoc, cfg.p_luav * problem.D * (1 - alpha) / r_uh[problem.assoc],
                         minlength=problem.n_u)
        cap_left = problem.energy_cap - tx
        e_comp = np.bincount(problem.assoc[l_idx], problem.kappa_g * L * a ** 2, minlength=problem.n_u)
        if np.any(cap_left <= 0):
            raise InfeasibleProblem("relay energy alone exceeds the per-slot cap")
        need_barrier = need_barrier or bool(np.any(e_comp > cap_left))

    if need_barrier and cap_left is None and np.all((alpha == 0) | (alpha == 1)):
        # no task is split, so the problem separates per server and the
        # kinked water-filling is exact
        f_w, h_w = _waterfill(problem, alpha, r_vu, r_uh)
        a, b = f_w[l_idx] / GIGA, h_w[h_idx] / GIGA
    elif need_barrier:
        a, b = _barrier_f(problem, L, H, l_idx, h_idx, s_idx, slack, a, b, cap_left)

    f_lu = np.zeros(problem.n_v)
    f_hu = np.zeros(problem.n_v)
    f_lu[l_idx] = a * GIGA
    f_hu[h_idx] = b * GIGA
    if prev is not None:
        p_lu = np.where(alpha > 0, prev[0], 0.0)
        p_hu = np.where(alpha < 1, prev[1], 0.0)
        if np.all(p_lu[l_idx] > 0) and np.all(p_hu[h_idx] > 0) and _within_caps(problem, p_lu, p_hu, alpha, cap_left):
            new = problem.evaluate(alpha, f_lu, f_hu, luav, backup).objective
            old = problem.evaluate(alpha, p_lu, p_hu, luav, backup).objective
            if old < new:
                return p_lu, p_hu
    return f_lu, f_hu


def _within_caps(problem, f_lu, f_hu, alpha, cap_left):
    cfg = problem.cfg
    per_u = np.bincount(problem.assoc, f_lu, minlength=problem.n_u)
    if np.any(per_u > cfg.f_luav_cap * (1 + 1e-9)) or f_hu.sum() > problem.backup.f_cap * (1 + 1e-9):
        return False
    if cap_left is not None:
        e = np.bincount(problem.assoc, cfg.kappa * problem.W * alpha * f_lu ** 2, minlength=problem.n_u)
        if np.any(e > cap_left):
            return False
    return True


def _barrier_f(problem: SlotProblem, L, H, l_idx, h_idx, s_idx, slack, a0, b0, cap_left):
    # Frequencies f = (a, b) in GHz.  Components that appear in a deadline row
    # get an epigraph time z with f * z >= work, so the rows are linear in z
    # and the only curved constraints are hyperbolic (self-concordant
    # barrier).  Other components keep their K * work / f term directly.
    cfg = problem.cfg
    nl, nh, ns = l_idx.size, h_idx.size, s_idx.size
    m = nl + nh
    k = problem.k
    work = np.concatenate([L, H])
    qk = np.concatenate([problem.queues[problem.assoc[l_idx]] * problem.kappa_g, np.zeros(nh)])
    rho = problem.rho[s_idx]
    owner = problem.assoc[l_idx]
    caps_u = [] if cap_left is None else [(int(u), np.flatnonzero(owner == u)) for u in np.unique(owner)]

    in_row = np.isin(np.concatenate([l_idx, h_idx]), s_idx)
    zc = np.flatnonzero(in_row)  # components with an epigraph time
    fc = np.flatnonzero(~in_row)
    mz = zc.size
    n = m + mz + ns
    zr = np.arange(mz)
    wz = work[zc]

    def objective(x):
        f, z, s = x[:m], x[m:m + mz], x[m + mz:]
        val = k * np.sum(work[fc] / f[fc]) + k * z.sum() + np.sum(qk * work * f ** 2) + rho @ s
        grad = np.zeros(n)
        grad[:m] = 2 * qk * work * f
        grad[fc] -= k * work[fc] / f[fc] ** 2
        grad[m:m + mz] = k
        grad[m + mz:] = rho
        return val, grad

    def hessian(x):
        f = x[:m]
        d = np.zeros(n)
        d[:m] = 2 * qk * work
        d[fc] += 2 * k * work[fc] / f[fc] ** 3
        return np.diag(d)

    def constraints(x):
        f, z = x[:m], x[m:m + mz]
        g = np.zeros(mz + len(caps_u))
        J = np.zeros((mz + len(caps_u), n))
        g[:mz] = wz - f[zc] * z
        J[zr, zc] = -z
        J[zr, m + zr] = -f[zc]
        for r, (u, idx) in enumerate(caps_u):
            g[mz + r] = problem.kappa_g * np.sum(L[idx] * f[idx] ** 2) - cap_left[u]
            J[mz + r, idx] = 2 * problem.kappa_g * L[idx] * f[idx]
        return g, J

    def constraint_hessian(x, w):
        Hc = np.zeros((n, n))
        Hc[zc, m + zr] = -w[:mz]
        Hc[m + zr, zc] = -w[:mz]
        for r, (u, idx) in enumerate(caps_u):
            Hc[idx, idx] += w[mz + r] * 2 * problem.kappa_g * L[idx]
        return Hc

    rows, rhs = [], []
    for u in np.unique(owner):
        row = np.zeros(n)
        row[np.flatnonzero(owner == u)] = 1.0
        rows.append(row)
        rhs.append(cfg.f_luav_cap / GIGA)
    if nh:
        row = np.zeros(n)
        row[nl:m] = 1.0
        rows.append(row)
        rhs.append(problem.backup.f_cap / GIGA)
    # deadline rows: z_a + z_b - s <= slack
    comp_of = np.concatenate([l_idx, h_idx])[zc]
    for r, v in enumerate(s_idx):
        row = np.zeros(n)
        row[m + np.flatnonzero(comp_of == v)] = 1.0
        row[m + mz + r] = -1.0
        rows.append(row)
        rhs.append(slack[v])
    A = np.array(rows).reshape(-1, n)
    b = np.array(rhs)

    # strictly feasible start a little inside the closed-form point
    f0 = np.concatenate([a0, b0]) * 0.98
    for u, idx in caps_u:
        e = problem.kappa_g * np.sum(L[idx] * f0[idx] ** 2)
        if e >= cap_left[u]:
            f0[idx] *= np.sqrt(0.9 * cap_left[u] / e)
    z0 = wz / f0[zc] * 1.02 + 1e-6
    x0 = np.concatenate([f0, z0, np.zeros(ns)])
    if ns:
        need = A[-ns:] @ x0 - b[-ns:]
        x0[m + mz:] = np.maximum(need, 0.0) + 1e-3 * (1.0 + np.abs(b[-ns:]))

    # normalise the objective to O(1) at the start so the first centring step
    # (barrier weight 1) is short; the tolerance is then relative
    scale = max(1.0, abs(objective(x0)[0]))

    def scaled(x):
        val, grad = objective(x)
        return val / scale, grad / scale

    prog = ConvexProgram(n, scaled, lambda x: hessian(x) / scale, lower=np.zeros(n), A=A, b=b,
                         constraints=constraints if mz + len(caps_u) else None,
                         constraint_hessian=constraint_hessian)
    rep = solve(prog, x0, tol=cfg.solver_tol, t0=100.0, mu=20.0)
    f = rep.solution[:m]
    return f[:nl], f[nl:]


def _affine_terms(problem: SlotProblem, f_lu, f_hu, r_vu, r_uh):
    """Delay and energy of each task as ``T0 + alpha*cT`` and ``E0 + alpha*cE``."""
    cfg = problem.cfg
    relay = problem.D / r_uh[problem.assoc]
    with np.errstate(divide="ignore"):
        t_local = np.where(f_lu > 0, problem.W / np.where(f_lu > 0, f_lu, 1.0), np.inf)
        t_remote = relay + np.where(f_hu > 0, problem.W / np.where(f_hu > 0, f_hu, 1.0), np.inf)
    base = problem.D / r_vu
    e_local = cfg.kappa * problem.W * f_lu ** 2
    e_remote = cfg.p_luav * relay
    return base, t_local, t_remote, e_local, e_remote


def optimize_alpha_given_f(problem: SlotProblem, f_lu, f_hu, luav, backup):
    """Exact per-task split ratio for fixed frequencies.

    Each task's cost ``K T + Q E + rho (T - deadline)^+`` is piecewise
    affine in its ratio, so it is minimised over {0, 1, deadline boundary};
    ties go to the smaller ratio.
    """
    r_vu, r_uh = problem.rates(luav, backup)
    base, t_local, t_remote, e_local, e_remote = _affine_terms(problem, f_lu, f_hu, r_vu, r_uh)
    q = problem.queues[problem.assoc]
    k, rho, tau = problem.k, problem.rho, problem.tau

    alpha = np.zeros(problem.n_v)
    for v in range(problem.n_v):
        tl, tr = t_local[v], t_remote[v]
        if not np.isfinite(tl) and not np.isfinite(tr):
            raise InfeasibleProblem(f"vehicle {v} has no computing resource")
        if not np.isfinite(tl):
            alpha[v] = 0.0
            continue
        if not np.isfinite(tr):
            alpha[v] = 1.0
            continue
        cands = [0.0, 1.0]
        ct = tl - tr
        if ct != 0.0:
            cross = (tau[v] - base[v] - tr) / ct
            if 0.0 < cross < 1.0:
                cands.append(cross)
        cands.sort()
        costs = []
        for x in cands:
            t = base[v] + x * tl + (1 - x) * tr
            e = x * e_local[v] + (1 - x) * e_remote[v]
            costs.append(k * t + q[v] * e + rho[v] * max(t - tau[v], 0.0))
        best = min(costs)
        slack = 1e-12 * max(1.0, abs(best))
        alpha[v] = next(x for x, c in zip(cands, costs) if c <= best + slack)
    return alpha


def _alpha_with_energy_cap(problem: SlotProblem, f_lu, f_hu, luav, backup, alpha_now):
    """Per-L-UAV linear program for the ratios when energy is capped per slot."""
    r_vu, r_uh = problem.rates(luav, backup)
    base, t_local, t_remote, e_local, e_remote = _affine_terms(problem, f_lu, f_hu, r_vu, r_uh)
    k, rho, tau = problem.k, problem.rho, problem.tau
    alpha = alpha_now.copy()
    for u in range(problem.n_u):
        idx = np.flatnonzero(problem.assoc == u)
        if not idx.size:
            continue
        lo = np.where(np.isfinite(t_remote[idx]), 0.0, 1.0)
        hi = np.where(np.isfinite(t_local[idx]), 1.0, 0.0)
        tl = np.where(np.isfinite(t_local[idx]), t_local[idx], 0.0)
        tr = np.where(np.isfinite(t_remote[idx]), t_remote[idx], 0.0)
        ct = tl - tr
        t0 = base[idx] + tr
        m = idx.size
        # variables: alpha (m), lateness (m)
        c = np.concatenate([k * ct, rho[idx]])
        A_ub = [np.concatenate([np.diag(ct), -np.eye(m)], axis=1)]
        b_ub = [tau[idx] - t0]
        ce = e_local[idx] - e_remote[idx]
        A_ub.append(np.concatenate([ce, np.zeros(m)])[None, :])
        b_ub.append(np.array([problem.energy_cap - e_remote[idx].sum()]))
        bounds = [(lo[i], hi[i]) for i in range(m)] + [(0, None)] * m
        res = scipy.optimize.linprog(c, A_ub=np.vstack(A_ub), b_ub=np.concatenate(b_ub),
                                     bounds=bounds, method="highs")
        if res.status == 0:
            cand = alpha.copy()
            cand[idx] = np.clip(res.x[:m], lo, hi)
            # guard against solver round-off breaking the cap or the descent
            e_new = np.sum(cand[idx] * e_local[idx] + (1 - cand[idx]) * e_remote[idx])
            if e_new <= problem.energy_cap:
                alpha = cand
    return alpha


def _raise_alpha_for_cap(problem: SlotProblem, alpha, luav, backup):
    """Move work onto the L-UAV until relay energy leaves room under the cap."""
    _, r_uh = problem.rates(luav, backup)
    tx = problem.cfg.p_luav * problem.D * (1 - alpha) / r_uh[problem.assoc]
    tx_u = np.bincount(problem.assoc, tx, minlength=problem.n_u)
    out = alpha.copy()
    for u in np.flatnonzero(tx_u >= 0.9 * problem.energy_cap):
        idx = problem.assoc == u
        out[idx] = 1 - (1 - alpha[idx]) * (0.5 * problem.energy_cap / tx_u[u])
    return out


def solve_subproblem1(problem: SlotProblem, luav, backup, init_alpha=None,
                      warm: AllocationDecision | None = None) -> AllocationDecision:
    """Alternate frequency and ratio updates and return the best run.

    Without ``warm`` the runs start from ``init_alpha`` and from the fully
    local split; with ``warm`` (later block-descent rounds) from
    ``init_alpha`` and the warm decision.
    """
    cfg = problem.cfg
    if problem.n_v == 0:
        empty = np.zeros(0)
        return AllocationDecision(empty, empty, empty, objective=problem.evaluate(
            empty, empty, empty, luav, backup).objective, late=np.zeros(0, bool))
    if init_alpha is None:
        init_alpha = np.full(problem.n_v, cfg.init_alpha)
    starts = [(np.asarray(init_alpha, dtype=float), None)]
    if warm is None and np.any(init_alpha < 1):
        # alternating from a fully local split prices the shared backup
        # server realistically and often reaches a better split
        starts.append((np.ones(problem.n_v), None))
    if warm is not None:
        starts.append((warm.alpha, (warm.f_lu, warm.f_hu)))
    best = None
    for alpha0, f0 in starts:
        dec = _alternate(problem, luav, backup, alpha0, f0)
        if best is None or dec.objective < best.objective:
            best = dec
    return best


def _probe_freqs(problem: SlotProblem, alpha, luav, backup, f_lu, f_hu):
    """Frequencies that price the server a task does not use yet.

    A task pinned at ``alpha = 0`` has no L-UAV frequency, so an exact ratio
    step can never move it; the probe gives such entries the frequency they
    would get with a small share on both servers.
    """
    soft = np.clip(alpha, 0.05, 0.95)
    p_lu, p_hu = _waterfill(problem, soft, *problem.rates(luav, backup))
    return np.where(f_lu > 0, f_lu, p_lu), np.where(f_hu > 0, f_hu, p_hu)


def _kinked_rows(w, budget, rho, k, e, cap, iters=80):
    """Kinked water-filling for many independent servers at once.

    Row ``r`` minimises sum K w/f + rho (w/f - budget)^+ + e_r w f^2 over its
    entries with ``w > 0`` subject to sum f <= cap_r; other entries get 0.
    Every term is convex with one kink at ``f = w / budget``, so for a
    capacity price ``lam`` each entry's best frequency is a clipped root, and
    ``lam`` is found per row by safeguarded Newton steps on its logarithm.  ``w``,
    ``budget`` and ``rho`` are (rows, n); ``e`` and ``cap`` are (rows,).
    Units: Gcycles, GHz, s.
    """
    active = w > 0
    ws = np.where(active, w, 1.0)
    kink = np.where(active & (budget > 0), ws / np.where(budget > 0, budget, 1.0), np.inf)
    c_late = k + rho
    c_early = np.full_like(ws, k)
    e_col = e[:, None]

    def root(c, lam):
        # solves c w / f^2 = 2 e w f + lam; in g = 1/f this is the depressed
        # cubic g^3 + p g + q = 0, which has exactly one positive root
        p = -lam / (c * ws)
        q = -2 * e_col / c
        disc = q * q / 4 + p ** 3 / 27
        sq = np.sqrt(np.maximum(disc, 0.0))
        g_one = np.cbrt(-q / 2 + sq) + np.cbrt(-q / 2 - sq)
        r = np.sqrt(np.maximum(-p / 3, 0.0))
        arg = np.clip(-q / (2 * np.where(r > 0, r, 1.0) ** 3), -1.0, 1.0)
        g_three = 2 * r * np.cos(np.arccos(arg) / 3)
        return 1.0 / np.where(disc >= 0, g_one, g_three)

    def freqs(lam):
        # frequencies and their derivative in log(lam)
        lam = lam[:, None]
        late = root(c_late, lam)
        early = root(c_early, lam)
        use_late = late < kink
        use_early = ~use_late & (early > kink)
        f = np.where(use_late, late, np.where(use_early, early, kink))
        c = np.where(use_late, c_late, c_early)
        with np.errstate(divide="ignore", invalid="ignore"):
            df = np.where(use_late | use_early, -lam / (2 * c * ws / f ** 3 + 2 * e_col * ws), 0.0)
        return np.where(active, f, 0.0), np.where(active, df, 0.0)

    n_r = len(e)
    with np.errstate(divide="ignore", invalid="ignore"):
        free = (e > 0) & (freqs(np.zeros(n_r))[0].sum(axis=1) <= cap)
    # safeguarded Newton on u = log(lam), bracketed by [lo, hi]
    lo = np.full(n_r, -35.0)
    hi = np.full(n_r, 35.0)
    guess = (np.where(active, np.sqrt(k * ws), 0.0).sum(axis=1) / cap) ** 2
    u = np.clip(np.log(np.maximum(guess, 1e-300)), lo, hi)
    done = free.copy()
    for _ in range(iters):
        f, df = freqs(np.exp(u))
        gap = f.sum(axis=1) - cap
        over = gap > 0
        lo = np.where(over, u, lo)
        hi = np.where(over, hi, u)
        done |= (np.abs(gap) <= 1e-12 * cap) | (hi - lo <= 1e-13)
        if np.all(done):
            break
        slope = df.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = u - gap / slope
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        u = np.where(done, u, np.where(bad, 0.5 * (lo + hi), step))
    u = np.where(np.abs(gap) <= 1e-12 * cap, u, hi)
    f = freqs(np.where(free, 0.0, np.exp(u)))[0]
    total = f.sum(axis=1)
    return f * np.minimum(1.0, cap / np.where(total > 0, total, 1.0))[:, None]


def _waterfill_batch(problem: SlotProblem, alphas, r_vu, r_uh, only=None, base=None):
    """Per-server kinked water-filling for each row of ``alphas``; a task
    split over both servers gets half its deadline slack on each side.
    Returns ``(f_lu, f_hu)`` in Hz with the shape of ``alphas``.

    With ``only`` (one L-UAV index per row) just that L-UAV and the backup
    server are recomputed and the other L-UAVs keep ``base[0]``.
    """
    cfg = problem.cfg
    alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
    n_t, n_u = alphas.shape[0], problem.n_u
    slack = problem.tau - problem.D / r_vu - problem.D * (1 - alphas) / r_uh[problem.assoc]
    budget = slack * np.where((alphas > 0) & (alphas < 1), 0.5, 1.0)
    servers = np.arange(n_u)[None, :] if only is None else np.asarray(only)[:, None]
    own = problem.assoc[None, None, :] == servers[:, :, None]  # (n_t or 1, rows_lu, n)
    w_lu = np.where(own & (alphas[:, None, :] > 0), (problem.W * alphas / GIGA)[:, None, :], 0.0)
    w_hu = np.where(alphas < 1, problem.W * (1 - alphas) / GIGA, 0.0)
    rows = w_lu.shape[1] + 1
    w = np.concatenate([w_lu, w_hu[:, None, :]], axis=1).reshape(n_t * rows, -1)
    q = problem.queues[np.broadcast_to(servers, (n_t, rows - 1))]
    e = np.c_[q * problem.kappa_g, np.zeros(n_t)].ravel()
    cap = np.tile(np.r_[np.full(rows - 1, cfg.f_luav_cap), problem.backup.f_cap] / GIGA, n_t)
    f = _kinked_rows(w, np.repeat(budget, rows, axis=0), np.tile(problem.rho, (n_t * rows, 1)),
                     problem.k, e, cap).reshape(n_t, rows, -1)
    f_lu = GIGA * f[:, :-1].sum(axis=1)
    if only is not None:
        keep = ~own[:, 0, :]
        f_lu = np.where(keep, np.where(alphas > 0, base[0], 0.0), f_lu)
    return f_lu, GIGA * f[:, -1]


def _waterfill(problem: SlotProblem, alpha, r_vu, r_uh):
    f_lu, f_hu = _waterfill_batch(problem, alpha, r_vu, r_uh)
    return f_lu[0], f_hu[0]


def _batch_objective(problem: SlotProblem, alphas, f_lu, f_hu, r_vu, r_uh):
    """Slot objective for each row of ``alphas`` without the flight energy,
    which does not depend on the allocation."""
    cfg = problem.cfg
    with np.errstate(divide="ignore", invalid="ignore"):
        t_lu = np.where(alphas > 0, problem.W * alphas / f_lu, 0.0)
        t_hu = np.where(alphas < 1, problem.W * (1 - alphas) / f_hu, 0.0)
    t_relay = problem.D * (1 - alphas) / r_uh[problem.assoc]
    delays = problem.D / r_vu + t_lu + t_relay + t_hu
    energy = cfg.kappa * problem.W * alphas * f_lu ** 2 + cfg.p_luav * t_relay
    q_task = problem.queues[problem.assoc]
    late = np.maximum(delays - problem.tau, 0.0)
    return problem.k * delays.sum(axis=1) + energy @ q_task + late @ problem.rho


def _flip_search(problem: SlotProblem, luav, backup, alpha, max_moves=None):
    """Single-task switches between local and remote execution.

    Exact ratio steps move every task at once and can overload a server, so
    they stall in poor splits; here every switch of one task to the other
    endpoint is screened with the water-filling frequencies and the best one
    is taken, until none lowers the screened objective.  Returns the new
    ratios or None when nothing was switched.
    """
    cur = np.asarray(alpha, dtype=float).copy()
    rates = problem.rates(luav, backup)
    f_cur = _waterfill_batch(problem, cur, *rates)
    est = float(_batch_objective(problem, cur[None], *f_cur, *rates)[0])
    max_moves = 2 * problem.n_v if max_moves is None else max_moves
    changed = False
    for _ in range(max_moves):
        trials = []
        for v in range(problem.n_v):
            for target in (0.0, 1.0):
                if cur[v] != target:
                    trial = cur.copy()
                    trial[v] = target
                    trials.append(trial)
        trials = np.array(trials)
        moved = problem.assoc[np.argmax(trials != cur, axis=1)]
        f_trials = _waterfill_batch(problem, trials, *rates, only=moved, base=f_cur)
        vals = _batch_objective(problem, trials, *f_trials, *rates)
        best = int(np.argmin(vals))
        if not vals[best] < est - 1e-9 * abs(est):
            break
        cur, est, changed = trials[best], float(vals[best]), True
        f_cur = f_trials[0][best], f_trials[1][best]
    return cur if changed else None


def _ratio_then_freq(problem: SlotProblem, luav, backup, alpha, f_price, f_now):
    if problem.energy_cap is not None:
        new_alpha = _alpha_with_energy_cap(problem, *f_price, luav, backup, alpha)
    else:
        new_alpha = optimize_alpha_given_f(problem, *f_price, luav, backup)
    new_f = optimize_f_given_alpha(problem, new_alpha, luav, backup, prev=f_now)
    return new_alpha, new_f, problem.evaluate(new_alpha, *new_f, luav, backup).objective


def _escape(problem: SlotProblem, luav, backup, alpha, f_lu, f_hu):
    """Candidates that leave a stalled alternation: the ratio step with
    unused servers priced, and the greedy single-task switches."""
    cands = []
    probe = _probe_freqs(problem, alpha, luav, backup, f_lu, f_hu)
    if probe is not None:
        try:
            cands.append(_ratio_then_freq(problem, luav, backup, alpha, probe, (f_lu, f_hu)))
        except InfeasibleProblem:
            pass
    if problem.energy_cap is None:
        flipped = _flip_search(problem, luav, backup, alpha)
        if flipped is not None:
            new_f = optimize_f_given_alpha(problem, flipped, luav, backup, prev=(f_lu, f_hu))
            cands.append((flipped, new_f, problem.evaluate(flipped, *new_f, luav, backup).objective))
    return min(cands, key=lambda c: c[2]) if cands else None


def _alternate(problem: SlotProblem, luav, backup, alpha, f_prev):
    cfg = problem.cfg
    flags = set()
    if problem.energy_cap is not None:
        alpha = _raise_alpha_for_cap(problem, alpha, luav, backup)
    f_lu, f_hu = optimize_f_given_alpha(problem, alpha, luav, backup, prev=f_prev)
    obj = problem.evaluate(alpha, f_lu, f_hu, luav, backup).objective
    trace = [obj]
    for _ in range(cfg.sp1_max_iter):
        try:
            cand = _ratio_then_freq(problem, luav, backup, alpha, (f_lu, f_hu), (f_lu, f_hu))
        except InfeasibleProblem:
            flags.add("energy-cap")
            cand = None
        stalled = cand is None or obj - cand[2] <= cfg.sp1_rel_tol * abs(obj)
        if stalled:
            # exact alternation converged; try to leave the current split
            alt = _escape(problem, luav, backup, alpha, f_lu, f_hu)
            if alt is not None and (cand is None or alt[2] < cand[2]):
                cand = alt
                stalled = obj - cand[2] <= cfg.sp1_rel_tol * abs(obj)
        if cand is None or not cand[2] <= obj:
            break
        alpha, (f_lu, f_hu), obj = cand
        trace.append(obj)
        if stalled:
            break
    late = problem.evaluate(alpha, f_lu, f_hu, luav, backup).delays > problem.tau
    return AllocationDecision(alpha, f_lu, f_hu, objective=obj, trace=trace, late=late, flags=flags)
