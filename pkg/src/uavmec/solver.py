"""Dense log-barrier interior-point solver for tiny convex programs.

Problems here have at most a few dozen variables, so every Newton system is
formed and factorised densely.  Objectives and constraints supply analytic
first and second derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.optimize

Objective = Callable[[np.ndarray], tuple]


class SolverError(RuntimeError):
    pass


class InfeasibleProblem(SolverError):
    pass


class BracketError(ValueError):
    pass


@dataclass
class ConvexProgram:
    """``min f(x)`` s.t. ``A x <= b``, ``lower <= x <= upper``, ``g(x) <= 0``.

    ``objective(x)`` returns ``(value, gradient)`` and may return an infinite
    value outside its domain; ``hessian(x)`` returns the dense Hessian.
    ``constraints(x)`` returns ``(g, jacobian)`` for convex ``g``, and
    ``constraint_hessian(x, w)`` returns ``sum_i w_i * hess g_i(x)``.
    Infinite box bounds are simply skipped.
    """

    dim: int
    objective: Objective
    hessian: Callable[[np.ndarray], np.ndarray]
    linear_inequalities: Sequence = ()
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    constraints: Optional[Callable] = None
    constraint_hessian: Optional[Callable] = None
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None

    def __post_init__(self):
        rows = [np.asarray(a, dtype=float) for a, _ in self.linear_inequalities]
        rhs = [float(bnd) for _, bnd in self.linear_inequalities]
        if self.A is not None:
            rows += list(np.atleast_2d(np.asarray(self.A, dtype=float)))
            rhs += list(np.atleast_1d(np.asarray(self.b, dtype=float)))
        self.A = np.array(rows, dtype=float).reshape(len(rows), self.dim)
        self.b = np.array(rhs, dtype=float)
        lo = np.full(self.dim, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float)
        hi = np.full(self.dim, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if np.any(lo > hi):
            raise InfeasibleProblem("empty box")
        self.lower, self.upper = lo, hi

    def violation(self, x) -> float:
        """Largest constraint violation at ``x`` (0 when feasible)."""
        worst = 0.0
        if self.A.size:
            worst = max(worst, float(np.max(self.A @ x - self.b)))
        worst = max(worst, float(np.max(self.lower - x, initial=0.0)),
                    float(np.max(x - self.upper, initial=0.0)))
        if self.constraints is not None:
            g, _ = self.constraints(x)
            if len(g):
                worst = max(worst, float(np.max(g)))
        return worst


@dataclass
class SolveReport:
    solution: np.ndarray
    objective_value: float
    iterations: int
    converged: bool
    max_constraint_violation: float
    duality_gap: float = 0.0
    outer_iterations: int = 0
    trace: list = field(default_factory=list, repr=False)


class _Barrier:
    """``t f(x) - sum log(-c_i(x))`` over all inequality constraints."""

    def __init__(self, prog: ConvexProgram):
        self.p = prog
        self.lo_idx = np.flatnonzero(np.isfinite(prog.lower))
        self.hi_idx = np.flatnonzero(np.isfinite(prog.upper))
        self.lo = prog.lower[self.lo_idx]
        self.hi = prog.upper[self.hi_idx]
        self.n_fixed = prog.A.shape[0] + self.lo_idx.size + self.hi_idx.size

    def n_constraints(self, x) -> int:
        n = self.n_fixed
        if self.p.constraints is not None:
            n += len(self.p.constraints(x)[0])
        return n

    def _slacks(self, x):
        p = self.p
        s_lin = p.b - p.A @ x
        s_lo = x[self.lo_idx] - self.lo
        s_hi = self.hi - x[self.hi_idx]
        if p.constraints is not None:
            g, jac = p.constraints(x)
        else:
            g, jac = None, None
        return s_lin, s_lo, s_hi, g, jac

    def value(self, x, t) -> float:
        s_lin, s_lo, s_hi, g, _ = self._slacks(x)
        if (s_lin.size and s_lin.min() <= 0) or (s_lo.size and s_lo.min() <= 0) or \
                (s_hi.size and s_hi.min() <= 0) or (g is not None and len(g) and g.max() >= 0):
            return np.inf
        f, _ = self.p.objective(x)
        if not np.isfinite(f):
            return np.inf
        val = t * f - np.log(s_lin).sum() - np.log(s_lo).sum() - np.log(s_hi).sum()
        if g is not None and len(g):
            val -= np.log(-g).sum()
        return val

    def derivs(self, x, t):
        p = self.p
        s_lin, s_lo, s_hi, g, jac = self._slacks(x)
        f, gf = p.objective(x)
        grad = t * np.asarray(gf, dtype=float)
        hess = t * p.hessian(x)
        val = t * f
        if s_lin.size:
            inv = 1.0 / s_lin
            grad = grad + p.A.T @ inv
            hess = hess + (p.A.T * inv ** 2) @ p.A
            val -= np.log(s_lin).sum()
        if s_lo.size:
            inv = 1.0 / s_lo
            grad[self.lo_idx] -= inv
            hess[self.lo_idx, self.lo_idx] += inv ** 2
            val -= np.log(s_lo).sum()
        if s_hi.size:
            inv = 1.0 / s_hi
            grad[self.hi_idx] += inv
            hess[self.hi_idx, self.hi_idx] += inv ** 2
            val -= np.log(s_hi).sum()
        if g is not None and len(g):
            inv = -1.0 / g
            grad = grad + jac.T @ inv
            hess = hess + (jac.T * inv ** 2) @ jac
            if p.constraint_hessian is not None:
                hess = hess + p.constraint_hessian(x, inv)
            val -= np.log(-g).sum()
        return val, grad, hess


def _newton_step(hess, grad):
    try:
        return np.linalg.solve(hess, -grad)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(hess, -grad, rcond=None)[0]


def _center(bar: _Barrier, x, t, budget, newton_tol=1e-10, stop=None):
    """Damped Newton minimisation of the barrier function at fixed ``t``."""
    used = 0
    while used < budget:
        val, grad, hess = bar.derivs(x, t)
        dx = _newton_step(hess, grad)
        slope = float(grad @ dx)
        used += 1
        # the second test is the floating-point floor once t f(x) is large
        if -slope / 2.0 <= max(newton_tol, 1e-13 * abs(val)):
            return x, used, True
        step = 1.0
        while True:
            cand = x + step * dx
            cval = bar.value(cand, t)
            if cval <= val + 0.25 * step * slope:
                break
            step *= 0.5
            if step < 1e-14:
                return x, used, True  # no further progress possible at this precision
        x = cand
        if stop is not None and stop(x):
            return x, used, True
    return x, used, False


def _barrier_solve(prog: ConvexProgram, x, tol, mu=10.0, t0=1.0, max_iter=400, stop=None):
    bar = _Barrier(prog)
    m = bar.n_constraints(x)
    t = t0
    used = 0
    outer = 0
    if m == 0:
        x, used, ok = _center(bar, x, 1.0, max_iter, stop=stop)
        return x, used, ok, 0.0, 1
    while True:
        x, n, ok = _center(bar, x, t, max_iter - used, stop=stop)
        used += n
        outer += 1
        if stop is not None and stop(x):
            return x, used, True, m / t, outer
        if not ok:
            return x, used, False, m / t, outer
        if m / t <= tol:
            return x, used, True, m / t, outer
        t *= mu


def _phase_one(prog: ConvexProgram, x0, tol):
    """Find a strictly feasible point by minimising the largest violation."""
    n = prog.dim
    A, b = prog.A, prog.b
    lo_idx = np.flatnonzero(np.isfinite(prog.lower))
    hi_idx = np.flatnonzero(np.isfinite(prog.upper))

    def cons(z):
        x, s = z[:n], z[n]
        parts, jacs = [], []
        if A.size:
            parts.append(A @ x - b - s)
            jacs.append(np.hstack([A, -np.ones((A.shape[0], 1))]))
        if lo_idx.size:
            parts.append(prog.lower[lo_idx] - x[lo_idx] - s)
            J = np.zeros((lo_idx.size, n + 1))
            J[np.arange(lo_idx.size), lo_idx] = -1.0
            J[:, n] = -1.0
            jacs.append(J)
        if hi_idx.size:
            parts.append(x[hi_idx] - prog.upper[hi_idx] - s)
            J = np.zeros((hi_idx.size, n + 1))
            J[np.arange(hi_idx.size), hi_idx] = 1.0
            J[:, n] = -1.0
            jacs.append(J)
        if prog.constraints is not None:
            g, jac = prog.constraints(x)
            if len(g):
                parts.append(g - s)
                jacs.append(np.hstack([jac, -np.ones((len(g), 1))]))
        return np.concatenate(parts), np.vstack(jacs)

    def cons_hess(z, w):
        H = np.zeros((n + 1, n + 1))
        if prog.constraints is not None and prog.constraint_hessian is not None:
            k = len(prog.constraints(z[:n])[0])
            if k:
                H[:n, :n] = prog.constraint_hessian(z[:n], w[-k:])
        return H

    e = np.zeros(n + 1)
    e[n] = 1.0
    aux = ConvexProgram(
        dim=n + 1,
        objective=lambda z: (z[n], e),
        hessian=lambda z: np.zeros((n + 1, n + 1)),
        lower=np.r_[np.full(n, -np.inf), -1.0],
        constraints=cons,
        constraint_hessian=cons_hess,
    )
    z0 = np.r_[x0, max(prog.violation(x0), 0.0) + 1.0]
    z, _, _, _, _ = _barrier_solve(aux, z0, tol, stop=lambda z: z[n] < -1e-9)
    if not z[n] < 0:
        raise InfeasibleProblem(f"no strictly feasible point (min violation {z[n]:.3e})")
    return z[:n]


def _strictly_feasible(prog: ConvexProgram, x) -> bool:
    if prog.A.size and np.any(prog.A @ x >= prog.b):
        return False
    if np.any(x <= prog.lower) or np.any(x >= prog.upper):
        return False
    if prog.constraints is not None:
        g, _ = prog.constraints(x)
        if len(g) and np.any(g >= 0):
            return False
    return True


def solve(program: ConvexProgram, start, tol: float = 1e-8, *, mu: float = 10.0,
          t0: float = 1.0, max_iter: int = 400) -> SolveReport:
    """Minimise ``program`` from ``start`` with a log-barrier method.

    The barrier weight starts at ``t0`` and grows by ``mu`` until the
    duality-gap bound ``m / t`` drops below ``tol``.  A start that is not
    strictly feasible triggers a Phase-1 search; failure raises
    :class:`InfeasibleProblem`.  Exhausting ``max_iter`` Newton steps returns
    a report with ``converged=False``.
    """
    x = np.array(start, dtype=float)
    if x.shape != (program.dim,):
        raise ValueError(f"start has shape {x.shape}, expected ({program.dim},)")
    if not _strictly_feasible(program, x):
        x = _phase_one(program, x, tol)
    if not np.isfinite(program.objective(x)[0]):
        raise InfeasibleProblem("start lies outside the objective domain")
    x, used, ok, gap, outer = _barrier_solve(program, x, tol, mu=mu, t0=t0, max_iter=max_iter)
    viol = program.violation(x)
    return SolveReport(
        solution=x,
        objective_value=float(program.objective(x)[0]),
        iterations=used,
        converged=bool(ok and viol <= 1e-8),
        max_constraint_violation=viol,
        duality_gap=gap,
        outer_iterations=outer,
    )


def bisect(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Root of a monotone scalar function on a sign-changing bracket."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(f"fn({lo})={flo:.3e} and fn({hi})={fhi:.3e} do not bracket a root")
    return scipy.optimize.bisect(fn, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)


def finite_difference_gradient(fun: Callable[[np.ndarray], float], x, rel_step: float = 1e-6):
    """Central-difference gradient, used to validate analytic derivatives."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g
