"""Dense primal simplex for bounded-variable linear programs.

Small self-contained solver used by the SDDP stage problems, which need
reliable dual multipliers more than raw speed.  Two-phase method (artificial
start, no big-M so duals stay clean), Dantzig pricing with a switch to
Bland's rule after 50 consecutive degenerate pivots, dense tableau.
Tolerances: 1e-9 for pivots, feasibility and optimality.

Duals follow the sensitivity convention: the dual of a row is the derivative
of the optimum with respect to that row's right-hand side.

The pivot loop is numba-compiled by default with the pure-Python/numpy text
of the same function as fallback (see :mod:`paramdp._accel`).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ._accel import jit_or_python

LE, EQ, GE = -1, 0, 1

_TOL_OPT = 1e-9
_TOL_PIV = 1e-9
_TOL_DEG = 1e-12
_BLAND_AFTER = 50

_ST_BASIC, _ST_LO, _ST_HI, _ST_FREE, _ST_FIXED = 0, 1, 2, 3, 4
_OPTIMAL, _INFEASIBLE, _UNBOUNDED, _LIMIT = 0, 1, 2, 3

_STATUS_NAMES = {_OPTIMAL: "optimal", _INFEASIBLE: "infeasible",
                 _UNBOUNDED: "unbounded", _LIMIT: "iteration_limit"}


@dataclass
class LinearProgram:
    """min c.x  subject to  row senses (-1 le, 0 eq, +1 ge) and variable
    bounds; ``c0`` is an additive objective constant."""

    c: np.ndarray
    A: np.ndarray
    senses: np.ndarray
    b: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    c0: float = 0.0
    names: list | None = None

    def __post_init__(self):
        self.c = np.atleast_1d(np.asarray(self.c, dtype=float))
        self.A = np.asarray(self.A, dtype=float).reshape(-1, self.c.size)
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        self.senses = np.atleast_1d(np.asarray(self.senses, dtype=np.int64))
        self.lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        m, n = self.A.shape
        if self.b.shape != (m,) or self.senses.shape != (m,):
            raise ValueError("row data shapes disagree")
        if self.lo.shape != (n,) or self.hi.shape != (n,):
            raise ValueError("bound shapes disagree")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.A))
                and np.all(np.isfinite(self.b))):
            raise ValueError("objective and rows must be finite")
        if np.any(self.lo > self.hi):
            raise ValueError("lower bounds must not exceed upper bounds")
        if not np.all(np.isin(self.senses, (-1, 0, 1))):
            raise ValueError("senses must be -1 (le), 0 (eq) or +1 (ge)")

    @property
    def shape(self):
        return self.A.shape


@dataclass
class LPSolution:
    """Solver outcome; duals and reduced costs are meaningful when optimal."""

    status: str
    x: np.ndarray
    objective: float
    duals: np.ndarray
    reduced_costs: np.ndarray
    iterations: int

    @property
    def optimal(self):
        return self.status == "optimal"


def _simplex_iterate(T, xB, basis, status, xval, lo_e, hi_e, cost,
                     max_iter, allow_unbounded):
    """Primal bounded-variable simplex sweep on a prepared tableau."""
    m, ntot = T.shape
    iters = 0
    bland = False
    streak = 0
    while iters < max_iter:
        d = cost.copy()
        for i in range(m):
            ci = cost[basis[i]]
            if ci != 0.0:
                d -= ci * T[i]
        q = -1
        best = _TOL_OPT
        for j in range(ntot):
            st = status[j]
            if st == _ST_BASIC or st == _ST_FIXED:
                continue
            dj = d[j]
            viol = 0.0
            if st == _ST_LO:
                if dj < -_TOL_OPT:
                    viol = -dj
            elif st == _ST_HI:
                if dj > _TOL_OPT:
                    viol = dj
            else:  # free
                if dj < -_TOL_OPT:
                    viol = -dj
                elif dj > _TOL_OPT:
                    viol = dj
            if viol > 0.0:
                if bland:
                    q = j
                    break
                if viol > best:
                    best = viol
                    q = j
        if q == -1:
            return _OPTIMAL, iters

        if status[q] == _ST_HI or (status[q] == _ST_FREE and d[q] > 0.0):
            dirn = -1.0
        else:
            dirn = 1.0
        t_best = np.inf
        if lo_e[q] > -np.inf and hi_e[q] < np.inf:
            t_best = hi_e[q] - lo_e[q]
        leave = -1
        leave_hi = False
        for i in range(m):
            a = dirn * T[i, q]
            bi = basis[i]
            if a > _TOL_PIV:
                if lo_e[bi] > -np.inf:
                    tt = (xB[i] - lo_e[bi]) / a
                    if tt < t_best:
                        t_best = tt
                        leave = i
                        leave_hi = False
            elif a < -_TOL_PIV:
                if hi_e[bi] < np.inf:
                    tt = (hi_e[bi] - xB[i]) / (-a)
                    if tt < t_best:
                        t_best = tt
                        leave = i
                        leave_hi = True
        if t_best == np.inf:
            if allow_unbounded:
                return _UNBOUNDED, iters
            return _LIMIT, iters
        if t_best < 0.0:
            t_best = 0.0

        step = dirn * t_best
        for i in range(m):
            xB[i] -= step * T[i, q]
        if leave == -1:
            # the entering variable runs to its opposite bound
            if dirn > 0.0:
                status[q] = _ST_HI
                xval[q] = hi_e[q]
            else:
                status[q] = _ST_LO
                xval[q] = lo_e[q]
        else:
            enter_val = xval[q] + step
            lv = basis[leave]
            if leave_hi:
                xval[lv] = hi_e[lv]
                status[lv] = _ST_HI
            else:
                xval[lv] = lo_e[lv]
                status[lv] = _ST_LO
            piv = T[leave, q]
            row = T[leave]
            row /= piv
            for i in range(m):
                if i != leave:
                    f = T[i, q]
                    if f != 0.0:
                        T[i] -= f * row
            xB[leave] = enter_val
            basis[leave] = q
            status[q] = _ST_BASIC

        if t_best <= _TOL_DEG:
            streak += 1
            if streak >= _BLAND_AFTER:
                bland = True
        else:
            streak = 0
            bland = False
        iters += 1
    return _LIMIT, iters


def _solve_core(c, A, senses, b, lo, hi, max_iter):
    """Two-phase bounded simplex; returns status, primal point, row duals,
    structural reduced costs and the pivot count."""
    m, n = A.shape
    ns = 0
    for i in range(m):
        if senses[i] != 0:
            ns += 1
    art0 = n + ns
    ntot = art0 + m
    T = np.zeros((m, ntot))
    T[:, :n] = A
    lo_e = np.empty(ntot)
    hi_e = np.empty(ntot)
    for j in range(n):
        lo_e[j] = lo[j]
        hi_e[j] = hi[j]
    k = n
    for i in range(m):
        if senses[i] != 0:
            T[i, k] = 1.0
            if senses[i] < 0:
                lo_e[k] = 0.0
                hi_e[k] = np.inf
            else:
                lo_e[k] = -np.inf
                hi_e[k] = 0.0
            k += 1
    for j in range(art0, ntot):
        lo_e[j] = 0.0
        hi_e[j] = np.inf

    status = np.empty(ntot, np.int64)
    xval = np.zeros(ntot)
    for j in range(art0):
        lj = lo_e[j]
        hj = hi_e[j]
        if lj > -np.inf and hj < np.inf:
            if lj == hj:
                status[j] = _ST_FIXED
                xval[j] = lj
            elif abs(lj) <= abs(hj):
                status[j] = _ST_LO
                xval[j] = lj
            else:
                status[j] = _ST_HI
                xval[j] = hj
        elif lj > -np.inf:
            status[j] = _ST_LO
            xval[j] = lj
        elif hj < np.inf:
            status[j] = _ST_HI
            xval[j] = hj
        else:
            status[j] = _ST_FREE
            xval[j] = 0.0

    r = b.copy()
    for j in range(art0):
        xj = xval[j]
        if xj != 0.0:
            for i in range(m):
                r[i] -= T[i, j] * xj
    flip = np.ones(m)
    basis = np.empty(m, np.int64)
    xB = np.empty(m)
    bscale = 1.0
    for i in range(m):
        if abs(b[i]) > bscale:
            bscale = abs(b[i])
        if r[i] < 0.0:
            flip[i] = -1.0
            T[i] = -T[i]
            r[i] = -r[i]
        T[i, art0 + i] = 1.0
        basis[i] = art0 + i
        status[art0 + i] = _ST_BASIC
        xB[i] = r[i]

    cost1 = np.zeros(ntot)
    for j in range(art0, ntot):
        cost1[j] = 1.0
    code, it1 = _simplex_iterate(T, xB, basis, status, xval, lo_e, hi_e,
                                 cost1, max_iter, False)
    x = np.zeros(n)
    y = np.zeros(m)
    dred = np.zeros(n)
    if code != _OPTIMAL:
        return _LIMIT, x, y, dred, it1
    p1 = 0.0
    for i in range(m):
        if basis[i] >= art0:
            p1 += xB[i]
    if p1 > 1e-8 * bscale:
        return _INFEASIBLE, x, y, dred, it1

    # drive basic artificials out on any usable column; rows without one are
    # redundant and keep a fixed artificial pinned at zero
    for i in range(m):
        if basis[i] >= art0:
            found = -1
            for j in range(art0):
                if status[j] != _ST_BASIC and status[j] != _ST_FIXED \
                        and abs(T[i, j]) > 1e-7:
                    found = j
                    break
            if found >= 0:
                lv = basis[i]
                xval[lv] = 0.0
                status[lv] = _ST_LO
                piv = T[i, found]
                row = T[i]
                row /= piv
                for i2 in range(m):
                    if i2 != i:
                        f = T[i2, found]
                        if f != 0.0:
                            T[i2] -= f * row
                xB[i] = xval[found]
                basis[i] = found
                status[found] = _ST_BASIC
    for j in range(art0, ntot):
        hi_e[j] = 0.0
        if status[j] != _ST_BASIC:
            status[j] = _ST_FIXED
            xval[j] = 0.0

    cost2 = np.zeros(ntot)
    for j in range(n):
        cost2[j] = c[j]
    code, it2 = _simplex_iterate(T, xB, basis, status, xval, lo_e, hi_e,
                                 cost2, max_iter, True)
    iters = it1 + it2
    if code != _OPTIMAL:
        return code, x, y, dred, iters

    for j in range(n):
        x[j] = xval[j]
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = xB[i]
    dvec = cost2.copy()
    for i in range(m):
        ci = cost2[basis[i]]
        if ci != 0.0:
            dvec -= ci * T[i]
    for i in range(m):
        acc = 0.0
        for r2 in range(m):
            acc += cost2[basis[r2]] * T[r2, art0 + i]
        y[i] = flip[i] * acc
    for j in range(n):
        dred[j] = dvec[j]
    return _OPTIMAL, x, y, dred, iters


_simplex_iterate = jit_or_python(_simplex_iterate)
_solve_core_jit = jit_or_python(_solve_core)


def _solve_bounds_only(lp):
    n = lp.c.size
    x = np.zeros(n)
    for j in range(n):
        cj = lp.c[j]
        if cj > 0:
            if lp.lo[j] == -np.inf:
                return LPSolution("unbounded", x, -np.inf, np.zeros(0), np.zeros(n), 0)
            x[j] = lp.lo[j]
        elif cj < 0:
            if lp.hi[j] == np.inf:
                return LPSolution("unbounded", x, -np.inf, np.zeros(0), np.zeros(n), 0)
            x[j] = lp.hi[j]
        else:
            if lp.lo[j] > -np.inf:
                x[j] = lp.lo[j]
            elif lp.hi[j] < np.inf:
                x[j] = lp.hi[j]
    obj = float(lp.c @ x) + lp.c0
    return LPSolution("optimal", x, obj, np.zeros(0), lp.c.copy(), 0)


def solve(lp, check=False, max_iter=None):
    """Solve a :class:`LinearProgram`.

    Infeasible and unbounded outcomes are statuses, not exceptions.  With
    ``check=True`` (or ``PARAMDP_LP_CHECK=1``) an optimal solution is
    verified for primal/dual feasibility and a closed duality gap.
    """
    m, n = lp.shape
    if m == 0:
        sol = _solve_bounds_only(lp)
    else:
        if max_iter is None:
            max_iter = 500 + 40 * (m + n)
        code, x, y, dred, iters = _solve_core_jit(
            lp.c, lp.A, lp.senses, lp.b, lp.lo, lp.hi, max_iter)
        obj = float(lp.c @ x) + lp.c0 if code == _OPTIMAL else np.nan
        sol = LPSolution(_STATUS_NAMES[code], x, obj, y, dred, int(iters))
    if (check or os.environ.get("PARAMDP_LP_CHECK", "0") == "1") and sol.optimal:
        check_solution(lp, sol)
    return sol


def check_solution(lp, sol, feas_tol=1e-7, gap_tol=1e-7):
    """Raise if an allegedly optimal solution violates feasibility,
    complementary slackness or strong duality."""
    x, y, d = sol.x, sol.duals, sol.reduced_costs
    scale = 1.0 + float(np.max(np.abs(lp.b))) if lp.b.size else 1.0
    res = lp.A @ x - lp.b if lp.b.size else np.zeros(0)
    for i in range(lp.b.size):
        s = lp.senses[i]
        if s == EQ and abs(res[i]) > feas_tol * scale:
            raise ValueError(f"equality row {i} violated by {res[i]:.3e}")
        if s == LE and res[i] > feas_tol * scale:
            raise ValueError(f"le row {i} violated by {res[i]:.3e}")
        if s == GE and res[i] < -feas_tol * scale:
            raise ValueError(f"ge row {i} violated by {res[i]:.3e}")
        # complementary slackness on rows
        if s != EQ and abs(y[i]) > feas_tol and abs(res[i]) > feas_tol * scale:
            raise ValueError(f"row {i}: dual {y[i]:.3e} on slack {res[i]:.3e}")
    if np.any(x < lp.lo - feas_tol) or np.any(x > lp.hi + feas_tol):
        raise ValueError("variable bound violated")
    # reduced cost consistency: d = c - A^T y
    dd = lp.c - (lp.A.T @ y if lp.b.size else 0.0)
    if np.max(np.abs(dd - d)) > 1e-6 * (1.0 + np.max(np.abs(lp.c))):
        raise ValueError("reduced costs inconsistent with duals")
    # strong duality using the bound multipliers implied by reduced costs
    dual_obj = float(y @ lp.b) if lp.b.size else 0.0
    for j in range(lp.c.size):
        if d[j] > feas_tol:
            if lp.lo[j] == -np.inf:
                raise ValueError(f"positive reduced cost on unbounded-below x{j}")
            dual_obj += d[j] * lp.lo[j]
        elif d[j] < -feas_tol:
            if lp.hi[j] == np.inf:
                raise ValueError(f"negative reduced cost on unbounded-above x{j}")
            dual_obj += d[j] * lp.hi[j]
    primal_obj = sol.objective - lp.c0
    if abs(primal_obj - dual_obj) > gap_tol * (1.0 + abs(primal_obj)):
        raise ValueError(f"duality gap {primal_obj - dual_obj:.3e}")


def dump(lp):
    """Human-readable rendering of a program, fixed column order."""
    names = lp.names or [f"x{j}" for j in range(lp.c.size)]
    sym = {LE: "<=", EQ: "==", GE: ">="}
    lines = ["min " + " + ".join(f"{c:+.6g}*{v}" for c, v in zip(lp.c, names))]
    if lp.c0:
        lines[0] += f" {lp.c0:+.6g}"
    for i in range(lp.b.size):
        terms = " + ".join(f"{a:+.6g}*{v}" for a, v in zip(lp.A[i], names) if a != 0.0)
        lines.append(f"  {terms or '0'} {sym[int(lp.senses[i])]} {lp.b[i]:.6g}")
    for j, v in enumerate(names):
        lines.append(f"  {lp.lo[j]:.6g} <= {v} <= {lp.hi[j]:.6g}")
    return "\n".join(lines)
