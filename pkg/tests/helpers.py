"""Independent oracles used by the test suite.

Everything here recomputes expected values by brute force (dense grids,
finite differences, exhaustive enumeration, vertex enumeration) without
touching the code paths under test.
"""

import itertools

import numpy as np

from paramdp.model import (admissible_interval, final_cost, stage_cost,
                           state_step)


def grid_argmin(fun, lo, hi, step):
    """Dense-grid minimizer of a scalar function."""
    xs = np.arange(lo, hi + step, step)
    vals = np.array([fun(x) for x in xs])
    k = int(np.argmin(vals))
    return xs[k], vals[k]


def envelope_by_grid(f, mu, p, pad=5.0, step=1e-6):
    """Moreau envelope at ``p`` by dense-grid minimization."""
    lo = min(p, f.breakpoints[0]) - pad
    hi = max(p, f.breakpoints[-1]) + pad
    _, val = grid_argmin(lambda q: f.value(q) + (p - q) ** 2 / (2 * mu), lo, hi, step)
    return val


def central_fd(fun, x, h=1e-7):
    return (fun(x + h) - fun(x - h)) / (2 * h)


def tree_value(instance, noise, p, control_points, t, x):
    """Exhaustive scenario-tree value with controls restricted to the given
    points intersected with the admissible interval.  Exponential in the
    horizon: only for tiny instances."""
    if t == instance.horizon:
        return final_cost(x, instance)
    lo, hi = admissible_interval(x[0], instance.battery)
    best = np.inf
    for u in control_points:
        if u < lo - 1e-12 or u > hi + 1e-12:
            continue
        acc = 0.0
        for w, pr in zip(noise.atoms[t], noise.probs[t]):
            xn = state_step(x, u, w, t, instance.ar1, instance.battery)
            acc += pr * (stage_cost(x, u, w, p, t, instance)
                         + tree_value(instance, noise, p, control_points, t + 1, xn))
        if acc < best:
            best = acc
    return best


def vertex_enumeration(lp):
    """Optimal objective of a small LP by enumerating candidate vertices.

    Requires finite variable boxes so the feasible set is a polytope; then
    a nonempty feasible set has an optimal vertex.  Returns ``(status,
    objective)`` with status 'optimal' or 'infeasible'.
    """
    m, n = lp.A.shape
    cons = [(lp.A[i], lp.b[i]) for i in range(m)]
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        cons.append((e, lp.lo[j]))
        cons.append((e, lp.hi[j]))

    def feasible(x):
        if np.any(x < lp.lo - 1e-9) or np.any(x > lp.hi + 1e-9):
            return False
        r = lp.A @ x - lp.b
        for i in range(m):
            s = lp.senses[i]
            if s == 0 and abs(r[i]) > 1e-9:
                return False
            if s == -1 and r[i] > 1e-9:
                return False
            if s == 1 and r[i] < -1e-9:
                return False
        return True

    best = np.inf
    found = False
    for combo in itertools.combinations(range(len(cons)), n):
        Aq = np.array([cons[k][0] for k in combo])
        bq = np.array([cons[k][1] for k in combo])
        if not np.all(np.isfinite(bq)):
            continue
        if abs(np.linalg.det(Aq)) < 1e-10:
            continue
        x = np.linalg.solve(Aq, bq)
        if feasible(x):
            found = True
            best = min(best, float(lp.c @ x))
    if not found:
        return "infeasible", np.nan
    return "optimal", best + lp.c0


def random_box_lp(rng, max_vars=6, max_rows=6):
    """Random inequality LP over [-1, 1] data with finite boxes."""
    from paramdp.lp import LinearProgram

    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(1, max_rows + 1))
    A = rng.uniform(-1, 1, size=(m, n))
    b = rng.uniform(-1, 1, size=m)
    senses = rng.choice([-1, 1], size=m)
    lo = rng.uniform(-1, 0, size=n)
    hi = rng.uniform(0, 1, size=n)
    c = rng.uniform(-1, 1, size=n)
    return LinearProgram(c=c, A=A, senses=senses, b=b, lo=lo, hi=hi)
