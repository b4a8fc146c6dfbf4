"""Grid-based backward dynamic programming oracle.

Runs the Bellman recursion on a rectangular (state of charge, generated
power) grid with a discrete control set, producing per-stage value tables
and parameter-gradient tables for a fixed commitment profile, either on the
raw nonsmooth costs or on their Moreau envelopes.

The per-stage sweep is the hot loop.  Two interchangeable kernels implement
it: a numba-compiled node loop and a vectorized numpy one (see
:mod:`paramdp._accel` for the switch).  Both interpolate the next-stage
value and gradient tables bilinearly at the clamped next state and break
argmin ties toward the smallest control, so their outputs agree to float
round-off.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ._accel import NUMBA_ENABLED, jit_or_python
from .model import admissible_interval

GRID_TOL = 1e-9


@dataclass(frozen=True)
class StateGrid:
    """Uniform nodes on [0, 1] x [0, q_max]."""

    soc: np.ndarray
    gen: np.ndarray

    def __post_init__(self):
        soc = np.asarray(self.soc, dtype=float)
        gen = np.asarray(self.gen, dtype=float)
        object.__setattr__(self, "soc", soc)
        object.__setattr__(self, "gen", gen)
        if soc.size < 2 or gen.size < 2:
            raise ValueError("state grid needs at least 2 nodes per axis")
        if np.any(np.diff(soc) <= 0) or np.any(np.diff(gen) <= 0):
            raise ValueError("grid axes must be strictly increasing")

    @classmethod
    def uniform(cls, n_soc, n_gen, q_max=1.0):
        return cls(soc=np.linspace(0.0, 1.0, n_soc),
                   gen=np.linspace(0.0, q_max, n_gen))

    @property
    def shape(self):
        return (self.soc.size, self.gen.size)


@dataclass(frozen=True)
class ControlGrid:
    """Uniform control points; zero is always a member."""

    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        object.__setattr__(self, "u", u)
        if u.size < 2 or np.any(np.diff(u) <= 0):
            raise ValueError("control grid must be increasing with >= 2 points")
        if not np.any(np.abs(u) <= 1e-12):
            raise ValueError("control grid must contain zero")

    @classmethod
    def uniform(cls, n_u, u_min, u_max):
        pts = np.linspace(u_min, u_max, n_u)
        if not np.any(np.abs(pts) <= 1e-12):
            pts = np.sort(np.append(pts, 0.0))
        return cls(u=pts)


@dataclass
class SolveTables:
    """Per-stage tables kept on request: values ``(T+1, Ns, Ng)``, gradients
    ``(T+1, Ns, Ng, n_p)`` and argmin control indices ``(T, Ns, Ng)``."""

    values: np.ndarray
    grads: np.ndarray | None
    argmin: np.ndarray | None


@dataclass
class OracleResult:
    """Root value and parameter gradient of one backward solve."""

    value: float
    gradient: np.ndarray
    wall_time: float
    tables: SolveTables | None = None


def _locate(axis, values):
    """Cell index and fractional weight of ``values`` on a uniform axis."""
    inv_step = (axis.size - 1) / (axis[-1] - axis[0])
    pos = (np.asarray(values, dtype=float) - axis[0]) * inv_step
    j = np.clip(np.floor(pos).astype(np.int64), 0, axis.size - 2)
    return j, pos - j


def bilinear_interp(table, soc_axis, gen_axis, soc, gen):
    """Bilinear combination of the four nodes around ``(soc, gen)``.

    Exact at nodes and linear along grid lines.  Points outside the grid
    bounding box are rejected; callers clamp next states first.
    """
    soc = np.asarray(soc, dtype=float)
    gen = np.asarray(gen, dtype=float)
    if (np.any(soc < soc_axis[0] - GRID_TOL) or np.any(soc > soc_axis[-1] + GRID_TOL)
            or np.any(gen < gen_axis[0] - GRID_TOL) or np.any(gen > gen_axis[-1] + GRID_TOL)):
        raise ValueError("interpolation point outside the grid bounding box")
    js, ws = _locate(soc_axis, np.clip(soc, soc_axis[0], soc_axis[-1]))
    jg, wg = _locate(gen_axis, np.clip(gen, gen_axis[0], gen_axis[-1]))
    v = ((1 - ws) * (1 - wg) * table[js, jg]
         + ws * (1 - wg) * table[js + 1, jg]
         + (1 - ws) * wg * table[js, jg + 1]
         + ws * wg * table[js + 1, jg + 1])
    return float(v) if v.ndim == 0 else v


def _pen_value(z, a, mu):
    if mu == 0.0:
        return a * abs(z)
    az = abs(z)
    if az <= mu * a:
        return z * z / (2.0 * mu)
    return a * az - 0.5 * mu * a * a


def _pen_grad(z, a, mu):
    if mu == 0.0:
        if z > 0.0:
            return a
        if z < 0.0:
            return -a
        return 0.0
    g = z / mu
    if g > a:
        return a
    if g < -a:
        return -a
    return g


def _stage_kernel_loop(V1, G1, want_grad, t_coord, u, k_lo, k_hi,
                       soc_j, soc_w, graw, gen_j, gen_w,
                       probs, c_dt, a_pen, p_t, mu):
    """Node-loop stage sweep (numba-compiled when enabled)."""
    n_s = soc_j.shape[0]
    n_g = graw.shape[0]
    n_a = probs.shape[0]
    n_p = G1.shape[2]
    V0 = np.empty((n_s, n_g))
    U0 = np.empty((n_s, n_g), dtype=np.int64)
    G0 = np.zeros((n_s, n_g, n_p))
    for i in range(n_s):
        for g in range(n_g):
            best = np.inf
            best_k = -1
            for k in range(k_lo[i], k_hi[i] + 1):
                js = soc_j[i, k]
                ws = soc_w[i, k]
                acc = 0.0
                for a in range(n_a):
                    d = graw[g, a] - u[k]
                    pen = _pen_value(p_t - d, a_pen, mu)
                    jg = gen_j[g, a]
                    wg = gen_w[g, a]
                    v = ((1.0 - ws) * ((1.0 - wg) * V1[js, jg] + wg * V1[js, jg + 1])
                         + ws * ((1.0 - wg) * V1[js + 1, jg] + wg * V1[js + 1, jg + 1]))
                    acc += probs[a] * (-c_dt * d + pen + v)
                if acc < best:
                    best = acc
                    best_k = k
            V0[i, g] = best
            U0[i, g] = best_k
            if want_grad:
                js = soc_j[i, best_k]
                ws = soc_w[i, best_k]
                gslot = G0[i, g]
                for a in range(n_a):
                    d = graw[g, a] - u[best_k]
                    gz = _pen_grad(p_t - d, a_pen, mu)
                    jg = gen_j[g, a]
                    wg = gen_w[g, a]
                    pa = probs[a]
                    gslot[t_coord] += pa * gz
                    for q in range(n_p):
                        gslot[q] += pa * (
                            (1.0 - ws) * ((1.0 - wg) * G1[js, jg, q] + wg * G1[js, jg + 1, q])
                            + ws * ((1.0 - wg) * G1[js + 1, jg, q] + wg * G1[js + 1, jg + 1, q]))
    return V0, G0, U0


if NUMBA_ENABLED:
    _pen_value = jit_or_python(_pen_value)
    _pen_grad = jit_or_python(_pen_grad)
    _stage_kernel_loop = jit_or_python(_stage_kernel_loop)


def _stage_kernel_numpy(V1, G1, want_grad, t_coord, u, k_lo, k_hi,
                        soc_j, soc_w, graw, gen_j, gen_w,
                        probs, c_dt, a_pen, p_t, mu):
    """Vectorized stage sweep, algebraically identical to the loop kernel."""
    from .moreau import huber_penalty, huber_penalty_grad

    n_s, n_u = soc_j.shape
    n_g = graw.shape[0]
    # expected one-stage cost per (gen node, control)
    d = graw[:, :, None] - u[None, None, :]                    # (Ng, A, Nu)
    cost = -c_dt * d + huber_penalty(p_t - d, a_pen, mu)
    cbar = np.einsum("a,gau->gu", probs, cost)
    # next-value table contracted over the noise along the gen axis
    v_lo = V1[:, gen_j]                                        # (Ns, Ng, A)
    v_hi = V1[:, gen_j + 1]
    m = ((1.0 - gen_w) * v_lo + gen_w * v_hi) @ probs          # (Ns, Ng)
    ev = ((1.0 - soc_w)[:, :, None] * m[soc_j]
          + soc_w[:, :, None] * m[soc_j + 1])                  # (Ns, Nu, Ng)
    q = cbar[None, :, :] + ev.transpose(0, 2, 1)               # (Ns, Ng, Nu)
    k_idx = np.arange(n_u)
    adm = (k_idx[None, :] >= k_lo[:, None]) & (k_idx[None, :] <= k_hi[:, None])
    q = np.where(adm[:, None, :], q, np.inf)
    ustar = np.argmin(q, axis=2)
    V0 = np.take_along_axis(q, ustar[:, :, None], axis=2)[:, :, 0]
    G0 = np.zeros((n_s, n_g, G1.shape[2]))
    if want_grad:
        gz = huber_penalty_grad(p_t - d, a_pen, mu)            # (Ng, A, Nu)
        gbar = np.einsum("a,gau->gu", probs, gz)
        rows = np.arange(n_s)[:, None]
        cols = np.arange(n_g)[None, :]
        mg = np.zeros((n_s, n_g, G1.shape[2]))
        for a in range(probs.size):
            wa = gen_w[:, a][None, :, None]
            mg += probs[a] * ((1.0 - wa) * G1[:, gen_j[:, a], :]
                              + wa * G1[:, gen_j[:, a] + 1, :])
        js_sel = soc_j[rows, ustar]
        ws_sel = soc_w[rows, ustar][:, :, None]
        G0 = (1.0 - ws_sel) * mg[js_sel, cols] + ws_sel * mg[js_sel + 1, cols]
        G0[:, :, t_coord] += gbar[cols, ustar]
    return V0, G0, ustar.astype(np.int64)


def _stage_inputs(instance, state_grid, control_grid, t, atoms):
    """Geometry shared by both kernels for one stage."""
    bp = instance.battery
    soc = state_grid.soc
    u = control_grid.u
    # admissible control index window per soc node (interval contains 0)
    lo = np.empty(soc.size)
    hi = np.empty(soc.size)
    for i, s in enumerate(soc):
        lo[i], hi[i] = admissible_interval(s, bp)
    k_lo = np.searchsorted(u, lo - 1e-12, side="left").astype(np.int64)
    k_hi = (np.searchsorted(u, hi + 1e-12, side="right") - 1).astype(np.int64)
    # battery transition per (soc node, control), clamped for interpolation
    flow = (bp.rho_c * np.maximum(u, 0.0) - np.maximum(-u, 0.0) / bp.rho_d)
    soc_next = np.clip(soc[:, None] + flow[None, :] * bp.dt_hours / bp.capacity, 0.0, 1.0)
    soc_j, soc_w = _locate(soc, soc_next)
    # generated power per (gen node, atom): raw drives the cost, clamped the
    # interpolation (the projection of the state transition)
    graw = (instance.ar1.alpha[t] * state_grid.gen[:, None]
            + instance.ar1.beta[t] + atoms[None, :])
    gcl = np.clip(graw, 0.0, bp.q_max)
    gen_j, gen_w = _locate(state_grid.gen, gcl)
    return u, k_lo, k_hi, soc_j, soc_w, graw, gen_j, gen_w


def _x0_indices(instance, state_grid):
    soc0, gen0 = instance.x0
    i = int(round((soc0 - state_grid.soc[0]) / (state_grid.soc[-1] - state_grid.soc[0])
                  * (state_grid.soc.size - 1)))
    g = int(round((gen0 - state_grid.gen[0]) / (state_grid.gen[-1] - state_grid.gen[0])
                  * (state_grid.gen.size - 1)))
    i = min(max(i, 0), state_grid.soc.size - 1)
    g = min(max(g, 0), state_grid.gen.size - 1)
    if (abs(state_grid.soc[i] - soc0) > GRID_TOL
            or abs(state_grid.gen[g] - gen0) > GRID_TOL):
        raise ValueError("initial state must coincide with grid nodes")
    return i, g


def backward_solve(instance, noise, p, state_grid, control_grid, mu=None,
                   want_grad=True, retain_tables=False, use_numba=None):
    """Backward Bellman recursion over the grids at a fixed profile ``p``.

    ``mu`` switches the Moreau-regularized costs on (``mu > 0``) or off
    (``None``).  Gradient tables follow the backward gradient recursion with
    the argmin control of the value recursion, interpolating the next-stage
    gradient table at the same point as the value table.
    """
    start = time.perf_counter()
    p = instance.check_profile(p)
    if noise.horizon != instance.horizon:
        raise ValueError("noise model and instance disagree on the horizon")
    if mu is not None and not (mu > 0):
        raise ValueError("mu must be positive when regularization is on")
    mu_val = 0.0 if mu is None else float(mu)
    if use_numba is None:
        use_numba = NUMBA_ENABLED
    kernel = _stage_kernel_loop if use_numba else _stage_kernel_numpy

    horizon = instance.horizon
    n_s, n_g = state_grid.shape
    n_p = instance.n_p
    c_end = instance.tariff.prices[horizon] * instance.battery.capacity
    V_next = np.repeat((-c_end * state_grid.soc)[:, None], n_g, axis=1)
    G_next = np.zeros((n_s, n_g, n_p))
    dummy_grad = np.zeros((1, 1, n_p))

    values = grads = argmins = None
    if retain_tables:
        values = np.empty((horizon + 1, n_s, n_g))
        values[horizon] = V_next
        argmins = np.empty((horizon, n_s, n_g), dtype=np.int64)
        if want_grad:
            grads = np.zeros((horizon + 1, n_s, n_g, n_p))

    for t in range(horizon - 1, -1, -1):
        u, k_lo, k_hi, soc_j, soc_w, graw, gen_j, gen_w = _stage_inputs(
            instance, state_grid, control_grid, t, noise.atoms[t])
        c_dt = instance.tariff.prices[t] * instance.battery.dt_hours
        a_pen = instance.tariff.penalty * c_dt
        V_next, G_next, U0 = kernel(
            V_next, G_next if want_grad else dummy_grad, want_grad, t,
            u, k_lo, k_hi, soc_j, soc_w, graw, gen_j, gen_w,
            noise.probs[t], c_dt, a_pen, float(p[t]), mu_val)
        if not np.all(np.isfinite(V_next)):
            raise ArithmeticError(f"non-finite value table at stage {t}")
        if retain_tables:
            values[t] = V_next
            argmins[t] = U0
            if want_grad:
                grads[t] = G_next

    i0, g0 = _x0_indices(instance, state_grid)
    tables = None
    if retain_tables:
        tables = SolveTables(values=values, grads=grads, argmin=argmins)
    return OracleResult(value=float(V_next[i0, g0]),
                        gradient=G_next[i0, g0].copy() if want_grad else np.zeros(n_p),
                        wall_time=time.perf_counter() - start,
                        tables=tables)


def oracle(instance, noise, state_grid, control_grid, mu=None, use_numba=None):
    """First-order oracle ``p -> (value, gradient)`` for the optimizer.

    Stateless between calls; two calls at the same profile return identical
    results.
    """
    def call(p):
        res = backward_solve(instance, noise, p, state_grid, control_grid,
                             mu=mu, use_numba=use_numba)
        return res.value, res.gradient

    return call
