"""Moreau envelopes of scalar convex piecewise-linear functions.

The commitment parameter enters each stage cost through a single coordinate,
so the multidimensional envelope of the cost reduces to the envelope of a
scalar section: the infimum over the remaining coordinates is attained at
the point itself and contributes nothing.  The scalar prox is computed in
closed form by inverting the strictly increasing map ``q + mu * df(q)``
over the breakpoints, so no iterative solver and no tolerance is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScalarPLConvex:
    """Convex piecewise-linear function on the whole real line.

    ``slopes[i]`` applies between ``breakpoints[i - 1]`` and
    ``breakpoints[i]`` (slope 0 left of the first breakpoint, slope ``m``
    right of the last); ``anchor_value`` is the function value at the first
    breakpoint.
    """

    breakpoints: np.ndarray
    slopes: np.ndarray
    anchor_value: float = 0.0

    def __post_init__(self):
        bp = np.atleast_1d(np.asarray(self.breakpoints, dtype=float))
        sl = np.atleast_1d(np.asarray(self.slopes, dtype=float))
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "slopes", sl)
        if sl.size != bp.size + 1:
            raise ValueError("need exactly one more slope than breakpoints")
        if bp.size and np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(np.diff(sl) < 0):
            raise ValueError("slopes must be nondecreasing (convexity)")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(sl))
                and math.isfinite(self.anchor_value)):
            raise ValueError("breakpoints, slopes and anchor must be finite")
        # cumulative values at the breakpoints
        vals = np.empty(bp.size)
        vals[0] = self.anchor_value
        for i in range(1, bp.size):
            vals[i] = vals[i - 1] + sl[i] * (bp[i] - bp[i - 1])
        object.__setattr__(self, "_bp_values", vals)

    def value(self, q):
        """Evaluate the function at ``q``."""
        bp, sl, vals = self.breakpoints, self.slopes, self._bp_values
        i = int(np.searchsorted(bp, q, side="right"))
        if i == 0:
            return vals[0] + sl[0] * (q - bp[0])
        return vals[i - 1] + sl[i] * (q - bp[i - 1])

    def max_abs_slope(self):
        return float(np.max(np.abs(self.slopes)))


@dataclass(frozen=True)
class EnvelopeResult:
    """Envelope value, proximal point and envelope gradient at one point."""

    value: float
    prox: float
    grad: float


def prox_pl(f, mu, p):
    """Proximal point of a piecewise-linear convex ``f`` at ``p``.

    The optimality condition ``p in q + mu * df(q)`` is inverted exactly:
    the map is affine with slope 1 between breakpoints and jumps across
    ``[b + mu*s_left, b + mu*s_right]`` at each breakpoint ``b``.
    """
    _check_mu_p(mu, p)
    bp, sl = f.breakpoints, f.slopes
    if p < bp[0] + mu * sl[0]:
        return p - mu * sl[0]
    for i in range(bp.size):
        if p <= bp[i] + mu * sl[i + 1]:
            return bp[i]
        if i + 1 == bp.size or p < bp[i + 1] + mu * sl[i + 1]:
            return p - mu * sl[i + 1]
    raise AssertionError("unreachable: prox scan exhausted")


def envelope(f, mu, p):
    """Envelope value, prox and gradient bundled together."""
    q = prox_pl(f, mu, p)
    val = f.value(q) + (p - q) ** 2 / (2.0 * mu)
    return EnvelopeResult(value=val, prox=q, grad=(p - q) / mu)


def envelope_value(f, mu, p):
    """Moreau envelope of ``f`` evaluated at ``p``."""
    return envelope(f, mu, p).value


def envelope_grad(f, mu, p):
    """Gradient of the envelope; equals ``(p - prox) / mu``."""
    return envelope(f, mu, p).grad


def _check_mu_p(mu, p):
    if not (math.isfinite(mu) and mu > 0):
        raise ValueError("regularization coefficient must be positive")
    if not math.isfinite(p):
        raise ValueError("evaluation point must be finite")


def stage_cost_section(x, u, w, t, instance):
    """Stage cost of the benchmark as a function of its only active
    parameter coordinate.

    Returns ``(section, delivered)`` where the section is
    ``q -> -c*dt*d + penalty*c*dt*|d - q|``.
    """
    _, gen = x
    ar1 = instance.ar1
    d = ar1.alpha[t] * gen + ar1.beta[t] + w - u
    c_dt = instance.tariff.prices[t] * instance.battery.dt_hours
    a = instance.tariff.penalty * c_dt
    section = ScalarPLConvex(breakpoints=np.array([d]),
                             slopes=np.array([-a, a]),
                             anchor_value=-c_dt * d)
    return section, d


def regularized_stage_cost(x, u, w, p, t, mu, instance):
    """Envelope of the stage cost in the parameter, with its derivative.

    The derivative is the ``t``-th (only nonzero) coordinate of the cost's
    parameter gradient.  A zero penalty weight makes the cost independent of
    the parameter, in which case the envelope is the cost itself.
    """
    if not (0 <= t < instance.horizon):
        raise ValueError(f"stage {t} outside [0, {instance.horizon})")
    section, _ = stage_cost_section(x, u, w, t, instance)
    if instance.tariff.penalty == 0.0:
        return section.value(p[t]), 0.0
    res = envelope(section, mu, p[t])
    return res.value, res.grad


def huber_penalty(z, a, mu):
    """Envelope of ``a * |z|``: quadratic within ``|z| <= mu*a``, affine
    beyond.  Closed form used by the DP kernels; ``mu = 0`` means no
    regularization (plain absolute value)."""
    z = np.asarray(z, dtype=float)
    if mu == 0.0:
        return a * np.abs(z)
    az = np.abs(z)
    quad = z * z / (2.0 * mu)
    lin = a * az - 0.5 * mu * a * a
    return np.where(az <= mu * a, quad, lin)


def huber_penalty_grad(z, a, mu):
    """Derivative of the envelope penalty in ``z``; the subgradient choice
    ``a * sign(z)`` (zero at the kink) when unregularized."""
    z = np.asarray(z, dtype=float)
    if mu == 0.0:
        return a * np.sign(z)
    return np.clip(z / mu, -a, a)
