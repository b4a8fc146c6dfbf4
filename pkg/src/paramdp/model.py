"""Day-ahead solar/battery plant model.

Holds the concrete problem data (battery coefficients, tariff, AR(1)
generation dynamics) and the stage-level primitives: battery transition,
state transition with the generated-power projection, control admissibility,
stage cost and final cost.  Costs are expressed in euro, powers in MW,
energies in MWh and the state of charge as a fraction of capacity.

All objects are immutable values; every operation is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _require_finite(name, *values):
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name}: non-finite value {v!r}")


@dataclass(frozen=True)
class BatteryParams:
    """Physical battery description.

    capacity is in MWh, the charge bounds in MW (u_min < 0 < u_max),
    efficiencies dimensionless in (0, 1], dt_hours the stage length and
    q_max the installed peak power of the plant in MW.
    """

    capacity: float = 1.0
    u_min: float = -1.0
    u_max: float = 1.0
    rho_c: float = 0.95
    rho_d: float = 0.95
    dt_hours: float = 0.5
    q_max: float = 1.0

    def __post_init__(self):
        _require_finite("BatteryParams", self.capacity, self.u_min, self.u_max,
                        self.rho_c, self.rho_d, self.dt_hours, self.q_max)
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")
        if not (self.u_min < 0 < self.u_max):
            raise ValueError("charge bounds must satisfy u_min < 0 < u_max")
        if not (0 < self.rho_c <= 1 and 0 < self.rho_d <= 1):
            raise ValueError("efficiencies must lie in (0, 1]")
        if self.dt_hours <= 0:
            raise ValueError("dt_hours must be positive")
        if self.q_max <= 0:
            raise ValueError("q_max must be positive")


@dataclass(frozen=True)
class TariffSchedule:
    """Per-stage energy prices (euro/MWh) and the commitment penalty weight.

    ``prices`` has ``horizon + 1`` entries: index ``t < horizon`` prices the
    energy delivered over the interval ``[t, t+1)`` and index ``horizon``
    values the energy left in the battery at the end of the day.

    The benchmark uses ``penalty >= 1``; smaller nonnegative values are
    accepted so the parameter-free case (``penalty = 0``) can be exercised.
    """

    prices: np.ndarray
    penalty: float = 2.0

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        if prices.ndim != 1 or prices.size < 2:
            raise ValueError("prices must be a 1-d array of length horizon + 1")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            raise ValueError("prices must be finite and positive")
        if not math.isfinite(self.penalty) or self.penalty < 0:
            raise ValueError("penalty must be finite and nonnegative")

    @property
    def horizon(self):
        return self.prices.size - 1

    @classmethod
    def flat_peak(cls, horizon, dt_hours=0.5, offpeak=0.4, onpeak=0.6,
                  peak_start_hour=19.0, peak_end_hour=21.0, penalty=2.0):
        """Off-peak price everywhere except a same-day peak window."""
        prices = np.full(horizon + 1, offpeak, dtype=float)
        hours = np.arange(horizon) * dt_hours
        prices[:horizon][(hours >= peak_start_hour) & (hours < peak_end_hour)] = onpeak
        return cls(prices=prices, penalty=penalty)


@dataclass(frozen=True)
class AR1Weights:
    """Stagewise affine weights of the generated-power recursion."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        if alpha.shape != beta.shape or alpha.ndim != 1 or alpha.size < 1:
            raise ValueError("alpha and beta must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
            raise ValueError("AR1 weights must be finite")

    @property
    def horizon(self):
        return self.alpha.size


@dataclass(frozen=True)
class CommitmentProfile:
    """Committed power per half-hour slot (MW), the decision of the
    day-ahead problem."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1:
            raise ValueError("profile must be a 1-d array")
        if not np.all(np.isfinite(values)):
            raise ValueError("profile entries must be finite")

    def is_feasible(self, q_max):
        return bool(np.all(self.values >= 0.0) and np.all(self.values <= q_max))


@dataclass(frozen=True)
class Instance:
    """A complete intraday management problem for one operating day."""

    battery: BatteryParams
    tariff: TariffSchedule
    ar1: AR1Weights
    soc0: float = 0.0
    gen0: float = 0.0

    def __post_init__(self):
        if self.tariff.horizon != self.ar1.horizon:
            raise ValueError("tariff and AR1 weights disagree on the horizon")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        _require_finite("Instance", self.soc0, self.gen0)
        if not (0.0 <= self.soc0 <= 1.0):
            raise ValueError("initial state of charge must lie in [0, 1]")
        if not (0.0 <= self.gen0 <= self.battery.q_max):
            raise ValueError("initial generated power must lie in [0, q_max]")

    @property
    def horizon(self):
        return self.ar1.horizon

    @property
    def n_x(self):
        return 2

    @property
    def n_u(self):
        return 1

    @property
    def n_p(self):
        return self.horizon

    @property
    def x0(self):
        return (self.soc0, self.gen0)

    @property
    def param_lo(self):
        return np.zeros(self.horizon)

    @property
    def param_hi(self):
        return np.full(self.horizon, self.battery.q_max)

    def check_profile(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.horizon,):
            raise ValueError(f"profile must have shape ({self.horizon},)")
        if not np.all(np.isfinite(p)):
            raise ValueError("profile entries must be finite")
        return p


def battery_step(soc, u, params):
    """Next state of charge after applying power ``u`` for one stage.

    Charging (``u > 0``) loses a factor ``rho_c``, discharging pays
    ``1 / rho_d``.  No clamping: feasibility is the caller's concern.
    """
    _require_finite("battery_step", soc, u)
    flow = params.rho_c * max(u, 0.0) - max(-u, 0.0) / params.rho_d
    return soc + flow * params.dt_hours / params.capacity


def state_step(x, u, w, t, ar1, params):
    """Advance the full state ``(soc, gen)`` one stage.

    The generated-power component follows the affine recursion and is then
    projected onto ``[0, q_max]``.
    """
    soc, gen = x
    _require_finite("state_step", soc, gen, u, w)
    if not (0 <= t < ar1.horizon):
        raise ValueError(f"stage {t} outside [0, {ar1.horizon})")
    gen_next = ar1.alpha[t] * gen + ar1.beta[t] + w
    gen_next = min(max(gen_next, 0.0), params.q_max)
    return (battery_step(soc, u, params), gen_next)


def admissible_interval(soc, params):
    """Closed interval of powers keeping the battery state in ``[0, 1]``
    and the control within its charge bounds.  Always contains zero."""
    _require_finite("admissible_interval", soc)
    if not (0.0 <= soc <= 1.0):
        raise ValueError(f"state of charge {soc} outside [0, 1]")
    scale = params.capacity / params.dt_hours
    lo = max(params.u_min, -soc * scale * params.rho_d)
    hi = min(params.u_max, (1.0 - soc) * scale / params.rho_c)
    return (lo, hi)


def delivered_power(gen_next, u):
    """Power actually sent to the grid over the interval."""
    return gen_next - u


def stage_cost(x, u, w, p, t, instance):
    """Cost of stage ``t``: energy revenue plus commitment penalty.

    With ``d`` the delivered power, the cost is
    ``-c_t * dt * d + penalty * c_t * dt * |d - p_t|``, jointly convex and
    piecewise linear in the control and in the committed power ``p_t``.
    """
    _, gen = x
    ar1 = instance.ar1
    if not (0 <= t < instance.horizon):
        raise ValueError(f"stage {t} outside [0, {instance.horizon})")
    d = ar1.alpha[t] * gen + ar1.beta[t] + w - u
    c_dt = instance.tariff.prices[t] * instance.battery.dt_hours
    return -c_dt * d + instance.tariff.penalty * c_dt * abs(d - p[t])


def final_cost(x, instance):
    """Value of the energy left in the battery at the end of the day."""
    soc = x[0]
    c_end = instance.tariff.prices[instance.horizon]
    return -c_end * soc * instance.battery.capacity


def default_benchmark_components(horizon=48):
    """Battery and tariff with the benchmark constants."""
    battery = BatteryParams()
    tariff = TariffSchedule.flat_peak(horizon, dt_hours=battery.dt_hours)
    return battery, tariff
