"""Generation-uncertainty model.

Calibrates the stagewise affine recursion of the generated power from
historical daily profiles and quantizes the regression residuals into finite
per-stage distributions with a one-dimensional K-means.  Also ships a small
synthetic-history generator so the whole pipeline runs without the external
dataset.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .model import AR1Weights

KMEANS_MAX_SWEEPS = 100


@dataclass(frozen=True)
class NoiseModel:
    """Finite stagewise-independent noise distributions.

    Entry ``t`` of ``atoms``/``probs`` is the support of the noise revealed
    during the transition from stage ``t`` to ``t + 1`` (the paper-side
    stages run from 1 to the horizon).
    """

    atoms: tuple
    probs: tuple

    def __post_init__(self):
        atoms = tuple(np.asarray(a, dtype=float) for a in self.atoms)
        probs = tuple(np.asarray(q, dtype=float) for q in self.probs)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)
        if len(atoms) != len(probs) or not atoms:
            raise ValueError("atoms and probs must be nonempty and aligned")
        for a, q in zip(atoms, probs):
            if a.size == 0 or a.shape != q.shape:
                raise ValueError("each stage needs a nonempty support")
            if not (np.all(np.isfinite(a)) and np.all(np.isfinite(q))):
                raise ValueError("noise support must be finite")
            if np.any(q <= 0) or abs(q.sum() - 1.0) > 1e-12:
                raise ValueError("probabilities must be positive and sum to 1")

    @property
    def horizon(self):
        return len(self.atoms)

    def n_atoms(self, t):
        return self.atoms[t].size


def validate_history(series):
    """Check a days-by-stages matrix of generated power."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 2 or series.shape[0] < 2 or series.shape[1] < 1:
        raise ValueError("history must be a (days >= 2) x (stages) matrix")
    if not np.all(np.isfinite(series)):
        raise ValueError("history contains non-finite entries")
    return series


def load_history_csv(path, scale_to_peak=None):
    """Load one row per day, numeric columns, optional header.

    When ``scale_to_peak`` is given the data is rescaled so its maximum
    equals that peak power.
    """
    rows = []
    with open(path, newline="") as fh:
        for record in csv.reader(fh):
            if not record:
                continue
            try:
                rows.append([float(v) for v in record])
            except ValueError:
                if rows:
                    raise
                continue  # header line
    series = validate_history(np.asarray(rows, dtype=float))
    if scale_to_peak is not None:
        peak = series.max()
        if peak <= 0:
            raise ValueError("cannot scale a nonpositive history")
        series = series * (scale_to_peak / peak)
    return series


def synthetic_history(days, horizon, q_max=1.0, seed=0, dt_hours=0.5):
    """Sinusoidal daylight profile with per-day amplitude and local noise.

    Deterministic given the seed; values are clipped to ``[0, q_max]`` and
    the midnight column is exactly zero, like the real data.  Daylight spans
    the central portion of the day so short test horizons still see sun.
    """
    rng = np.random.default_rng(seed)
    hours = np.arange(horizon) * dt_hours
    day_len = horizon * dt_hours
    sunrise, sunset = 0.25 * day_len, (5.0 / 6.0) * day_len
    daylight = np.sin(np.pi * (hours - sunrise) / (sunset - sunrise))
    daylight = np.where((hours >= sunrise) & (hours <= sunset),
                        np.maximum(daylight, 0.0), 0.0)
    amp = rng.uniform(0.45, 1.0, size=(days, 1))
    wobble = rng.normal(0.0, 0.18, size=(days, horizon))
    # smooth the wobble so consecutive stages correlate like passing clouds
    for t in range(1, horizon):
        wobble[:, t] = 0.7 * wobble[:, t - 1] + 0.3 * wobble[:, t]
    series = amp * daylight * (1.0 + wobble)
    return np.clip(series * q_max, 0.0, q_max)


def _ols(xcol, ycol):
    """Slope/intercept least squares with the degenerate-regressor rule."""
    xm = xcol.mean()
    var = float(np.mean((xcol - xm) ** 2))
    if var < 1e-14:
        return 0.0, float(ycol.mean())
    cov = float(np.mean((xcol - xm) * (ycol - ycol.mean())))
    a = cov / var
    return a, float(ycol.mean() - a * xm)


def calibrate_ar1(series):
    """Stagewise least-squares fit of the generated-power recursion.

    Stage ``t < horizon - 1`` regresses column ``t + 1`` on column ``t``
    over all days.  The last transition wraps to the next day's midnight
    column: day ``d + 1``'s first stage against day ``d``'s last stage.
    Columns that are constant across days get a zero slope and the mean of
    the target column as intercept.
    """
    series = validate_history(series)
    days, horizon = series.shape
    alpha = np.zeros(horizon)
    beta = np.zeros(horizon)
    for t in range(horizon - 1):
        alpha[t], beta[t] = _ols(series[:, t], series[:, t + 1])
    alpha[-1], beta[-1] = _ols(series[:-1, -1], series[1:, 0])
    return AR1Weights(alpha=alpha, beta=beta)


def residuals(series, weights):
    """Per-stage regression residuals, one array per transition."""
    series = validate_history(series)
    if weights.horizon != series.shape[1]:
        raise ValueError("weights and history disagree on the horizon")
    out = []
    for t in range(weights.horizon - 1):
        out.append(series[:, t + 1] - weights.alpha[t] * series[:, t] - weights.beta[t])
    out.append(series[1:, 0] - weights.alpha[-1] * series[:-1, -1] - weights.beta[-1])
    return out


def quantize_kmeans(samples, k, seed=0):
    """One-dimensional Lloyd quantization of a sample set.

    Centroids start at ``k`` evenly spaced sample quantiles, so the result
    is deterministic; empty clusters are reseeded at the sample farthest
    from its centroid.  Returns ``(atoms, probs, exact)`` where ``exact``
    flags the degenerate case of fewer distinct samples than ``k`` (the
    returned distribution is then the empirical one and a warning applies).
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("cannot quantize an empty sample set")
    if not np.all(np.isfinite(samples)):
        raise ValueError("samples must be finite")
    if k < 1:
        raise ValueError("need at least one atom")

    distinct = np.unique(samples)
    if distinct.size <= k:
        probs = np.array([np.mean(samples == v) for v in distinct])
        return distinct, probs, distinct.size < k

    centers = np.quantile(samples, (np.arange(k) + 0.5) / k)
    centers = np.sort(centers)
    assign = np.full(samples.size, -1)
    for _ in range(KMEANS_MAX_SWEEPS):
        dist = np.abs(samples[:, None] - centers[None, :])
        new_assign = np.argmin(dist, axis=1)
        for j in range(k):
            mask = new_assign == j
            if mask.any():
                centers[j] = samples[mask].mean()
            else:
                worst = np.argmax(np.abs(samples - centers[new_assign]))
                centers[j] = samples[worst]
                new_assign[worst] = j
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign

    order = np.argsort(centers)
    centers = centers[order]
    counts = np.array([(assign == j).sum() for j in order], dtype=float)
    return centers, counts / samples.size, False


def build_noise_model(series, weights, n_atoms=10, seed=0):
    """Calibration residuals quantized stage by stage."""
    res = residuals(series, weights)
    atoms, probs = [], []
    for t, rs in enumerate(res):
        a, q, _ = quantize_kmeans(rs, n_atoms, seed=seed + t)
        atoms.append(a)
        probs.append(q)
    return NoiseModel(atoms=tuple(atoms), probs=tuple(probs))


def sample_scenario(model, rng):
    """One independent draw per stage; deterministic given the generator."""
    path = np.empty(model.horizon)
    for t in range(model.horizon):
        cum = np.cumsum(model.probs[t])
        idx = int(np.searchsorted(cum, rng.random(), side="right"))
        path[t] = model.atoms[t][min(idx, model.atoms[t].size - 1)]
    return path


def single_atom_model(values):
    """Deterministic noise model, one atom per stage (test helper)."""
    values = np.asarray(values, dtype=float)
    return NoiseModel(
        atoms=tuple(np.array([v]) for v in values),
        probs=tuple(np.array([1.0]) for _ in values),
    )
