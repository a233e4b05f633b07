"""Pathwise estimators of the diffusion scale sigma and power index gamma.

Every estimator here is an explicit functional of a single observed path
y(t_k): no drift model, likelihood, or distributional assumption enters.
Writing v[h, k] = log(1 + eta[h, k]**2) for the increment series of
``auxprocess.compute_aux``:

* sigma_known_gamma: sigma^2 estimated by
      sum_k v[h, k] / (delta * sum_k y(t_k)**(2*(gamma - h))),
  valid for any exponent h when gamma is known.
* gamma_ratio_estimate: gamma estimated by matching, on a grid of
  candidates g, the ratio identity
      sum y**(2*(g-h1)) / sum y**(2*(g-h2))  =  sum v[h1] / sum v[h2].
* joint_estimate: gamma estimated as the exponent h at which the per-step
  terms v[h, k] are flattest relative to their own mean, by minimizing the
  scale-free spread sum_k (v[h, k] / mean(v[h]) - 1)**2; then
  sigma = sqrt(mean(v[gamma]) / delta).
* gamma_known_sigma: gamma estimated, when sigma is known, as the h
  minimizing the scale-normalized form of sum_k (v[h, k]/delta - sigma**2)**2
  (the joint_estimate spread plus a term matching mean(v[h])/delta to
  sigma**2).
* integrated_sigma_sq: sum_k v[gamma, k] estimates the integral of
  sigma(s)^2 ds over the observation window (time-dependent scale).

Grid searches scan h in {1/grid_n, 2/grid_n, ..., 1} by default; ties
resolve to the smallest candidate.  A ``search_range`` (lo, hi) narrows the
scan to {lo + (hi-lo)*k/grid_n}, e.g. (0.5, 1.0) restricts the power index
to the positivity-preserving half of the unit interval, the range on which
square-root (0.5) through linear (1.0) diffusion scalings live.  A separate
helper backs the CIR parameters (a, b) out of a first and second moment of
y(T).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .auxprocess import compute_aux
from .simulate import DegeneratePathError, SamplePath

__all__ = [
    "EstimateResult",
    "NoSolutionError",
    "sigma_known_gamma",
    "gamma_ratio_estimate",
    "joint_estimate",
    "gamma_known_sigma",
    "integrated_sigma_sq",
    "cir_mean",
    "cir_variance",
    "cir_backout",
    "METHOD_SIGMA_KNOWN_GAMMA",
    "METHOD_GAMMA_RATIO",
    "METHOD_JOINT_VARIANCE",
    "METHOD_GAMMA_KNOWN_SIGMA",
    "METHOD_INTEGRATED_SIGMA_SQ",
    "METHOD_CIR_BACKOUT",
]

METHOD_SIGMA_KNOWN_GAMMA = "sigma-known-gamma"
METHOD_GAMMA_RATIO = "gamma-ratio"
METHOD_JOINT_VARIANCE = "joint-variance"
METHOD_GAMMA_KNOWN_SIGMA = "gamma-known-sigma"
METHOD_INTEGRATED_SIGMA_SQ = "integrated-sigma-sq"
METHOD_CIR_BACKOUT = "cir-backout"


class NoSolutionError(RuntimeError):
    """Root search failed; ``residual_curve`` holds the sampled residuals."""

    def __init__(self, message: str, residual_curve: list[tuple[float, float]]):
        super().__init__(message)
        self.residual_curve = residual_curve


@dataclass(frozen=True)
class EstimateResult:
    """Outcome of one estimator on one path.

    ``objective_curve`` holds (candidate, objective) pairs for grid-search
    methods, for diagnostics.  ``degenerate`` flags a zero-variance path on
    which the estimate is the trivial sigma = 0.
    """

    method: str
    gamma_hat: float | None = None
    sigma_hat: float | None = None
    grid_n: int | None = None
    objective_min: float | None = None
    objective_curve: tuple[tuple[float, float], ...] | None = None
    degenerate: bool = False

    CSV_HEADER = "method,gamma_hat,sigma_hat,grid_n,objective_min"

    def to_csv_row(self) -> str:
        def fmt(x: float | int | None) -> str:
            if x is None:
                return ""
            if isinstance(x, int):
                return str(x)
            return format(x, ".17g")

        return ",".join(
            [self.method, fmt(self.gamma_hat), fmt(self.sigma_hat), fmt(self.grid_n), fmt(self.objective_min)]
        )


def _check_unit(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def _grid(grid_n: int, search_range: tuple[float, float]) -> np.ndarray:
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    lo, hi = search_range
    if not (0.0 <= lo < hi <= 1.0):
        raise ValueError("search_range must satisfy 0 <= lo < hi <= 1")
    return lo + (hi - lo) * np.arange(1, grid_n + 1) / grid_n


def _curve(grid: np.ndarray, objective: np.ndarray) -> tuple[tuple[float, float], ...]:
    return tuple((float(g), float(o)) for g, o in zip(grid, objective))


def sigma_known_gamma(path: SamplePath, gamma: float, h: float) -> EstimateResult:
    """Estimate sigma assuming the power index gamma is known.

    Any h in [0, 1] is admissible; h = gamma makes the weight sum trivial.
    A constant path returns sigma_hat = 0 with the degenerate flag set.
    """
    _check_unit("gamma", gamma)
    _check_unit("h", h)
    aux = compute_aux(path, h)
    total = float(np.sum(aux.v))
    if total == 0.0:
        return EstimateResult(method=METHOD_SIGMA_KNOWN_GAMMA, sigma_hat=0.0, degenerate=True)
    tail = path.values[1:]
    weight = path.delta * float(np.sum(tail ** (2.0 * (gamma - h))))
    return EstimateResult(method=METHOD_SIGMA_KNOWN_GAMMA, sigma_hat=math.sqrt(total / weight))


def gamma_ratio_estimate(
    path: SamplePath,
    h1: float = 0.0,
    h2: float = 1.0,
    grid_n: int = 300,
    search_range: tuple[float, float] = (0.0, 1.0),
) -> EstimateResult:
    """Estimate gamma by matching power-sum and increment-sum ratios.

    Scans candidates g in {1/grid_n, ..., 1} (or the ``search_range``
    restriction) and minimizes
    | sum y**(2*(g-h1)) / sum y**(2*(g-h2)) - sum v[h1] / sum v[h2] |.
    Requires h1 != h2.  Does not produce a sigma estimate.
    """
    _check_unit("h1", h1)
    _check_unit("h2", h2)
    if h1 == h2:
        raise ValueError("h1 and h2 must differ")
    grid = _grid(grid_n, search_range)
    s1 = float(np.sum(compute_aux(path, h1).v))
    s2 = float(np.sum(compute_aux(path, h2).v))
    if s1 == 0.0 or s2 == 0.0:
        raise DegeneratePathError("constant path: increment sums vanish")
    rhs = s1 / s2
    log_tail = np.log(path.values[1:])
    objective = np.empty(grid.size)
    for i, g in enumerate(grid):
        num = float(np.sum(np.exp((2.0 * (g - h1)) * log_tail)))
        den = float(np.sum(np.exp((2.0 * (g - h2)) * log_tail)))
        objective[i] = abs(num / den - rhs)
    best = int(np.argmin(objective))
    return EstimateResult(
        method=METHOD_GAMMA_RATIO,
        gamma_hat=float(grid[best]),
        grid_n=grid_n,
        objective_min=float(objective[best]),
        objective_curve=_curve(grid, objective),
    )


def joint_estimate(
    path: SamplePath, grid_n: int = 30, search_range: tuple[float, float] = (0.0, 1.0)
) -> EstimateResult:
    """Estimate gamma and sigma together, knowing neither.

    At the true power the per-step terms v[h, k] / delta all hover around
    the one constant sigma**2, so gamma is taken as the grid exponent h
    with the smallest relative spread sum_k (v[h, k] / mean(v[h]) - 1)**2.
    The spread is measured relative to the mean because the absolute size
    of v changes with h (through the path level), which would otherwise
    drag the minimizer toward whichever end of [0, 1] shrinks the
    increments rather than toward the flattest h.  sigma then follows as
    sqrt(mean(v[gamma]) / delta).
    """
    grid = _grid(grid_n, search_range)
    y = path.values
    dy = np.diff(y)
    if not np.any(dy != 0.0):
        raise DegeneratePathError("constant path: no increments to fit")
    prev = y[:-1]
    objective = np.empty(grid.size)
    v_bars = np.empty(grid.size)
    for i, h in enumerate(grid):
        eta = dy / prev**h
        v = np.log1p(eta * eta)
        v_bar = v.mean()
        objective[i] = float(np.sum((v / v_bar - 1.0) ** 2))
        v_bars[i] = v_bar
    best = int(np.argmin(objective))
    return EstimateResult(
        method=METHOD_JOINT_VARIANCE,
        gamma_hat=float(grid[best]),
        sigma_hat=math.sqrt(v_bars[best] / path.delta),
        grid_n=grid_n,
        objective_min=float(objective[best]),
        objective_curve=_curve(grid, objective),
    )


def gamma_known_sigma(
    path: SamplePath,
    sigma: float,
    grid_n: int = 30,
    search_range: tuple[float, float] = (0.0, 1.0),
) -> EstimateResult:
    """Estimate gamma assuming the scale sigma is known.

    Scale-normalized form of minimizing sum_k (v[h, k]/delta - sigma**2)**2
    over the candidate grid.  That sum decomposes exactly into a dispersion
    part sum_k (v[h, k] - v_bar[h])**2 / delta**2 plus a level part
    m * (v_bar[h]/delta - sigma**2)**2; as in joint_estimate, each squared
    term is normalized by its reference scale (v_bar[h] for the dispersion
    terms, delta*sigma**2 for the level term).  Without the normalization
    the dispersion part is dominated by per-step noise that simply rewards
    small increments, dragging the argmin to an end of the grid whenever
    the path hovers away from level 1.  Knowing sigma contributes the
    level term, which keeps the search identified on one-sided paths where
    the dispersion term alone goes flat.
    """
    if not (math.isfinite(sigma) and sigma > 0):
        raise ValueError("sigma must be > 0")
    grid = _grid(grid_n, search_range)
    y = path.values
    dy = np.diff(y)
    if not np.any(dy != 0.0):
        raise DegeneratePathError("constant path: no increments to fit")
    prev = y[:-1]
    level_target = path.delta * sigma * sigma
    objective = np.empty(grid.size)
    for i, h in enumerate(grid):
        eta = dy / prev**h
        v = np.log1p(eta * eta)
        v_bar = float(v.mean())
        dispersion = float(np.sum((v / v_bar - 1.0) ** 2))
        level = v.size * (v_bar / level_target - 1.0) ** 2
        objective[i] = dispersion + level
    best = int(np.argmin(objective))
    return EstimateResult(
        method=METHOD_GAMMA_KNOWN_SIGMA,
        gamma_hat=float(grid[best]),
        grid_n=grid_n,
        objective_min=float(objective[best]),
        objective_curve=_curve(grid, objective),
    )


def integrated_sigma_sq(path: SamplePath, gamma: float) -> float:
    """Estimate of integral sigma(s)^2 ds over the observation window.

    Works for a time-dependent scale; for constant sigma the value divided
    by the window length estimates sigma^2.
    """
    _check_unit("gamma", gamma)
    return float(np.sum(compute_aux(path, gamma).v))


# ---------------------------------------------------------------------------
# CIR moment inversion


def cir_mean(a: float, b: float, y0: float, horizon: float) -> float:
    """E y(T) for the CIR model started at y0: b*(1 - e^{-aT}) + e^{-aT}*y0."""
    e = math.exp(-a * horizon)
    return b * (1.0 - e) + e * y0


def cir_variance(a: float, b: float, sigma: float, y0: float, horizon: float) -> float:
    """Var y(T) for the CIR model started at y0.

    Computed as sigma^2/(2a)*b*(1-e^{-aT}) + e^{-aT}*sigma^2/a^2*(1-e^{-aT})*y0,
    the closed form inverted by cir_backout.
    """
    e = math.exp(-a * horizon)
    s2 = sigma * sigma
    return s2 / (2.0 * a) * b * (1.0 - e) + e * s2 / (a * a) * (1.0 - e) * y0


_A_BRACKET = (1e-6, 50.0)
_SCAN_POINTS = 400


def cir_backout(
    mean_t: float,
    var_t: float,
    sigma: float,
    y0: float,
    horizon: float,
    a_bracket: tuple[float, float] = _A_BRACKET,
) -> tuple[float, float]:
    """Recover CIR (a, b) from the mean and variance of y(T).

    b is eliminated through the mean equation, leaving a one-dimensional
    root search in a over ``a_bracket`` (the lower end stays above zero:
    as a -> 0 the mean equation degenerates).  Raises NoSolutionError,
    carrying the sampled residual curve, if the variance residual does not
    change sign on the bracket.
    """
    if not (sigma > 0 and y0 > 0 and horizon > 0 and var_t > 0):
        raise ValueError("sigma, y0, horizon and var_t must all be > 0")
    lo, hi = a_bracket
    if not (0.0 < lo < hi):
        raise ValueError("a_bracket must satisfy 0 < lo < hi")

    def b_from_mean(a: float) -> float:
        e = math.exp(-a * horizon)
        return (mean_t - e * y0) / (1.0 - e)

    def residual(a: float) -> float:
        return cir_variance(a, b_from_mean(a), sigma, y0, horizon) - var_t

    scan = np.geomspace(lo, hi, _SCAN_POINTS)
    resids = np.array([residual(float(a)) for a in scan])
    curve = [(float(a), float(r)) for a, r in zip(scan, resids)]
    for i in range(len(scan) - 1):
        r0, r1 = resids[i], resids[i + 1]
        if r0 == 0.0:
            a_root = float(scan[i])
            return a_root, b_from_mean(a_root)
        if r0 * r1 < 0.0:
            a_root = float(brentq(residual, float(scan[i]), float(scan[i + 1]), xtol=1e-14, rtol=1e-15))
            return a_root, b_from_mean(a_root)
    if resids[-1] == 0.0:
        a_root = float(scan[-1])
        return a_root, b_from_mean(a_root)
    raise NoSolutionError(
        f"variance residual does not change sign for a in [{lo}, {hi}]", residual_curve=curve
    )
