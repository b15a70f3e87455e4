"""Optimal time allocation for the three-branch refrigeration cycle.

The durations (tau_c, tau_h, tau_p) are chosen to maximize the cooling rate
R at fixed COP psi subject to zero net heat over the cycle.  Writing the
Lagrangian R + lam1 * psi + lam2 * (Q_c + Q_h + Q_p) and eliminating both
multipliers from the three stationarity conditions leaves a single scalar
constraint on the durations,

    dS_h tau_h^2/Sigma_h + dS_p tau_p^2/Sigma_p + dS_c tau_c^2/Sigma_c
        + 2 (tau_c + tau_h + tau_p) = 0,

while the energy balance fixes tau_h in closed form,

    tau_h = -T_h Sigma_h / [ T_p (dS_p + Sigma_p/tau_p)
                           + T_c (dS_c + Sigma_c/tau_c) + T_h dS_h ].

With tau_c as the independent parameter, substituting the second relation
into the first yields one equation F(tau_p) = 0 per tau_c; its roots, swept
over tau_c, trace the optimal performance curves (R vs psi, chi vs psi).
Everything downstream of the per-branch coefficients (dS, Sigma) is plain
algebra, so sweeps are cheap once the three quadratures are done.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from . import cycle
from .errors import ConvergenceError

__all__ = [
    "AllocationSolution",
    "SweepRecord",
    "CurveResult",
    "AlphaRecord",
    "AlphaSweepResult",
    "EnvelopeResult",
    "ProfilePoint",
    "FreeSweepResult",
    "balanced_tau_h",
    "stationarity_residual",
    "solve_time_allocation",
    "optimal_curve",
    "max_cooling_rate",
    "max_figure_of_merit",
    "alpha_sweep",
    "envelope_curve",
    "time_allocation_profile",
    "free_time_sweep",
    "DEFAULT_TAU_C_GRID",
    "DEFAULT_ALPHA_WINDOW",
]

# tau_c sweep used when the caller does not supply a grid: wide enough to
# cover the R peak and the large-time COP saturation for every alpha in the
# default window.
DEFAULT_TAU_C_GRID = np.geomspace(0.3, 3000.0, 120)
DEFAULT_ALPHA_WINDOW = (-0.5, 1.5)

_TAU_P_RANGE = (1e-2, 1e5)
_TAU_P_SCAN_POINTS = 200


def _require_sign_structure(coeffs):
    """The solver relies on dS_c, dS_h > 0 > dS_p and Sigma_v < 0 throughout."""
    dS_c, dS_h, dS_p = coeffs.dS
    if not (dS_c > 0.0 and dS_h > 0.0 and dS_p < 0.0):
        raise ConvergenceError(
            f"entropy changes outside the refrigeration sign structure: "
            f"dS_c={dS_c:.3e}, dS_h={dS_h:.3e}, dS_p={dS_p:.3e}"
        )
    if not all(s < 0.0 for s in coeffs.Sigma):
        raise ConvergenceError(
            f"dissipation coefficients must all be negative, got {coeffs.Sigma}"
        )


def balanced_tau_h(config, tau_c, tau_p, coeffs=None):
    """Hot-branch duration closing the energy balance Q_c + Q_h + Q_p = 0."""
    if coeffs is None:
        coeffs = cycle.cycle_coefficients(config)
    tau_h = _balanced_tau_h(coeffs, tau_c, tau_p)
    if tau_h is None:
        raise ValueError(
            f"no positive energy-balanced tau_h at tau_c={tau_c}, tau_p={tau_p}"
        )
    return tau_h


def _balanced_tau_h(coeffs, tau_c, tau_p):
    T_c, T_h, T_p = coeffs.T
    dS_c, dS_h, dS_p = coeffs.dS
    S_c, S_h, S_p = coeffs.Sigma
    denom = T_p * (dS_p + S_p / tau_p) + T_c * (dS_c + S_c / tau_c) + T_h * dS_h
    if denom <= 0.0:
        return None
    return -T_h * S_h / denom


def stationarity_residual(coeffs, tau_c, tau_h, tau_p):
    """Left side of the multiplier-free stationarity constraint."""
    dS_c, dS_h, dS_p = coeffs.dS
    S_c, S_h, S_p = coeffs.Sigma
    return (dS_h * tau_h ** 2 / S_h + dS_p * tau_p ** 2 / S_p
            + dS_c * tau_c ** 2 / S_c + 2.0 * (tau_c + tau_h + tau_p))


@dataclass(frozen=True)
class AllocationSolution:
    """One energy-balanced stationary duration triple."""

    tau_c: float
    tau_h: float
    tau_p: float
    residual_constraint: float
    residual_energy: float
    metrics: cycle.CycleMetrics
    principal: bool = False


def solve_time_allocation(config, tau_c, coeffs=None,
                          tau_p_range=_TAU_P_RANGE, scan_points=_TAU_P_SCAN_POINTS):
    """All stationary allocations at the given cold-branch duration.

    tau_p is scanned over a logarithmic grid, each sign change of the
    stationarity constraint is bisected to 1e-12 relative, and the surviving
    (tau_h, tau_p > 0) solutions come back ordered by descending cooling
    rate with the first marked principal.

    Raises :class:`ConvergenceError` when the energy balance admits no
    positive tau_h anywhere in the scan range, or no root is bracketed.
    """
    if tau_c <= 0.0:
        raise ValueError(f"tau_c must be > 0, got {tau_c}")
    if coeffs is None:
        coeffs = cycle.cycle_coefficients(config)
    _require_sign_structure(coeffs)

    def f(tau_p):
        tau_h = _balanced_tau_h(coeffs, tau_c, tau_p)
        return stationarity_residual(coeffs, tau_c, tau_h, tau_p)

    tau_ps = np.geomspace(tau_p_range[0], tau_p_range[1], scan_points)
    vals = np.empty_like(tau_ps)
    for i, tau_p in enumerate(tau_ps):
        tau_h = _balanced_tau_h(coeffs, tau_c, tau_p)
        vals[i] = (stationarity_residual(coeffs, tau_c, tau_h, tau_p)
                   if tau_h is not None and tau_h > 0.0 else np.nan)
    feasible = ~np.isnan(vals)
    if not feasible.any():
        raise ConvergenceError(
            f"energy balance infeasible for every scanned tau_p at tau_c={tau_c} "
            f"(likely delta_c at or below the reversible amplitude)"
        )

    solutions = []
    for i in range(len(tau_ps) - 1):
        a, b = vals[i], vals[i + 1]
        if np.isnan(a) or np.isnan(b) or a * b > 0.0:
            continue
        tau_p = bisect(f, tau_ps[i], tau_ps[i + 1], xtol=1e-280, rtol=1e-12, maxiter=300)
        tau_h = _balanced_tau_h(coeffs, tau_c, tau_p)
        if tau_h is None or tau_h <= 0.0 or tau_p <= 0.0:
            continue
        metrics = cycle._metrics_from_coeffs(coeffs, tau_c, tau_h, tau_p)
        residual_c = stationarity_residual(coeffs, tau_c, tau_h, tau_p)
        residual_e = -metrics.work_residual
        total = tau_c + tau_h + tau_p
        if abs(residual_c) > 1e-8 * total:
            raise ConvergenceError(
                f"stationarity residual {residual_c:.3e} too large at "
                f"tau_c={tau_c} (limit {1e-8 * total:.3e})"
            )
        solutions.append(AllocationSolution(
            tau_c=float(tau_c), tau_h=float(tau_h), tau_p=float(tau_p),
            residual_constraint=float(residual_c),
            residual_energy=float(residual_e),
            metrics=metrics,
        ))
    if not solutions:
        raise ConvergenceError(
            f"no stationary tau_p bracketed at tau_c={tau_c} over "
            f"[{tau_p_range[0]}, {tau_p_range[1]}]"
        )
    solutions.sort(key=lambda sol: -sol.metrics.R)
    solutions[0] = replace(solutions[0], principal=True)
    return solutions


def _principal_or_none(coeffs, tau_c):
    """Principal refrigeration solution at tau_c, or None on any failure."""
    try:
        sols = solve_time_allocation(None, tau_c, coeffs=coeffs)
    except ConvergenceError:
        return None
    best = sols[0]
    m = best.metrics
    if not m.valid or m.cold.Q <= 0.0:
        return None
    return best


class SweepRecord(NamedTuple):
    """One point of a performance curve."""

    alpha: float
    psi: float
    R: float
    chi: float
    tau_c: float
    tau_h: float
    tau_p: float


def _record(alpha, sol):
    m = sol.metrics
    return SweepRecord(alpha=float(alpha), psi=m.psi, R=m.R, chi=m.chi,
                       tau_c=sol.tau_c, tau_h=sol.tau_h, tau_p=sol.tau_p)


@dataclass(frozen=True)
class CurveResult:
    """Optimal performance curve and the grid points that failed to solve."""

    records: list
    skipped: list


def optimal_curve(config, tau_c_grid=None, coeffs=None, min_points=10):
    """Principal allocation per tau_c, sorted by COP.

    Grid points without a convergent refrigeration solution are skipped and
    reported in ``skipped``; fewer than ``min_points`` survivors is an error.
    """
    if tau_c_grid is None:
        tau_c_grid = DEFAULT_TAU_C_GRID
    tau_c_grid = np.asarray(tau_c_grid, dtype=float)
    if tau_c_grid.size < 100:
        raise ValueError("tau_c grid needs >= 100 points")
    if np.any(tau_c_grid <= 0.0):
        raise ValueError("tau_c grid must be positive")
    if coeffs is None:
        coeffs = cycle.cycle_coefficients(config)
    records, skipped = [], []
    for tau_c in tau_c_grid:
        sol = _principal_or_none(coeffs, float(tau_c))
        if sol is None:
            skipped.append(float(tau_c))
        else:
            records.append(_record(config.alpha if config is not None else np.nan, sol))
    if len(records) < min_points:
        raise ConvergenceError(
            f"only {len(records)} of {tau_c_grid.size} grid points converged",
            failed_points=skipped,
        )
    records.sort(key=lambda r: r.psi)
    return CurveResult(records=records, skipped=skipped)


def _refine_objective(coeffs, curve, key):
    """Golden-section refinement of max(record.key) over log tau_c.

    Never returns less than the best grid record.
    """
    recs = sorted(curve.records, key=lambda r: r.tau_c)
    values = [getattr(r, key) for r in recs]
    i = int(np.argmax(values))
    best_sol = _principal_or_none(coeffs, recs[i].tau_c)
    best_val = values[i]
    if i == 0 or i == len(recs) - 1:
        return best_val, best_sol  # peak on the grid edge, nothing to bracket

    lo, hi = math.log(recs[i - 1].tau_c), math.log(recs[i + 1].tau_c)

    def negated(x):
        sol = _principal_or_none(coeffs, math.exp(x))
        return -getattr(sol.metrics, key) if sol is not None else np.inf

    try:
        res = minimize_scalar(negated, bracket=(lo, math.log(recs[i].tau_c), hi),
                              method="golden", options={"xtol": 1e-9})
    except ValueError:
        return best_val, best_sol
    sol = _principal_or_none(coeffs, math.exp(res.x))
    if sol is not None and getattr(sol.metrics, key) > best_val:
        return getattr(sol.metrics, key), sol
    return best_val, best_sol


def max_cooling_rate(config, tau_c_grid=None, coeffs=None):
    """(psi at max R, max R, allocation) with golden-section refinement."""
    if coeffs is None:
        coeffs = cycle.cycle_coefficients(config)
    curve = optimal_curve(config, tau_c_grid=tau_c_grid, coeffs=coeffs)
    value, sol = _refine_objective(coeffs, curve, "R")
    return sol.metrics.psi, value, sol


def max_figure_of_merit(config, tau_c_grid=None, coeffs=None):
    """(psi at max chi, max chi, allocation) with golden-section refinement."""
    if coeffs is None:
        coeffs = cycle.cycle_coefficients(config)
    curve = optimal_curve(config, tau_c_grid=tau_c_grid, coeffs=coeffs)
    value, sol = _refine_objective(coeffs, curve, "chi")
    return sol.metrics.psi, value, sol


class AlphaRecord(NamedTuple):
    """Best cooling rate and figure of merit at one frequency exponent."""

    alpha: float
    R_max: float
    chi_max: float
    psi_at_R_max: float
    psi_at_chi_max: float


@dataclass(frozen=True)
class AlphaSweepResult:
    rows: list
    alpha_chi: float
    alpha_R: float
    chi_max: float
    R_max: float
    skipped: list


def _alpha_extrema(config, alpha, tau_c_grid=None):
    """Both refined objectives at one alpha, or None if the sweep point fails."""
    cfg = replace(config, alpha=float(alpha))
    try:
        coeffs = cycle.cycle_coefficients(cfg)
        curve = optimal_curve(cfg, tau_c_grid=tau_c_grid, coeffs=coeffs)
        R_max, sol_R = _refine_objective(coeffs, curve, "R")
        chi_max, sol_chi = _refine_objective(coeffs, curve, "chi")
    except ConvergenceError:
        return None
    return AlphaRecord(alpha=float(alpha), R_max=R_max, chi_max=chi_max,
                       psi_at_R_max=sol_R.metrics.psi,
                       psi_at_chi_max=sol_chi.metrics.psi)


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _refine_alpha(config, coarse_alpha, rows, key, tau_c_grid=None):
    """Golden-section over alpha with the refined per-alpha objective."""
    alphas = [r.alpha for r in rows]
    i = alphas.index(coarse_alpha)
    best = getattr(rows[i], key)
    if i == 0 or i == len(rows) - 1:
        return coarse_alpha, best

    cache = {}

    def negated(a):
        a = float(a)
        if a not in cache:
            rec = _alpha_extrema(config, a, tau_c_grid=tau_c_grid)
            cache[a] = -getattr(rec, key) if rec is not None else np.inf
        return cache[a]

    try:
        res = minimize_scalar(negated, bracket=(alphas[i - 1], coarse_alpha, alphas[i + 1]),
                              method="golden", options={"xtol": 1e-4})
    except ValueError:
        return coarse_alpha, best
    if -res.fun > best:
        return float(res.x), float(-res.fun)
    return coarse_alpha, best


def alpha_sweep(config, alpha_grid=None, tau_c_grid=None, workers=1):
    """Best R and chi per frequency exponent, plus the locations of their maxima.

    Failing grid points are skipped and listed in ``skipped``.
    """
    if alpha_grid is None:
        alpha_grid = np.linspace(*DEFAULT_ALPHA_WINDOW, 101)
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    if alpha_grid.size < 100:
        raise ValueError("alpha grid needs >= 100 points")
    if alpha_grid.min() < DEFAULT_ALPHA_WINDOW[0] - 1e-12 or \
       alpha_grid.max() > DEFAULT_ALPHA_WINDOW[1] + 1e-12:
        raise ValueError(f"alpha grid must stay within {DEFAULT_ALPHA_WINDOW}")

    results = _map(lambda a: _alpha_extrema(config, a, tau_c_grid=tau_c_grid),
                   alpha_grid, workers)
    rows = [r for r in results if r is not None]
    skipped = [float(a) for a, r in zip(alpha_grid, results) if r is None]
    if not rows:
        raise ConvergenceError("every alpha grid point failed", failed_points=skipped)

    coarse_R = max(rows, key=lambda r: r.R_max)
    coarse_chi = max(rows, key=lambda r: r.chi_max)
    alpha_R, R_max = _refine_alpha(config, coarse_R.alpha, rows, "R_max",
                                   tau_c_grid=tau_c_grid)
    alpha_chi, chi_max = _refine_alpha(config, coarse_chi.alpha, rows, "chi_max",
                                       tau_c_grid=tau_c_grid)
    return AlphaSweepResult(rows=rows, alpha_chi=alpha_chi, alpha_R=alpha_R,
                            chi_max=chi_max, R_max=R_max, skipped=skipped)


@dataclass(frozen=True)
class EnvelopeResult:
    """Alpha-optimized performance curves and their peak COPs."""

    r_curve: list
    chi_curve: list
    psi_R: float
    psi_chi: float
    skipped: list


def _interp_on_curve(records, psi):
    """Linear interpolation of (R, chi, tau_c) at the requested COP, or None."""
    psis = np.array([r.psi for r in records])
    if not (psis[0] <= psi <= psis[-1]):
        return None
    R = float(np.interp(psi, psis, [r.R for r in records]))
    chi = float(np.interp(psi, psis, [r.chi for r in records]))
    tau_c = float(np.interp(psi, psis, [r.tau_c for r in records]))
    return R, chi, tau_c


def envelope_curve(config, psi_grid=None, alpha_window=DEFAULT_ALPHA_WINDOW,
                   alpha_points=61, tau_c_grid=None, workers=1):
    """Upper envelopes of R(psi) and chi(psi) over the frequency exponent.

    For every target COP the best alpha is selected among ``alpha_points``
    fixed-alpha optimal curves (each inverted by monotone interpolation);
    the matching duration triple is then re-solved exactly.  The labeled
    peaks come from refining the best alpha for each objective.
    """
    alphas = np.linspace(alpha_window[0], alpha_window[1], alpha_points)

    def build(alpha):
        cfg = replace(config, alpha=float(alpha))
        try:
            coeffs = cycle.cycle_coefficients(cfg)
            curve = optimal_curve(cfg, tau_c_grid=tau_c_grid, coeffs=coeffs)
        except ConvergenceError:
            return None
        return float(alpha), coeffs, curve.records

    built = [b for b in _map(build, alphas, workers) if b is not None]
    if not built:
        raise ConvergenceError("no alpha in the window produced an optimal curve")

    if psi_grid is None:
        lo = min(recs[0].psi for _, _, recs in built)
        hi = max(recs[-1].psi for _, _, recs in built)
        span = hi - lo
        psi_grid = np.linspace(lo + 0.01 * span, hi - 0.01 * span, 80)
    psi_grid = np.asarray(psi_grid, dtype=float)

    r_curve, chi_curve, skipped = [], [], []
    for psi in psi_grid:
        best_r, best_chi = None, None
        for alpha, coeffs, recs in built:
            hit = _interp_on_curve(recs, psi)
            if hit is None:
                continue
            R, chi, tau_c = hit
            if best_r is None or R > best_r[0]:
                best_r = (R, alpha, coeffs, tau_c)
            if best_chi is None or chi > best_chi[0]:
                best_chi = (chi, alpha, coeffs, tau_c)
        if best_r is None:
            skipped.append(float(psi))
            continue
        for best, out in ((best_r, r_curve), (best_chi, chi_curve)):
            _, alpha, coeffs, tau_c = best
            sol = _principal_or_none(coeffs, tau_c)
            if sol is not None:
                out.append(_record(alpha, sol))
    if skipped and len(skipped) == len(psi_grid):
        raise ConvergenceError(
            "no requested COP is attained by any alpha in the window",
            failed_points=skipped,
        )

    # Peak COPs of the envelopes: refine alpha per objective, then read the
    # peak psi off that alpha's own curve.
    rows = [AlphaRecord(alpha=a,
                        R_max=max(r.R for r in recs),
                        chi_max=max(r.chi for r in recs),
                        psi_at_R_max=max(recs, key=lambda r: r.R).psi,
                        psi_at_chi_max=max(recs, key=lambda r: r.chi).psi)
            for a, _, recs in built]
    coarse_R = max(rows, key=lambda r: r.R_max)
    coarse_chi = max(rows, key=lambda r: r.chi_max)
    alpha_R, _ = _refine_alpha(config, coarse_R.alpha, rows, "R_max",
                               tau_c_grid=tau_c_grid)
    alpha_chi, _ = _refine_alpha(config, coarse_chi.alpha, rows, "chi_max",
                                 tau_c_grid=tau_c_grid)
    at_R = _alpha_extrema(config, alpha_R, tau_c_grid=tau_c_grid)
    at_chi = _alpha_extrema(config, alpha_chi, tau_c_grid=tau_c_grid)
    psi_R = at_R.psi_at_R_max if at_R is not None else coarse_R.psi_at_R_max
    psi_chi = at_chi.psi_at_chi_max if at_chi is not None else coarse_chi.psi_at_chi_max
    return EnvelopeResult(r_curve=r_curve, chi_curve=chi_curve,
                          psi_R=psi_R, psi_chi=psi_chi, skipped=skipped)


class ProfilePoint(NamedTuple):
    """Durations along the optimal curve at one COP."""

    psi: float
    tau_total: float
    ratio_hp: float  # tau_h / tau_p
    ratio_cp: float  # tau_c / tau_p
    tau_c: float
    tau_h: float
    tau_p: float


def time_allocation_profile(config, psi_grid, alpha, tau_c_grid=None):
    """Duration profile along the fixed-alpha optimal curve.

    The expected shape (total time increasing with the COP, both duration
    ratios decreasing) is checked and any violation raised as a
    RuntimeWarning so sweep output is never silently trusted; the caller
    decides whether the shape is a hard requirement.
    """
    cfg = replace(config, alpha=float(alpha))
    coeffs = cycle.cycle_coefficients(cfg)
    curve = optimal_curve(cfg, tau_c_grid=tau_c_grid, coeffs=coeffs)
    records = curve.records
    psi_grid = np.asarray(psi_grid, dtype=float)
    unreachable = [float(p) for p in psi_grid
                   if not (records[0].psi <= p <= records[-1].psi)]
    if unreachable:
        raise ConvergenceError(
            f"COP targets outside the attainable range "
            f"[{records[0].psi:.4f}, {records[-1].psi:.4f}]",
            failed_points=unreachable,
        )
    points = []
    for psi in psi_grid:
        _, _, tau_c = _interp_on_curve(records, float(psi))
        sol = _principal_or_none(coeffs, tau_c)
        if sol is None:
            raise ConvergenceError(f"allocation lost while refining psi={psi}")
        points.append(ProfilePoint(
            psi=sol.metrics.psi,
            tau_total=sol.tau_c + sol.tau_h + sol.tau_p,
            ratio_hp=sol.tau_h / sol.tau_p,
            ratio_cp=sol.tau_c / sol.tau_p,
            tau_c=sol.tau_c, tau_h=sol.tau_h, tau_p=sol.tau_p,
        ))
    tol = 1e-12
    for a, b in zip(points, points[1:]):
        if b.psi <= a.psi:
            continue  # duplicate targets
        if b.tau_total < a.tau_total * (1.0 - tol):
            warnings.warn(
                f"total time not increasing between psi={a.psi} and psi={b.psi}",
                RuntimeWarning, stacklevel=2,
            )
        if b.ratio_hp > a.ratio_hp * (1.0 + tol) or b.ratio_cp > a.ratio_cp * (1.0 + tol):
            warnings.warn(
                f"duration ratios not decreasing between psi={a.psi} and psi={b.psi}",
                RuntimeWarning, stacklevel=2,
            )
    return points


@dataclass(frozen=True)
class FreeSweepResult:
    """Cooling rate over a free (tau_c, tau_p) grid with tau_h balanced."""

    tau_c_grid: np.ndarray
    tau_p_grid: np.ndarray
    R: np.ndarray  # shape (len(tau_c), len(tau_p)), NaN where infeasible
    tau_h: np.ndarray


def free_time_sweep(config, tau_c_grid, tau_p_grid, coeffs=None):
    """Cooling rate for every (tau_c, tau_p); tau_h closes the energy balance.

    Grid cells where no positive balanced tau_h exists are NaN.
    """
    tau_c_grid = np.asarray(tau_c_grid, dtype=float)
    tau_p_grid = np.asarray(tau_p_grid, dtype=float)
    if np.any(tau_c_grid <= 0.0) or np.any(tau_p_grid <= 0.0):
        raise ValueError("duration grids must be positive")
    if coeffs is None:
        coeffs = cycle.cycle_coefficients(config)
    R = np.full((tau_c_grid.size, tau_p_grid.size), np.nan)
    tau_h = np.full_like(R, np.nan)
    for i, tc in enumerate(tau_c_grid):
        for j, tp in enumerate(tau_p_grid):
            th = _balanced_tau_h(coeffs, tc, tp)
            if th is None or th <= 0.0:
                continue
            tau_h[i, j] = th
            R[i, j] = coeffs.heat(0, tc) / (tc + th + tp)
    return FreeSweepResult(tau_c_grid=tau_c_grid, tau_p_grid=tau_p_grid,
                           R=R, tau_h=tau_h)
