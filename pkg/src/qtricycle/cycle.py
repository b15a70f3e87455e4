"""Cycle assembly: COP, cooling rate, figure of merit, reversible landmarks.

A cycle is three heat-exchange branches joined by instantaneous quenches that
carry no duration and no heat.  Because the entropy changes telescope to zero
around the loop, the cycle-level quantities reduce to the six per-branch
coefficients (dS_eq, Sigma) and the three durations:

    Q_v  = T_v (dS_v + Sigma_v / tau_v)
    psi  = Q_c / Q_h
    R    = Q_c / (tau_c + tau_h + tau_p)
    chi  = psi * R
    entropy production = -sum_v Q_v / T_v = -sum_v Sigma_v / tau_v >= 0

No constraint is imposed here: the work residual -(Q_c + Q_h + Q_p) is
reported as-is so free sweeps stay honest about their imbalance.  Enforcing
energy balance belongs to :mod:`qtricycle.optimize`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import bisect

from . import thermo
from .errors import ConvergenceError
from .thermo import BranchThermo

__all__ = [
    "CycleCoefficients",
    "cycle_coefficients",
    "CycleMetrics",
    "evaluate_cycle",
    "reversible_cop",
    "zeroth_heat_sum",
    "zeroth_heat_sum_curve",
    "reversible_amplitude",
]


@dataclass(frozen=True)
class CycleCoefficients:
    """Duration-independent branch coefficients of one configuration."""

    T: tuple  # (T_c, T_h, T_p)
    dS: tuple  # (dS_c, dS_h, dS_p)
    Sigma: tuple  # (Sigma_c, Sigma_h, Sigma_p)

    def heat(self, reservoir_index, tau):
        T = self.T[reservoir_index]
        return T * (self.dS[reservoir_index] + self.Sigma[reservoir_index] / tau)


def cycle_coefficients(config, rtol=1e-9):
    """Compute (dS_eq, Sigma) for all three branches once per configuration."""
    branches = config.branches(1.0, 1.0, 1.0)
    return CycleCoefficients(
        T=tuple(b.temperature for b in branches),
        dS=tuple(thermo.branch_entropy_change(b) for b in branches),
        Sigma=tuple(thermo.sigma_coefficient(b, rtol=rtol) for b in branches),
    )


@dataclass(frozen=True)
class CycleMetrics:
    """Cycle-level performance summary.

    ``valid`` is False when Q_h <= 0 (the machine is not running as a
    heat-driven refrigerator); psi and chi are NaN in that case rather than
    misleading ratios.
    """

    cold: BranchThermo
    hot: BranchThermo
    pump: BranchThermo
    psi: float
    R: float
    chi: float
    work_residual: float
    entropy_production: float
    valid: bool

    @property
    def heats(self):
        return (self.cold.Q, self.hot.Q, self.pump.Q)

    @property
    def taus(self):
        return (self.cold.tau, self.hot.tau, self.pump.tau)


def _metrics_from_coeffs(coeffs, tau_c, tau_h, tau_p):
    taus = (tau_c, tau_h, tau_p)
    parts = []
    for i, (res, tau) in enumerate(zip("chp", taus)):
        T = coeffs.T[i]
        Q0 = T * coeffs.dS[i]
        Q1 = T * coeffs.Sigma[i] / tau
        parts.append(BranchThermo(
            reservoir=res, dS_eq=coeffs.dS[i], Sigma=coeffs.Sigma[i],
            Q0=Q0, Q1=Q1, Q=Q0 + Q1, tau=tau,
        ))
    cold, hot, pump = parts
    total_tau = tau_c + tau_h + tau_p
    R = cold.Q / total_tau
    valid = hot.Q > 0.0
    psi = cold.Q / hot.Q if valid else float("nan")
    chi = psi * R if valid else float("nan")
    work_residual = -(cold.Q + hot.Q + pump.Q)
    entropy_production = -sum(q / T for q, T in zip((cold.Q, hot.Q, pump.Q), coeffs.T))
    return CycleMetrics(
        cold=cold, hot=hot, pump=pump,
        psi=psi, R=R, chi=chi,
        work_residual=work_residual,
        entropy_production=entropy_production,
        valid=valid,
    )


def evaluate_cycle(config, tau_c, tau_h, tau_p, rtol=1e-9, coeffs=None):
    """Assemble the cycle metrics for an arbitrary duration triple.

    ``coeffs`` may carry precomputed :func:`cycle_coefficients` to avoid
    redundant quadrature in sweeps.
    """
    for name, tau in (("tau_c", tau_c), ("tau_h", tau_h), ("tau_p", tau_p)):
        if tau <= 0.0:
            raise ValueError(f"{name} must be > 0, got {tau}")
    if coeffs is None:
        coeffs = cycle_coefficients(config, rtol=rtol)
    return _metrics_from_coeffs(coeffs, tau_c, tau_h, tau_p)


def reversible_cop(T_c, T_h, T_p):
    """Quasi-static COP bound psi_r = T_c (T_h - T_p) / (T_h (T_p - T_c))."""
    if not (0.0 < T_c < T_p < T_h):
        raise ValueError("temperatures must satisfy 0 < T_c < T_p < T_h")
    return T_c * (T_h - T_p) / (T_h * (T_p - T_c))


def zeroth_heat_sum(config, coeffs=None):
    """sum_v T_v dS_v: positive for an irreversible finite-time cycle,
    zero at the reversible amplitude."""
    if coeffs is not None:
        return float(np.dot(coeffs.T, coeffs.dS))
    branches = config.branches(1.0, 1.0, 1.0)
    return sum(b.temperature * thermo.branch_entropy_change(b) for b in branches)


def zeroth_heat_sum_curve(config, delta_c_grid):
    """(delta_c, sum_v Q_v^0) pairs over an ascending amplitude grid."""
    grid = np.asarray(delta_c_grid, dtype=float)
    if np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
        raise ValueError("delta_c grid must be positive and strictly ascending")
    return [
        (float(dc), zeroth_heat_sum(replace(config, delta_c=float(dc))))
        for dc in grid
    ]


def reversible_amplitude(config, lo=0.01, hi=2.0, scan_points=400, xtol=1e-12):
    """Cold-branch amplitude at which the quasi-static heats balance.

    Scans delta_c over [lo, hi], brackets the sign change of sum_v T_v dS_v
    and bisects it down to ``xtol`` (well below the 1e-8 the root needs, so
    the residual of the heat sum itself is negligible).  Above the root the
    sum is positive.
    """
    def f(dc):
        return zeroth_heat_sum(replace(config, delta_c=float(dc)))

    grid = np.linspace(lo, hi, scan_points)
    vals = np.array([f(dc) for dc in grid])
    idx = np.nonzero(vals[:-1] * vals[1:] < 0.0)[0]
    if idx.size == 0:
        raise ConvergenceError(
            f"no sign change of sum_v Q_v^0 in delta_c on [{lo}, {hi}] "
            f"(endpoint values {vals[0]:.3e}, {vals[-1]:.3e})",
            failed_points=[(float(g), float(v)) for g, v in zip(grid[::40], vals[::40])],
        )
    i = int(idx[0])
    root = bisect(f, grid[i], grid[i + 1], xtol=xtol)
    return float(root)
