"""Per-branch thermodynamics in the slow-driving regime.

For a branch of duration tau the heat exchanged with the reservoir expands as
Q = Q0 + Q1 with

    Q0 = T * dS_eq            (quasi-static heat, dS_eq the equilibrium
                               entropy change between the endpoint splittings)
    Q1 = T * Sigma / tau      (first-order irreversible correction)

where the dissipation coefficient is the rescaled-time integral

    Sigma = -beta^2 * Int_0^1 ds  omega'(s)^2 n(n+1) / (gamma (2n+1)^3) <= 0.

This closed form follows from integrating Tr[H d/ds(L^-1 d rho_eq/ds)] by
parts; the boundary terms vanish because the schedules have zero slope at the
endpoints.  The first-order state itself lags the instantaneous Gibbs state
by (1/tau) L^-1 d rho_eq/ds, which for the thermal generator is a pure
population shift:

    rho(s) = rho_eq(s) + (phi(s)/tau) * (1, 0, 0, -1),
    phi(s) = beta omega'(s) n(n+1) / (gamma (2n+1)^3).

All integrals use composite Gauss-Legendre quadrature with panel doubling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from . import lindblad, protocol
from .errors import ConvergenceError, PositivityError

__all__ = [
    "BranchThermo",
    "gauss_legendre_adaptive",
    "equilibrium_entropy",
    "branch_entropy_change",
    "sigma_coefficient",
    "branch_heat",
    "perturbed_state",
    "population_lag",
    "effective_temperature",
    "von_neumann_entropy",
    "ts_trajectory",
    "TrajectoryPoint",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def gauss_legendre_adaptive(f, rtol=1e-9, start_panels=64, max_panels=2 ** 16):
    """Integrate f over [0, 1] with composite 8-point Gauss-Legendre panels.

    The panel count starts at ``start_panels`` and doubles until two
    successive estimates agree to ``rtol`` relative (absolute floor 1e-300
    guards the exactly-zero integrand).  ``f`` must accept an ndarray of
    sample points and return the integrand values.
    """
    panels = start_panels
    prev = None
    while panels <= max_panels:
        edges = np.linspace(0.0, 1.0, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        s = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
        val = float(np.dot(np.asarray(f(s), dtype=float), w))
        if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1e-300):
            return val
        prev = val
        panels *= 2
    raise ConvergenceError(
        f"quadrature did not reach rtol={rtol} within {max_panels} panels"
    )


def equilibrium_entropy(T, omega):
    """Entropy of the thermal state at (T, omega): binary entropy of the
    excited population p = 1/(exp(omega/T) + 1).  Array-friendly."""
    T = np.asarray(T, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if np.any(T <= 0.0) or np.any(omega <= 0.0):
        raise ValueError("equilibrium_entropy needs T > 0 and omega > 0")
    e = np.exp(-omega / T)
    p = e / (1.0 + e)
    S = -(xlogy(p, p) + xlogy(1.0 - p, 1.0 - p))
    return S if S.ndim else float(S)


def branch_entropy_change(branch):
    """Equilibrium entropy difference between branch end and start."""
    w0 = protocol.frequency(branch, 0.0)
    w1 = protocol.frequency(branch, 1.0)
    T = branch.temperature
    return equilibrium_entropy(T, w1) - equilibrium_entropy(T, w0)


def _sigma_integrand(branch, s):
    w = protocol.frequency(branch, s)
    wp = protocol.frequency_derivative(branch, s)
    n = lindblad.bose_occupation(branch.temperature, w)
    g = branch.gamma0 * np.asarray(w) ** branch.alpha
    return wp ** 2 * n * (n + 1.0) / (g * (2.0 * n + 1.0) ** 3)


def sigma_coefficient(branch, rtol=1e-9):
    """Dissipation coefficient Sigma of the branch (always <= 0).

    One smooth quadrature; the integrand is manifestly nonnegative so the
    sign is exact by construction.
    """
    beta = branch.beta
    return -beta ** 2 * gauss_legendre_adaptive(
        lambda s: _sigma_integrand(branch, s), rtol=rtol
    )


@dataclass(frozen=True)
class BranchThermo:
    """Thermodynamic summary of one branch at a given duration."""

    reservoir: str
    dS_eq: float
    Sigma: float
    Q0: float
    Q1: float
    Q: float
    tau: float


def branch_heat(branch, tau, rtol=1e-9):
    """Heat exchanged with the reservoir over duration tau, split Q0 + Q1."""
    if tau <= 0.0:
        raise ValueError(f"tau must be > 0, got {tau}")
    dS = branch_entropy_change(branch)
    Sigma = sigma_coefficient(branch, rtol=rtol)
    T = branch.temperature
    Q0 = T * dS
    Q1 = T * Sigma / tau
    return BranchThermo(
        reservoir=branch.reservoir,
        dS_eq=dS, Sigma=Sigma, Q0=Q0, Q1=Q1, Q=Q0 + Q1, tau=tau,
    )


def population_lag(branch, s):
    """First-order excited-population lag phi(s) (before division by tau).

    The perturbed state is rho_eq + (phi/tau) (1, 0, 0, -1); phi carries the
    sign of omega'(s), so the state trails the equilibrium it is chasing.
    Array-friendly in s.
    """
    w = protocol.frequency(branch, s)
    wp = protocol.frequency_derivative(branch, s)
    n = lindblad.bose_occupation(branch.temperature, w)
    g = branch.gamma0 * np.asarray(w) ** branch.alpha
    phi = branch.beta * wp * n * (n + 1.0) / (g * (2.0 * n + 1.0) ** 3)
    return phi if np.ndim(phi) else float(phi)


def perturbed_state(branch, s, tau):
    """First-order slow-driving state at rescaled time s.

    Coherences are exactly zero and the trace is exactly one; the correction
    only shifts populations.  Raises :class:`PositivityError` when the shift
    pushes a population outside [0, 1], which signals tau is too small for
    the expansion to be trusted.
    """
    if tau <= 0.0:
        raise ValueError(f"tau must be > 0, got {tau}")
    w = protocol.frequency(branch, float(s))
    p_eq = lindblad.gibbs_state(branch.temperature, w).excited
    p = p_eq + population_lag(branch, float(s)) / tau
    if p < 0.0 or p > 1.0:
        raise PositivityError(
            f"perturbed excited population {p} outside [0, 1] on branch "
            f"{branch.reservoir!r} at s={s}, tau={tau}: duration too short "
            f"for the slow-driving expansion"
        )
    return lindblad.DensityVector.from_populations(p)


def effective_temperature(state, omega):
    """Temperature read off the population ratio, T = omega / ln(rho00/rho11).

    Equal populations have no defined temperature (raises ValueError); an
    inverted state (rho11 > rho00) comes back negative, which is the standard
    flag for population inversion.
    """
    if omega <= 0.0:
        raise ValueError("omega must be > 0")
    p1 = state.rho11.real
    p0 = state.rho00.real
    if p1 <= 0.0:
        return 0.0
    if p0 == p1:
        raise ValueError("equal populations: effective temperature undefined")
    return omega / np.log(p0 / p1)


def von_neumann_entropy(state):
    """Entropy -Tr[rho ln rho] of a two-level density matrix."""
    evals = np.linalg.eigvalsh(state.matrix())
    evals = np.clip(evals.real, 0.0, 1.0)
    return float(-np.sum(xlogy(evals, evals)))


@dataclass(frozen=True)
class TrajectoryPoint:
    """One sample of the temperature-entropy diagram."""

    T_eff: float
    S: float
    reservoir: str
    s: float
    omega: float


def ts_trajectory(config, taus, samples_per_branch=201):
    """Temperature-entropy samples along the full cycle, branch by branch.

    ``taus`` is the (tau_c, tau_h, tau_p) triple.  Within each branch the
    first-order state supplies both coordinates; the quenches between
    branches keep the populations (hence S) fixed while the splitting jumps
    by the temperature ratio, so consecutive branch endpoints line up
    vertically in the (S, T_eff) plane.
    """
    if samples_per_branch < 2:
        raise ValueError("samples_per_branch must be >= 2")
    tau_c, tau_h, tau_p = taus
    points = []
    for branch, tau in zip(config.branches(tau_c, tau_h, tau_p), (tau_c, tau_h, tau_p)):
        for s in np.linspace(0.0, 1.0, samples_per_branch):
            state = perturbed_state(branch, s, tau)
            w = protocol.frequency(branch, float(s))
            points.append(TrajectoryPoint(
                T_eff=effective_temperature(state, w),
                S=von_neumann_entropy(state),
                reservoir=branch.reservoir,
                s=float(s),
                omega=w,
            ))
    return points
