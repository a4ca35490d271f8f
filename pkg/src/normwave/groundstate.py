"""Radial ground state of  -ΔU + U = U^p  on R^N and the pure-scaling map.

For N = 1 the ground state is the explicit soliton

    U(x) = ((p+1)/2)^{1/(p-1)} sech^{2/(p-1)}((p-1) x / 2),

for N >= 2 it is computed by overshoot/undershoot bisection on U(0) followed
by a fourth-order collocation polish on the uniform radial grid.

The key derived constants are sigma0 (half the L2 mass, 2*sigma0 = ∫ U^2)
and the decay constant frak_c = lim r^{(N-1)/2} e^r U(r).

Scaling: v(x) = lambda^{1/(p-1)} U(sqrt(lambda) x) solves -Δv + lambda v = v^p
with mass rho = lambda^{2/(p-1) - N/2} * 2*sigma0. At the mass-critical
exponent p = 1 + 4/N the mass is lambda-independent and the problem with
prescribed mass is solvable only at rho = 2*sigma0 (then for every lambda).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from . import radial
from .errors import MassCriticalInfeasible, NoConvergence, TailNotResolved

__all__ = [
    "Regime",
    "ProblemParams",
    "RadialProfile",
    "GroundState",
    "closed_form_soliton",
    "solve_ground_state",
    "ode_residual_max",
    "mass_sigma0",
    "decay_constant",
    "scale_solution",
    "solve_pure_scaling",
    "ANY_LAMBDA",
]

MASS_CRITICAL_TOL = 1e-12  # |p - (1 + 4/N)| below this counts as critical


class Regime(str, Enum):
    SUBCRITICAL = "subcritical"
    MASS_CRITICAL = "mass_critical"
    SUPERCRITICAL = "supercritical"


class _AnyLambda:
    """Sentinel: every lambda > 0 solves the critical pure-scaling problem."""

    def __repr__(self) -> str:  # pragma: no cover
        return "ANY_LAMBDA"


ANY_LAMBDA = _AnyLambda()


@dataclass(frozen=True)
class ProblemParams:
    """Dimension and nonlinearity exponent, with regime classification."""

    dim: int
    p: float

    def __post_init__(self) -> None:
        if self.dim < 1 or int(self.dim) != self.dim:
            raise ValueError("dimension must be a positive integer")
        if self.p <= 1.0:
            raise ValueError("exponent must satisfy p > 1")
        if self.dim >= 3 and self.p >= (self.dim + 2) / (self.dim - 2):
            raise ValueError("exponent must be Sobolev-subcritical for N >= 3")

    @property
    def mass_critical_exponent(self) -> float:
        return 1.0 + 4.0 / self.dim

    @property
    def regime(self) -> Regime:
        gap = self.p - self.mass_critical_exponent
        if abs(gap) <= MASS_CRITICAL_TOL:
            return Regime.MASS_CRITICAL
        return Regime.SUBCRITICAL if gap < 0 else Regime.SUPERCRITICAL


@dataclass
class RadialProfile:
    """Sampled radial function with derivative samples and exponential tail.

    Beyond the last node the profile is evaluated with the declared tail
    model  value(R) * exp(tail_rate * (r - R)).
    """

    nodes: np.ndarray
    values: np.ndarray
    dvalues: np.ndarray
    tail_rate: float = -1.0

    def __post_init__(self) -> None:
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.dvalues = np.asarray(self.dvalues, dtype=float)
        if self.nodes[0] != 0.0:
            raise ValueError("radial grid must start at r = 0")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("radial grid must be strictly increasing")
        if self.dvalues[0] != 0.0:
            raise ValueError("radial smoothness requires value'(0) = 0")

    @property
    def spacing(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        inside = np.interp(np.abs(r), self.nodes, self.values)
        R = self.nodes[-1]
        tail = self.values[-1] * np.exp(self.tail_rate * (np.abs(r) - R))
        return np.where(np.abs(r) <= R, inside, tail)


@dataclass
class GroundState:
    params: ProblemParams
    profile: RadialProfile
    sigma0: float
    frak_c: float
    # analytic callables are available for the closed-form N=1 branch
    u_exact: Optional[Callable] = field(default=None, repr=False)
    du_exact: Optional[Callable] = field(default=None, repr=False)
    d2u_exact: Optional[Callable] = field(default=None, repr=False)


def closed_form_soliton(p: float):
    """Return (U, U', U'') callables for the explicit N=1 ground state."""
    m = 2.0 / (p - 1.0)
    k = (p - 1.0) / 2.0
    amp = ((p + 1.0) / 2.0) ** (1.0 / (p - 1.0))

    def u(x):
        return amp * np.cosh(k * np.asarray(x, dtype=float)) ** (-m)

    def du(x):
        x = np.asarray(x, dtype=float)
        return -m * k * u(x) * np.tanh(k * x)

    def d2u(x):
        x = np.asarray(x, dtype=float)
        sech2 = np.cosh(k * x) ** (-2.0)
        return m * k * k * u(x) * (m - (m + 1.0) * sech2)

    return u, du, d2u


# -- shooting (N >= 2) ----------------------------------------------------------

def _classify_shot(p: float, dim: int, s: float, r_stop: float):
    """Integrate from the origin; -1 = crossed zero, +1 = turned upward."""

    def rhs(t, y):
        u, v = y
        return [v, u - np.abs(u) ** (p - 1) * u - (dim - 1) * v / max(t, 1e-12)]

    cross = lambda t, y: y[0]
    cross.terminal, cross.direction = True, -1
    turn = lambda t, y: y[1] if t > 1e-3 else -1.0
    turn.terminal, turn.direction = True, 1
    sol = solve_ivp(rhs, (1e-9, r_stop), [s, 0.0], method="DOP853",
                    rtol=1e-11, atol=1e-13, events=[cross, turn],
                    dense_output=True)
    if sol.t_events[0].size:
        return -1, sol
    if sol.t_events[1].size:
        return 1, sol
    return 0, sol


def _shoot_ground_state(p: float, dim: int, r_stop: float = 15.0,
                        bracket_tol: float = 1e-13, max_doublings: int = 60):
    lo, hi = 1.0 + 1e-9, 2.0
    doublings = 0
    while _classify_shot(p, dim, hi, r_stop)[0] != -1:
        hi *= 2.0
        doublings += 1
        if doublings > max_doublings:
            raise NoConvergence("shooting bisection failed to bracket U(0)")
    for _ in range(200):
        if hi - lo <= bracket_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        c, _ = _classify_shot(p, dim, mid, r_stop)
        if c == -1:
            hi = mid
        else:
            lo = mid
    else:
        raise NoConvergence("shooting bisection exceeded its iteration budget")
    s = 0.5 * (lo + hi)
    _, sol = _classify_shot(p, dim, s, r_stop)
    return s, sol


def solve_ground_state(params: ProblemParams, accuracy: float = 1e-12,
                       r_max: float = 40.0, spacing: float = 1.0 / 600.0,
                       max_doublings: int = 60) -> GroundState:
    """Compute the radial ground state profile and its derived constants."""
    r = radial.uniform_grid(r_max, spacing)
    if params.dim == 1:
        u, du, d2u = closed_form_soliton(params.p)
        profile = RadialProfile(r, u(r), du(r), tail_rate=-1.0)
        gs = GroundState(params, profile, 0.0, 0.0, u, du, d2u)
    else:
        _, ivp = _shoot_ground_state(params.p, params.dim,
                                     max_doublings=max_doublings)
        r_splice = min(12.0, ivp.t[-1])
        vals = np.empty_like(r)
        mask = r <= r_splice
        vals[mask] = ivp.sol(np.clip(r[mask], 1e-9, None))[0]
        u_sp = float(ivp.sol(r_splice)[0])
        c_sp = u_sp * r_splice ** ((params.dim - 1) / 2.0) * np.exp(r_splice)
        vals[~mask] = (c_sp * r[~mask] ** (-(params.dim - 1) / 2.0)
                       * np.exp(-r[~mask]))
        vals = radial.radial_newton(r, params.dim, params.p, vals,
                                    tol=min(accuracy, 1e-12))
        dvals = radial.d1_six(vals, r[1] - r[0], "even")
        # one-sided zone: use the tail model derivative (poly x exp(-r))
        tail_ld = -1.0 - (params.dim - 1) / (2.0 * r[-3:])
        dvals[-3:] = tail_ld * vals[-3:]
        profile = RadialProfile(r, vals, dvals, tail_rate=-1.0)
        gs = GroundState(params, profile, 0.0, 0.0)
        res = ode_residual_max(gs)
        if not np.isfinite(res) or res > max(accuracy, 1e-8):
            raise NoConvergence(f"ground-state residual {res:.2e} above tolerance")
    if np.any(np.diff(profile.values) >= 0):
        raise NoConvergence("computed profile is not strictly decreasing")
    gs.sigma0 = mass_sigma0(gs)
    gs.frak_c = decay_constant(gs)
    return gs


def ode_residual_max(gs: GroundState, r_cap: float = 35.0) -> float:
    """Max-norm ODE residual over interior nodes, via an independent evaluator.

    The closed-form branch substitutes the analytic second derivative; the
    shooting branch uses sixth-order differences of the sampled values.
    """
    prof = gs.profile
    r = prof.nodes
    if gs.d2u_exact is not None:
        res = -gs.d2u_exact(r) + prof.values - np.abs(prof.values) ** gs.params.p
        return float(np.max(np.abs(res)))
    res = radial.radial_ode_residual(
        r, prof.values, gs.params.dim,
        coeff=np.ones_like(r),
        rhs=np.abs(prof.values) ** (gs.params.p - 1) * prof.values)
    keep = (r <= r_cap) & np.isfinite(res)
    return float(np.max(np.abs(res[keep])))


def mass_sigma0(gs: GroundState, rule: str = "simpson") -> float:
    """sigma0 with 2*sigma0 = ∫_{R^N} U^2, by radial quadrature + tail."""
    prof = gs.profile
    total = radial.radial_quadrature(prof.nodes, prof.values ** 2,
                                     gs.params.dim, tail_decay=2.0, rule=rule)
    return 0.5 * total


def decay_constant(gs: GroundState, spread_tol: float = 1e-3) -> float:
    """Plateau of r^{(N-1)/2} e^r U(r) over the outer third of the grid."""
    prof = gs.profile
    r = prof.nodes
    window = r >= (2.0 / 3.0) * r[-1]
    if r[-1] < 12.0 or np.count_nonzero(window) < 8:
        raise TailNotResolved("grid too short to resolve the decay plateau")
    g = prof.values[window] * r[window] ** ((gs.params.dim - 1) / 2.0) \
        * np.exp(r[window])
    c = float(np.median(g))
    if c <= 0 or not np.isfinite(c):
        raise TailNotResolved("decay plateau is not positive")
    spread = float((np.max(g) - np.min(g)) / c)
    if spread > spread_tol:
        warnings.warn(f"decay plateau spread {spread:.2e} exceeds {spread_tol:.0e}",
                      stacklevel=2)
    return c


def scale_solution(gs: GroundState, lam: float):
    """Profile and mass of v(x) = lam^{1/(p-1)} U(sqrt(lam) x).

    Returns (profile, mass) with mass measured by quadrature on the scaled
    profile; the closed form is rho = lam^{2/(p-1) - N/2} * 2*sigma0.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    p = gs.params.p
    amp = lam ** (1.0 / (p - 1.0))
    root = np.sqrt(lam)
    prof = gs.profile
    scaled = RadialProfile(prof.nodes / root, amp * prof.values,
                           amp * root * prof.dvalues, tail_rate=-root)
    mass = radial.radial_quadrature(scaled.nodes, scaled.values ** 2,
                                    gs.params.dim, tail_decay=2.0 * root)
    return scaled, mass


def solve_pure_scaling(params: ProblemParams, rho: float,
                       ground_state: GroundState | None = None,
                       tol: float = 1e-10):
    """Invert rho = lam^{2/(p-1) - N/2} * 2*sigma0 for lam.

    In the mass-critical regime the mass is lambda-independent: returns the
    ANY_LAMBDA sentinel at rho = 2*sigma0 (within tol) and raises
    MassCriticalInfeasible otherwise.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    gs = ground_state if ground_state is not None else solve_ground_state(params)
    two_sigma0 = 2.0 * gs.sigma0
    if params.regime is Regime.MASS_CRITICAL:
        if abs(rho - two_sigma0) <= tol * max(1.0, two_sigma0):
            return ANY_LAMBDA
        raise MassCriticalInfeasible(
            f"critical pure-scaling mass must equal {two_sigma0:.12g}, got {rho:.12g}")
    p = params.p
    exponent = 2.0 * (p - 1.0) / (4.0 - (p - 1.0) * params.dim)
    return (rho / two_sigma0) ** exponent
