"""Direct solver for the singularly perturbed problem with prescribed mass.

Fixed-frequency form (unknown u, second-order finite differences):

    -eps^2 u'' + (eps^2 V(x) + 1) u = u^p,

on an interval with Dirichlet/Neumann conditions, or on the truncated real
line with decay rows. The mass of a solution is

    mass = eps^{-4/(p-1)} ∫ u^2 = ∫ v^2,      v = eps^{-2/(p-1)} u,

and (lambda, v) with lambda = eps^{-2} solves -v'' + (V + lambda) v = v^p.

``solve_normalized`` traces the concentrating branch downward in eps with
warm starts and runs a bracketed Brent root-find (on log eps) for
mass(eps) = rho. Interior masses are Richardson-extrapolated over one grid
refinement so the outer root-find is unpolluted by the O(h^2) bias.

Real-line potentials are even polynomials, so those solves exploit evenness:
the half-line [0, L] is discretized with a symmetric row at 0 and a decay
row at L, removing the translational near-kernel of the whole-line problem.
Endpoint concentration on an interval is realized by reflection onto the
doubled interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .errors import (BracketFailed, NewtonDiverged, NonPositive,
                     NoSolutionInRegime)
from .groundstate import (GroundState, ProblemParams, Regime,
                          closed_form_soliton, solve_ground_state)

__all__ = [
    "DomainSpec",
    "NormalizedSolution",
    "assemble_residual",
    "solve_fixed_epsilon",
    "mass_of",
    "solve_normalized",
    "trace_branch",
    "MassEvaluator",
]

DIRICHLET = "dirichlet"
NEUMANN = "neumann"

NEWTON_TOL = 1e-11
NEWTON_MAX_ITER = 200
NEWTON_MAX_BACKTRACK = 40
POINTS_PER_WIDTH = 60
MIN_NODES = 2000


@dataclass(frozen=True)
class DomainSpec:
    """Interval with boundary condition, or truncated real line.

    potential: coefficients (a1, a2, ...) of the even polynomial
    V(x) = a1 x^2 + a2 x^4 + ...; only allowed on the real line.
    """

    kind: str  # "interval" | "realline"
    a: float = -1.0
    b: float = 1.0
    bc: Optional[str] = None
    potential: tuple = ()

    def __post_init__(self) -> None:
        if self.kind == "interval":
            if self.bc not in (DIRICHLET, NEUMANN):
                raise ValueError("interval requires dirichlet or neumann bc")
            if self.potential:
                raise ValueError("potential is only supported on the real line")
            if not self.b > self.a:
                raise ValueError("empty interval")
        elif self.kind == "realline":
            if self.bc is not None:
                raise ValueError("real line uses decay conditions, bc must be None")
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    def V(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for k, coef in enumerate(self.potential, start=1):
            out += coef * x ** (2 * k)
        return out

    def laplacian_V_at_center(self) -> float:
        # V = a1 x^2 + ... has V''(0) = 2 a1
        return 2.0 * self.potential[0] if self.potential else 0.0


@dataclass
class NormalizedSolution:
    spec: DomainSpec
    params: ProblemParams
    lambda_: float
    epsilon: float
    nodes: np.ndarray
    v_values: np.ndarray
    u_values: np.ndarray
    mass: float
    residual_inf: float
    concentration_point: float
    newton_iterations: int = 0
    mass_target: Optional[float] = None
    extras: dict = field(default_factory=dict)


# -- grids and discrete residual -------------------------------------------------

def _interval_n(spec: DomainSpec, eps: float, n_override: Optional[int]) -> int:
    if n_override is not None:
        n = int(n_override)
    else:
        n = max(MIN_NODES, int(math.ceil(POINTS_PER_WIDTH * (spec.b - spec.a) / eps)))
    return n + (n % 2)


def _realline_halfwidth(spec: DomainSpec) -> float:
    scale = max((abs(c) for c in spec.potential), default=0.0)
    return max(20.0, 12.0 * scale ** 0.5)


def assemble_residual(spec: DomainSpec, params: ProblemParams, epsilon: float,
                      x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Second-order discrete residual of the fixed-frequency equation.

    Boundary rows: Dirichlet value rows; Neumann ghost-point PDE rows;
    decay ghost rows u' + u/eps = 0 at a real-line truncation.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    h = x[1] - x[0]
    p = params.p
    Vx = spec.V(x)
    lin = epsilon ** 2 * Vx + 1.0
    g = np.abs(u) ** (p - 1) * u
    c = epsilon ** 2 / h ** 2
    r = np.empty_like(u)
    r[1:-1] = -c * (u[:-2] - 2 * u[1:-1] + u[2:]) + lin[1:-1] * u[1:-1] - g[1:-1]
    if spec.kind == "interval" and spec.bc == DIRICHLET:
        r[0] = u[0]
        r[-1] = u[-1]
    elif spec.kind == "interval":
        r[0] = -c * (2 * u[1] - 2 * u[0]) + lin[0] * u[0] - g[0]
        r[-1] = -c * (2 * u[-2] - 2 * u[-1]) + lin[-1] * u[-1] - g[-1]
    else:
        # decay ghosts: u_{-1} = u_1 - 2h u_0/eps and mirrored on the right
        r[0] = -c * (2 * u[1] - 2 * u[0] - 2 * h * u[0] / epsilon) \
            + lin[0] * u[0] - g[0]
        r[-1] = -c * (2 * u[-2] - 2 * u[-1] - 2 * h * u[-1] / epsilon) \
            + lin[-1] * u[-1] - g[-1]
    return r


# -- damped Newton on the row-scaled system --------------------------------------

def _newton(x: np.ndarray, u0: np.ndarray, eps: float, p: float,
            Vx: np.ndarray, left: str, right: str,
            tol: float = NEWTON_TOL) -> tuple[np.ndarray, int]:
    """left/right row kinds: 'dirichlet' | 'neumann' | 'decay'.

    Rows are scaled by h^2/eps^2 so the tolerance is meaningful in units of u.
    """
    n = len(x) - 1
    h = x[1] - x[0]
    s = h * h / (eps * eps)
    w = s * (eps * eps * Vx + 1.0)
    u = u0.copy()

    def bc_rows(r, u):
        for side, i, j in ((left, 0, 1), (right, -1, -2)):
            if side == "dirichlet":
                r[i] = u[i]
            elif side == "neumann":
                r[i] = -(2 * u[j] - 2 * u[i]) + w[i] * u[i] \
                    - s * np.abs(u[i]) ** (p - 1) * u[i]
            else:  # decay
                r[i] = -(2 * u[j] - 2 * u[i] - 2 * h * u[i] / eps) \
                    + w[i] * u[i] - s * np.abs(u[i]) ** (p - 1) * u[i]

    def F(u):
        r = np.empty_like(u)
        r[1:-1] = -(u[:-2] - 2 * u[1:-1] + u[2:]) + w[1:-1] * u[1:-1] \
            - s * np.abs(u[1:-1]) ** (p - 1) * u[1:-1]
        bc_rows(r, u)
        return r

    def jacobian(u):
        ab = np.zeros((3, n + 1))
        ab[0, 1:] = -1.0
        ab[1, :] = 2.0 + w - s * p * np.abs(u) ** (p - 1)
        ab[2, :-1] = -1.0
        for side, i in ((left, 0), (right, -1)):
            band = (0, 1) if i == 0 else (2, -2)
            if side == "dirichlet":
                ab[1, i] = 1.0
                ab[band[0], band[1]] = 0.0
            else:
                ab[band[0], band[1]] = -2.0
                if side == "decay":
                    ab[1, i] = 2.0 + 2 * h / eps + w[i] \
                        - s * p * np.abs(u[i]) ** (p - 1)
        return ab

    converged = False
    for it in range(NEWTON_MAX_ITER):
        r = F(u)
        rn = np.max(np.abs(r))
        if not np.isfinite(rn):
            raise NewtonDiverged("residual is not finite")
        if converged or rn < 1e-15 * max(1.0, np.max(np.abs(u))):
            return u, it
        if rn < tol * max(1.0, np.max(np.abs(u))):
            converged = True  # one full polish step to the rounding floor
            u = u + solve_banded((1, 1), jacobian(u), -r)
            continue
        d = solve_banded((1, 1), jacobian(u), -r)
        t = 1.0
        for _ in range(NEWTON_MAX_BACKTRACK):
            rt = F(u + t * d)
            if np.all(np.isfinite(rt)) and np.max(np.abs(rt)) <= rn * (1 - 0.25 * t):
                break
            t *= 0.5
        else:
            if rn < 1e-9 * max(1.0, np.max(np.abs(u))):
                return u, it  # stagnated at the rounding floor
            raise NewtonDiverged("backtracking budget exhausted")
        u = u + t * d
        if np.max(np.abs(t * d)) < 1e-15 * max(1.0, np.max(np.abs(u))):
            if np.max(np.abs(F(u))) < 1e-9 * max(1.0, np.max(np.abs(u))):
                return u, it
            raise NewtonDiverged("step collapsed before convergence")
    raise NewtonDiverged(f"no convergence in {NEWTON_MAX_ITER} iterations")


def _single_peak(u: np.ndarray) -> bool:
    du = np.diff(u)
    signs = np.sign(du[np.abs(du) > 1e-12 * np.max(np.abs(u))])
    return np.count_nonzero(np.diff(signs)) <= 1


def _ansatz(p: float, y):
    u, _, _ = closed_form_soliton(p)
    return u(y)


def _package(spec, params, eps, x, u, iters, mass_target=None) -> NormalizedSolution:
    res = assemble_residual(spec, params, eps, x, u)
    interior = u[1:-1] if (spec.kind == "interval" and spec.bc == DIRICHLET) else u
    # tolerate rounding dust in the truncation tail, catch real crossings
    floor = 1e-12 * float(np.max(np.abs(u)))
    if np.max(u) <= 0 or np.min(interior) < -floor:
        raise NonPositive("solution is not positive at interior nodes")
    if not _single_peak(u):
        raise NewtonDiverged("converged profile is not single-peaked")
    p = params.p
    v = eps ** (-2.0 / (p - 1.0)) * u
    mass = eps ** (-4.0 / (p - 1.0)) * simpson(u ** 2, x=x)
    return NormalizedSolution(
        spec=spec, params=params, lambda_=eps ** -2.0, epsilon=eps,
        nodes=x, v_values=v, u_values=u, mass=mass,
        residual_inf=float(np.max(np.abs(res))),
        concentration_point=float(x[np.argmax(u)]),
        newton_iterations=iters, mass_target=mass_target)


def solve_fixed_epsilon(spec: DomainSpec, params: ProblemParams, epsilon: float,
                        init: str = "interior", xi: float = 0.0,
                        u0: Optional[np.ndarray] = None,
                        n_override: Optional[int] = None) -> NormalizedSolution:
    """Damped-Newton solve at fixed eps from a concentration ansatz.

    init: "interior" (bump at xi), "endpoint" (Neumann, bump at b, via
    reflection onto the doubled interval), or "custom" (u0 given on the grid).
    """
    if params.dim != 1:
        raise ValueError("the direct solver is one-dimensional")
    if not 0.0 < epsilon <= 0.5:
        raise ValueError("epsilon must lie in (0, 0.5]")
    p = params.p

    if spec.kind == "interval" and init == "endpoint":
        if spec.bc != NEUMANN:
            raise ValueError("endpoint concentration requires Neumann conditions")
        doubled = DomainSpec("interval", spec.a, 2 * spec.b - spec.a, NEUMANN)
        n2 = _interval_n(doubled, epsilon, n_override)
        n2 += n2 % 4  # keep the restricted half on an even panel count
        inner = solve_fixed_epsilon(doubled, params, epsilon, init="interior",
                                    xi=spec.b, n_override=n2)
        keep = inner.nodes <= spec.b + 1e-14
        x, u = inner.nodes[keep], inner.u_values[keep]
        return _package(spec, params, epsilon, x, u, inner.newton_iterations)

    if spec.kind == "interval":
        n = _interval_n(spec, epsilon, n_override)
        x = np.linspace(spec.a, spec.b, n + 1)
        mid = 0.5 * (spec.a + spec.b)
        if init == "custom":
            if u0 is None or len(u0) != n + 1:
                raise ValueError("custom init requires u0 on the solver grid")
            guess = np.asarray(u0, dtype=float)
            scale = max(1.0, float(np.max(np.abs(guess))))
            even = np.all(np.abs(guess - guess[::-1]) <= 1e-9 * scale)
        else:
            guess = _ansatz(p, (x - xi) / epsilon)
            if spec.bc == DIRICHLET:
                guess = guess.copy()
                guess[0] = 0.0
                guess[-1] = 0.0
            even = abs(xi - mid) < 1e-14
        if even:
            # symmetric profile: solve on [mid, b] with a symmetry row at mid,
            # which removes the exponentially weak translation mode exactly
            guess = 0.5 * (guess + guess[::-1])
            xh = x[n // 2:]
            uh, iters = _newton(xh, guess[n // 2:], epsilon, p, spec.V(xh),
                                "neumann", spec.bc)
            u = np.concatenate([uh[::-1], uh[1:]])
        else:
            u, iters = _newton(x, guess, epsilon, p, spec.V(x), spec.bc,
                               spec.bc)
        return _package(spec, params, epsilon, x, u, iters)

    # real line: even potential, half-line reduction [0, L]
    if init == "endpoint":
        raise ValueError("endpoint concentration needs a bounded interval")
    L = _realline_halfwidth(spec)
    n_full = _interval_n(DomainSpec("interval", -L, L, DIRICHLET), epsilon,
                         n_override)
    nh = n_full // 2 + (n_full // 2) % 2
    xh = np.linspace(0.0, L, nh + 1)
    if init == "custom":
        if u0 is None or len(u0) != 2 * nh + 1:
            raise ValueError("custom init requires u0 on the mirrored grid")
        guess = np.asarray(u0, dtype=float)[nh:]
    else:
        guess = _ansatz(p, xh / epsilon)
    uh, iters = _newton(xh, guess, epsilon, p, spec.V(xh), "neumann", "decay")
    x = np.concatenate([-xh[::-1], xh[1:]])
    u = np.concatenate([uh[::-1], uh[1:]])
    return _package(spec, params, epsilon, x, u, iters)


def mass_of(sol: NormalizedSolution) -> float:
    """mass = eps^{-4/(p-1)} ∫ u^2 (= ∫ v^2) by composite Simpson."""
    p = sol.params.p
    return sol.epsilon ** (-4.0 / (p - 1.0)) * simpson(sol.u_values ** 2,
                                                       x=sol.nodes)


def trace_branch(spec: DomainSpec, params: ProblemParams,
                 epsilon_list: Sequence[float],
                 init_xi: float = 0.0) -> list[tuple[float, float, float]]:
    """Continuation with warm starts along a decreasing eps list."""
    eps_list = list(epsilon_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("epsilon list must be strictly decreasing")
    out = []
    prev = None
    for eps in eps_list:
        try:
            if prev is None:
                sol = solve_fixed_epsilon(spec, params, eps, init="interior",
                                          xi=init_xi)
            else:
                n = _interval_n(spec if spec.kind == "interval" else
                                DomainSpec("interval",
                                           -_realline_halfwidth(spec),
                                           _realline_halfwidth(spec),
                                           DIRICHLET),
                                eps, None)
                if spec.kind == "interval":
                    x = np.linspace(spec.a, spec.b, n + 1)
                else:
                    nh = n // 2 + (n // 2) % 2
                    half = np.linspace(0.0, _realline_halfwidth(spec), nh + 1)
                    x = np.concatenate([-half[::-1], half[1:]])
                guess = np.interp(x, prev.nodes, prev.u_values)
                sol = solve_fixed_epsilon(spec, params, eps, init="custom",
                                          u0=guess, n_override=n)
        except (NewtonDiverged, NonPositive) as exc:
            raise type(exc)(f"{exc} (at eps = {eps:.6g})") from exc
        out.append((eps, mass_of(sol), sol.residual_inf))
        prev = sol
    return out


# -- normalized solve ------------------------------------------------------------

def _forbidden_side(spec: DomainSpec, params: ProblemParams, rho: float,
                    two_sigma0: float) -> Optional[str]:
    if params.regime is not Regime.MASS_CRITICAL:
        return None
    if spec.kind == "interval" and spec.bc == DIRICHLET and rho >= two_sigma0:
        return (f"Dirichlet critical masses lie strictly below "
                f"2*sigma0 = {two_sigma0:.12g}")
    if spec.kind == "interval" and spec.bc == NEUMANN and rho <= two_sigma0:
        return (f"Neumann critical masses lie strictly above "
                f"2*sigma0 = {two_sigma0:.12g}")
    if spec.kind == "realline" and not spec.potential:
        return ("critical scaling on the line with V = 0 is solvable "
                "only at rho = 2*sigma0")
    return None


class MassEvaluator:
    """Richardson-extrapolated mass(eps) with warm-started solves."""

    def __init__(self, spec, params, xi=0.0):
        self.spec = spec
        self.params = params
        self.xi = xi
        self.warm: Optional[NormalizedSolution] = None
        self.cache: dict[float, tuple[float, NormalizedSolution]] = {}

    def _solve(self, eps, n):
        if self.warm is None:
            return solve_fixed_epsilon(self.spec, self.params, eps,
                                       init="interior", xi=self.xi,
                                       n_override=n)
        if self.spec.kind == "interval":
            x = np.linspace(self.spec.a, self.spec.b, n + (n % 2) + 1)
        else:
            nh = n // 2 + (n // 2) % 2
            half = np.linspace(0.0, _realline_halfwidth(self.spec), nh + 1)
            x = np.concatenate([-half[::-1], half[1:]])
        guess = np.interp(x, self.warm.nodes, self.warm.u_values)
        return solve_fixed_epsilon(self.spec, self.params, eps, init="custom",
                                   u0=guess, n_override=len(x) - 1)

    def __call__(self, eps: float) -> float:
        if eps in self.cache:
            return self.cache[eps][0]
        base = _interval_n(self.spec if self.spec.kind == "interval" else
                           DomainSpec("interval", -_realline_halfwidth(self.spec),
                                      _realline_halfwidth(self.spec), DIRICHLET),
                           eps, None)
        sol_h = self._solve(eps, base)
        self.warm = sol_h
        sol_h2 = self._solve(eps, 2 * base)
        mass = (4.0 * mass_of(sol_h2) - mass_of(sol_h)) / 3.0
        self.warm = sol_h2
        self.cache[eps] = (mass, sol_h2)
        return mass

    def fine_solution(self, eps: float) -> NormalizedSolution:
        if eps not in self.cache:
            self(eps)
        return self.cache[eps][1]


def solve_normalized(spec: DomainSpec, params: ProblemParams, rho: float,
                     mass_rtol: float = 5e-8, eps_start: float = 0.5,
                     eps_min: float = 0.05, trace_ratio: float = 0.82,
                     ground_state: Optional[GroundState] = None,
                     xi: float = 0.0) -> NormalizedSolution:
    """Solve the mass-prescribed problem by an outer root-find on eps.

    The concentrating branch is traced from eps_start downward with warm
    starts; Brent runs on log(eps) over the bracketing segment. Raises
    NoSolutionInRegime when rho sits on the forbidden side of the critical
    threshold and BracketFailed when the traced branch never meets rho.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    gs = ground_state if ground_state is not None else solve_ground_state(params)
    two_sigma0 = 2.0 * gs.sigma0
    reason = _forbidden_side(spec, params, rho, two_sigma0)
    if reason is not None:
        raise NoSolutionInRegime(reason)

    evaluate = MassEvaluator(spec, params, xi=xi)

    def f(eps: float) -> float:
        return evaluate(eps) - rho

    def finish(eps: float) -> NormalizedSolution:
        sol = evaluate.fine_solution(eps)
        sol.mass_target = rho
        return sol

    eps_hi = eps_start
    f_hi = f(eps_hi)
    if abs(f_hi) <= mass_rtol * rho:
        return finish(eps_hi)
    while True:
        eps_lo = max(eps_hi * trace_ratio, eps_min)
        if eps_lo >= eps_hi:
            raise BracketFailed(
                f"mass {rho:.12g} not bracketed for eps in [{eps_min}, {eps_start}]")
        f_lo = f(eps_lo)
        if abs(f_lo) <= mass_rtol * rho:
            return finish(eps_lo)
        if np.sign(f_lo) != np.sign(f_hi):
            break
        if eps_lo <= eps_min:
            raise BracketFailed(
                f"mass {rho:.12g} not bracketed for eps in [{eps_min}, {eps_start}]")
        eps_hi, f_hi = eps_lo, f_lo

    t = brentq(lambda t: f(math.exp(t)), math.log(eps_lo), math.log(eps_hi),
               xtol=1e-12, rtol=8.9e-16)
    eps_root = math.exp(t)
    if abs(f(eps_root)) > 1e-6 * rho:
        raise BracketFailed("root-find stalled before reaching the target mass")
    return finish(eps_root)
