"""Correction profiles W of the linearized radial problem with source r^2 U.

W solves

    -W'' - (N-1)/r W' + W - p U^{p-1} W = r^2 U(r),    W'(0) = 0,  W ~ decay,

and feeds the constant m_frak = (1/2N) ∫_{R^N} U W, which controls the
fourth-order mass correction of concentrating solutions under a potential.

Two independent routes are provided for N = 1:

* a direct fourth-order collocation solve of the boundary-value problem;
* a factorization oracle writing W(r) = c(r) U'(r), where

      c'(r) = (1 / U'(r)^2) ∫_r^∞ s^2 U(s) U'(s) ds,

  integrated by quadrature alone, with the even branch pinned by removing
  the 1/r singularity of c and the center value obtained from the limit
  W(0) = ∫_0^∞ s^2 U U' ds / (-U''(0)).

Only the radial source |y|^2 U is ever solved: the anisotropic sources
appearing in the full ansatz reduce to it, with the Laplacian of the
potential multiplying m_frak.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from . import radial
from .errors import ZeroCountMismatch
from .groundstate import GroundState, ProblemParams, RadialProfile

__all__ = [
    "CorrectionProfile",
    "solve_linearized_radial",
    "correction_profile",
    "compute_m_frak",
    "factorization_oracle_1d",
    "oracle_c_prime",
    "w_zero_locate",
    "linearized_residual",
]


@dataclass
class CorrectionProfile:
    params: ProblemParams
    profile: RadialProfile
    m_frak: float
    w_zero: Optional[float] = None


def solve_linearized_radial(gs: GroundState, rhs) -> RadialProfile:
    """Decaying solution of the linearized radial problem with source rhs.

    rhs may be a RadialProfile on the same grid or a plain array of samples.
    The far field uses the logarithmic-derivative row W'(R) + W(R) = 0.
    """
    prof = gs.profile
    r = prof.nodes
    if isinstance(rhs, RadialProfile):
        if len(rhs.nodes) != len(r) or rhs.nodes[-1] != r[-1]:
            raise ValueError("rhs must be sampled on the ground-state grid")
        b = rhs.values
    else:
        b = np.asarray(rhs, dtype=float)
        if b.shape != r.shape:
            raise ValueError("rhs must be sampled on the ground-state grid")
    q = 1.0 - gs.params.p * np.abs(prof.values) ** (gs.params.p - 1)
    w = radial.solve_radial_linear(r, q, gs.params.dim, b, robin_const=1.0)
    h = prof.spacing
    dw = radial.d1_six(w, h, "even")
    dw[-3:] = -w[-3:]  # tail model derivative in the one-sided zone
    return RadialProfile(r, w, dw, tail_rate=-1.0)


def linearized_residual(gs: GroundState, w: RadialProfile, rhs: np.ndarray,
                        r_cap: float = 35.0) -> float:
    """Independent max-norm residual of the linearized equation."""
    r = gs.profile.nodes
    q = 1.0 - gs.params.p * np.abs(gs.profile.values) ** (gs.params.p - 1)
    res = radial.radial_ode_residual(r, w.values, gs.params.dim, q, rhs)
    keep = (r <= r_cap) & np.isfinite(res)
    return float(np.max(np.abs(res[keep])))


def compute_m_frak(gs: GroundState, w: RadialProfile) -> float:
    """m_frak = (1/2N) ∫_{R^N} U W by radial quadrature with tail correction."""
    total = radial.radial_quadrature(gs.profile.nodes,
                                     gs.profile.values * w.values,
                                     gs.params.dim, tail_decay=2.0)
    return total / (2.0 * gs.params.dim)


def correction_profile(gs: GroundState) -> CorrectionProfile:
    """Solve with the radial source r^2 U and package the derived constants."""
    r = gs.profile.nodes
    w = solve_linearized_radial(gs, r ** 2 * gs.profile.values)
    m = compute_m_frak(gs, w)
    zero = None
    signs = np.sign(w.values[np.abs(w.values) > 1e-13])
    if np.count_nonzero(np.diff(signs)) == 1:
        zero = w_zero_locate(w)
    return CorrectionProfile(gs.params, w, m, zero)


# -- factorization oracle (N = 1) -----------------------------------------------

def _fine_grid(gs: GroundState, extra: float = 20.0) -> np.ndarray:
    # refine the profile grid 4x so its nodes are an exact subset
    grid = gs.profile.nodes
    h = grid[1] - grid[0]
    r_max = grid[-1] + extra
    n = int(round(r_max / (h / 4.0)))
    n += n % 2
    return np.linspace(0.0, r_max, n + 1)


def _suffix_integrals(s: np.ndarray, f: np.ndarray) -> np.ndarray:
    """∫_{s_i}^{s_max} f at every node, accumulated from the tail inward.

    Accumulating from the decaying end keeps the exponentially small suffix
    values at full relative precision (a forward cumulative saturates).
    """
    rev = np.concatenate([[0.0], cumulative_simpson(f[::-1], x=s)])
    return rev[::-1]


def oracle_c_prime(gs: GroundState, r) -> np.ndarray:
    """c'(r) of the factorization W = c U', from the explicit inner integral."""
    if gs.params.dim != 1 or gs.u_exact is None:
        raise ValueError("factorization oracle requires the closed-form N=1 state")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    s = _fine_grid(gs)
    suffix = _suffix_integrals(s, s ** 2 * gs.u_exact(s) * gs.du_exact(s))
    inner = np.interp(r, s, suffix)  # tail beyond s[-1] negligible
    return inner / gs.du_exact(r) ** 2


def factorization_oracle_1d(gs: GroundState) -> CorrectionProfile:
    """Build W by quadrature alone (N = 1), independent of the BVP solve."""
    if gs.params.dim != 1 or gs.u_exact is None:
        raise ValueError("factorization oracle requires the closed-form N=1 state")
    p = gs.params.p
    u0 = float(gs.u_exact(0.0))
    u0pp = u0 - u0 ** p                     # U''(0) from the equation at r = 0
    grid = gs.profile.nodes
    s = _fine_grid(gs)
    suffix = _suffix_integrals(s, s ** 2 * gs.u_exact(s) * gs.du_exact(s))
    I0 = suffix[0]                          # ∫_0^∞ s^2 U U' ds  (negative)
    w_center = I0 / (-u0pp)

    def inner(rv):
        return np.interp(rv, s, suffix)

    # regular part of c': the 1/r^2 singularity removed; its r->0 limit
    # follows from U''''(0) = (1 - p U^{p-1}(0)) U''(0).
    u0q = (1.0 - p * u0 ** (p - 1)) * u0pp
    phi_limit = -I0 * u0q / (3.0 * u0pp ** 3)
    sf = s[1:]
    phi_reg = inner(sf) / gs.du_exact(sf) ** 2 - I0 / (u0pp ** 2 * sf ** 2)
    phi_reg = np.concatenate([[phi_limit], phi_reg])
    cum_phi = np.concatenate([[0.0], cumulative_simpson(phi_reg, x=s)])

    rr = grid[1:]
    c_vals = -I0 / (u0pp ** 2 * rr) + np.interp(rr, s, cum_phi)
    w_vals = np.concatenate([[w_center], c_vals * gs.du_exact(rr)])
    # W' = c' U' + c U'' away from the origin; W'(0) = 0 for the even branch
    cp = inner(rr) / gs.du_exact(rr) ** 2
    upp = gs.d2u_exact(rr)
    dw = np.concatenate([[0.0], cp * gs.du_exact(rr) + c_vals * upp])
    prof = RadialProfile(grid, w_vals, dw, tail_rate=-1.0)
    return CorrectionProfile(gs.params, prof, compute_m_frak(gs, prof),
                             w_zero_locate(prof))


def w_zero_locate(w: RadialProfile, tol: float = 1e-10) -> float:
    """Unique sign change of W, refined by bisection on the C^1 interpolant."""
    vals = w.values
    mask = np.abs(vals) > 1e-13
    signs = np.sign(vals[mask])
    flips = np.count_nonzero(np.diff(signs))
    if flips != 1:
        raise ZeroCountMismatch(f"expected exactly one sign change, found {flips}")
    idx = np.where(np.diff(np.sign(vals)) != 0)[0][0]
    spline = CubicHermiteSpline(w.nodes, vals, w.dvalues)
    return float(brentq(spline, w.nodes[idx], w.nodes[idx + 1],
                        xtol=tol, rtol=8.9e-16))
