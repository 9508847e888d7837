"""Equilibria of the associated ODE system.

The delay system and its associated ODE share the same equilibria because
every kernel integrates to one over a constant profile, so equilibria are
the nonnegative roots of

    G_i(x) = x_i * (beta_i - mu_i x_i - sum_j a_ij x_j) + sum_{j != i} d_ij x_j.

A damped multistart Newton search over a deterministic lattice collects
them; the zero vector is always an equilibrium.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotCooperativeError
from .model import (
    LVPatchSystem,
    cooperative_majorant,
    derived_matrices,
    is_cooperative,
)

RESIDUAL_TOL = 1e-10
SNAP_TOL = 1e-9
DEDUP_TOL = 1e-6


@dataclass(frozen=True)
class EquilibriumPoint:
    x: np.ndarray
    residual_norm: float
    positivity: str  # "zero" | "boundary" | "interior"


@dataclass(frozen=True)
class EquilibriumSet:
    points: list
    failed_starts: int = 0

    @property
    def interior(self):
        return [p for p in self.points if p.positivity == "interior"]

    @property
    def boundary(self):
        return [p for p in self.points if p.positivity == "boundary"]


def equilibrium_residual(sys: LVPatchSystem, x) -> np.ndarray:
    """G(x) of the associated ODE; zero exactly at equilibria."""
    x = np.asarray(x, dtype=float)
    return x * (sys.beta - sys.mu * x - sys.a @ x) + sys.d @ x


def equilibrium_jacobian(sys: LVPatchSystem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    core = sys.beta - sys.mu * x - sys.a @ x
    J = -(x[:, None] * sys.a) + sys.d
    J += np.diag(core - sys.mu * x)
    return J


def coefficient_bound(sys: LVPatchSystem):
    """The coefficient-only bound max_i (beta_i + sum d_ij) / (mu_i - sum a_ij^-),
    defined when every denominator is positive; None otherwise."""
    a_minus = np.maximum(0.0, -sys.a)
    denom = sys.mu - a_minus.sum(axis=1)
    if not (denom > 0).all():
        return None
    numer = sys.beta + sys.d.sum(axis=1)
    return float((numer / denom).max())


def default_box_hi(sys: LVPatchSystem) -> np.ndarray:
    bound = coefficient_bound(sys)
    if bound is None:
        return np.full(sys.n, 10.0)
    return np.full(sys.n, 2.0 * max(1.0, bound))


def _newton(sys, x0, max_iter=100):
    """Damped Newton from x0; returns the converged point or None."""
    x = np.asarray(x0, dtype=float).copy()
    res = equilibrium_residual(sys, x)
    rnorm = float(np.abs(res).max())
    for _ in range(max_iter):
        J = equilibrium_jacobian(sys, x)
        try:
            step = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            return None
        if not np.isfinite(step).all():
            return None
        scale = 1.0
        for _ in range(40):
            x_new = x + scale * step
            res_new = equilibrium_residual(sys, x_new)
            rnorm_new = float(np.abs(res_new).max())
            if rnorm_new <= rnorm or rnorm_new <= 1e-13:
                break
            scale *= 0.5
        else:
            return None
        step_norm = float(np.abs(scale * step).max())
        x, res, rnorm = x_new, res_new, rnorm_new
        if step_norm <= 1e-13 and rnorm <= 1e-12:
            return x
    return None


def _lattice_starts(sys, box_hi, extra):
    n = sys.n
    starts = [np.zeros(n), 0.5 * box_hi]
    # corners of [0, box_hi]
    for mask in range(1, 2**n):
        corner = np.array([(box_hi[i] if mask >> i & 1 else 0.0) for i in range(n)])
        starts.append(corner)
    # axis midpoints
    for i in range(n):
        p = np.zeros(n)
        p[i] = 0.5 * box_hi[i]
        starts.append(p)
    if extra > 0:
        per_axis = max(2, int(np.ceil(extra ** (1.0 / n))))
        grids = np.meshgrid(*[np.linspace(0.0, 1.0, per_axis + 2)[1:-1] for _ in range(n)])
        pts = np.stack([g.ravel() for g in grids], axis=1) * box_hi
        starts.extend(pts)
    return starts


def find_equilibria(sys: LVPatchSystem, starts: int = 0, box_hi=None) -> EquilibriumSet:
    """Collect nonnegative equilibria by damped Newton multistart.

    Start points: corners, center and axis midpoints of [0, box_hi], the
    zero vector, the majorant equilibria when the system is not already
    cooperative, plus an optional regular grid of ``starts`` points.
    """
    if box_hi is None:
        box_hi = default_box_hi(sys)
    box_hi = np.asarray(box_hi, dtype=float)
    start_points = _lattice_starts(sys, box_hi, starts)
    if not is_cooperative(sys):
        maj = find_equilibria(cooperative_majorant(sys), box_hi=box_hi)
        start_points.extend(p.x for p in maj.interior)

    found = [np.zeros(sys.n)]
    failed = 0
    for x0 in start_points:
        x = _newton(sys, x0)
        if x is None:
            failed += 1
            continue
        if x.min() < -SNAP_TOL:
            continue
        snapped = np.where(np.abs(x) <= SNAP_TOL, 0.0, x)
        if float(np.abs(equilibrium_residual(sys, snapped)).max()) <= RESIDUAL_TOL:
            x = snapped
        if float(np.abs(equilibrium_residual(sys, x)).max()) > RESIDUAL_TOL:
            continue
        if x.min() < 0.0:
            continue
        if all(np.abs(x - y).max() > DEDUP_TOL for y in found):
            found.append(x)

    found.sort(key=lambda v: tuple(v))
    points = []
    for x in found:
        rnorm = float(np.abs(equilibrium_residual(sys, x)).max())
        if (x == 0.0).all():
            kind = "zero"
        elif (x > 0.0).all():
            kind = "interior"
        else:
            kind = "boundary"
        x.setflags(write=False)
        points.append(EquilibriumPoint(x=x, residual_norm=rnorm, positivity=kind))
    return EquilibriumSet(points=points, failed_starts=failed)


def cooperative_identity_residual(sys: LVPatchSystem, x) -> float:
    """Residual of the cooperative equilibrium identity M0 x = x (*) N0 x
    (componentwise product); zero exactly at equilibria of a cooperative
    system."""
    if not is_cooperative(sys):
        raise NotCooperativeError("identity holds for cooperative systems only")
    x = np.asarray(x, dtype=float)
    dm = derived_matrices(sys)
    return float(np.abs(dm.M0 @ x - x * (dm.N0 @ x)).max())
