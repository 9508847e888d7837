"""Small dense two-phase simplex for the cone-feasibility searches.

Solves   maximize c @ x   subject to   A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.

The problems in this package have a handful of variables (patch counts),
so everything is kept as a dense tableau.  Bland's rule is used for both
the entering and the leaving variable, which guarantees termination and
makes the returned vertex deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PIVOT_TOL = 1e-9


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    value: float | None = None


def _pivot(T, b, basis, row, col):
    piv = T[row, col]
    T[row] /= piv
    b[row] /= piv
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            factor = T[i, col]
            T[i] -= factor * T[row]
            b[i] -= factor * b[row]
    basis[row] = col


def _simplex_iterate(T, b, basis, obj, allowed, max_iter):
    """Run Bland-rule simplex on a tableau already in basic canonical form.

    ``allowed`` marks the columns eligible to enter the basis.
    Returns "optimal" or "unbounded".
    """
    m = T.shape[0]
    for _ in range(max_iter):
        y = obj[basis]
        reduced = obj - y @ T
        entering = -1
        for j in range(T.shape[1]):
            if allowed[j] and j not in basis and reduced[j] > _PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return "optimal"
        leave = -1
        best = np.inf
        for i in range(m):
            if T[i, entering] > _PIVOT_TOL:
                ratio = b[i] / T[i, entering]
                if ratio < best - 1e-12 or (
                    abs(ratio - best) <= 1e-12
                    and (leave < 0 or basis[i] < basis[leave])
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(T, b, basis, leave, entering)
    raise RuntimeError("simplex did not terminate within the iteration budget")


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter=20000):
    """Maximize ``c @ x`` over ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``."""
    c = np.asarray(c, dtype=float)
    nvar = c.size

    rows, rhs, kinds = [], [], []
    if A_ub is not None:
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
        for r, bi in zip(A_ub, np.atleast_1d(np.asarray(b_ub, dtype=float))):
            rows.append(np.asarray(r, dtype=float))
            rhs.append(float(bi))
            kinds.append("ub")
    if A_eq is not None:
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        for r, bi in zip(A_eq, np.atleast_1d(np.asarray(b_eq, dtype=float))):
            rows.append(np.asarray(r, dtype=float))
            rhs.append(float(bi))
            kinds.append("eq")
    m = len(rows)
    if m == 0:
        if (c > _PIVOT_TOL).any():
            return LPResult("unbounded")
        return LPResult("optimal", np.zeros(nvar), 0.0)

    n_slack = kinds.count("ub")
    T = np.zeros((m, nvar + n_slack))
    b = np.array(rhs, dtype=float)
    slack_col = {}
    si = 0
    for i, (row, kind) in enumerate(zip(rows, kinds)):
        T[i, :nvar] = row
        if kind == "ub":
            slack_col[i] = nvar + si
            T[i, nvar + si] = 1.0
            si += 1
    for i in range(m):
        if b[i] < 0.0:
            T[i] *= -1.0
            b[i] *= -1.0

    basis = [-1] * m
    art_rows = []
    for i in range(m):
        j = slack_col.get(i)
        if j is not None and T[i, j] == 1.0:
            basis[i] = j
        else:
            art_rows.append(i)
    n_real = nvar + n_slack
    n_art = len(art_rows)
    if n_art:
        T = np.hstack([T, np.zeros((m, n_art))])
        for k, i in enumerate(art_rows):
            T[i, n_real + k] = 1.0
            basis[i] = n_real + k

    ncols = T.shape[1]
    allowed = np.ones(ncols, dtype=bool)

    if n_art:
        # phase 1: drive the artificial variables to zero
        obj1 = np.zeros(ncols)
        obj1[n_real:] = -1.0
        status = _simplex_iterate(T, b, basis, obj1, allowed, max_iter)
        if status != "optimal":
            raise RuntimeError("phase-1 simplex reported unbounded")
        phase1_value = obj1[basis] @ b
        if phase1_value < -1e-7:
            return LPResult("infeasible")
        # pivot artificials out of the basis where possible
        drop_rows = []
        for i in range(m):
            if basis[i] >= n_real:
                col = next(
                    (j for j in range(n_real) if abs(T[i, j]) > _PIVOT_TOL), None
                )
                if col is None:
                    drop_rows.append(i)  # redundant constraint
                else:
                    _pivot(T, b, basis, i, col)
        if drop_rows:
            keep = [i for i in range(m) if i not in drop_rows]
            T = T[keep]
            b = b[keep]
            basis = [basis[i] for i in keep]
            m = len(keep)
        allowed[n_real:] = False

    obj2 = np.zeros(ncols)
    obj2[:nvar] = c
    status = _simplex_iterate(T, b, basis, obj2, allowed, max_iter)
    if status == "unbounded":
        return LPResult("unbounded")
    x_full = np.zeros(ncols)
    for i in range(m):
        x_full[basis[i]] = b[i]
    x = x_full[:nvar]
    return LPResult("optimal", x, float(c @ x))
