"""Characteristic matrix of the linearization at zero and its dominant real root.

The linearization at the trivial equilibrium has characteristic matrix

    Delta(lam) = M(lam) - lam*I,   M(lam)_ii = beta_i,
    M(lam)_ij = d_ij * exp(-lam * tau_ij)   (i != j),

which is cooperative for every real lam, so its spectral bound is well
defined and lam -> s(Delta(lam)) is continuous and non-increasing (strictly
decreasing when the dispersal graph is irreducible).  When s(M(0)) > 0
there is a unique lam* > 0 with s(Delta(lam*)) = 0, a real characteristic
root certifying instability of zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrices import spectral_bound, BOUNDARY_BAND
from .model import LVPatchSystem, derived_matrices


@dataclass(frozen=True)
class CharMatrixEval:
    lam: float
    delta: np.ndarray
    spectral_bound_of_delta: float


@dataclass(frozen=True)
class CharRootResult:
    """Outcome of the dominant-root search.

    status is "found" (lam holds the root), "absent" (s(M(0)) < -band, no
    positive real root) or "boundary" (|s(M(0))| within the band,
    inconclusive).
    """

    status: str
    lam: float | None = None
    s_at_root: float | None = None


def delta_matrix(sys: LVPatchSystem, lam: float) -> CharMatrixEval:
    """Evaluate Delta(lam) = M(lam) - lam*I and attach its spectral bound."""
    lam = float(lam)
    delta = sys.d * np.exp(-lam * sys.tau)
    np.fill_diagonal(delta, sys.beta - lam)
    delta.setflags(write=False)
    return CharMatrixEval(lam=lam, delta=delta,
                          spectral_bound_of_delta=spectral_bound(delta))


def dominant_real_char_root(sys: LVPatchSystem, band: float = BOUNDARY_BAND) -> CharRootResult:
    """Locate the positive real characteristic root when zero is unstable.

    Bisection on the non-increasing map lam -> s(Delta(lam)), bracketed by
    [0, lam_hi] with lam_hi doubled until the bound goes negative; the
    returned root satisfies |s(Delta(lam*))| <= 1e-10.
    """
    s0 = spectral_bound(derived_matrices(sys).M0)
    if s0 < -band:
        return CharRootResult(status="absent")
    if s0 <= band:
        return CharRootResult(status="boundary")

    def s_at(lam):
        return delta_matrix(sys, lam).spectral_bound_of_delta

    lo, hi = 0.0, 1.0
    while s_at(hi) >= 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("failed to bracket the characteristic root")
    # s(Delta(lam)) decreases with slope <= -1, so a bracket of width w
    # pins the root value to within w
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        smid = s_at(mid)
        if abs(smid) <= 1e-10 or hi - lo <= 1e-13:
            return CharRootResult(status="found", lam=mid, s_at_root=smid)
        if smid > 0.0:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    return CharRootResult(status="found", lam=mid, s_at_root=s_at(mid))
