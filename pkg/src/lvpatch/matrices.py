"""Cooperative/Z-matrix machinery: irreducibility, M-matrix classification,
spectral bounds, Perron vectors and positive-cone feasibility certificates.

A matrix is *cooperative* when its off-diagonal entries are nonnegative and
a *Z-matrix* when they are nonpositive.  The spectral bound s(M) is the
largest real part over the spectrum.  For a Z-matrix A the classification
into non-singular M-matrix / M-matrix / neither is decided by leading
principal minors plus a tolerance-scaled probe, never by complex
eigenvalue computations.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import NotCooperativeError, ReducibleMatrixError, LVPatchError
from .simplex import solve_lp

#: band half-width inside which sign decisions on spectral bounds are
#: considered boundary cases
BOUNDARY_BAND = 1e-8

#: lower bound kept on certificate components, and the margin above which a
#: strict inequality is considered satisfied
CONE_ETA = 1e-9


def _square(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M


def _offdiag_mask(n):
    return ~np.eye(n, dtype=bool)


def is_cooperative_matrix(M) -> bool:
    M = _square(M)
    return bool((M[_offdiag_mask(M.shape[0])] >= 0).all())


def is_z_matrix(M) -> bool:
    M = _square(M)
    return bool((M[_offdiag_mask(M.shape[0])] <= 0).all())


def is_irreducible(M) -> bool:
    """True iff the digraph of nonzero off-diagonal entries is strongly connected."""
    M = _square(M)
    n = M.shape[0]
    if n == 1:
        return True
    adj = (M != 0.0) & _offdiag_mask(n)

    def reaches_all(adjacency):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        stack = [0]
        while stack:
            i = stack.pop()
            for j in np.nonzero(adjacency[i])[0]:
                if not seen[j]:
                    seen[j] = True
                    stack.append(j)
        return seen.all()

    return bool(reaches_all(adj) and reaches_all(adj.T))


class ZMatrixClass(enum.Enum):
    NOT_Z_MATRIX = "not-z-matrix"
    NONSINGULAR_M = "nonsingular-m"
    SINGULAR_M = "singular-m"
    NOT_M = "not-m"


def _leading_minors_positive(M) -> bool:
    n = M.shape[0]
    for k in range(1, n + 1):
        if not np.linalg.det(M[:k, :k]) > 0.0:
            return False
    return True


def classify_z_matrix(M) -> ZMatrixClass:
    """Classify a square matrix by the M-matrix trichotomy.

    For Z-matrices, positivity of all leading principal minors is
    equivalent to positivity of all principal minors, hence to the
    non-singular M-matrix property.  The singular class is decided by a
    tolerance-scaled diagonal probe.
    """
    M = _square(M)
    n = M.shape[0]
    if (M[_offdiag_mask(n)] > 0).any():
        return ZMatrixClass.NOT_Z_MATRIX
    if _leading_minors_positive(M):
        return ZMatrixClass.NONSINGULAR_M
    delta = BOUNDARY_BAND * max(1.0, float(np.abs(np.diag(M)).max()) if n else 1.0)
    if _leading_minors_positive(M + delta * np.eye(n)):
        return ZMatrixClass.SINGULAR_M
    return ZMatrixClass.NOT_M


def _check_cooperative(M):
    n = M.shape[0]
    off = M[_offdiag_mask(n)]
    if off.size and off.min() < 0:
        raise NotCooperativeError("matrix has a negative off-diagonal entry")


def spectral_bound(M) -> float:
    """Spectral bound s(M) of a cooperative matrix, accurate to 1e-10.

    Computed by bisection on t over the predicate "t*I - M is a
    non-singular M-matrix" (leading-minor test), which holds exactly for
    t > s(M).  A Collatz-Wielandt enclosure from power iteration on the
    nonnegative shift M + c*I cross-checks the result.
    """
    M = _square(M)
    _check_cooperative(M)
    n = M.shape[0]
    diag = np.diag(M)
    lo = float(diag.min())
    hi = float(M.sum(axis=1).max())  # max row sum: M_ii + sum of off-diagonals
    eye = np.eye(n)

    def above(t):
        return _leading_minors_positive(t * eye - M)

    while not above(hi):
        hi += max(1.0, abs(hi))
    for _ in range(200):
        if hi - lo <= 1e-11:
            break
        mid = 0.5 * (lo + hi)
        if above(mid):
            hi = mid
        else:
            lo = mid
    s = 0.5 * (lo + hi)

    # Collatz-Wielandt cross-check: for any positive v,
    # min_i (Bv)_i/v_i <= rho(B) <= max_i (Bv)_i/v_i with B = M + cI >= 0.
    c = 1.0 + float(np.abs(diag).max())
    B = M + c * eye
    v = np.ones(n)
    best_lo, best_hi = -np.inf, np.inf
    for _ in range(500):
        Bv = B @ v
        ratios = Bv / v
        best_lo = max(best_lo, float(ratios.min()))
        best_hi = min(best_hi, float(ratios.max()))
        if best_hi - best_lo < 1e-9:
            break
        nv = float(Bv.max())
        if nv <= 0.0:
            break
        v = np.maximum(Bv / nv, 1e-13)
    slack = 1e-6 * max(1.0, abs(s) + c)
    if not (best_lo - slack <= s + c <= best_hi + slack):
        raise LVPatchError(
            f"spectral bound {s} fell outside its power-iteration enclosure "
            f"[{best_lo - c}, {best_hi - c}]"
        )
    return s


def perron_vector(M):
    """(s, v) with Mv = s v, v > 0 normalized to max-entry 1.

    Requires a cooperative irreducible matrix; the eigenvector is read off
    the singular direction of s*I - M, which is numerically robust even
    for tiny spectral gaps.
    """
    M = _square(M)
    _check_cooperative(M)
    if not is_irreducible(M):
        raise ReducibleMatrixError("perron_vector requires an irreducible matrix")
    s = spectral_bound(M)
    n = M.shape[0]
    _, _, vt = np.linalg.svd(s * np.eye(n) - M)
    v = vt[-1]
    v = v * np.sign(v[np.argmax(np.abs(v))])
    v = v / v.max()
    if not (v > 0).all():
        raise LVPatchError("computed Perron vector is not strictly positive")
    residual = float(np.abs(M @ v - s * v).max())
    if residual > 1e-9:
        raise LVPatchError(f"Perron residual {residual} exceeds 1e-9")
    return s, v


@dataclass(frozen=True)
class ConeCertificate:
    """A positive vector q together with the residuals of the inequalities
    it certifies; ``margin`` is the maximized slack of the strict block."""

    q: np.ndarray
    margins: dict = field(default_factory=dict)
    margin: float = 0.0


class ImageSense(enum.Enum):
    STRICTLY_POSITIVE = "positive"
    STRICTLY_NEGATIVE = "negative"


def _cone_lp(margin_A, hard_ge=None, hard_le=None):
    """Maximize t subject to margin_A q >= t*1, optional hard blocks
    hard_ge q >= 0 and hard_le q <= 0, sum(q) = n, q >= eta.

    Returns (t_star, q) or (None, None) when even the hard blocks are
    infeasible.  Written with q = eta + u, u >= 0 and t free (split).
    """
    margin_A = _square(margin_A)
    n = margin_A.shape[0]
    eta = CONE_ETA
    ones = np.ones(n)

    # variables: u_1..u_n, t_plus, t_minus
    rows_ub, rhs_ub = [], []
    for i in range(n):
        row = np.concatenate([-margin_A[i], [1.0, -1.0]])
        rows_ub.append(row)
        rhs_ub.append(eta * float(margin_A[i] @ ones))
    for H in () if hard_ge is None else (np.atleast_2d(hard_ge),):
        for hrow in H:
            rows_ub.append(np.concatenate([-hrow, [0.0, 0.0]]))
            rhs_ub.append(eta * float(hrow @ ones))
    for G in () if hard_le is None else (np.atleast_2d(hard_le),):
        for grow in G:
            rows_ub.append(np.concatenate([grow, [0.0, 0.0]]))
            rhs_ub.append(-eta * float(grow @ ones))
    A_eq = [np.concatenate([ones, [0.0, 0.0]])]
    b_eq = [n * (1.0 - eta)]
    c = np.zeros(n + 2)
    c[n] = 1.0
    c[n + 1] = -1.0

    res = solve_lp(c, A_ub=np.array(rows_ub), b_ub=np.array(rhs_ub),
                   A_eq=np.array(A_eq), b_eq=np.array(b_eq))
    if res.status != "optimal":
        return None, None
    q = eta + res.x[:n]
    return float(res.value), q


def positive_improving_vector(M, sense=ImageSense.STRICTLY_POSITIVE):
    """Certificate q > 0 with Mq > 0 (or Mq < 0), or None if none exists.

    Feasibility is decided by maximizing the margin t subject to
    Mq >= t*1 (resp. Mq <= -t*1), sum(q) = n, q >= eta; the answer is
    "exists" iff the optimal margin exceeds the feasibility tolerance.
    """
    M = _square(M)
    A = M if sense == ImageSense.STRICTLY_POSITIVE else -M
    t_star, q = _cone_lp(A)
    if t_star is None or t_star <= CONE_ETA:
        return None
    image = M @ q
    signed = image if sense == ImageSense.STRICTLY_POSITIVE else -image
    if signed.min() <= 0.0:
        raise LVPatchError("cone certificate failed re-verification")
    return ConeCertificate(q=q, margins={"Mq": image}, margin=t_star)


def nonneg_image_vector(M):
    """q > 0 with Mq >= 0 (within 1e-9), or None; non-strict counterpart."""
    M = _square(M)
    t_star, q = _cone_lp(M)
    if t_star is None or t_star < -CONE_ETA:
        return None
    return ConeCertificate(q=q, margins={"Mq": M @ q}, margin=t_star)


def nonpos_image_vector(M):
    """q > 0 with Mq <= 0 (within 1e-9), or None."""
    cert = nonneg_image_vector(-np.asarray(M, dtype=float))
    if cert is None:
        return None
    return ConeCertificate(q=cert.q, margins={"Mq": -cert.margins["Mq"]},
                           margin=cert.margin)


class JointMode(enum.Enum):
    EXTINCTION = "extinction"  # M0 q <= 0 and N0 q > 0
    GAS = "gas"                # M0 q < 0 and N0 q >= 0


def joint_cone_feasibility(M0, N0, mode: JointMode):
    """Joint certificate for the extinction / GAS cone conditions.

    Extinction mode searches q > 0 with M0 q <= 0 (hard) and N0 q > 0
    (margin-maximized); GAS mode searches M0 q < 0 (margin) and
    N0 q >= 0 (hard).  Certificates are re-verified by direct
    multiplication before being returned.
    """
    M0 = _square(M0)
    N0 = _square(N0)
    if mode == JointMode.EXTINCTION:
        t_star, q = _cone_lp(N0, hard_le=M0)
    else:
        t_star, q = _cone_lp(-M0, hard_ge=N0)
    if t_star is None or t_star <= CONE_ETA:
        return None
    m0q = M0 @ q
    n0q = N0 @ q
    if mode == JointMode.EXTINCTION:
        ok = (m0q <= 1e-12 * max(1.0, np.abs(M0).max())).all() and n0q.min() > 0.0
    else:
        ok = m0q.max() < 0.0 and (n0q >= -1e-12 * max(1.0, np.abs(N0).max())).all()
    if not ok:
        raise LVPatchError("joint cone certificate failed re-verification")
    return ConeCertificate(q=q, margins={"M0q": m0q, "N0q": n0q}, margin=t_star)


def decide_nonsingular_m(A, method, band=BOUNDARY_BAND):
    """Tri-state non-singular M-matrix decision for a Z-matrix A.

    Returns True/False outside the spectral boundary band, None inside it
    (boundary case).  ``method`` selects one of the three independent
    procedures: "minors", "cone" or "spectral".
    """
    A = _square(A)
    if not is_z_matrix(A):
        raise ValueError("decide_nonsingular_m expects a Z-matrix")
    s = spectral_bound(-A)
    if abs(s) <= band:
        return None
    if method == "minors":
        return _leading_minors_positive(A)
    if method == "cone":
        return positive_improving_vector(A) is not None
    if method == "spectral":
        return s < -band
    raise ValueError(f"unknown method {method!r}")
