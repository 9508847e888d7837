"""Model data types and the raw -> canonical conversion.

The canonical n-patch system integrated and analysed everywhere else is

    x_i'(t) = x_i(t) * (beta_i - mu_i x_i(t) - sum_j a_ij * conv_ij(t))
              + sum_{j != i} d_ij * x_j(t - tau_ij)

where ``conv_ij(t)`` is the unit-mass kernel average of x_j over the past.
The raw patch form carries Malthusian rates b_i and dispersal rates
alpha_ij with survival fractions eps_ij; conversion folds the outflow
terms into beta and the survival into d.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, NotCooperativeError
from .kernels import DelayKernel


def _as_matrix(value, n, name):
    m = np.array(value, dtype=float, copy=True)
    if m.shape != (n, n):
        raise InvalidParameterError(name, f"expected shape ({n}, {n}), got {m.shape}")
    if not np.isfinite(m).all():
        raise InvalidParameterError(name, "entries must be finite")
    return m


def _as_vector(value, n, name):
    v = np.array(value, dtype=float, copy=True)
    if v.shape != (n,):
        raise InvalidParameterError(name, f"expected {n} entries, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise InvalidParameterError(name, "entries must be finite")
    return v


def _kernel_grid(kernels, n):
    if isinstance(kernels, DelayKernel):
        return [[kernels] * n for _ in range(n)]
    grid = [list(row) for row in kernels]
    if len(grid) != n or any(len(row) != n for row in grid):
        raise InvalidParameterError("kernels", f"expected an {n}x{n} grid")
    for row in grid:
        for k in row:
            if not isinstance(k, DelayKernel):
                raise InvalidParameterError("kernels", "entries must be DelayKernel")
    return grid


@dataclass(frozen=True)
class LVPatchSystem:
    """Canonical patch system; immutable after validation."""

    n: int
    beta: np.ndarray
    mu: np.ndarray
    a: np.ndarray
    d: np.ndarray
    tau: np.ndarray
    kernels: list = field(repr=False)

    def __init__(self, n, beta, mu, a, d, tau, kernels):
        n = int(n)
        if n < 1:
            raise InvalidParameterError("n", "must be a positive integer")
        beta = _as_vector(beta, n, "beta")
        mu = _as_vector(mu, n, "mu")
        if not (mu > 0).all():
            raise InvalidParameterError("mu", "all entries must be positive")
        a = _as_matrix(a, n, "a")
        d = _as_matrix(d, n, "d")
        if (d < 0).any():
            raise InvalidParameterError("d", "entries must be nonnegative")
        if np.diag(d).any():
            raise InvalidParameterError("d", "diagonal must be zero")
        tau = _as_matrix(tau, n, "tau")
        if (tau < 0).any():
            raise InvalidParameterError("tau", "delays must be nonnegative")
        grid = _kernel_grid(kernels, n)
        for arr in (beta, mu, a, d, tau):
            arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "kernels", grid)

    def fingerprint(self):
        """Stable identity of the parameter set (kernels included)."""
        import hashlib

        h = hashlib.sha256()
        for arr in (self.beta, self.mu, self.a, self.d, self.tau):
            h.update(np.ascontiguousarray(arr).tobytes())
        for row in self.kernels:
            for k in row:
                h.update(repr(k.key()).encode())
        return h.hexdigest()


@dataclass(frozen=True)
class RawPatchForm:
    """Raw patch model: Malthusian rates, dispersal rates, survival fractions.

    Either ``eps`` is given directly in (0, 1], or ``gamma`` (nonnegative
    per-route loss rates) from which eps_ij = exp(-gamma_ij * tau_ij).
    """

    n: int
    b: np.ndarray
    mu: np.ndarray
    a: np.ndarray
    alpha: np.ndarray
    tau: np.ndarray
    kernels: list = field(repr=False)
    eps: np.ndarray | None = None
    gamma: np.ndarray | None = None

    def __init__(self, n, b, mu, a, alpha, tau, kernels, eps=None, gamma=None):
        n = int(n)
        if n < 1:
            raise InvalidParameterError("n", "must be a positive integer")
        b = _as_vector(b, n, "b")
        mu = _as_vector(mu, n, "mu")
        if not (mu > 0).all():
            raise InvalidParameterError("mu", "all entries must be positive")
        a = _as_matrix(a, n, "a")
        alpha = _as_matrix(alpha, n, "alpha")
        if (alpha < 0).any():
            raise InvalidParameterError("alpha", "entries must be nonnegative")
        if np.diag(alpha).any():
            raise InvalidParameterError("alpha", "diagonal must be zero")
        tau = _as_matrix(tau, n, "tau")
        if (tau < 0).any():
            raise InvalidParameterError("tau", "delays must be nonnegative")
        if eps is None and gamma is None:
            eps_m = np.ones((n, n))
        elif gamma is not None:
            gamma_m = _as_matrix(gamma, n, "gamma")
            if (gamma_m < 0).any():
                raise InvalidParameterError("gamma", "loss rates must be nonnegative")
            eps_m = np.exp(-gamma_m * tau)
        else:
            eps_m = _as_matrix(eps, n, "eps")
        off = ~np.eye(n, dtype=bool)
        if ((eps_m[off] <= 0) | (eps_m[off] > 1)).any():
            raise InvalidParameterError("eps", "off-diagonal entries must lie in (0, 1]")
        grid = _kernel_grid(kernels, n)
        for arr in (b, mu, a, alpha, tau, eps_m):
            arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "kernels", grid)
        object.__setattr__(self, "eps", eps_m)
        object.__setattr__(self, "gamma", gamma)


@dataclass(frozen=True)
class DerivedMatrices:
    """Community matrix M0 and the two Z-matrices N0, Nhat derived from a system.

    M0:   diagonal beta_i, off-diagonal d_ij (cooperative).
    N0:   diag(mu) - [a^-],   with a^- = max(0, -a).
    Nhat: diag(mu) - [|a|].
    """

    M0: np.ndarray
    N0: np.ndarray
    Nhat: np.ndarray


def build_from_patch_form(raw: RawPatchForm) -> LVPatchSystem:
    """Convert the raw patch form to the canonical system.

    d_ij = eps_ij * alpha_ij for i != j, and
    beta_i = b_i - sum_{j != i} alpha_ji  (total outflow rate from patch i).
    """
    n = raw.n
    d = raw.eps * raw.alpha
    np.fill_diagonal(d, 0.0)
    outflow = raw.alpha.sum(axis=0) - np.diag(raw.alpha)
    beta = raw.b - outflow
    return LVPatchSystem(n, beta, raw.mu, raw.a, d, raw.tau, raw.kernels)


def derived_matrices(sys: LVPatchSystem) -> DerivedMatrices:
    """Build M0, N0 and Nhat from a canonical system."""
    M0 = sys.d.copy()
    np.fill_diagonal(M0, sys.beta)
    a_minus = np.maximum(0.0, -sys.a)
    N0 = np.diag(sys.mu) - a_minus
    Nhat = np.diag(sys.mu) - np.abs(sys.a)
    for m in (M0, N0, Nhat):
        m.setflags(write=False)
    return DerivedMatrices(M0=M0, N0=N0, Nhat=Nhat)


def is_cooperative(sys: LVPatchSystem) -> bool:
    """True iff all interaction coefficients a_ij are nonpositive."""
    return bool((sys.a <= 0).all())


def cooperative_majorant(sys: LVPatchSystem) -> LVPatchSystem:
    """The auxiliary cooperative system dominating ``sys``.

    Every a_ij is replaced by -a_ij^- (positive interaction parts are
    discarded); idempotent on cooperative systems.
    """
    a_maj = -np.maximum(0.0, -sys.a)
    return LVPatchSystem(sys.n, sys.beta, sys.mu, a_maj, sys.d, sys.tau, sys.kernels)


def rhs(sys: LVPatchSystem, x_now, x_delayed, conv) -> np.ndarray:
    """Algebraic right-hand side of the canonical system.

    ``x_delayed[i, j]`` holds x_j(t - tau_ij) and ``conv[i, j]`` the kernel
    average of x_j seen by patch i; pure function of its arguments.
    """
    x = np.asarray(x_now, dtype=float)
    xd = np.asarray(x_delayed, dtype=float)
    cv = np.asarray(conv, dtype=float)
    interaction = (sys.a * cv).sum(axis=1)
    dispersal = (sys.d * xd).sum(axis=1)
    return x * (sys.beta - sys.mu * x - interaction) + dispersal


def require_cooperative(sys: LVPatchSystem):
    if not is_cooperative(sys):
        raise NotCooperativeError("system has a positive interaction coefficient a_ij")
