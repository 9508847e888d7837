"""Theorem-by-theorem classification of a patch system, with certificates.

Every sufficient criterion for extinction, boundedness, persistence and
global attractivity is evaluated against a given system.  A verdict is
``proven`` only when its hypotheses were verified numerically, and then it
carries the certificates the hypotheses name (cone vectors, equilibria,
spectral bounds, the coefficient bound), each re-checkable by direct
multiplication.  Strict inequalities are gated by a tolerance band: results
within the band are reported inconclusive rather than asserted.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .characteristic import dominant_real_char_root
from .equilibrium import coefficient_bound, find_equilibria
from .errors import LVPatchError, NumericalFailure
from .histories import HistoryFunction
from .integrator import SimOptions, asymptotic_estimate, simulate
from .matrices import (
    ImageSense,
    JointMode,
    ZMatrixClass,
    classify_z_matrix,
    is_irreducible,
    joint_cone_feasibility,
    nonneg_image_vector,
    nonpos_image_vector,
    perron_vector,
    positive_improving_vector,
    spectral_bound,
)
from .model import LVPatchSystem, cooperative_majorant, derived_matrices, is_cooperative

#: strict-inequality gate: quantities inside (-TOL, TOL) are boundary cases
TOL = 1e-8


class TheoremId(enum.Enum):
    ZERO_LOCAL_STABILITY = "ZeroLocalStability"
    ZERO_INSTABILITY = "ZeroInstability"
    BOUNDEDNESS_VIA_N0 = "BoundednessViaN0"
    EXTINCTION_ATTRACTIVE = "ExtinctionAttractive"
    ZERO_GAS = "ZeroGAS"
    NO_PATCH_EXTINCTION = "NoPatchExtinction"
    COMPETITIVE_EXTINCTION = "CompetitiveExtinction"
    COOP_PERSISTENCE = "CoopPersistence"
    COOP_GLOBAL_ATTRACTIVITY = "CoopGlobalAttractivity"
    COOP_POSITIVE_BETA = "CoopPositiveBeta"
    COOP_THRESHOLD_IRREDUCIBLE = "CoopThresholdIrreducible"
    POSITIVE_EQ_EXISTS = "PositiveEqExists"
    DISSIPATIVITY = "Dissipativity"
    TOTAL_PERSISTENCE_WEAK = "TotalPersistenceWeak"
    TOTAL_PERSISTENCE_UNIFORM = "TotalPersistenceUniform"
    PATCH_PERSISTENCE = "PatchPersistence"
    POSITIVE_EQ_ATTRACTIVE = "PositiveEqAttractive"
    POSITIVE_DISPERSAL_ATTRACTIVE = "PositiveDispersalAttractive"
    COEFFICIENT_CRITERION = "CoefficientCriterion"


class VerdictStatus(enum.Enum):
    PROVEN = "proven"
    HYPOTHESIS_FAILED = "hypothesis-failed"
    INCONCLUSIVE = "inconclusive"


@dataclass
class TheoremVerdict:
    theorem: TheoremId
    status: VerdictStatus
    failed_hypothesis: str | None = None
    outcome: str | None = None
    certificates: dict = field(default_factory=dict)
    margins: list = field(default_factory=list)  # (name, values, relation)

    @property
    def proven(self):
        return self.status == VerdictStatus.PROVEN


class Summary(enum.Enum):
    EXTINCTION_GUARANTEED = "ExtinctionGuaranteed"
    POSITIVE_EQUILIBRIUM_GLOBALLY_ATTRACTIVE = "PositiveEquilibriumGloballyAttractive"
    PERSISTENT_NO_ATTRACTIVITY_PROOF = "PersistentNoAttractivityProof"
    ZERO_UNSTABLE_NO_FURTHER_PROOF = "ZeroUnstableNoFurtherProof"
    FULLY_INCONCLUSIVE = "FullyInconclusive"


@dataclass
class ClassificationReport:
    verdicts: dict
    summary: Summary
    summary_sources: list
    system_fingerprint: str
    s_M0: float
    flags: list = field(default_factory=list)

    def verdict(self, theorem: TheoremId) -> TheoremVerdict:
        return self.verdicts[theorem]


def _proven(theorem, margins=(), outcome=None, **certificates):
    v = TheoremVerdict(theorem, VerdictStatus.PROVEN, outcome=outcome,
                       certificates=certificates, margins=list(margins))
    return v


def _failed(theorem, hypothesis):
    return TheoremVerdict(theorem, VerdictStatus.HYPOTHESIS_FAILED,
                          failed_hypothesis=hypothesis)


def _boundary(theorem, note):
    return TheoremVerdict(theorem, VerdictStatus.INCONCLUSIVE,
                          failed_hypothesis=note)


def _interior_equilibria(sys, flags, label):
    eq = find_equilibria(sys)
    interior = eq.interior
    if len(interior) > 1:
        flags.append(f"multiple interior equilibria found for {label}; "
                     f"using the lexicographically first")
    dm = derived_matrices(sys)
    if is_irreducible(dm.M0) and eq.boundary:
        flags.append(f"boundary equilibrium found although M0 is irreducible ({label})")
    return interior[0].x if interior else None, eq


# ---------------------------------------------------------------------------
# trivial equilibrium (extinction family)
# ---------------------------------------------------------------------------


def classify_trivial_equilibrium(sys: LVPatchSystem) -> dict:
    """Verdicts on local stability / instability of 0 and the extinction criteria."""
    dm = derived_matrices(sys)
    M0, N0 = dm.M0, dm.N0
    s0 = spectral_bound(M0)
    verdicts = {}

    if s0 < -TOL:
        verdicts[TheoremId.ZERO_LOCAL_STABILITY] = _proven(
            TheoremId.ZERO_LOCAL_STABILITY, s_M0=s0)
    elif s0 > TOL:
        verdicts[TheoremId.ZERO_LOCAL_STABILITY] = _failed(
            TheoremId.ZERO_LOCAL_STABILITY, "s(M0) < 0")
    else:
        verdicts[TheoremId.ZERO_LOCAL_STABILITY] = _boundary(
            TheoremId.ZERO_LOCAL_STABILITY, "s(M0) within the boundary band")

    if s0 > TOL:
        root = dominant_real_char_root(sys)
        verdicts[TheoremId.ZERO_INSTABILITY] = _proven(
            TheoremId.ZERO_INSTABILITY, s_M0=s0, lambda_star=root.lam)
    elif s0 < -TOL:
        verdicts[TheoremId.ZERO_INSTABILITY] = _failed(
            TheoremId.ZERO_INSTABILITY, "s(M0) > 0")
    else:
        verdicts[TheoremId.ZERO_INSTABILITY] = _boundary(
            TheoremId.ZERO_INSTABILITY, "s(M0) within the boundary band")

    n0_class = classify_z_matrix(N0)
    if n0_class == ZMatrixClass.NONSINGULAR_M:
        cert = positive_improving_vector(N0)
        if cert is None:
            verdicts[TheoremId.BOUNDEDNESS_VIA_N0] = _boundary(
                TheoremId.BOUNDEDNESS_VIA_N0,
                "N0 passes the minor test but is numerically near-singular")
        else:
            verdicts[TheoremId.BOUNDEDNESS_VIA_N0] = _proven(
                TheoremId.BOUNDEDNESS_VIA_N0,
                margins=[("N0q", N0 @ cert.q, ">0")], q=cert.q)
    else:
        verdicts[TheoremId.BOUNDEDNESS_VIA_N0] = _failed(
            TheoremId.BOUNDEDNESS_VIA_N0, "N0 is a nonsingular M-matrix")

    joint = joint_cone_feasibility(M0, N0, JointMode.EXTINCTION)
    if joint is not None:
        verdicts[TheoremId.EXTINCTION_ATTRACTIVE] = _proven(
            TheoremId.EXTINCTION_ATTRACTIVE,
            margins=[("M0q", joint.margins["M0q"], "<=0"),
                     ("N0q", joint.margins["N0q"], ">0")],
            q=joint.q)
    else:
        verdicts[TheoremId.EXTINCTION_ATTRACTIVE] = _failed(
            TheoremId.EXTINCTION_ATTRACTIVE,
            "exists q > 0 with M0 q <= 0 and N0 q > 0")

    joint_gas = joint_cone_feasibility(M0, N0, JointMode.GAS)
    if joint_gas is not None:
        verdicts[TheoremId.ZERO_GAS] = _proven(
            TheoremId.ZERO_GAS,
            margins=[("M0q", joint_gas.margins["M0q"], "<0"),
                     ("N0q", joint_gas.margins["N0q"], ">=0")],
            q=joint_gas.q)
    else:
        verdicts[TheoremId.ZERO_GAS] = _failed(
            TheoremId.ZERO_GAS, "exists q > 0 with M0 q < 0 and N0 q >= 0")

    if (sys.d > 0).any():
        verdicts[TheoremId.NO_PATCH_EXTINCTION] = _failed(
            TheoremId.NO_PATCH_EXTINCTION, "no patch dispersal (all d_ij = 0)")
    else:
        # without dispersal the growth rates coincide with the Malthusian ones
        clause = None
        if n0_class == ZMatrixClass.NONSINGULAR_M and (sys.beta <= 0).all():
            cert = positive_improving_vector(N0)
            if cert is not None:
                clause = _proven(TheoremId.NO_PATCH_EXTINCTION,
                                 margins=[("N0q", N0 @ cert.q, ">0")],
                                 q=cert.q, clause="nonsingular-N0, b <= 0")
        if clause is None and (sys.beta < -TOL).all():
            cert = nonneg_image_vector(N0)
            if cert is not None:
                clause = _proven(TheoremId.NO_PATCH_EXTINCTION,
                                 margins=[("N0q", N0 @ cert.q, ">=0")],
                                 q=cert.q, clause="N0 q >= 0, b < 0")
        verdicts[TheoremId.NO_PATCH_EXTINCTION] = clause or _failed(
            TheoremId.NO_PATCH_EXTINCTION,
            "either N0 nonsingular M with b <= 0, or N0 q >= 0 feasible with b < 0")

    a_minus_diag = np.maximum(0.0, -np.diag(sys.a))
    off = ~np.eye(sys.n, dtype=bool)
    competitive = (sys.mu > a_minus_diag + TOL).all() and (sys.a[off] >= 0).all()
    if not competitive:
        verdicts[TheoremId.COMPETITIVE_EXTINCTION] = _failed(
            TheoremId.COMPETITIVE_EXTINCTION,
            "mu_i > a_ii^- with nonnegative off-diagonal interactions")
    else:
        verdict = None
        if s0 < -TOL:
            cert = positive_improving_vector(M0, ImageSense.STRICTLY_NEGATIVE)
            if cert is not None:
                verdict = _proven(TheoremId.COMPETITIVE_EXTINCTION,
                                  margins=[("M0q", M0 @ cert.q, "<0")],
                                  q=cert.q, s_M0=s0)
        elif abs(s0) <= TOL and is_irreducible(M0):
            _, v = perron_vector(M0)
            verdict = _proven(TheoremId.COMPETITIVE_EXTINCTION,
                              margins=[("M0q", M0 @ v, "<=0")], q=v, s_M0=s0)
        if verdict is None:
            cert = nonpos_image_vector(M0)
            if cert is not None:
                verdict = _proven(TheoremId.COMPETITIVE_EXTINCTION,
                                  margins=[("M0q", M0 @ cert.q, "<=0")],
                                  q=cert.q, s_M0=s0)
        verdicts[TheoremId.COMPETITIVE_EXTINCTION] = verdict or _failed(
            TheoremId.COMPETITIVE_EXTINCTION, "exists q > 0 with M0 q <= 0")

    return verdicts


# ---------------------------------------------------------------------------
# cooperative family
# ---------------------------------------------------------------------------


def classify_cooperative(sys: LVPatchSystem) -> dict:
    """Verdicts for the cooperative persistence/attractivity theorems."""
    ids = (TheoremId.COOP_PERSISTENCE, TheoremId.COOP_GLOBAL_ATTRACTIVITY,
           TheoremId.COOP_POSITIVE_BETA, TheoremId.COOP_THRESHOLD_IRREDUCIBLE)
    if not is_cooperative(sys):
        return {t: _failed(t, "system is cooperative (all a_ij <= 0)") for t in ids}

    dm = derived_matrices(sys)
    M0, N0 = dm.M0, dm.N0
    s0 = spectral_bound(M0)
    flags = []
    verdicts = {}

    v_cert = positive_improving_vector(M0)
    if v_cert is not None:
        verdicts[TheoremId.COOP_PERSISTENCE] = _proven(
            TheoremId.COOP_PERSISTENCE,
            margins=[("M0v", M0 @ v_cert.q, ">0")], v=v_cert.q)
    else:
        verdicts[TheoremId.COOP_PERSISTENCE] = _failed(
            TheoremId.COOP_PERSISTENCE, "exists v > 0 with M0 v > 0")

    n0_nonsingular = classify_z_matrix(N0) == ZMatrixClass.NONSINGULAR_M
    x_star, _ = _interior_equilibria(sys, flags, "cooperative system")

    if v_cert is None:
        verdicts[TheoremId.COOP_GLOBAL_ATTRACTIVITY] = _failed(
            TheoremId.COOP_GLOBAL_ATTRACTIVITY, "exists v > 0 with M0 v > 0")
    elif not n0_nonsingular:
        verdicts[TheoremId.COOP_GLOBAL_ATTRACTIVITY] = _failed(
            TheoremId.COOP_GLOBAL_ATTRACTIVITY, "N0 is a nonsingular M-matrix")
    elif x_star is None:
        verdicts[TheoremId.COOP_GLOBAL_ATTRACTIVITY] = _failed(
            TheoremId.COOP_GLOBAL_ATTRACTIVITY, "a positive equilibrium was found")
    elif not (M0 @ x_star > TOL).all():
        verdicts[TheoremId.COOP_GLOBAL_ATTRACTIVITY] = _failed(
            TheoremId.COOP_GLOBAL_ATTRACTIVITY, "M0 x* > 0")
    else:
        n0x = N0 @ x_star
        if not (n0x > 0).all():
            flags.append("M0 x* > 0 but N0 x* has a nonpositive component; "
                         "equilibrium identity violated")
        q_cert = positive_improving_vector(N0)
        verdicts[TheoremId.COOP_GLOBAL_ATTRACTIVITY] = _proven(
            TheoremId.COOP_GLOBAL_ATTRACTIVITY,
            margins=[("M0x*", M0 @ x_star, ">0"), ("N0x*", n0x, ">0")],
            v=v_cert.q, q=None if q_cert is None else q_cert.q, x_star=x_star)

    if not n0_nonsingular:
        verdicts[TheoremId.COOP_POSITIVE_BETA] = _failed(
            TheoremId.COOP_POSITIVE_BETA, "N0 is a nonsingular M-matrix")
    elif not (sys.beta > TOL).all():
        verdicts[TheoremId.COOP_POSITIVE_BETA] = _failed(
            TheoremId.COOP_POSITIVE_BETA, "beta_i > 0 for all i")
    elif x_star is None:
        verdicts[TheoremId.COOP_POSITIVE_BETA] = _boundary(
            TheoremId.COOP_POSITIVE_BETA,
            "hypotheses hold but no positive equilibrium was located")
    else:
        q_cert = positive_improving_vector(N0)
        verdicts[TheoremId.COOP_POSITIVE_BETA] = _proven(
            TheoremId.COOP_POSITIVE_BETA,
            margins=[("beta", sys.beta.copy(), ">0")],
            q=None if q_cert is None else q_cert.q, x_star=x_star)

    off = ~np.eye(sys.n, dtype=bool)
    self_kernel_only = (sys.a[off] == 0).all()
    c_diag = np.maximum(0.0, -np.diag(sys.a))
    if not self_kernel_only:
        verdicts[TheoremId.COOP_THRESHOLD_IRREDUCIBLE] = _failed(
            TheoremId.COOP_THRESHOLD_IRREDUCIBLE,
            "interaction kernels act on the own patch only (a_ij = 0, i != j)")
    elif not (sys.mu > c_diag + TOL).all():
        verdicts[TheoremId.COOP_THRESHOLD_IRREDUCIBLE] = _failed(
            TheoremId.COOP_THRESHOLD_IRREDUCIBLE, "mu_i > c_i for all i")
    elif not is_irreducible(M0):
        verdicts[TheoremId.COOP_THRESHOLD_IRREDUCIBLE] = _failed(
            TheoremId.COOP_THRESHOLD_IRREDUCIBLE, "M0 is irreducible")
    elif s0 > TOL:
        if x_star is None:
            verdicts[TheoremId.COOP_THRESHOLD_IRREDUCIBLE] = _boundary(
                TheoremId.COOP_THRESHOLD_IRREDUCIBLE,
                "s(M0) > 0 but no positive equilibrium was located")
        else:
            s_per, v_per = perron_vector(M0)
            verdicts[TheoremId.COOP_THRESHOLD_IRREDUCIBLE] = _proven(
                TheoremId.COOP_THRESHOLD_IRREDUCIBLE, outcome="positive_attractor",
                s_M0=s0, v=v_per, x_star=x_star)
    elif s0 < -TOL:
        verdicts[TheoremId.COOP_THRESHOLD_IRREDUCIBLE] = _proven(
            TheoremId.COOP_THRESHOLD_IRREDUCIBLE, outcome="extinction", s_M0=s0)
    else:
        verdicts[TheoremId.COOP_THRESHOLD_IRREDUCIBLE] = _boundary(
            TheoremId.COOP_THRESHOLD_IRREDUCIBLE, "s(M0) within the boundary band")

    verdicts["_flags"] = flags
    return verdicts


# ---------------------------------------------------------------------------
# general family
# ---------------------------------------------------------------------------


def classify_general(sys: LVPatchSystem) -> dict:
    """Verdicts for the general dissipativity / persistence / attractivity results."""
    dm = derived_matrices(sys)
    M0, N0, Nhat = dm.M0, dm.N0, dm.Nhat
    s0 = spectral_bound(M0)
    flags = []
    verdicts = {}

    v_cert = positive_improving_vector(M0)
    n0_nonsingular = classify_z_matrix(N0) == ZMatrixClass.NONSINGULAR_M

    majorant = cooperative_majorant(sys)
    X_star = None
    if v_cert is not None:
        X_star, _ = _interior_equilibria(majorant, flags, "majorant system")
    x_star, _ = _interior_equilibria(sys, flags, "general system")

    # Dissipativity: limsup x_i <= X*_i
    if v_cert is None:
        diss = _failed(TheoremId.DISSIPATIVITY, "exists v > 0 with M0 v > 0")
    elif not n0_nonsingular:
        diss = _failed(TheoremId.DISSIPATIVITY, "N0 is a nonsingular M-matrix")
    elif X_star is None:
        diss = _failed(TheoremId.DISSIPATIVITY,
                       "the majorant system has a positive equilibrium X*")
    elif not (M0 @ X_star > TOL).all():
        diss = _failed(TheoremId.DISSIPATIVITY, "M0 X* > 0")
    else:
        q_cert = positive_improving_vector(N0)
        diss = _proven(TheoremId.DISSIPATIVITY,
                       margins=[("M0X*", M0 @ X_star, ">0")],
                       v=v_cert.q, q=None if q_cert is None else q_cert.q,
                       X_star=X_star)
    verdicts[TheoremId.DISSIPATIVITY] = diss

    if diss.proven:
        verdicts[TheoremId.TOTAL_PERSISTENCE_WEAK] = _proven(
            TheoremId.TOTAL_PERSISTENCE_WEAK,
            margins=[("M0v", M0 @ v_cert.q, ">0")],
            v=v_cert.q, X_star=X_star)
    else:
        verdicts[TheoremId.TOTAL_PERSISTENCE_WEAK] = _failed(
            TheoremId.TOTAL_PERSISTENCE_WEAK,
            "dissipativity-level boundedness with M0 v > 0 feasible")

    if diss.proven and (sys.beta > TOL).all():
        a_plus = np.maximum(0.0, sys.a)
        theta1 = float((sys.beta / (sys.mu + a_plus.sum(axis=1))).min())
        verdicts[TheoremId.TOTAL_PERSISTENCE_UNIFORM] = _proven(
            TheoremId.TOTAL_PERSISTENCE_UNIFORM,
            margins=[("beta", sys.beta.copy(), ">0")],
            v=v_cert.q, theta1=theta1)
    else:
        verdicts[TheoremId.TOTAL_PERSISTENCE_UNIFORM] = _failed(
            TheoremId.TOTAL_PERSISTENCE_UNIFORM,
            "dissipativity hypotheses plus beta_i > 0 for all i")

    # positive equilibrium existence (needs instability of 0 and irreducibility)
    if s0 <= TOL:
        verdicts[TheoremId.POSITIVE_EQ_EXISTS] = (
            _boundary(TheoremId.POSITIVE_EQ_EXISTS, "s(M0) within the boundary band")
            if abs(s0) <= TOL else
            _failed(TheoremId.POSITIVE_EQ_EXISTS, "s(M0) > 0"))
    elif not diss.proven:
        verdicts[TheoremId.POSITIVE_EQ_EXISTS] = _failed(
            TheoremId.POSITIVE_EQ_EXISTS, "the system is dissipative")
    elif not is_irreducible(M0):
        verdicts[TheoremId.POSITIVE_EQ_EXISTS] = _failed(
            TheoremId.POSITIVE_EQ_EXISTS, "M0 is irreducible")
    elif x_star is None:
        verdicts[TheoremId.POSITIVE_EQ_EXISTS] = _boundary(
            TheoremId.POSITIVE_EQ_EXISTS,
            "hypotheses hold but no positive equilibrium was located")
    else:
        verdicts[TheoremId.POSITIVE_EQ_EXISTS] = _proven(
            TheoremId.POSITIVE_EQ_EXISTS, s_M0=s0, x_star=x_star)

    if not diss.proven:
        patch = _failed(TheoremId.PATCH_PERSISTENCE, "dissipativity hypotheses hold")
    elif not (Nhat @ X_star > TOL).all():
        patch = _failed(TheoremId.PATCH_PERSISTENCE, "Nhat X* > 0")
    else:
        patch = _proven(TheoremId.PATCH_PERSISTENCE,
                        margins=[("NhatX*", Nhat @ X_star, ">0")],
                        v=v_cert.q, X_star=X_star,
                        x_star=x_star if x_star is not None else None)
    verdicts[TheoremId.PATCH_PERSISTENCE] = patch

    if not patch.proven:
        verdicts[TheoremId.POSITIVE_EQ_ATTRACTIVE] = _failed(
            TheoremId.POSITIVE_EQ_ATTRACTIVE, "patch-persistence hypotheses hold")
    elif x_star is None:
        verdicts[TheoremId.POSITIVE_EQ_ATTRACTIVE] = _failed(
            TheoremId.POSITIVE_EQ_ATTRACTIVE, "a positive equilibrium was found")
    elif not (Nhat @ x_star > TOL).all():
        verdicts[TheoremId.POSITIVE_EQ_ATTRACTIVE] = _failed(
            TheoremId.POSITIVE_EQ_ATTRACTIVE, "Nhat x* > 0")
    else:
        verdicts[TheoremId.POSITIVE_EQ_ATTRACTIVE] = _proven(
            TheoremId.POSITIVE_EQ_ATTRACTIVE,
            margins=[("Nhatx*", Nhat @ x_star, ">0")],
            v=v_cert.q, X_star=X_star, x_star=x_star)

    off = ~np.eye(sys.n, dtype=bool)
    if not n0_nonsingular:
        pda = _failed(TheoremId.POSITIVE_DISPERSAL_ATTRACTIVE,
                      "N0 is a nonsingular M-matrix")
    elif not (sys.beta > TOL).all():
        pda = _failed(TheoremId.POSITIVE_DISPERSAL_ATTRACTIVE,
                      "beta_i > 0 for all i")
    elif sys.n > 1 and not (sys.d[off] > TOL).all():
        pda = _failed(TheoremId.POSITIVE_DISPERSAL_ATTRACTIVE,
                      "d_ij > 0 for all i != j")
    elif x_star is None:
        pda = _failed(TheoremId.POSITIVE_DISPERSAL_ATTRACTIVE,
                      "a positive equilibrium was found")
    elif not (Nhat @ x_star > TOL).all():
        pda = _failed(TheoremId.POSITIVE_DISPERSAL_ATTRACTIVE, "Nhat x* > 0")
    else:
        pda = _proven(TheoremId.POSITIVE_DISPERSAL_ATTRACTIVE,
                      margins=[("Nhatx*", Nhat @ x_star, ">0"),
                               ("beta", sys.beta.copy(), ">0")],
                      x_star=x_star)
    verdicts[TheoremId.POSITIVE_DISPERSAL_ATTRACTIVE] = pda

    verdicts[TheoremId.COEFFICIENT_CRITERION] = _coefficient_criterion(
        sys, x_star, X_star)
    verdicts["_flags"] = flags
    return verdicts


def _coefficient_criterion(sys, x_star, X_star):
    theorem = TheoremId.COEFFICIENT_CRITERION
    a_minus = np.maximum(0.0, -sys.a)
    a_plus = np.maximum(0.0, sys.a)
    denom = sys.mu - a_minus.sum(axis=1)
    if not (denom > TOL).all():
        return _failed(theorem, "mu_i > sum_j a_ij^- for all i")
    M = coefficient_bound(sys)
    if M is None or M <= TOL:
        # the bound dominates the positive equilibrium components, so a
        # nonpositive value means the hypotheses cannot hold in substance
        return _failed(theorem, "coefficient bound M is positive")

    d_offsum = sys.d.sum(axis=1)
    a_plus_diag = np.diag(a_plus)
    a_plus_rowsum = a_plus.sum(axis=1)
    off = ~np.eye(sys.n, dtype=bool)
    slack = 1e-12 * max(1.0, M)

    def tier(factor):
        if not (sys.beta >= factor * M * a_plus_diag - slack).all():
            return False, "beta_i >= %gM a_ii^+" % factor
        if sys.n > 1 and not (
            sys.d[off] >= factor * M * a_plus[off] - slack
        ).all():
            return False, "d_ij >= %gM a_ij^+" % factor
        if not (sys.beta + d_offsum > factor * M * a_plus_rowsum + TOL).all():
            return False, "beta_i + sum d_ij > %gM sum_j a_ij^+" % factor
        return True, None

    pers_ok, pers_fail = tier(1.0)
    attr_ok, _ = tier(2.0)
    if not pers_ok:
        return _failed(theorem, pers_fail)
    if attr_ok:
        return _proven(theorem, outcome="attractivity", M_const=M,
                       x_star=x_star, X_star=X_star,
                       tiers={"persistence": True, "attractivity": True})
    return _proven(theorem, outcome="persistence", M_const=M, X_star=X_star,
                   tiers={"persistence": True, "attractivity": False})


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

_EXTINCTION_FAMILY = (TheoremId.ZERO_GAS, TheoremId.EXTINCTION_ATTRACTIVE,
                      TheoremId.NO_PATCH_EXTINCTION, TheoremId.COMPETITIVE_EXTINCTION)
_ATTRACTIVITY_FAMILY = (TheoremId.COOP_GLOBAL_ATTRACTIVITY,
                        TheoremId.COOP_POSITIVE_BETA,
                        TheoremId.POSITIVE_EQ_ATTRACTIVE,
                        TheoremId.POSITIVE_DISPERSAL_ATTRACTIVE)
_PERSISTENCE_FAMILY = (TheoremId.COOP_PERSISTENCE, TheoremId.PATCH_PERSISTENCE,
                       TheoremId.TOTAL_PERSISTENCE_UNIFORM,
                       TheoremId.TOTAL_PERSISTENCE_WEAK)


def _relation_holds(values, relation):
    v = np.asarray(values, dtype=float)
    return {
        ">0": (v > 0).all(),
        ">=0": (v >= -1e-12).all(),
        "<0": (v < 0).all(),
        "<=0": (v <= 1e-12).all(),
    }[relation]


def _check_certificates(verdicts):
    for verdict in verdicts.values():
        if not isinstance(verdict, TheoremVerdict) or not verdict.proven:
            continue
        for name, values, relation in verdict.margins:
            if not _relation_holds(values, relation):
                raise LVPatchError(
                    f"{verdict.theorem.value}: certificate margin {name} "
                    f"violates {relation}")


def classify(sys: LVPatchSystem) -> ClassificationReport:
    """Evaluate every theorem against the system and assemble the summary.

    The summary follows a fixed precedence: extinction, then global
    attractivity of a positive equilibrium, then persistence, then
    instability of zero, else fully inconclusive.
    """
    verdicts = {}
    flags = []
    for group in (classify_trivial_equilibrium(sys), classify_cooperative(sys),
                  classify_general(sys)):
        flags.extend(group.pop("_flags", []))
        verdicts.update(group)

    _check_certificates(verdicts)

    def proven(tid):
        return verdicts[tid].proven

    threshold = verdicts[TheoremId.COOP_THRESHOLD_IRREDUCIBLE]
    coeff = verdicts[TheoremId.COEFFICIENT_CRITERION]

    extinction_sources = [t for t in _EXTINCTION_FAMILY if proven(t)]
    if threshold.proven and threshold.outcome == "extinction":
        extinction_sources.append(TheoremId.COOP_THRESHOLD_IRREDUCIBLE)
    attractivity_sources = [t for t in _ATTRACTIVITY_FAMILY if proven(t)]
    if threshold.proven and threshold.outcome == "positive_attractor":
        attractivity_sources.append(TheoremId.COOP_THRESHOLD_IRREDUCIBLE)
    if coeff.proven and coeff.outcome == "attractivity":
        attractivity_sources.append(TheoremId.COEFFICIENT_CRITERION)
    persistence_sources = [t for t in _PERSISTENCE_FAMILY if proven(t)]
    if coeff.proven and coeff.outcome == "persistence":
        persistence_sources.append(TheoremId.COEFFICIENT_CRITERION)

    # consistency invariants asserted on every report
    if extinction_sources and attractivity_sources:
        raise LVPatchError("extinction and positive-equilibrium attractivity "
                           "were both proven; report is inconsistent")
    if proven(TheoremId.EXTINCTION_ATTRACTIVE) and (
            proven(TheoremId.COOP_PERSISTENCE) or proven(TheoremId.PATCH_PERSISTENCE)):
        raise LVPatchError("extinction and persistence were both proven")
    if proven(TheoremId.COOP_GLOBAL_ATTRACTIVITY) and not proven(TheoremId.COOP_PERSISTENCE):
        raise LVPatchError("CoopGlobalAttractivity proven without CoopPersistence")
    if proven(TheoremId.POSITIVE_EQ_ATTRACTIVE) and not proven(TheoremId.PATCH_PERSISTENCE):
        raise LVPatchError("PositiveEqAttractive proven without PatchPersistence")
    if proven(TheoremId.PATCH_PERSISTENCE) and not proven(TheoremId.DISSIPATIVITY):
        raise LVPatchError("PatchPersistence proven without Dissipativity")
    if coeff.proven and coeff.outcome == "attractivity" and not coeff.certificates[
            "tiers"]["persistence"]:
        raise LVPatchError("coefficient criterion attractivity tier without "
                           "its persistence tier")

    if extinction_sources:
        summary = Summary.EXTINCTION_GUARANTEED
        sources = extinction_sources
    elif attractivity_sources:
        summary = Summary.POSITIVE_EQUILIBRIUM_GLOBALLY_ATTRACTIVE
        sources = attractivity_sources
    elif persistence_sources:
        summary = Summary.PERSISTENT_NO_ATTRACTIVITY_PROOF
        sources = persistence_sources
    elif proven(TheoremId.ZERO_INSTABILITY):
        summary = Summary.ZERO_UNSTABLE_NO_FURTHER_PROOF
        sources = [TheoremId.ZERO_INSTABILITY]
    else:
        summary = Summary.FULLY_INCONCLUSIVE
        sources = []

    return ClassificationReport(
        verdicts=verdicts,
        summary=summary,
        summary_sources=sources,
        system_fingerprint=sys.fingerprint(),
        s_M0=spectral_bound(derived_matrices(sys).M0),
        flags=flags,
    )


# ---------------------------------------------------------------------------
# verification by simulation
# ---------------------------------------------------------------------------


@dataclass
class VerifyThresholds:
    extinction_threshold: float = 1e-5
    attract_tolerance: float = 1e-4
    dissipativity_slack: float = 1e-4
    floor_fraction: float = 0.9
    weak_margin: float = 1e-6
    window_fraction: float = 0.2


@dataclass
class TrialResult:
    history_name: str
    passed: bool
    checks: list = field(default_factory=list)  # (check, ok, detail)
    error: str | None = None
    csv_path: str | None = None


@dataclass
class VerificationReport:
    summary: Summary
    trials: list = field(default_factory=list)
    all_passed: bool = True
    numerical_failure: bool = False
    notes: list = field(default_factory=list)


def _trial_histories(n, trials):
    """Deterministic admissible histories: constants spanning [0.1, 5] plus
    one oscillatory history."""
    out = []
    n_const = max(trials - 1, 1)
    levels = np.geomspace(0.1, 5.0, n_const)
    for level in levels:
        out.append((f"const-{level:.4g}",
                    HistoryFunction.constant(np.full(n, level))))
    if trials > 1:
        out.append(("oscillatory", HistoryFunction.oscillatory(
            np.full(n, 1.0), np.full(n, 0.5), np.full(n, 1.0), horizon=10.0)))
    return out[:trials]


def _attractor_certificate(report):
    order = (TheoremId.COOP_GLOBAL_ATTRACTIVITY, TheoremId.COOP_POSITIVE_BETA,
             TheoremId.COOP_THRESHOLD_IRREDUCIBLE,
             TheoremId.POSITIVE_EQ_ATTRACTIVE,
             TheoremId.POSITIVE_DISPERSAL_ATTRACTIVE,
             TheoremId.COEFFICIENT_CRITERION)
    for tid in order:
        verdict = report.verdicts[tid]
        if verdict.proven and verdict.certificates.get("x_star") is not None:
            return verdict.certificates["x_star"]
    return None


def verify_prediction(sys: LVPatchSystem, report: ClassificationReport,
                      opts: SimOptions, trials: int = 5,
                      thresholds: VerifyThresholds | None = None,
                      output_dir=None) -> VerificationReport:
    """Simulate deterministic trial histories and check them against the
    proven summary; refuses reports produced for a different system."""
    if report.system_fingerprint != sys.fingerprint():
        raise LVPatchError("classification report does not match this system")
    th = thresholds or VerifyThresholds()
    result = VerificationReport(summary=report.summary)

    if report.summary in (Summary.FULLY_INCONCLUSIVE,
                          Summary.ZERO_UNSTABLE_NO_FURTHER_PROOF):
        result.notes.append("nothing to verify: no global conclusion was proven")
        return result

    x_star = _attractor_certificate(report)
    diss = report.verdicts[TheoremId.DISSIPATIVITY]
    X_star = diss.certificates.get("X_star") if diss.proven else None
    uniform = report.verdicts[TheoremId.TOTAL_PERSISTENCE_UNIFORM]
    theta1 = uniform.certificates.get("theta1") if uniform.proven else None
    weak = report.verdicts[TheoremId.TOTAL_PERSISTENCE_WEAK].proven
    patchwise = (report.verdicts[TheoremId.PATCH_PERSISTENCE].proven
                 or report.verdicts[TheoremId.COOP_PERSISTENCE].proven)

    for name, phi in _trial_histories(sys.n, trials):
        trial = TrialResult(history_name=name, passed=True)
        try:
            traj = simulate(sys, phi, opts)
        except NumericalFailure as exc:
            trial.passed = False
            trial.error = str(exc)
            result.numerical_failure = True
            result.all_passed = False
            result.trials.append(trial)
            continue
        window = asymptotic_estimate(traj, th.window_fraction)

        if output_dir is not None:
            from .cli import write_trajectory_csv
            import os

            path = os.path.join(str(output_dir), f"trial-{name}.csv")
            write_trajectory_csv(traj, path)
            trial.csv_path = path

        def record(check, ok, detail):
            trial.checks.append((check, bool(ok), detail))
            if not ok:
                trial.passed = False

        if report.summary == Summary.EXTINCTION_GUARANTEED:
            sup = float(window.sup.max())
            record("extinction", sup < th.extinction_threshold,
                   f"trailing sup {sup:.3e} vs {th.extinction_threshold:.1e}")
        if report.summary == Summary.POSITIVE_EQUILIBRIUM_GLOBALLY_ATTRACTIVE:
            if x_star is None:
                record("attractivity", False, "no equilibrium certificate")
            else:
                dist = float(max(np.abs(window.sup - x_star).max(),
                                 np.abs(window.inf - x_star).max()))
                record("attractivity", dist < th.attract_tolerance,
                       f"trailing distance {dist:.3e} vs {th.attract_tolerance:.1e}")
        if X_star is not None:
            excess = float((window.sup - X_star).max())
            record("dissipativity", excess <= th.dissipativity_slack,
                   f"sup - X* max {excess:.3e}")
        if theta1 is not None:
            floor = float(window.inf.sum())
            record("total-persistence-uniform",
                   floor > th.floor_fraction * theta1,
                   f"sum of trailing inf {floor:.3e} vs 0.9*theta1 "
                   f"{th.floor_fraction * theta1:.3e}")
        elif weak:
            i0 = int(window.t_start // traj.h)
            sup_sum = float(traj.states[i0:].sum(axis=1).max())
            record("total-persistence-weak", sup_sum > th.weak_margin,
                   f"trailing sup of total {sup_sum:.3e}")
        if patchwise:
            record("patch-persistence", float(window.inf.min()) > th.weak_margin,
                   f"trailing inf {float(window.inf.min()):.3e}")

        if not trial.passed:
            result.all_passed = False
        result.trials.append(trial)
    return result
