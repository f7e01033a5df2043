"""Perturbed monopole residuals, a-priori bounds, and curvature inequalities.

The perturbed equations couple a U(1) connection A and a spinor Phi through

    D_A Phi = 0,
    sqrt(8) iF_A^+ = -beta(|sigma(Phi)|) (K_- + eps) sigma(Phi) + K_+ omega_hat,

with K the pointwise curvature weight assembled from (theta, curvature,
lambda).  This module evaluates residuals of candidate pairs, checks the
two a-priori bounds every near-solution must satisfy, and evaluates both
sides of the linear and quadratic curvature inequalities against supplied
first-Chern data.

Chern data is always user input, either a plain number or a closed 2-form
representative: a single periodic chart cannot carry a nontrivial
determinant line bundle, so topology enters as flux bookkeeping, which is
exactly what the inequalities consume.

A small catalog of constant-curvature product surfaces evaluates the same
inequalities in closed form with no grid, as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .curvature import CurvatureBundle, MetricField, build_metric
from .grid import GridSpec
from .rayleigh import KField, ThetaField, _scalar_dirichlet, beta
from .selfdual import (
    SelfDualField,
    TwoFormField,
    d_two_form,
    default_harmonic_tol,
    embed,
    harmonic_selfdual_basis,
    hodge_energy_and_grad,
    hodge_rayleigh,
    project,
    sd_dirichlet_energy_and_grad,
    sd_l2_norm,
    wedge_integral,
)
from .spinc import SpinorField, U1Connection, dirac, gauge_transform, sigma_map

__all__ = [
    "PerturbationSpec",
    "MonopoleConfig",
    "PswResidual",
    "BoundReport",
    "InequalityReport",
    "psw_residual",
    "general_psw_residual",
    "reduction_spec",
    "check_curvature_bound",
    "check_phi_l4_bound",
    "chern_pairing",
    "lebrun_linear",
    "lebrun_quadratic",
    "key_inequality_check",
    "reformulated_inequality_check",
    "chain_consistency",
    "CatalogSurface",
    "CATALOG",
    "catalog_linear",
    "catalog_quadratic",
    "catalog_delta_sweep",
    "reducible_config",
    "constant_config",
    "gauge_trick_config",
    "rotating_config",
]

SQRT8 = math.sqrt(8.0)


# ---------------------------------------------------------------------------
# configuration types


@dataclass(frozen=True)
class PerturbationSpec:
    """Right-hand-side recipe for the curvature equation.

    variant "simple" uses the raw curvature coefficient (2R/3 + 2w)_- in
    place of K_-; "full" uses K with a bounded self-dual shift omega_hat;
    "general" replaces beta(t)(K_- + eps) by a caller-supplied profile
    F(x, t), vectorized as F(kminus_values, t) -> array, together with an
    inhomogeneity eta and the admissibility parameters (kappa, t_switch,
    delta).  Admissibility of the general profile is sampled on a t-grid
    up to t_max at residual time, since it depends on K.
    """

    variant: str
    eps: float | None = None
    omega_hat: SelfDualField | None = None
    F: Callable | None = None
    eta: SelfDualField | None = None
    kappa: float | None = None
    t_switch: float | None = None
    delta: float | None = None
    t_max: float | None = None
    n_samples: int = 33

    def __post_init__(self):
        if self.variant not in ("simple", "full", "general"):
            raise ValueError(f"unknown perturbation variant {self.variant!r}")
        if self.variant in ("simple", "full"):
            if self.eps is None or not self.eps > 0:
                raise ValueError("psw variants need eps > 0")
            if self.F is not None or self.eta is not None:
                raise ValueError("profile F / eta belong to the general variant")
            if self.variant == "simple" and self.omega_hat is not None:
                raise ValueError("the simple variant has no omega_hat term")
            if self.variant == "full" and self.omega_hat is not None:
                sup = float(np.max(self.omega_hat.norm()))
                if sup > 1.0 + 1e-12:
                    raise ValueError(f"omega_hat must satisfy sup |omega_hat| <= 1, got {sup}")
        else:
            if self.F is None or self.eta is None:
                raise ValueError("general variant needs the profile F and eta")
            if self.t_switch is None or self.delta is None:
                raise ValueError("general variant needs t_switch and delta")
            if self.omega_hat is not None:
                raise ValueError("omega_hat belongs to the psw variants")


@dataclass(frozen=True)
class MonopoleConfig:
    """A candidate pair (A, Phi) with its geometric background."""

    conn: U1Connection
    phi: SpinorField
    metric: MetricField
    curv: CurvatureBundle | None = None
    theta: ThetaField | None = None

    def __post_init__(self):
        grid = self.metric.grid
        if not (self.conn.grid.compatible(grid) and self.phi.grid.compatible(grid)):
            raise ValueError("connection, spinor, and metric live on different grids")


@dataclass(frozen=True)
class PswResidual:
    r1: SpinorField
    r2: SelfDualField
    norms: dict


@dataclass(frozen=True)
class BoundReport:
    kind: str
    lhs: float
    rhs: float
    margin: float
    applicable: bool
    gate: float
    residual_l2: float
    notes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class InequalityReport:
    """Two sides of one inequality, oriented lhs <= rhs, margin = rhs - lhs."""

    kind: str
    lhs: float
    rhs: float
    margin: float
    lhs_formula: str
    rhs_formula: str
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (np.isfinite(self.lhs) and np.isfinite(self.rhs)):
            raise ValueError("inequality sides must be finite")


# ---------------------------------------------------------------------------
# residuals


def _residual_norms(r1: np.ndarray, r2: np.ndarray, m: MetricField) -> dict:
    cell = m.grid.cell_volume
    n1 = np.sum(np.abs(r1) ** 2, axis=-1)
    n2 = np.sum(r2**2, axis=-1)
    return {
        "r1_l2": float(np.sqrt(np.sum(n1 * m.vol) * cell)),
        "r1_linf": float(np.sqrt(np.max(n1))),
        "r2_l2": float(np.sqrt(np.sum(n2 * m.vol) * cell)),
        "r2_linf": float(np.sqrt(np.max(n2))),
    }


def psw_residual(cfg: MonopoleConfig, pert: PerturbationSpec, K: KField) -> PswResidual:
    """Residual of the perturbed equations for the simple/full variants.

    r1 = D_A Phi and r2 = sqrt(8) iF_A^+ + beta(|sigma|)(K_- + eps) sigma
    - K_+ omega_hat; the simple variant swaps K_- for the raw coefficient
    ((2/3) R + 2 w)_- and drops omega_hat.
    """
    if pert.variant == "general":
        raise ValueError("use general_psw_residual for the general variant")
    if not K.grid.compatible(cfg.metric.grid):
        raise ValueError("K lives on a different grid")
    r1 = dirac(cfg.phi, cfg.conn, cfg.metric)
    sigma = sigma_map(cfg.phi)
    t = sigma.norm()
    if pert.variant == "simple":
        if cfg.curv is None:
            raise ValueError("the simple variant needs the curvature bundle")
        raw = (2.0 / 3.0) * cfg.curv.scalar.values + 2.0 * cfg.curv.w.values
        coef = beta(t) * (np.maximum(-raw, 0.0) + pert.eps)
        r2 = SQRT8 * cfg.conn.curv_plus.comps + coef[..., None] * sigma.comps
    else:
        coef = beta(t) * (K.kminus.values + pert.eps)
        r2 = SQRT8 * cfg.conn.curv_plus.comps + coef[..., None] * sigma.comps
        if pert.omega_hat is not None:
            r2 = r2 - K.kplus.values[..., None] * pert.omega_hat.comps
    r2f = SelfDualField(cfg.metric.grid, r2)
    return PswResidual(
        r1, r2f, _residual_norms(r1.comps, r2, cfg.metric)
    )


def general_psw_residual(
    cfg: MonopoleConfig, pert: PerturbationSpec, K: KField
) -> PswResidual:
    """Residual for a general admissible curvature profile F.

    Admissibility is sampled on a t-grid: kappa >= t F(x,t) >= 0 for all
    t, and t F(x,t) >= K_-(x) + delta for t >= t_switch.  The shift must
    obey |eta(x)| <= K_+(x) pointwise.  Violations raise with the first
    offending sample points listed.
    """
    if pert.variant != "general":
        raise ValueError("general_psw_residual needs a general-variant spec")
    if not K.grid.compatible(cfg.metric.grid):
        raise ValueError("K lives on a different grid")
    kminus = K.kminus.values
    t_hi = pert.t_max if pert.t_max is not None else max(10.0, 2.0 * pert.t_switch)
    bad = []
    for t in np.linspace(0.0, t_hi, pert.n_samples):
        tf = t * np.asarray(pert.F(kminus, t), dtype=float)
        if np.any(tf < -1e-12) or (pert.kappa is not None and np.any(tf > pert.kappa + 1e-12)):
            idx = np.unravel_index(int(np.argmax(np.abs(tf - np.clip(tf, 0.0, np.inf)))), tf.shape)
            bad.append(f"t={t:.4g} node={idx}: t*F={tf[idx]:.4g} outside [0, kappa]")
        if t >= pert.t_switch:
            gap = tf - (kminus + pert.delta)
            if np.any(gap < -1e-12):
                idx = np.unravel_index(int(np.argmin(gap)), gap.shape)
                bad.append(
                    f"t={t:.4g} node={idx}: t*F={tf[idx]:.4g} < K_- + delta = "
                    f"{kminus[idx] + pert.delta:.4g}"
                )
        if len(bad) >= 5:
            break
    eta_excess = pert.eta.norm() - K.kplus.values
    if np.any(eta_excess > 1e-12):
        idx = np.unravel_index(int(np.argmax(eta_excess)), eta_excess.shape)
        bad.append(f"node={idx}: |eta|={pert.eta.norm()[idx]:.4g} > K_+={K.kplus.values[idx]:.4g}")
    if bad:
        raise ValueError("inadmissible perturbation profile:\n  " + "\n  ".join(bad[:5]))

    r1 = dirac(cfg.phi, cfg.conn, cfg.metric)
    sigma = sigma_map(cfg.phi)
    coef = np.asarray(pert.F(kminus, sigma.norm()), dtype=float)
    r2 = SQRT8 * cfg.conn.curv_plus.comps + coef[..., None] * sigma.comps - pert.eta.comps
    r2f = SelfDualField(cfg.metric.grid, r2)
    return PswResidual(
        r1, r2f, _residual_norms(r1.comps, r2, cfg.metric)
    )


def reduction_spec(full: PerturbationSpec, K: KField) -> PerturbationSpec:
    """The general-variant spec that reproduces a full psw spec exactly."""
    if full.variant != "full":
        raise ValueError("reduction starts from a full psw spec")
    eps = full.eps
    if full.omega_hat is None:
        eta = SelfDualField(K.grid, np.zeros(K.grid.dims + (3,)))
    else:
        eta = SelfDualField(K.grid, K.kplus.values[..., None] * full.omega_hat.comps)
    kmax = float(np.max(K.kminus.values))
    return PerturbationSpec(
        variant="general",
        F=lambda kminus, t: beta(t) * (kminus + eps),
        eta=eta,
        kappa=kmax + eps,
        t_switch=1.0,
        delta=eps / 2.0,
        t_max=10.0,
    )


# ---------------------------------------------------------------------------
# a-priori bounds


def _volume(m: MetricField) -> float:
    return float(np.sum(m.vol) * m.grid.cell_volume)


def _gate_scale(cfg: MonopoleConfig, K: KField, eps: float) -> float:
    f_l2 = SQRT8 * sd_l2_norm(cfg.conn.curv_plus, cfg.metric)
    s_l2 = sd_l2_norm(sigma_map(cfg.phi), cfg.metric) if np.any(cfg.phi.comps) else 0.0
    return max(1.0, f_l2, (K.max_norm() + eps) * s_l2)


def check_curvature_bound(
    cfg: MonopoleConfig,
    K: KField,
    eps: float,
    residual: PswResidual | None = None,
    gate: float | None = None,
) -> BoundReport:
    """sup-norm bound on the self-dual curvature of a near-solution.

    margin = (||K||_inf + eps)/sqrt(8) - ||F_A^+||_inf.  The bound is a
    statement about solutions, so the report is marked non-applicable
    when the residual exceeds the gate (default 1e-6 times a config
    scale); the margin is still computed for inspection.
    """
    if residual is None:
        residual = psw_residual(cfg, PerturbationSpec("full", eps=eps), K)
    if gate is None:
        gate = 1e-6 * _gate_scale(cfg, K, eps)
    res_l2 = max(residual.norms["r1_l2"], residual.norms["r2_l2"])
    lhs = float(np.max(cfg.conn.curv_plus.norm()))
    rhs = (K.max_norm() + eps) / SQRT8
    return BoundReport(
        kind="curvature-sup",
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
        applicable=bool(res_l2 <= gate),
        gate=float(gate),
        residual_l2=res_l2,
        notes={"K_inf": K.max_norm(), "eps": eps},
    )


def check_phi_l4_bound(
    cfg: MonopoleConfig,
    K: KField,
    eps: float,
    residual: PswResidual | None = None,
    gate: float | None = None,
) -> BoundReport:
    """L4 spinor bound: integral |Phi|^4 <= 8 (1 + max K_- / eps) Vol."""
    if residual is None:
        residual = psw_residual(cfg, PerturbationSpec("full", eps=eps), K)
    if gate is None:
        gate = 1e-6 * _gate_scale(cfg, K, eps)
    res_l2 = max(residual.norms["r1_l2"], residual.norms["r2_l2"])
    m = cfg.metric
    phi2 = np.sum(np.abs(cfg.phi.comps) ** 2, axis=-1)
    lhs = float(np.sum(phi2**2 * m.vol) * m.grid.cell_volume)
    km = float(np.max(K.kminus.values))
    rhs = 8.0 * (1.0 + km / eps) * _volume(m)
    return BoundReport(
        kind="phi-l4",
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
        applicable=bool(res_l2 <= gate),
        gate=float(gate),
        residual_l2=res_l2,
        notes={"max_kminus": km, "eps": eps, "volume": _volume(m)},
    )


# ---------------------------------------------------------------------------
# curvature inequalities


def chern_pairing(
    f_rep: TwoFormField,
    omega: SelfDualField,
    m: MetricField,
    closed_tol: float = 1e-8,
    harmonic_tol: float | None = None,
    allow_nonharmonic: bool = False,
) -> float:
    """integral (F_rep / 2 pi) wedge omega for a closed representative.

    The wedge pairing is metric-free, so this is the pairing of the flux
    class with [omega] up to quadrature; exactness of the discrete d
    makes it insensitive to adding d(alpha) at stencil accuracy.
    """
    df = d_two_form(f_rep)
    dn = float(np.max(np.abs(df.comps)))
    scale = 1.0 + float(np.max(np.abs(f_rep.comps)))
    if dn > closed_tol * scale:
        raise ValueError(f"representative is not closed: ||dF|| = {dn:.3e}")
    if not allow_nonharmonic:
        tol = harmonic_tol if harmonic_tol is not None else default_harmonic_tol(m)
        q = hodge_rayleigh(omega, m)
        if q > tol:
            raise ValueError(f"omega is not harmonic: quotient {q:.3e} > {tol:.3e}")
    return wedge_integral(f_rep, embed(omega, m)) / (2.0 * np.pi)


def lebrun_linear(
    omega: SelfDualField,
    m: MetricField,
    *,
    kfield: KField | None = None,
    delta: float | None = None,
    curv: CurvatureBundle | None = None,
    c1: float | TwoFormField = 0.0,
    harmonic_tol: float | None = None,
    allow_nonharmonic: bool = False,
) -> InequalityReport:
    """Linear curvature inequality against the Chern pairing.

    Either pass kfield (full weight, lhs = integral K |omega|/sqrt(2))
    or (delta, curv) for the one-parameter family with integrand
    ((1 - delta/3) R + 2 delta w) |omega|/sqrt(2).  rhs = 4 pi c1.[omega]
    with c1 given as a number or a closed flux representative.
    """
    if (kfield is None) == (delta is None):
        raise ValueError("pass exactly one of kfield or (delta, curv)")
    tol = harmonic_tol if harmonic_tol is not None else default_harmonic_tol(m)
    q = hodge_rayleigh(omega, m)
    if q > tol and not allow_nonharmonic:
        raise ValueError(f"omega is not harmonic: quotient {q:.3e} > {tol:.3e}")
    if kfield is not None:
        weight = kfield.k.values
        lhs_formula = "integral K |omega|/sqrt(2) dmu"
        notes = {"lambda": kfield.lam}
    else:
        if curv is None:
            raise ValueError("delta mode needs the curvature bundle")
        weight = (1.0 - delta / 3.0) * curv.scalar.values + 2.0 * delta * curv.w.values
        lhs_formula = "integral ((1-delta/3) R + 2 delta w) |omega|/sqrt(2) dmu"
        notes = {"delta": delta}
    lhs = float(np.sum(weight * omega.norm() * m.vol) * m.grid.cell_volume) / math.sqrt(2.0)
    if isinstance(c1, TwoFormField):
        pairing = chern_pairing(
            c1, omega, m, harmonic_tol=tol, allow_nonharmonic=allow_nonharmonic
        )
    else:
        pairing = float(c1)
    rhs = 4.0 * np.pi * pairing
    notes["harmonic_quotient"] = q
    notes["c1_dot_omega"] = pairing
    return InequalityReport(
        kind="lebrun-linear",
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
        lhs_formula=lhs_formula,
        rhs_formula="4 pi c1.[omega]",
        notes=notes,
    )


def _c1plus_sq_from_rep(f_rep: TwoFormField, m: MetricField) -> tuple[float, dict]:
    """(c1^+)^2 via projection of the flux class onto harmonic self-duals."""
    df = d_two_form(f_rep)
    dn = float(np.max(np.abs(df.comps)))
    if dn > 1e-8 * (1.0 + float(np.max(np.abs(f_rep.comps)))):
        raise ValueError(f"representative is not closed: ||dF|| = {dn:.3e}")
    basis = harmonic_selfdual_basis(m)
    cell = m.grid.cell_volume
    sd = project(TwoFormField(f_rep.grid, f_rep.comps / (2.0 * np.pi)), m)
    coeffs = [
        float(np.sum(np.sum(sd.comps * h.comps, axis=-1) * m.vol) * cell) for h in basis
    ]
    c1sq = float(sum(c * c for c in coeffs))
    return c1sq, {"harmonic_coefficients": coeffs, "b_plus": len(basis)}


def lebrun_quadratic(
    kfield: KField,
    m: MetricField,
    *,
    c1plus_sq: float | None = None,
    f_rep: TwoFormField | None = None,
) -> InequalityReport:
    """Quadratic inequality 32 pi^2 (c1^+)^2 <= integral K_-^2 dmu."""
    if (c1plus_sq is None) == (f_rep is None):
        raise ValueError("pass exactly one of c1plus_sq or f_rep")
    notes = {}
    if f_rep is not None:
        c1plus_sq, notes = _c1plus_sq_from_rep(f_rep, m)
    lhs = 32.0 * np.pi**2 * float(c1plus_sq)
    rhs = float(np.sum(kfield.kminus.values ** 2 * m.vol) * m.grid.cell_volume)
    notes["c1plus_sq"] = float(c1plus_sq)
    return InequalityReport(
        kind="lebrun-quadratic",
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
        lhs_formula="32 pi^2 (c1^+)^2",
        rhs_formula="integral K_-^2 dmu",
        notes=notes,
    )


# ---------------------------------------------------------------------------
# the key inequality


def _dirac_cubic(cfg: MonopoleConfig) -> float:
    """(1/2) integral Re (D_A Phi, D_A(|Phi|^2 Phi)) dmu."""
    m = cfg.metric
    d1v = dirac(cfg.phi, cfg.conn, m).comps
    phi2 = np.sum(np.abs(cfg.phi.comps) ** 2, axis=-1)
    cubic = SpinorField(m.grid, phi2[..., None] * cfg.phi.comps)
    d2v = dirac(cubic, cfg.conn, m).comps
    pair = np.sum(np.real(np.conj(d1v) * d2v), axis=-1)
    return 0.5 * float(np.sum(pair * m.vol) * m.grid.cell_volume)


def _f_sigma_term(cfg: MonopoleConfig) -> float:
    """integral (sqrt(8) iF_A^+, |sigma| sigma) dmu."""
    m = cfg.metric
    sigma = sigma_map(cfg.phi)
    pair = np.sum(cfg.conn.curv_plus.comps * sigma.comps, axis=-1) * sigma.norm()
    return SQRT8 * float(np.sum(pair * m.vol) * m.grid.cell_volume)


def key_inequality_check(cfg: MonopoleConfig, theta: ThetaField) -> InequalityReport:
    """Gradient-side versus curvature-side of the pivotal inequality.

    lhs is the quotient numerator at sigma = sigma(Phi) (smooth modulus,
    no smoothing needed); rhs collects the curvature weight, the coupling
    to iF_A^+, and half the cubic Dirac pairing.
    """
    if cfg.curv is None:
        raise ValueError("the key inequality needs the curvature bundle")
    m = cfg.metric
    cell = m.grid.cell_volume
    sigma = sigma_map(cfg.phi)
    comps = sigma.comps
    e1, _ = hodge_energy_and_grad(theta.s[..., None] * comps, m)
    e2, _ = sd_dirichlet_energy_and_grad(theta.c[..., None] * comps, m)
    e3, _ = _scalar_dirichlet(sigma.norm(), m)
    lhs = e1 + e2 + 2.0 * e3

    s2 = theta.s**2
    weight = (
        (1.0 - s2 / 3.0) * cfg.curv.scalar.values
        + 2.0 * s2 * cfg.curv.w.values
        - theta.dtheta_norm2
    )
    curv_term = -float(np.sum(weight * np.sum(comps**2, axis=-1) * m.vol) * cell)
    f_term = _f_sigma_term(cfg)
    cubic = _dirac_cubic(cfg)
    rhs = curv_term + f_term + cubic
    scale = max(1.0, abs(lhs), abs(rhs))
    return InequalityReport(
        kind="key-inequality",
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
        lhs_formula="||(d+d*)(s sigma)||^2 + ||nabla(c sigma)||^2 + 2||nabla|sigma|||^2",
        rhs_formula="-integral W |sigma|^2 + (sqrt8 iF+, |sigma| sigma) + cubic/2",
        notes={"scale": scale, "curvature_term": curv_term, "f_term": f_term, "cubic": cubic},
    )


def reformulated_inequality_check(cfg: MonopoleConfig, K: KField) -> InequalityReport:
    """Same content with lambda folded in: integral K |sigma|^2 <= rhs."""
    m = cfg.metric
    sigma = sigma_map(cfg.phi)
    lhs = float(
        np.sum(K.k.values * np.sum(sigma.comps**2, axis=-1) * m.vol) * m.grid.cell_volume
    )
    f_term = _f_sigma_term(cfg)
    cubic = _dirac_cubic(cfg)
    rhs = f_term + cubic
    return InequalityReport(
        kind="key-inequality-reformulated",
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
        lhs_formula="integral K |sigma|^2 dmu",
        rhs_formula="(sqrt8 iF+, |sigma| sigma) + cubic/2",
        notes={"scale": max(1.0, abs(lhs), abs(rhs)), "lambda": K.lam},
    )


def chain_consistency(cfg: MonopoleConfig, K: KField, eps: float, c1plus_sq: float) -> dict:
    """The inequality chain linking (c1^+)^2, the curvature flux, and K.

    Returns all four quantities so callers can assert
    32 pi^2 (c1+)^2 <= integral |sqrt8 iF+|^2 <= integral (K_- + eps)^2
    and the unscaled variant 4 pi^2 (c1+)^2 <= integral |iF+|^2.
    """
    m = cfg.metric
    cell = m.grid.cell_volume
    f2 = np.sum(cfg.conn.curv_plus.comps ** 2, axis=-1)
    int_f2 = float(np.sum(f2 * m.vol) * cell)
    int_k2 = float(np.sum((K.kminus.values + eps) ** 2 * m.vol) * cell)
    return {
        "lhs_32": 32.0 * np.pi**2 * c1plus_sq,
        "int_sqrt8_f_plus_sq": 8.0 * int_f2,
        "int_kminus_eps_sq": int_k2,
        "lhs_4": 4.0 * np.pi**2 * c1plus_sq,
        "int_f_plus_sq": int_f2,
    }


# ---------------------------------------------------------------------------
# closed-form catalog


@dataclass(frozen=True)
class CatalogSurface:
    """Product of a flat 2-torus with a constant-curvature surface.

    All inequality ingredients have closed forms: R = 2 K_gauss,
    the low eigenvalue of the positive Weyl operator is R/6 for R <= 0
    and -R/12 for R >= 0 (Kaehler), the Chern pairing against the
    normalized Kaehler form is K_gauss Vol / 2 pi, and
    (c1^+)^2 = K_gauss^2 Vol / 8 pi^2.
    """

    name: str
    gauss: float
    area_sigma: float
    area_torus: float = 4.0 * np.pi**2
    kaehler: bool = True

    @property
    def volume(self) -> float:
        return self.area_sigma * self.area_torus

    @property
    def scalar(self) -> float:
        return 2.0 * self.gauss

    @property
    def w(self) -> float:
        r = self.scalar
        return min(r / 6.0, -r / 12.0)

    @property
    def c1_dot_omega(self) -> float:
        return self.gauss * self.volume / (2.0 * np.pi)

    @property
    def c1plus_sq(self) -> float:
        return self.gauss**2 * self.volume / (8.0 * np.pi**2)


CATALOG = {
    "flat-t4": CatalogSurface("flat-t4", gauss=0.0, area_sigma=4.0 * np.pi**2),
    "t2xsigma2": CatalogSurface("t2xsigma2", gauss=-1.0, area_sigma=4.0 * np.pi),
    "t2xs2": CatalogSurface("t2xs2", gauss=1.0, area_sigma=4.0 * np.pi),
}


def _entry(entry) -> CatalogSurface:
    if isinstance(entry, CatalogSurface):
        return entry
    try:
        return CATALOG[entry]
    except KeyError:
        raise KeyError(f"unknown catalog surface {entry!r}; have {sorted(CATALOG)}")


def catalog_linear(entry, delta: float) -> InequalityReport:
    """Closed-form linear report; both sides are exact, no grid involved."""
    e = _entry(entry)
    weight = (1.0 - delta / 3.0) * e.scalar + 2.0 * delta * e.w
    lhs = weight * e.volume
    rhs = 4.0 * np.pi * e.c1_dot_omega
    return InequalityReport(
        kind="catalog-linear",
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
        lhs_formula="((1-delta/3) R + 2 delta w) Vol",
        rhs_formula="4 pi c1.[omega] = 2 K Vol",
        notes={"surface": e.name, "delta": delta, "volume": e.volume},
    )


def catalog_quadratic(entry, delta: float = 0.0) -> InequalityReport:
    """Closed-form quadratic report at constant theta with weight delta."""
    e = _entry(entry)
    k = (1.0 - delta / 3.0) * e.scalar + 2.0 * delta * e.w
    lhs = 32.0 * np.pi**2 * e.c1plus_sq
    rhs = max(-k, 0.0) ** 2 * e.volume
    return InequalityReport(
        kind="catalog-quadratic",
        lhs=lhs,
        rhs=rhs,
        margin=rhs - lhs,
        lhs_formula="32 pi^2 (c1^+)^2 = 4 K^2 Vol",
        rhs_formula="(K_delta)_-^2 Vol",
        notes={"surface": e.name, "delta": delta, "volume": e.volume},
    )


def catalog_delta_sweep(entry, deltas, kind: str = "quadratic") -> list:
    """Rows (delta, lhs, rhs, margin) over a weight sweep, including the
    over-unity weights where the quadratic bound is expected to fail on
    positive-curvature entries."""
    rows = []
    for d in deltas:
        rep = catalog_quadratic(entry, d) if kind == "quadratic" else catalog_linear(entry, d)
        rows.append(
            {"delta": float(d), "lhs": rep.lhs, "rhs": rep.rhs, "margin": rep.margin}
        )
    return rows


# ---------------------------------------------------------------------------
# manufactured configurations


def _flat_background(grid: GridSpec):
    g = np.broadcast_to(np.eye(4), grid.dims + (4, 4)).copy()
    return build_metric(grid, g)


def reducible_config(m: MetricField | None = None, grid: GridSpec | None = None) -> MonopoleConfig:
    """Phi = 0, A flat: the exact reducible solution when K >= 0."""
    if m is None:
        m = _flat_background(grid)
    grid = m.grid
    conn = U1Connection(grid, np.zeros(grid.dims + (4,)))
    phi = SpinorField(grid, np.zeros(grid.dims + (2,), dtype=complex))
    return MonopoleConfig(conn, phi, m)


def constant_config(m: MetricField, phi0=(1.0, 0.0)) -> MonopoleConfig:
    """A = 0 with a constant spinor; Dirac residual vanishes identically."""
    grid = m.grid
    conn = U1Connection(grid, np.zeros(grid.dims + (4,)))
    vals = np.broadcast_to(np.asarray(phi0, dtype=complex), grid.dims + (2,)).copy()
    return MonopoleConfig(conn, SpinorField(grid, vals), m)


def gauge_trick_config(m: MetricField, chi: np.ndarray, phi0=(1.0, 0.0)) -> MonopoleConfig:
    """Gauge transform of a constant pair: a = d chi, Phi = e^{-i chi} Phi0.

    The curvature vanishes exactly (dd = 0 holds discretely) and the
    Dirac residual is pure stencil error on smooth chi.
    """
    base = constant_config(m, phi0)
    conn, phi = gauge_transform(base.conn, base.phi, chi)
    return MonopoleConfig(conn, phi, m)


def rotating_config(m: MetricField, eps: float, amplitude: float = 0.9) -> MonopoleConfig:
    """A pair solving the curvature equation exactly at K = 0.

    a = alpha (sin x2 dx0 + cos x2 dx3) has |da^+| constant, and the
    spinor is built so that sigma(Phi) points along -da^+/|da^+| with
    modulus 2 sqrt(8) |da^+|/eps at every node, cancelling the residual
    to rounding.  amplitude = sup |sigma| must stay below 1 so the
    cutoff beta is inactive; alpha is derived from it.
    """
    if not 0.0 < amplitude < 1.0:
        raise ValueError("amplitude must sit in (0, 1) to keep beta inactive")
    grid = m.grid
    x2 = grid.mesh(2)
    alpha = amplitude * eps / 4.0  # continuum estimate; modulus is rebuilt from da below
    a = np.zeros(grid.dims + (4,))
    a[..., 0] = alpha * np.sin(x2)
    a[..., 3] = alpha * np.cos(x2)
    conn = U1Connection(grid, a)
    mod = SQRT8 * conn.curv_plus.norm() / eps  # |sigma| target, constant up to rounding
    phi_norm = np.sqrt(2.0 * np.sqrt(2.0) * mod)
    u = np.empty(grid.dims + (2,), dtype=complex)
    u[..., 0] = 1.0 / np.sqrt(2.0)
    u[..., 1] = -1j * np.exp(-1j * x2) / np.sqrt(2.0)
    phi = SpinorField(grid, phi_norm[..., None] * u)
    return MonopoleConfig(conn, phi, m)
