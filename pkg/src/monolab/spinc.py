"""Pointwise spin^c algebra and a flat-chart coupled Dirac operator.

The spinor bundle over the flat chart is trivialised as two complex
components per node (positive chirality W+).  Clifford multiplication is
fixed by the chiral matrices

    gamma^0 = [[0, -1], [1, 0]]   (2x2 blocks),
    gamma^j = [[0, i sigma_j], [i sigma_j, 0]],

so the block mapping W+ -> W- is rho = (1, i sigma_1, i sigma_2, i sigma_3)
and the induced action of the self-dual basis on W+ is
rho(eta_a) = -sqrt(2) i sigma_a: trace-free, anti-Hermitian, quaternionic.

The quadratic map sends a spinor to the self-dual form

    sigma(Phi)_a = (Phi^dag sigma_a Phi) / (2 sqrt(2)),

the unique scale with |sigma(Phi)|^2 = |Phi|^4 / 8 exactly.  A U(1)
connection is the real 1-form a twisting the product connection, coupled
as partial_i + i a_i; its curvature acts on the determinant line with
twice the spinor twist, so the self-dual representative carried around as
"iF+" is -2 (da)+.  Gauge changes act by a -> a + d chi together with
Phi -> exp(-i chi) Phi, the direction that leaves the coupling covariant.

Everything here is restricted to the flat chart; identities that need
curvature are exercised through the 2-form side of the package, where R
and W+ enter.  Centred differences double the Dirac spectrum, which is
harmless for the residual-of-identity checks used throughout (they never
count eigenvalues); the caveat is documented here once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bases import ETA_PLUS, PAIRS
from .curvature import MetricField
from .grid import GridSpec, _freeze, d1
from .selfdual import OneFormField, SelfDualField, TwoFormField, d_one_form

__all__ = [
    "PAULI",
    "KAPPA_SIGMA",
    "SpinorField",
    "U1Connection",
    "CliffordModel",
    "sigma_map",
    "rho_selfdual",
    "nabla_a",
    "dirac",
    "dirac_weitzenboeck_check",
    "log_kato_check",
    "gauge_transform",
]

PAULI = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ],
    dtype=complex,
)

# sigma-map scale solving |sigma(Phi)|^2 = |Phi|^4 / 8
KAPPA_SIGMA = 1.0 / (2.0 * np.sqrt(2.0))

# flat pair components of eta_a for the self-dual projection of curvatures
_ETA_FLAT_PAIRS = np.stack(
    [np.array([ETA_PLUS[a, i, j] for (i, j) in PAIRS]) for a in range(3)], axis=-1
)


def _require_flat(m: MetricField | None) -> None:
    if m is not None and not m.is_flat:
        raise NotImplementedError(
            "spin^c operators are implemented on flat charts only"
        )


@dataclass(frozen=True)
class SpinorField:
    """Positive-chirality spinor: two complex components per node."""

    grid: GridSpec
    comps: np.ndarray  # complex (dims, 2)

    def __post_init__(self):
        c = np.asarray(self.comps, dtype=complex)
        if c.shape != self.grid.dims + (2,):
            raise ValueError(f"spinor components {c.shape} != {self.grid.dims + (2,)}")
        if not np.all(np.isfinite(c.view(float))):
            raise ValueError("spinor components must be finite")
        object.__setattr__(self, "comps", _freeze(c))

    def norm2(self) -> np.ndarray:
        return np.sum(np.abs(self.comps) ** 2, axis=-1)

    def norm(self) -> np.ndarray:
        return np.sqrt(self.norm2())


class U1Connection:
    """Twist 1-form a of a U(1) connection on the flat chart.

    curv is the 2-form da; curv_plus the self-dual field representing
    iF+ of the determinant line, which carries twice the spinor twist:
    iF+ = -2 (da)+.
    """

    def __init__(self, grid: GridSpec, a: np.ndarray):
        a = np.asarray(a, dtype=float)
        if a.shape != grid.dims + (4,):
            raise ValueError(f"connection 1-form {a.shape} != {grid.dims + (4,)}")
        self.grid = grid
        self.a = _freeze(a)

    @cached_property
    def one_form(self) -> OneFormField:
        return OneFormField(self.grid, self.a)

    @cached_property
    def curv(self) -> TwoFormField:
        return d_one_form(self.one_form)

    @cached_property
    def curv_plus(self) -> SelfDualField:
        proj = np.einsum("pa,...p->...a", _ETA_FLAT_PAIRS, self.curv.comps)
        return SelfDualField(self.grid, -2.0 * proj)


class CliffordModel:
    """Constant Clifford data: gamma matrices and the Lambda+ action.

    rho_eta is derived from the antisymmetrised block products and checked
    against the closed form -sqrt(2) i sigma_a; identity_residuals exposes
    every convention as a number so tests can pin the whole model.
    """

    def __init__(self):
        gamma = np.zeros((4, 4, 4), dtype=complex)
        eye = np.eye(2)
        gamma[0, :2, 2:] = -eye
        gamma[0, 2:, :2] = eye
        for j in range(3):
            gamma[1 + j, :2, 2:] = 1j * PAULI[j]
            gamma[1 + j, 2:, :2] = 1j * PAULI[j]
        self.gamma = _freeze(gamma)
        # W+ -> W- blocks
        self.rho_coord = _freeze(np.ascontiguousarray(gamma[:, 2:, :2]))
        # 2-form action on W+: c(e^i ^ e^j) = -(rho_i^dag rho_j)_antisym
        rho = self.rho_coord
        c_pairs = np.empty((6, 2, 2), dtype=complex)
        for p, (i, j) in enumerate(PAIRS):
            c_pairs[p] = -0.5 * (
                rho[i].conj().T @ rho[j] - rho[j].conj().T @ rho[i]
            )
        self.rho_eta = _freeze(
            np.einsum("pa,pst->ast", _ETA_FLAT_PAIRS, c_pairs)
        )

    def identity_residuals(self, seed: int = 3) -> dict[str, float]:
        """Max deviation of each defining identity, for assertion in tests."""
        out = {}
        anti = np.einsum("ist,jtu->ijsu", self.gamma, self.gamma)
        anti = anti + np.einsum("jst,itu->ijsu", self.gamma, self.gamma)
        target = -2.0 * np.einsum("ij,su->ijsu", np.eye(4), np.eye(4))
        out["clifford_anticommutator"] = float(np.max(np.abs(anti - target)))
        re = self.rho_eta
        out["rho_eta_closed_form"] = float(
            np.max(np.abs(re - (-np.sqrt(2.0) * 1j * PAULI)))
        )
        out["rho_eta_tracefree"] = float(np.max(np.abs(np.trace(re, axis1=-2, axis2=-1))))
        out["rho_eta_antihermitian"] = float(
            np.max(np.abs(re + np.conj(np.swapaxes(re, -1, -2))))
        )
        quat = np.einsum("ast,btu->absu", re, re)
        quat = quat + np.einsum("bst,atu->absu", re, re)
        quat = quat + 4.0 * np.eye(3)[:, :, None, None] * np.eye(2)[None, None, :, :]
        out["rho_eta_quaternion"] = float(np.max(np.abs(quat)))

        rng = np.random.default_rng(seed)
        phi = rng.standard_normal((64, 2)) + 1j * rng.standard_normal((64, 2))
        sig = KAPPA_SIGMA * np.einsum(
            "...s,ast,...t->...a", phi.conj(), PAULI, phi
        ).real
        out["sigma_norm_identity"] = float(
            np.max(np.abs(np.sum(sig**2, axis=-1) - np.sum(np.abs(phi) ** 2, axis=-1) ** 2 / 8.0))
        )
        act = np.einsum("...a,ast->...st", sig, re)
        outer = np.einsum("...s,...t->...st", phi, phi.conj())
        n2 = np.sum(np.abs(phi) ** 2, axis=-1)
        target = -1j * (outer - 0.5 * n2[..., None, None] * np.eye(2))
        out["sigma_clifford_action"] = float(np.max(np.abs(act - target)))
        return out


def sigma_map(phi: SpinorField) -> SelfDualField:
    """Quadratic spinor-to-form map with |sigma(Phi)|^2 = |Phi|^4 / 8."""
    comps = KAPPA_SIGMA * np.einsum(
        "...s,ast,...t->...a", phi.comps.conj(), PAULI, phi.comps, optimize=True
    ).real
    return SelfDualField(phi.grid, comps)


def rho_selfdual(sigma: SelfDualField, model: CliffordModel | None = None) -> np.ndarray:
    """Clifford action of a self-dual field on W+, a 2x2 matrix per node."""
    re = (model or _MODEL).rho_eta
    return np.einsum("...a,ast->...st", sigma.comps, re, optimize=True)


def nabla_a(phi: SpinorField, conn: U1Connection) -> np.ndarray:
    """Coupled covariant derivative (partial_i + i a_i) Phi, (dims, 4, 2)."""
    if not phi.grid.compatible(conn.grid):
        raise ValueError("spinor and connection live on different grids")
    hs = phi.grid.spacing
    out = np.stack([d1(phi.comps, i, hs[i]) for i in range(4)], axis=-2)
    out += 1j * conn.a[..., :, None] * phi.comps[..., None, :]
    return out


def dirac(phi: SpinorField, conn: U1Connection, m: MetricField | None = None) -> SpinorField:
    """Coupled Dirac operator on the flat chart, W+ -> W-."""
    _require_flat(m)
    nab = nabla_a(phi, conn)
    out = np.einsum("ist,...it->...s", _MODEL.rho_coord, nab, optimize=True)
    return SpinorField(phi.grid, out)


def dirac_weitzenboeck_check(
    phi: SpinorField, conn: U1Connection, m: MetricField | None = None
) -> tuple[float, float, float]:
    """Integral Weitzenboeck identity for the cubic pairing.

    lhs = integral (D_A Phi, D_A(|Phi|^2 Phi)); rhs expands it into the
    gradient, |d|Phi|^2|^2 and curvature-coupling pieces (scalar curvature
    is zero on the flat chart).  Returns (lhs, rhs, normalised residual).
    """
    _require_flat(m)
    grid = phi.grid
    hs = grid.spacing
    cell = grid.cell_volume

    phi2 = phi.norm2()
    cubic = SpinorField(grid, phi2[..., None] * phi.comps)
    dphi = dirac(phi, conn)
    dcubic = dirac(cubic, conn)
    lhs = float(np.sum(np.real(np.conj(dphi.comps) * dcubic.comps)) * cell)

    nab = nabla_a(phi, conn)
    t_grad = float(np.sum(phi2 * np.sum(np.abs(nab) ** 2, axis=(-2, -1))) * cell)
    grad2 = np.zeros(grid.dims)
    for i in range(4):
        grad2 += d1(phi2, i, hs[i]) ** 2
    t_mod = 0.5 * float(np.sum(grad2) * cell)
    sig = sigma_map(phi)
    pair = np.sum(conn.curv_plus.comps * sig.comps, axis=-1)
    t_curv = -2.0 * float(np.sum(phi2 * pair) * cell)
    rhs = t_grad + t_mod + t_curv

    scale = abs(lhs) + abs(t_grad) + abs(t_mod) + abs(t_curv)
    residual = 0.0 if scale == 0.0 else abs(lhs - rhs) / scale
    return lhs, rhs, residual


def log_kato_check(
    phi: SpinorField,
    conn: U1Connection,
    floor: float = 1e-6,
    m: MetricField | None = None,
) -> float:
    """Worst-case margin of 2|nabla_A Phi|/|Phi| - |nabla sigma|/|sigma|.

    Nodes with |Phi| <= floor are skipped; all nodes below the floor is an
    error.  Smooth data keeps the margin above -O(h^2).
    """
    _require_flat(m)
    grid = phi.grid
    hs = grid.spacing
    absphi = phi.norm()
    keep = absphi > floor
    if not keep.any():
        raise ValueError(f"no nodes with |Phi| above the floor {floor}")

    nab = nabla_a(phi, conn)
    lhs = 2.0 * np.sqrt(np.sum(np.abs(nab) ** 2, axis=(-2, -1)))
    sig = sigma_map(phi)
    dsig = np.stack([d1(sig.comps, i, hs[i]) for i in range(4)], axis=-2)
    rhs = np.sqrt(np.sum(dsig**2, axis=(-2, -1)))
    margin = lhs[keep] / absphi[keep] - rhs[keep] / sig.norm()[keep]
    return float(np.min(margin))


def gauge_transform(
    conn: U1Connection, phi: SpinorField, chi: np.ndarray
) -> tuple[U1Connection, SpinorField]:
    """Gauge change a -> a + d chi, Phi -> exp(-i chi) Phi.

    This is the direction under which the coupling partial + i a is
    covariant: the transformed Dirac image is exp(-i chi) times the old.
    """
    chi = np.asarray(chi, dtype=float)
    if chi.shape != conn.grid.dims:
        raise ValueError("chi must be a scalar grid array")
    hs = conn.grid.spacing
    dchi = np.stack([d1(chi, i, hs[i]) for i in range(4)], axis=-1)
    new_conn = U1Connection(conn.grid, conn.a + dchi)
    new_phi = SpinorField(phi.grid, np.exp(-1j * chi)[..., None] * phi.comps)
    return new_conn, new_phi


_MODEL = CliffordModel()
