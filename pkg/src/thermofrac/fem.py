"""P1 triangle FEM kernels: quadrature, sparse assembly, constraints, solve.

Two element-block layouts are used. The phase field is a scalar per node
(dof = node id). The coupled displacement-temperature step interleaves
``(u1, u2, T)`` per node (dof = 3 * node + component); when the temperature is
prescribed uniformly the thermal unknowns drop out and the layout is
``(u1, u2)`` (dof = 2 * node + component). Strain vectors inside assembly are
engineering Voigt ``(e11, e22, gamma12)``; constitutive kernels receive tensor
components ``(e11, e22, e12)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import materials as mat
from .errors import ConstraintError, MeshError, SolveError
from .mesh import Mesh

# 3-point midpoint rule on the triangle: barycentric points, unit weights.
# Exact for polynomials up to degree 2.
QUAD_BARY = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
QUAD_W = np.full(3, 1.0 / 3.0)

# volumetric projector acting on a stress vector (s11, s22, s12)
P_VOL = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]]) / 3.0
VOIGT_ID = np.array([1.0, 1.0, 0.0])


def quad_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric points and weights (summing to 1; scale by the element area)."""
    if degree != 2:
        raise ValueError(f"only the degree-2 rule is implemented, got {degree}")
    return QUAD_BARY.copy(), QUAD_W.copy()


def shape_tri3(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Shape data of one triangle: N at quad points, constant gradients, area."""
    coords = np.asarray(coords, dtype=float)
    x, y = coords[:, 0], coords[:, 1]
    two_a = (x[1] - x[0]) * (y[2] - y[0]) - (y[1] - y[0]) * (x[2] - x[0])
    if two_a <= 0.0:
        raise MeshError("degenerate or clockwise element in shape evaluation")
    grads = np.array(
        [
            [y[1] - y[2], x[2] - x[1]],
            [y[2] - y[0], x[0] - x[2]],
            [y[0] - y[1], x[1] - x[0]],
        ]
    ) / two_a
    return QUAD_BARY.copy(), grads, 0.5 * two_a


@dataclass
class LinearSystem:
    """Sparse system A x = b."""

    A: sp.csr_matrix
    b: np.ndarray

    @property
    def size(self) -> int:
        return self.b.shape[0]


class Discretization:
    """Precomputed element data for a mesh with a per-region material map."""

    def __init__(self, mesh: Mesh, mats: dict[str, mat.Material]):
        self.mesh = mesh
        self.materials = dict(mats)

        region_ids = {}
        for name in mats:
            region_ids[mesh.tag_id(name)] = name
        missing = set(np.unique(mesh.regions)) - set(region_ids)
        if missing:
            raise MeshError(f"no material assigned to region tag ids {sorted(missing)}")

        tris = mesh.elements
        pts = mesh.nodes[tris]
        x, y = pts[..., 0], pts[..., 1]
        two_a = ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0])
                 - (y[:, 1] - y[:, 0]) * (x[:, 2] - x[:, 0]))
        self.area = 0.5 * two_a
        g = np.empty((len(tris), 3, 2))
        g[:, 0, 0], g[:, 0, 1] = y[:, 1] - y[:, 2], x[:, 2] - x[:, 1]
        g[:, 1, 0], g[:, 1, 1] = y[:, 2] - y[:, 0], x[:, 0] - x[:, 2]
        g[:, 2, 0], g[:, 2, 1] = y[:, 0] - y[:, 1], x[:, 1] - x[:, 0]
        self.gradN = g / two_a[:, None, None]

        ne = len(tris)
        B = np.zeros((ne, 3, 6))
        B[:, 0, 0::2] = self.gradN[..., 0]
        B[:, 1, 1::2] = self.gradN[..., 1]
        B[:, 2, 0::2] = self.gradN[..., 1]
        B[:, 2, 1::2] = self.gradN[..., 0]
        self.B = B

        # per-element material constants
        self.region_mask = {}
        self.D = np.empty((ne, 3, 3))
        scalars = {k: np.empty(ne) for k in
                   ("alpha", "T0", "k0", "rho", "c", "Gc", "ls", "eta")}
        self.degrade_k = np.empty(ne, dtype=bool)
        for rid, name in region_ids.items():
            m = mats[name]
            sel = mesh.regions == rid
            self.region_mask[name] = sel
            self.D[sel] = m.C.voigt()
            scalars["alpha"][sel] = m.thermal.alpha
            scalars["T0"][sel] = m.thermal.T0
            scalars["k0"][sel] = m.thermal.k0
            scalars["rho"][sel] = m.thermal.rho
            scalars["c"][sel] = m.thermal.c
            scalars["Gc"][sel] = m.fracture.Gc
            scalars["ls"][sel] = m.fracture.ls
            scalars["eta"][sel] = m.fracture.eta
            self.degrade_k[sel] = m.degrade_k
        for k, v in scalars.items():
            setattr(self, k, v)
        t0 = {m.thermal.T0 for m in mats.values()}
        if len(t0) > 1:
            raise MeshError(f"all regions must share one reference temperature, got {t0}")
        self.T0_value = t0.pop()

        # local-to-global dof tables
        n = len(mesh.nodes)
        self.n_nodes = n
        self.dof_scalar = tris
        self.dof_mech = np.empty((ne, 6), dtype=np.int64)
        self.dof_mech[:, 0::2] = 2 * tris
        self.dof_mech[:, 1::2] = 2 * tris + 1
        cu = np.empty((ne, 6), dtype=np.int64)
        cu[:, 0::2] = 3 * tris
        cu[:, 1::2] = 3 * tris + 1
        self.dof_coupled_u = cu
        self.dof_coupled_T = 3 * tris + 2

        # consistent P1 mass block and its global matrix (cached for projections)
        self.mass_block = (np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]])
                           / 12.0)[None] * self.area[:, None, None]
        self._mass_solve = None

        # boundary edge -> owning element (and opposite local node) for integrals
        owner: dict[tuple[int, int], tuple[int, int]] = {}
        edge_local = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
        counts = mesh.edge_counts()
        for e, tri in enumerate(tris):
            for a, b, opp in edge_local:
                key = (min(tri[a], tri[b]), max(tri[a], tri[b]))
                if counts[key] == 1:
                    owner[key] = (e, tri[opp])
        self._edge_owner = owner

    # -- helpers ---------------------------------------------------------------

    def at_quad(self, nodal: np.ndarray) -> np.ndarray:
        """Interpolate a nodal field to the (E, Q) quadrature grid."""
        return np.einsum("qa,ea->eq", QUAD_BARY, nodal[self.mesh.elements])

    def strains(self, u: np.ndarray) -> np.ndarray:
        """Engineering strain (e11, e22, gamma12) per element from nodal u (N, 2)."""
        ue = u[self.mesh.elements].reshape(-1, 6)
        return np.einsum("eij,ej->ei", self.B, ue)

    @staticmethod
    def to_tensor(voigt: np.ndarray) -> np.ndarray:
        out = voigt.copy()
        out[..., 2] *= 0.5
        return out

    def elastic_strain_q(self, u: np.ndarray, T: np.ndarray) -> np.ndarray:
        """Tensor elastic strain at quadrature points for nodal (u, T)."""
        eps = self.to_tensor(self.strains(u))
        Tq = self.at_quad(T)
        dT = Tq - self.T0_value
        return eps[:, None, :] - (self.alpha[:, None] * dT)[..., None] * mat.IDENTITY_2D

    def psi_plus_q(self, u: np.ndarray, T: np.ndarray) -> np.ndarray:
        """Tensile elastic energy density at every quadrature point."""
        eps_elas = self.elastic_strain_q(u, T)
        out = np.empty(eps_elas.shape[:2])
        for name, sel in self.region_mask.items():
            out[sel] = mat.psi_plus(eps_elas[sel], self.materials[name].C)
        return out

    def _mass_factor(self):
        if self._mass_solve is None:
            rows = np.broadcast_to(self.dof_scalar[:, :, None], (len(self.area), 3, 3))
            cols = np.broadcast_to(self.dof_scalar[:, None, :], (len(self.area), 3, 3))
            M = sp.coo_matrix(
                (self.mass_block.ravel(), (rows.ravel(), cols.ravel())),
                shape=(self.n_nodes, self.n_nodes),
            ).tocsc()
            self._mass_solve = spla.splu(M)
        return self._mass_solve


# -- assembly ------------------------------------------------------------------


def _scatter(rows, cols, vals, nd) -> sp.csr_matrix:
    A = sp.coo_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=(nd, nd))
    return A.tocsr()


def assemble_phase_field(disc: Discretization, H_nodal: np.ndarray) -> LinearSystem:
    """System for the damage field given a nodal history field.

    Weak form: Gc ls grad(s).grad(phi) + (2 H + Gc/ls) s phi against the
    constant source (Gc/ls) phi; natural zero-flux boundary everywhere.
    """
    return assemble_phase_field_quad(disc, disc.at_quad(np.asarray(H_nodal, dtype=float)))


def assemble_phase_field_quad(disc: Discretization, H_quad: np.ndarray) -> LinearSystem:
    """Same system with the history given per quadrature point (E, Q).

    This matches the reference scheme, whose history projection space is
    element-local: for linear triangles with the midpoint rule the projected
    field reproduces the quad-point values exactly, so the reaction
    coefficient 2 H + Gc/ls stays positive and the operator stays SPD.
    """
    Hq = np.asarray(H_quad, dtype=float)
    coef = 2.0 * Hq + (disc.Gc / disc.ls)[:, None]
    NN = np.einsum("qa,qb->qab", QUAD_BARY, QUAD_BARY)
    Me = np.einsum("eq,qab,e->eab", coef, NN, disc.area / 3.0)
    Ke = np.einsum("e,eax,ebx->eab", disc.Gc * disc.ls * disc.area,
                   disc.gradN, disc.gradN)
    blocks = Ke + Me

    nd = disc.n_nodes
    rows = np.broadcast_to(disc.dof_scalar[:, :, None], blocks.shape)
    cols = np.broadcast_to(disc.dof_scalar[:, None, :], blocks.shape)
    A = _scatter(rows, cols, blocks, nd)

    b = np.zeros(nd)
    be = (disc.Gc / disc.ls * disc.area / 3.0)[:, None] * np.ones(3)
    np.add.at(b, disc.dof_scalar.ravel(), be.ravel())
    return LinearSystem(A, b)


def _branch_data(disc: Discretization, u_prev, s, T_prev):
    """Per-quad-point degradation factor and tensile mask frozen at the
    previous iterate, plus the branched stress response of a unit volumetric
    strain (used by the thermal coupling and load terms)."""
    sq = disc.at_quad(np.asarray(s, dtype=float))
    g = sq * sq + disc.eta[:, None]
    eps_prev = disc.to_tensor(disc.strains(u_prev))
    Tq_prev = disc.at_quad(np.asarray(T_prev, dtype=float))
    tr_branch = (mat.trace(eps_prev)[:, None]
                 - 2.0 * disc.alpha[:, None] * (Tq_prev - disc.T0_value))
    tensile = tr_branch >= 0.0

    cI = np.einsum("eij,j->ei", disc.D, VOIGT_ID)
    cI_vol = np.einsum("ij,ej->ei", P_VOL, cI)
    m = (g[..., None] * cI[:, None, :]
         + np.where(tensile[..., None], 0.0, (1.0 - g)[..., None] * cI_vol[:, None, :]))
    return g, tensile, m


def _dmod_bar(disc: Discretization, g, tensile):
    """Quadrature-averaged branched elasticity matrix, scaled by the area."""
    Dvol = np.einsum("ij,ejk->eik", P_VOL, disc.D)
    gbar = g.mean(axis=1)
    # split the average between tensile and compressive points
    w_comp = np.where(tensile, 0.0, 1.0 - g).mean(axis=1)
    return (gbar[:, None, None] * disc.D + w_comp[:, None, None] * Dvol) \
        * disc.area[:, None, None]


def assemble_coupled(disc: Discretization, u_prev: np.ndarray, s: np.ndarray,
                     T_prev: np.ndarray, dt: float,
                     prescribed_T: float | None = None) -> LinearSystem:
    """One linear step of the displacement-temperature block.

    The stress branch and degradation are frozen at ``(u_prev, s, T_prev)``;
    the temperature rate uses backward differences over ``dt``. With
    ``prescribed_T`` set, the thermal unknowns are dropped and the uniform
    temperature enters through the thermal-strain load instead.
    """
    if dt <= 0.0:
        raise ValueError(f"time increment must be positive, got dt={dt}")

    g, tensile, m = _branch_data(disc, u_prev, s, T_prev)
    Kuu = np.einsum("eia,eij,ejb->eab", disc.B, _dmod_bar(disc, g, tensile), disc.B)
    w = disc.area / 3.0

    if prescribed_T is not None:
        dT = prescribed_T - disc.T0_value
        sig_th = (disc.alpha * dT)[:, None, None] * m  # (E, Q, 3)
        fe = np.einsum("eia,ei->ea", disc.B, w[:, None] * sig_th.sum(axis=1))
        nd = 2 * disc.n_nodes
        rows = np.broadcast_to(disc.dof_mech[:, :, None], Kuu.shape)
        cols = np.broadcast_to(disc.dof_mech[:, None, :], Kuu.shape)
        A = _scatter(rows, cols, Kuu, nd)
        b = np.zeros(nd)
        np.add.at(b, disc.dof_mech.ravel(), fe.ravel())
        return LinearSystem(A, b)

    # thermal coupling block: -alpha * B^T (sum_q w m_q outer N_q)
    S = np.einsum("eqi,qb,e->eib", m, QUAD_BARY, w)
    KuT = -disc.alpha[:, None, None] * np.einsum("eia,eib->eab", disc.B, S)

    # heat block: conduction with (optionally degraded) conductivity + mass/dt
    k_q = np.where(disc.degrade_k[:, None], g * disc.k0[:, None], disc.k0[:, None])
    Kk = np.einsum("eq,e,eax,ebx->eab", k_q, w, disc.gradN, disc.gradN)
    KTT = Kk + (disc.rho * disc.c / dt)[:, None, None] * disc.mass_block

    # loads: subtract the thermal pre-stress, keep the previous heat content
    sigF = (disc.alpha * disc.T0_value)[:, None, None] * m
    fu = -np.einsum("eia,ei->ea", disc.B, w[:, None] * sigF.sum(axis=1))
    Tprev_e = np.asarray(T_prev, dtype=float)[disc.mesh.elements]
    fT = (disc.rho * disc.c / dt)[:, None] * np.einsum(
        "eab,eb->ea", disc.mass_block, Tprev_e)

    nd = 3 * disc.n_nodes
    rows = [np.broadcast_to(disc.dof_coupled_u[:, :, None], Kuu.shape),
            np.broadcast_to(disc.dof_coupled_u[:, :, None], KuT.shape),
            np.broadcast_to(disc.dof_coupled_T[:, :, None], KTT.shape)]
    cols = [np.broadcast_to(disc.dof_coupled_u[:, None, :], Kuu.shape),
            np.broadcast_to(disc.dof_coupled_T[:, None, :], KuT.shape),
            np.broadcast_to(disc.dof_coupled_T[:, None, :], KTT.shape)]
    vals = [Kuu, KuT, KTT]
    A = sp.coo_matrix(
        (np.concatenate([v.ravel() for v in vals]),
         (np.concatenate([r.ravel() for r in rows]),
          np.concatenate([c.ravel() for c in cols]))),
        shape=(nd, nd),
    ).tocsr()

    b = np.zeros(nd)
    np.add.at(b, disc.dof_coupled_u.ravel(), fu.ravel())
    np.add.at(b, disc.dof_coupled_T.ravel(), fT.ravel())
    return LinearSystem(A, b)


# -- constraints and solve -------------------------------------------------------


def merge_constraints(pairs) -> dict[int, float]:
    """Merge (dof, value) pairs, rejecting conflicting prescriptions."""
    out: dict[int, float] = {}
    for dof, value in pairs:
        dof = int(dof)
        if dof in out and abs(out[dof] - value) > 1e-12 * (1.0 + abs(value)):
            raise ConstraintError(
                f"conflicting Dirichlet values on dof {dof}: {out[dof]} vs {value}"
            )
        out.setdefault(dof, float(value))
    return out


def apply_dirichlet(system: LinearSystem, constraints) -> LinearSystem:
    """Eliminate Dirichlet dofs symmetrically.

    The right-hand side absorbs A[:, c] * value, constrained rows/columns are
    zeroed with a unit diagonal, and rhs entries are set to the prescribed
    values.
    """
    if isinstance(constraints, dict):
        cmap = merge_constraints(constraints.items())
    else:
        cmap = merge_constraints(constraints)
    if not cmap:
        return LinearSystem(system.A.copy(), system.b.copy())

    nd = system.size
    dofs = np.fromiter(cmap.keys(), dtype=np.int64)
    vals = np.fromiter(cmap.values(), dtype=float)
    if dofs.min() < 0 or dofs.max() >= nd:
        raise ConstraintError("constrained dof outside the system")

    xc = np.zeros(nd)
    xc[dofs] = vals
    b = system.b - system.A @ xc

    keep = np.ones(nd)
    keep[dofs] = 0.0
    Sel = sp.diags(keep)
    A = Sel @ system.A @ Sel + sp.diags(1.0 - keep)
    b *= keep
    b[dofs] = vals
    return LinearSystem(A.tocsr(), b)


def solve(system: LinearSystem) -> np.ndarray:
    """Direct sparse solve with a residual check (relative 1e-10)."""
    A = system.A.tocsc()
    diag = A.diagonal()
    if np.any(diag == 0.0):
        bad = int(np.argmin(diag != 0.0))
        raise SolveError(f"zero diagonal at dof {bad}: singular or floating dof")
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SolveError(f"sparse factorization failed: {exc}") from exc
    x = lu.solve(system.b)
    if not np.all(np.isfinite(x)):
        raise SolveError("solution contains non-finite entries")
    res = np.linalg.norm(system.A @ x - system.b)
    ref = np.linalg.norm(system.b)
    if res > 1e-10 * max(ref, 1e-300) and ref > 0.0:
        raise SolveError(f"relative residual {res / ref:.3e} exceeds 1e-10")
    return x


def l2_project(disc: Discretization, q: np.ndarray) -> np.ndarray:
    """Nodal field minimizing the L2 distance to quad-point data (E, Q)."""
    q = np.asarray(q, dtype=float)
    rhs = np.zeros(disc.n_nodes)
    w = disc.area / 3.0
    contrib = np.einsum("eq,qa,e->ea", q, QUAD_BARY, w)
    np.add.at(rhs, disc.dof_scalar.ravel(), contrib.ravel())
    return disc._mass_factor().solve(rhs)


# -- boundary integrals ----------------------------------------------------------

_EDGE_GAUSS = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])


def reaction_force(disc: Discretization, tag_name: str, u: np.ndarray,
                   s: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Integral of sigma . n over the tagged boundary, per unit thickness.

    The stress is the damaged constitutive stress at the converged state: both
    the branch and the elastic strain use the current (u, T).
    """
    mesh = disc.mesh
    tid = mesh.tag_id(tag_name)
    edges = mesh.boundary_edges[mesh.boundary_tags == tid]
    eps = disc.to_tensor(disc.strains(u))

    force = np.zeros(2)
    for a, b in edges:
        key = (min(a, b), max(a, b))
        elem, opp = disc._edge_owner[key]
        pa, pb = mesh.nodes[a], mesh.nodes[b]
        tang = pb - pa
        length = float(np.hypot(*tang))
        normal = np.array([tang[1], -tang[0]]) / length
        if np.dot(normal, 0.5 * (pa + pb) - mesh.nodes[opp]) < 0:
            normal = -normal

        name = next(n for n, selm in disc.region_mask.items() if selm[elem])
        material = disc.materials[name]
        for xi in _EDGE_GAUSS:
            s_gp = (1.0 - xi) * s[a] + xi * s[b]
            T_gp = (1.0 - xi) * T[a] + xi * T[b]
            eps_elas = mat.elastic_strain(eps[elem], T_gp, material.thermal)
            sig = mat.stress(eps_elas, eps_elas, s_gp, material.C,
                             material.fracture.eta)
            traction = np.array([
                sig[0] * normal[0] + sig[2] * normal[1],
                sig[2] * normal[0] + sig[1] * normal[1],
            ])
            force += 0.5 * length * traction
    return force
