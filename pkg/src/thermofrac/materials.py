"""Constitutive kernels: elasticity, strain projections, degradation, branched
tension/compression stresses, positive elastic energy and degraded conductivity.

Symmetric second-order tensors are numpy arrays with components ``(t11, t22, t12)``
on the last axis (tensor shear component, not the engineering one). All kernels
broadcast over leading axes so they can be evaluated at every quadrature point of
a mesh in one call. Units are SI throughout.

The volumetric projector keeps the 3D factor 1/3 in 2D; the tension/compression
branch is selected by the sign of the trace of the supplied branch strain. Both
choices are deliberate and required to reproduce the reference results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PLANE_STRESS = "plane_stress"
PLANE_STRAIN = "plane_strain"

# second-order identity in component form (I11, I22, I12)
IDENTITY_2D = np.array([1.0, 1.0, 0.0])


@dataclass(frozen=True)
class ElasticLaw:
    """Isotropic elasticity: Young's modulus [Pa], Poisson ratio, planar mode."""

    E: float
    nu: float
    mode: str = PLANE_STRAIN

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError(f"Young's modulus must be positive, got E={self.E}")
        if not -1.0 < self.nu < 0.5:
            raise ValueError(f"Poisson ratio must lie in (-1, 0.5), got nu={self.nu}")
        if self.mode not in (PLANE_STRESS, PLANE_STRAIN):
            raise ValueError(f"unknown planar mode {self.mode!r}")

    @property
    def lame_lambda(self) -> float:
        return self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    @property
    def lame_mu(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))


@dataclass(frozen=True)
class ThermalLaw:
    """Conductivity [W/(m K)], density [kg/m^3], specific heat [J/(kg K)],
    expansion coefficient [1/K] and reference temperature [K]."""

    k0: float
    rho: float
    c: float
    alpha: float
    T0: float

    def __post_init__(self):
        if self.k0 < 0:
            raise ValueError(f"conductivity must be non-negative, got k0={self.k0}")
        if self.rho < 0:
            raise ValueError(f"density must be non-negative, got rho={self.rho}")
        if not self.c > 0:
            raise ValueError(f"specific heat must be positive, got c={self.c}")


@dataclass(frozen=True)
class FractureLaw:
    """Critical energy release rate [N/m], regularization length [m] and
    residual stiffness factor."""

    Gc: float
    ls: float
    eta: float = 1e-8

    def __post_init__(self):
        if not self.Gc > 0:
            raise ValueError(f"Gc must be positive, got {self.Gc}")
        if not self.ls > 0:
            raise ValueError(f"length scale must be positive, got {self.ls}")
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"residual stiffness must sit in (0, 1), got {self.eta}")


@dataclass(frozen=True)
class ElasticTensor:
    """Plane isotropic fourth-order elasticity tensor (6 independent components)."""

    C1111: float
    C1112: float
    C1122: float
    C1212: float
    C2212: float
    C2222: float

    def apply(self, eps: np.ndarray) -> np.ndarray:
        """Double contraction C : eps for component arrays (..., 3)."""
        e11, e22, e12 = eps[..., 0], eps[..., 1], eps[..., 2]
        s11 = self.C1111 * e11 + self.C1122 * e22 + 2.0 * self.C1112 * e12
        s22 = self.C1122 * e11 + self.C2222 * e22 + 2.0 * self.C2212 * e12
        s12 = self.C1112 * e11 + self.C2212 * e22 + 2.0 * self.C1212 * e12
        return np.stack([s11, s22, s12], axis=-1)

    def voigt(self) -> np.ndarray:
        """3x3 matrix mapping engineering strain (e11, e22, gamma12) to stress."""
        return np.array(
            [
                [self.C1111, self.C1122, self.C1112],
                [self.C1122, self.C2222, self.C2212],
                [self.C1112, self.C2212, self.C1212],
            ]
        )


def elastic_tensor(law: ElasticLaw) -> ElasticTensor:
    """Plane-stress or plane-strain elasticity tensor for an isotropic law."""
    E, nu = law.E, law.nu
    if law.mode == PLANE_STRESS:
        C1111 = E / (1.0 - nu * nu)
        C1122 = nu * E / (1.0 - nu * nu)
        C2222 = C1111
    else:
        denom = 1.0 - nu - 2.0 * nu * nu
        if denom <= 0:
            raise ValueError(f"plane strain requires nu < 0.5, got nu={nu}")
        C1111 = E * (1.0 - nu * nu) / ((1.0 + nu) * denom)
        C1122 = nu * E / denom
        C2222 = E * (1.0 - nu) / denom
    C1212 = E / (2.0 * (1.0 + nu))
    return ElasticTensor(C1111, 0.0, C1122, C1212, 0.0, C2222)


def trace(t: np.ndarray) -> np.ndarray:
    return t[..., 0] + t[..., 1]


def ddot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Double contraction of symmetric tensors in component form."""
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + 2.0 * a[..., 2] * b[..., 2]


def volumetric(t: np.ndarray) -> np.ndarray:
    """P_vol t = (1/3) tr(t) I, with the 3D factor kept in 2D."""
    return (trace(t) / 3.0)[..., None] * IDENTITY_2D


def project(eps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a tensor into its volumetric and deviatoric parts (vol + dev == eps)."""
    vol = volumetric(eps)
    return vol, eps - vol


def degradation(s, eta):
    """Stiffness multiplier g(s) = s^2 + eta."""
    s = np.asarray(s, dtype=float)
    return s * s + eta


def elastic_strain(eps: np.ndarray, T, thermal: ThermalLaw) -> np.ndarray:
    """Subtract the thermal strain alpha (T - T0) I from a total strain."""
    dT = np.asarray(T, dtype=float) - thermal.T0
    return eps - (thermal.alpha * dT)[..., None] * IDENTITY_2D


def _branched(sig: np.ndarray, branch_strain: np.ndarray, g) -> np.ndarray:
    """Degrade a stress: fully when the branch strain has non-negative trace,
    deviatoric part only (volumetric part intact) otherwise."""
    g = np.asarray(g, dtype=float)[..., None]
    tensile = (trace(branch_strain) >= 0.0)[..., None]
    vol = volumetric(sig)
    return np.where(tensile, g * sig, g * sig + (1.0 - g) * vol)


def stress(eps_elas: np.ndarray, branch_strain: np.ndarray, s, C: ElasticTensor,
           eta: float = 0.0) -> np.ndarray:
    """Damaged stress g(s) C eps_elas with the compression branch leaving the
    volumetric response undegraded."""
    return _branched(C.apply(eps_elas), branch_strain, degradation(s, eta))


def stress_total(eps: np.ndarray, eps_prev: np.ndarray, s, T, T_prev,
                 C: ElasticTensor, thermal: ThermalLaw, eta: float = 0.0) -> np.ndarray:
    """Bilinear-side stress of the coupled step.

    The elastic argument is eps - alpha T I with the absolute temperature; the
    branch is frozen at the previous iterate (eps_prev, T_prev).
    """
    T = np.asarray(T, dtype=float)
    arg = eps - (thermal.alpha * T)[..., None] * IDENTITY_2D
    branch = elastic_strain(eps_prev, T_prev, thermal)
    return _branched(C.apply(arg), branch, degradation(s, eta))


def stress_thermal(eps_prev: np.ndarray, s, T_prev, C: ElasticTensor,
                   thermal: ThermalLaw, eta: float = 0.0) -> np.ndarray:
    """Thermal pre-stress evaluated at alpha T0 I with the frozen branch.

    The load side of the coupled weak form subtracts this term, so that
    stress_total + stress_thermal equals the physical stress at the elastic
    strain eps - alpha (T - T0) I.
    """
    base = np.broadcast_to(
        thermal.alpha * thermal.T0 * IDENTITY_2D, eps_prev.shape
    )
    branch = elastic_strain(eps_prev, T_prev, thermal)
    return _branched(C.apply(base), branch, degradation(s, eta))


def psi_plus(eps_elas: np.ndarray, C: ElasticTensor) -> np.ndarray:
    """Tensile part of the elastic energy density driving damage growth.

    Full energy for non-negative trace, energy of the deviatoric stress/strain
    pair under compression. Always non-negative for positive-definite C.
    """
    sig = C.apply(eps_elas)
    full = 0.5 * ddot(eps_elas, sig)
    sig_dev = sig - volumetric(sig)
    eps_dev = eps_elas - volumetric(eps_elas)
    dev_only = 0.5 * ddot(sig_dev, eps_dev)
    return np.where(trace(eps_elas) >= 0.0, full, dev_only)


def conductivity(s, thermal: ThermalLaw, eta: float, degrade: bool = True):
    """Thermal conductivity, optionally degraded by g(s) = s^2 + eta."""
    if not degrade:
        return np.broadcast_to(
            np.asarray(thermal.k0, dtype=float), np.shape(s)
        ).copy() if np.ndim(s) else float(thermal.k0)
    return degradation(s, eta) * thermal.k0


@dataclass(frozen=True)
class Material:
    """Per-region bundle of the three constitutive laws."""

    elastic: ElasticLaw
    thermal: ThermalLaw
    fracture: FractureLaw
    degrade_k: bool = True
    C: ElasticTensor = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "C", elastic_tensor(self.elastic))
