"""Built-in benchmark configurations.

Each builder returns a complete RunConfig with the generator parameters
embedded, so no external mesh files are needed. The ``scale`` factor in
(0, 1] coarsens the run for desk-scale work: the regularization length and
every mesh size are divided by ``scale`` together, preserving the rule that
the length scale spans at least two elements.

Parameter provenance notes:
  * sent: the walkthrough constants (E = 340 GPa, Gc = 42.47 N/m,
    ls = 3.33e-6 m). The narrative alternative set (E = 32 GPa, Gc = 3 N/m)
    is available as ``sent_low_stiffness_overrides``.
  * bimaterial: the printed steel expansion coefficient 193e-6 /K is kept
    verbatim even though it is far above the handbook ~17e-6 value; see
    README. Steel gets a 10x glass toughness so cracking confines to glass.
  * quench: conductivity degradation is disabled (water reaches the crack
    faces), and the quenched faces are the outer bottom/left edges of the
    quarter model whose symmetry planes (right/top) carry the normal-
    displacement constraints.
"""

from __future__ import annotations

import math

from .config import BoundaryCondition, OutputConfig, RunConfig
from .errors import ConfigError
from .materials import ElasticLaw, FractureLaw, Material, ThermalLaw
from .solver import LoadProgram, Pin, StaggeredConfig

EXAMPLE_NAMES = (
    "cruciform-mech",
    "cruciform-thermal",
    "cruciform-combined",
    "sent",
    "bimaterial",
    "quench-680",
    "quench-880",
)

sent_low_stiffness_overrides = (
    ("materials.domain.elastic.E", 32e9),
    ("materials.domain.fracture.Gc", 3.0),
)


def _check_scale(scale: float):
    if not 0.0 < scale <= 1.0:
        raise ConfigError(f"scale must lie in (0, 1], got {scale}")


def sent(scale: float = 1.0, delta_T: float = 50.0, steps: int = 100,
         out_dir: str = "out/sent") -> RunConfig:
    """Square plate with an edge notch under tension with a boundary
    temperature offset ``delta_T`` ramped smoothly at the top edge."""
    _check_scale(scale)
    W = H = 1e-3
    ls = 3.33e-6 / scale
    hf = ls / 2.0
    h = min(10.0 * hf, H / 8.0)
    yc = 0.5 * H
    band = 3.0 * ls
    T0 = 300.0
    uMax = 1.2e-6

    mesh = {"generate": {
        "kind": "rect", "width": W, "height": H, "h": h,
        "refine_band": [0.3 * W, yc - band, W, yc + band, hf],
        "notch": [0.0, yc - hf, 0.5 * W, yc + hf],
    }}
    material = Material(
        ElasticLaw(340e9, 0.22, "plane_strain"),
        ThermalLaw(k0=300.0, rho=2450.0, c=0.775, alpha=8e-6, T0=T0),
        FractureLaw(Gc=42.47, ls=ls, eta=1e-8),
    )
    return RunConfig(
        mesh=mesh,
        materials={"domain": material},
        boundary_conditions=(
            BoundaryCondition("BottomEdge", u=(0.0, 0.0), T="reference"),
            BoundaryCondition("TopEdge", u=(None, ("ramp", 1.0)), T=("ramp", 1.0)),
        ),
        load=LoadProgram(uMax=uMax, tMax=1.0, delt=1.0 / steps, T0=T0,
                         TAppMax=T0 + delta_T, uTran=0.2 * uMax,
                         ramp_kind="smooth"),
        staggered=StaggeredConfig(),
        output=OutputConfig(dir=out_dir, cadence=max(steps // 5, 1)),
    )


CRUCIFORM_L = 0.05
CRUCIFORM_CASES = {
    # per-step increments: displacement [m], boundary temperature offset [K]
    "mech": (3.5e-7, 0.0),
    "thermal": (0.0, 0.1),
    "combined": (1.92e-7, 0.06),
}


def cruciform_notch(scale: float = 1.0):
    """Notch segment endpoints (lower, upper) and the damage-halo radius."""
    L = CRUCIFORM_L
    c = 1.5 * L
    half = 0.1 * L
    dx = half * math.cos(math.radians(135.0))
    dy = half * math.sin(math.radians(135.0))
    ls = 5e-4 / scale
    return (c - dx, c - dy), (c + dx, c + dy), 2.5 * ls


def cruciform(case: str, scale: float = 1.0, steps: int = 100,
              out_dir: str | None = None) -> RunConfig:
    """Cross-shaped plate with an inclined center notch under mechanical,
    thermal or combined loading."""
    _check_scale(scale)
    if case not in CRUCIFORM_CASES:
        raise ConfigError(f"unknown cruciform case {case!r}; "
                          f"choose from {sorted(CRUCIFORM_CASES)}")
    du, dT = CRUCIFORM_CASES[case]
    L = CRUCIFORM_L
    ls = 5e-4 / scale
    hf = ls / 4.0
    T0 = 0.0

    mesh = {"generate": {
        "kind": "cruciform", "L": L, "h": 4.0 * hf, "h_fine": hf,
        "refine_half": 0.2 * L,
    }}
    material = Material(
        ElasticLaw(218400.0, 0.2, "plane_stress"),
        ThermalLaw(k0=1.0, rho=0.0, c=1.0, alpha=6e-4, T0=T0),
        FractureLaw(Gc=2e-4, ls=ls, eta=1e-8),
    )

    uMax = max(du * steps, 0.0)
    bcs = [BoundaryCondition("BottomEdge", u=(0.0, 0.0), T="reference")]
    if du > 0.0:
        bcs.append(BoundaryCondition("TopEdge", u=(None, ("ramp", 1.0)),
                                     T=("ramp", 1.0) if dT else "reference"))
    else:
        bcs.append(BoundaryCondition("TopEdge", T=("ramp", 1.0) if dT else "reference"))
    if dT:
        bcs[0] = BoundaryCondition("BottomEdge", u=(0.0, 0.0), T=("ramp", -1.0))
        bcs.append(BoundaryCondition("LeftEdge", T="reference"))
        bcs.append(BoundaryCondition("RightEdge", T="reference"))

    # pure thermal loading keeps the displacement program as a unit abscissa
    # for the linear temperature ramp
    abscissa = uMax if uMax > 0 else 1.0
    return RunConfig(
        mesh=mesh,
        materials={"domain": material},
        boundary_conditions=tuple(bcs),
        load=LoadProgram(uMax=uMax if uMax > 0 else 1.0, tMax=1.0,
                         delt=1.0 / steps, T0=T0, TAppMax=T0 + dT * steps,
                         uTran=abscissa,
                         ramp_kind="linear" if dT else "none"),
        staggered=StaggeredConfig(),
        output=OutputConfig(dir=out_dir or f"out/cruciform-{case}",
                            cadence=max(steps // 10, 1)),
    )


def bimaterial(scale: float = 1.0, steps: int = 100, T_drop: float = 50.0,
               out_dir: str = "out/bimaterial") -> RunConfig:
    """Glass/steel beam cooled uniformly; the expansion mismatch drives a
    crack from the notch tip. The temperature history is prescribed, so the
    heat equation is skipped."""
    _check_scale(scale)
    length, h_glass, h_steel = 0.15, 0.020, 0.005
    height = h_glass + h_steel
    ls = 3e-4 / scale
    hf = ls / 4.0
    T0 = 300.0
    notch = [0.030, 0.0, 0.031, 0.015]

    mesh = {"generate": {
        "kind": "rect", "width": length, "height": height, "h": 4.0 * hf,
        "refine_band": [0.025, 0.011, length, h_glass + 0.001, hf],
        "notch": notch,
        "regions": {"Glass": [0.0, 0.0, length, h_glass],
                    "Steel": [0.0, h_glass, length, height]},
    }}
    glass = Material(
        ElasticLaw(64e9, 0.2, "plane_stress"),
        ThermalLaw(k0=1.0, rho=0.0, c=1.0, alpha=3.25e-6, T0=T0),
        FractureLaw(Gc=400.0, ls=ls, eta=1e-8),
    )
    steel = Material(
        ElasticLaw(193e9, 0.29, "plane_stress"),
        ThermalLaw(k0=1.0, rho=0.0, c=1.0, alpha=193e-6, T0=T0),
        FractureLaw(Gc=4000.0, ls=ls, eta=1e-8),
    )
    return RunConfig(
        mesh=mesh,
        materials={"Glass": glass, "Steel": steel},
        boundary_conditions=(),
        pins=(Pin((0.0, 0.0), (0, 1)), Pin((length, 0.0), (1,))),
        load=LoadProgram(uMax=0.0, tMax=1.0, delt=1.0 / steps, T0=T0,
                         TAppMax=T0, ramp_kind="prescribed_uniform",
                         T_end=T0 - T_drop),
        staggered=StaggeredConfig(),
        output=OutputConfig(dir=out_dir, cadence=max(steps // 10, 1),
                            reaction_tag=None),
    )


QUENCH_LENGTH = 0.05
QUENCH_HEIGHT = 4.9e-3


def quench(T_initial: float = 680.0, scale: float = 1.0, steps: int = 150,
           t_end: float = 2e-4, out_dir: str | None = None) -> RunConfig:
    """Quarter model of a hot ceramic slab quenched to 300 K through its
    outer bottom/left faces; symmetry planes on the right/top edges."""
    _check_scale(scale)
    ls = QUENCH_LENGTH / 250.0 / scale
    h = ls / 2.0
    return RunConfig(
        mesh={"generate": {"kind": "rect", "width": QUENCH_LENGTH,
                           "height": QUENCH_HEIGHT, "h": h}},
        materials={"domain": Material(
            ElasticLaw(32e9, 0.2, "plane_stress"),
            ThermalLaw(k0=300.0, rho=2450.0, c=0.775, alpha=8e-6, T0=T_initial),
            FractureLaw(Gc=3.0, ls=ls, eta=1e-8),
            degrade_k=False,
        )},
        boundary_conditions=(
            BoundaryCondition("RightEdge", u=(0.0, None)),
            BoundaryCondition("TopEdge", u=(None, 0.0)),
            BoundaryCondition("BottomEdge", T=300.0),
            BoundaryCondition("LeftEdge", T=300.0),
        ),
        load=LoadProgram(uMax=0.0, tMax=t_end, delt=t_end / steps,
                         T0=T_initial, TAppMax=T_initial, ramp_kind="none"),
        staggered=StaggeredConfig(),
        output=OutputConfig(dir=out_dir or f"out/quench-{T_initial:.0f}",
                            cadence=max(steps // 6, 1), reaction_tag=None),
    )


def build_example(name: str, scale: float = 1.0, out_dir: str | None = None,
                  **kwargs) -> RunConfig:
    """Materialize a named built-in benchmark configuration."""
    builders = {
        "sent": lambda: sent(scale=scale, out_dir=out_dir or "out/sent", **kwargs),
        "cruciform-mech": lambda: cruciform("mech", scale=scale, out_dir=out_dir,
                                            **kwargs),
        "cruciform-thermal": lambda: cruciform("thermal", scale=scale,
                                               out_dir=out_dir, **kwargs),
        "cruciform-combined": lambda: cruciform("combined", scale=scale,
                                                out_dir=out_dir, **kwargs),
        "bimaterial": lambda: bimaterial(scale=scale,
                                         out_dir=out_dir or "out/bimaterial",
                                         **kwargs),
        "quench-680": lambda: quench(680.0, scale=scale, out_dir=out_dir, **kwargs),
        "quench-880": lambda: quench(880.0, scale=scale, out_dir=out_dir, **kwargs),
    }
    if name not in builders:
        raise ConfigError(f"unknown example {name!r}; valid names: "
                          + ", ".join(EXAMPLE_NAMES))
    return builders[name]()
