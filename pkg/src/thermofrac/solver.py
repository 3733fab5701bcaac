"""Load programs and the staggered time-stepping loop.

Each pseudo-time step alternates between the linear phase-field solve and the
coupled displacement-temperature solve, with the history field updated from
the tensile energy after every pass. The inner residual is evaluated on the
incoming phase field against the freshly projected history before the solves,
and convergence is checked after them; running past the iteration cap is
logged, not fatal.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import fem
from .errors import SolveError
from .materials import trace
from .mesh import Mesh, boundary_nodes

log = logging.getLogger(__name__)

RAMP_KINDS = ("smooth", "linear", "prescribed_uniform", "none")


@dataclass(frozen=True)
class LoadProgram:
    """Displacement and boundary-temperature schedule over pseudo-time.

    The applied displacement grows linearly to ``uMax`` over ``tMax``; the
    applied temperature follows the selected ramp as a function of the applied
    displacement (``smooth``: mollified step, ``linear``: linear up to
    ``uTran`` then constant). ``prescribed_uniform`` instead cools/heats the
    whole domain linearly from ``T0`` to ``T_end`` and skips the heat solve.
    """

    uMax: float
    tMax: float
    delt: float
    T0: float
    TAppMax: float
    uTran: float = 0.0
    ramp_kind: str = "none"
    T_end: float | None = None

    def __post_init__(self):
        if not 0.0 < self.delt <= self.tMax:
            raise ValueError(f"need 0 < delt <= tMax, got delt={self.delt}, tMax={self.tMax}")
        if not 0.0 <= self.uTran <= self.uMax:
            raise ValueError(f"need 0 <= uTran <= uMax, got uTran={self.uTran}")
        if self.ramp_kind not in RAMP_KINDS:
            raise ValueError(f"unknown ramp kind {self.ramp_kind!r}")
        if self.ramp_kind == "prescribed_uniform" and self.T_end is None:
            raise ValueError("prescribed_uniform ramp requires T_end")

    @property
    def hS(self) -> float:
        return self.uMax / 10.0

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.tMax / self.delt + 1e-9))

    def displacement(self, t: float) -> float:
        return self.uMax * t / self.tMax

    def temperature(self, t: float) -> float:
        if self.ramp_kind == "none":
            return self.T0
        if self.ramp_kind == "prescribed_uniform":
            return self.T0 + (self.T_end - self.T0) * t / self.tMax
        u = self.displacement(t)
        if self.ramp_kind == "smooth":
            return ramp_smooth(u, self)
        return ramp_linear(u, self)


def _norm_cdf(z):
    return 0.5 * (1.0 + np.vectorize(math.erf)(np.asarray(z) / math.sqrt(2.0)))


def ramp_smooth(uApp: float, prog: LoadProgram) -> float:
    """Mollified temperature step, in closed form.

    Convolution of the indicator of ``[-4 hS, uTran]`` scaled by ``T0 -
    TAppMax`` with a Gaussian of width ``hS``, shifted by ``TAppMax``: a
    difference of Gaussian CDFs. Monotone from near ``T0`` at 0 toward
    ``TAppMax`` at ``uMax``.
    """
    hS = prog.hS
    frac = (_norm_cdf((prog.uTran - uApp) / hS)
            - _norm_cdf((-4.0 * hS - uApp) / hS))
    return float(prog.TAppMax + (prog.T0 - prog.TAppMax) * frac)


def ramp_linear(uApp: float, prog: LoadProgram) -> float:
    """Temperature rising linearly until ``uTran`` and constant afterwards."""
    if prog.uTran == 0.0 or uApp >= prog.uTran:
        return float(prog.TAppMax)
    return float(prog.T0 + (prog.TAppMax - prog.T0) * uApp / prog.uTran)


@dataclass(frozen=True)
class StaggeredConfig:
    tol: float = 1e-8
    innerMax: int = 10

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.innerMax < 1:
            raise ValueError("innerMax must be at least 1")


@dataclass
class SimState:
    """Nodal fields, the quad-point history field and the pseudo-time."""

    u: np.ndarray
    s: np.ndarray
    T: np.ndarray
    H: np.ndarray
    t: float = 0.0
    step: int = 0

    @classmethod
    def initial(cls, disc: fem.Discretization) -> "SimState":
        n = disc.n_nodes
        return cls(
            u=np.zeros((n, 2)),
            s=np.ones(n),
            T=np.full(n, disc.T0_value),
            H=np.zeros((len(disc.area), 3)),
        )


@dataclass
class RunRecord:
    """Per-step summary row (plus diagnostics not written to the CSV)."""

    t: float
    u_app: float
    T_app: float
    Fx: float
    Fy: float
    inner_iters: int
    rel_err: float
    converged: bool = True
    s_min: float = 1.0
    s_max: float = 1.0
    H_delta_min: float = 0.0
    entropy_production: float = float("nan")


# -- boundary condition plumbing -------------------------------------------------


@dataclass(frozen=True)
class DisplacementBC:
    """Per-tag displacement constraint: each component is None (free), a fixed
    value, or ("ramp", scale) following the applied displacement."""

    tag: str
    components: tuple = (None, None)


@dataclass(frozen=True)
class TemperatureBC:
    """Per-tag temperature constraint: a fixed value, "reference" (T0) or
    ("ramp", scale) applying T0 + scale * (TApp - T0)."""

    tag: str
    value: object = "reference"


@dataclass(frozen=True)
class Pin:
    """Point constraint at the node nearest to ``at``."""

    at: tuple[float, float]
    components: tuple[int, ...]
    value: float = 0.0


@dataclass
class Problem:
    """Everything one benchmark needs: discretization, programs and BCs."""

    disc: fem.Discretization
    prog: LoadProgram
    staggered: StaggeredConfig = field(default_factory=StaggeredConfig)
    displacement_bcs: list[DisplacementBC] = field(default_factory=list)
    temperature_bcs: list[TemperatureBC] = field(default_factory=list)
    pins: list[Pin] = field(default_factory=list)
    reaction_tag: str | None = None

    @property
    def mesh(self) -> Mesh:
        return self.disc.mesh

    @property
    def prescribed_uniform(self) -> bool:
        return self.prog.ramp_kind == "prescribed_uniform"

    def _pin_node(self, at) -> int:
        d = np.hypot(self.mesh.nodes[:, 0] - at[0], self.mesh.nodes[:, 1] - at[1])
        return int(np.argmin(d))

    def mech_constraints(self, vApp: float) -> list[tuple[int, float]]:
        stride = 2 if self.prescribed_uniform else 3
        out = []
        for bc in self.displacement_bcs:
            nodes = boundary_nodes(self.mesh, bc.tag)
            for comp, spec in enumerate(bc.components):
                if spec is None:
                    continue
                if isinstance(spec, tuple) and spec[0] == "ramp":
                    value = vApp * spec[1]
                else:
                    value = float(spec)
                out.extend((stride * int(n) + comp, value) for n in nodes)
        for pin in self.pins:
            node = self._pin_node(pin.at)
            out.extend((stride * node + comp, pin.value) for comp in pin.components)
        return out

    def temp_constraints(self, TApp: float) -> list[tuple[int, float]]:
        T0 = self.prog.T0
        out = []
        for bc in self.temperature_bcs:
            nodes = boundary_nodes(self.mesh, bc.tag)
            if bc.value == "reference":
                value = T0
            elif isinstance(bc.value, tuple) and bc.value[0] == "ramp":
                value = T0 + bc.value[1] * (TApp - T0)
            else:
                value = float(bc.value)
            out.extend((3 * int(n) + 2, value) for n in nodes)
        return out


# -- staggered iteration ----------------------------------------------------------


def rel_err(disc: fem.Discretization, s: np.ndarray, H_nodal: np.ndarray) -> float:
    """Relative phase-field residual |a(s,s) - b(s)| / |b(s)| for a given
    nodal history field."""
    system = fem.assemble_phase_field(disc, H_nodal)
    return _rel_err_from(system, s)


def rel_err_quad(disc: fem.Discretization, s: np.ndarray, H_quad: np.ndarray) -> float:
    """Residual against a quad-point history field (the in-loop form)."""
    return _rel_err_from(fem.assemble_phase_field_quad(disc, H_quad), s)


def _rel_err_from(system: fem.LinearSystem, s: np.ndarray) -> float:
    denom = abs(float(system.b @ s))
    if denom == 0.0:
        raise SolveError("phase-field residual undefined: b(s) vanished "
                         "(fully cracked or zero field)")
    num = abs(float(s @ (system.A @ s)) - float(system.b @ s))
    return num / denom


def update_history(H: np.ndarray, psi_now: np.ndarray) -> np.ndarray:
    """Pointwise running maximum enforcing damage irreversibility."""
    return np.maximum(H, psi_now)


def entropy_production(disc: fem.Discretization, s: np.ndarray, T: np.ndarray) -> float:
    """Discrete conduction entropy production, integral of (k / T) |grad T|^2.

    Meaningful only on an absolute temperature scale; NaN when T <= 0 anywhere.
    """
    Tq = disc.at_quad(T)
    if np.any(Tq <= 0.0):
        return float("nan")
    gradT = np.einsum("eax,ea->ex", disc.gradN, T[disc.mesh.elements])
    sq = disc.at_quad(s)
    g = sq * sq + disc.eta[:, None]
    kq = np.where(disc.degrade_k[:, None], g * disc.k0[:, None], disc.k0[:, None])
    dens = (kq / Tq) * (gradT[:, None, 0] ** 2 + gradT[:, None, 1] ** 2)
    return float(np.sum(dens * (disc.area / 3.0)[:, None]))


def step(state: SimState, problem: Problem) -> tuple[SimState, RunRecord]:
    """Advance one pseudo-time step with the staggered inner loop."""
    disc = problem.disc
    prog = problem.prog
    cfg = problem.staggered

    t = state.t + prog.delt
    vApp = prog.displacement(t)
    TApp = prog.temperature(t)

    u, s, T, H = state.u, state.s, state.T, state.H
    H_before = H
    rel = math.inf
    inner_used = cfg.innerMax
    converged = False

    mech = fem.merge_constraints(problem.mech_constraints(vApp))
    if not problem.prescribed_uniform:
        coupled_constraints = dict(mech)
        coupled_constraints.update(fem.merge_constraints(problem.temp_constraints(TApp)))

    for inner in range(1, cfg.innerMax + 1):
        # the element-local history projection evaluates back to the quad
        # values, so the system is assembled from them directly
        pf_system = fem.assemble_phase_field_quad(disc, H)
        rel = _rel_err_from(pf_system, s)
        s = fem.solve(pf_system)

        if problem.prescribed_uniform:
            system = fem.assemble_coupled(disc, u, s, T, prog.delt, prescribed_T=TApp)
            x = fem.solve(fem.apply_dirichlet(system, mech))
            u = x.reshape(-1, 2)
            T = np.full(disc.n_nodes, TApp)
        else:
            system = fem.assemble_coupled(disc, u, s, T, prog.delt)
            x = fem.solve(fem.apply_dirichlet(system, coupled_constraints))
            fields = x.reshape(-1, 3)
            u, T = fields[:, :2], fields[:, 2]

        H = update_history(H, disc.psi_plus_q(u, T))

        if rel < cfg.tol:
            inner_used = inner
            converged = True
            break

    if not converged:
        log.info("step %d: inner loop hit the cap (%d) with RelErr %.3e",
                 state.step + 1, cfg.innerMax, rel)

    new_state = SimState(u=u, s=s, T=T, H=H, t=t, step=state.step + 1)
    force = np.zeros(2)
    if problem.reaction_tag is not None:
        force = fem.reaction_force(disc, problem.reaction_tag, u, s, T)

    record = RunRecord(
        t=t, u_app=vApp, T_app=TApp, Fx=float(force[0]), Fy=float(force[1]),
        inner_iters=inner_used, rel_err=float(rel), converged=converged,
        s_min=float(s.min()), s_max=float(s.max()),
        H_delta_min=float((H - H_before).min()),
        entropy_production=entropy_production(disc, s, T),
    )
    return new_state, record


def run(problem: Problem, snapshot_every: int = 0, snapshot_cb=None
        ) -> tuple[list[RunRecord], list[tuple[int, SimState]]]:
    """Execute the whole load program.

    Returns one record per step plus the leading zero record, and the state
    snapshots (pairs of step index and state) taken every ``snapshot_every``
    steps and at the end. A callback receives each snapshot instead when
    given.
    """
    disc = problem.disc
    state = SimState.initial(disc)
    records = [RunRecord(t=0.0, u_app=0.0, T_app=problem.prog.T0, Fx=0.0, Fy=0.0,
                         inner_iters=0, rel_err=0.0)]
    snapshots: list[tuple[int, SimState]] = []

    def emit(st):
        snap = (st.step, replace(st, u=st.u.copy(), s=st.s.copy(),
                                 T=st.T.copy(), H=st.H.copy()))
        if snapshot_cb is not None:
            snapshot_cb(*snap)
        else:
            snapshots.append(snap)

    n = problem.prog.n_steps
    for k in range(1, n + 1):
        try:
            state, record = step(state, problem)
        except SolveError as exc:
            raise SolveError(f"step {k}/{n}: {exc}") from exc
        records.append(record)
        if snapshot_every and k % snapshot_every == 0 and k != n:
            emit(state)
    if n >= 1:
        emit(state)
    return records, snapshots
