"""Forward Euler finite-volume update and run driver."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from grpburgers.errors import BlowUpError, ConfigError
from grpburgers.flux import C1_DEFAULT, FluxBreakdown, check_c1, face_fluxes
from grpburgers.mesh import Field, Mesh, project
from grpburgers.profiles import ConstantProfile, SineProfile

logger = logging.getLogger(__name__)

SCHEMES = ("stabilized", "grp")
DT_EXPONENT_MIN = 4.0 / 3.0
#: Guards the CFL quotient for an identically zero state.
EPS_SPEED = 1e-30


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one run.

    ``dt = min(c2 * h**p, cfl * h / (dim * max|u0|))``, computed once from
    the initial state and kept fixed except for a shortened last step.
    ``scheme="grp"`` runs the unstabilized flux (for demonstrations only).
    """

    dim: int = 2
    n: int = 32
    t_end: float = 0.2
    c1: float = C1_DEFAULT
    c2: float = 0.5
    p: float = 1.5
    cfl: float = 0.5
    initial: Any = field(default_factory=SineProfile)
    output_every: int = 0
    scheme: str = "stabilized"
    entropy_inequality: bool = False

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise ConfigError(f"dim must be 1, 2 or 3, got {self.dim}")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n}")
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ConfigError(f"t_end must be finite and >= 0, got {self.t_end}")
        check_c1(self.c1)
        if not self.c2 > 0:
            raise ConfigError(f"C2 must be positive, got {self.c2}")
        if self.p < DT_EXPONENT_MIN - 1e-12:
            raise ConfigError(f"dt exponent p must satisfy p >= 4/3, got {self.p}")
        if self.entropy_inequality and self.p <= DT_EXPONENT_MIN + 1e-12:
            raise ConfigError("entropy-inequality checks need p > 4/3")
        if not 0 < self.cfl <= 1:
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.output_every < 0:
            raise ConfigError("output_every must be >= 0")

    @property
    def mesh(self) -> Mesh:
        return Mesh(self.dim, self.n)

    @property
    def stabilized(self) -> bool:
        return self.scheme == "stabilized"

    def replace(self, **changes) -> RunConfig:
        from dataclasses import replace

        return replace(self, **changes)


def choose_dt(config: RunConfig, max_abs_u: float) -> tuple[float, bool]:
    """Time step and whether the CFL branch is the binding one."""
    h = config.mesh.h
    dt_power = config.c2 * h**config.p
    dt_cfl = config.cfl * h / (config.dim * max(abs(max_abs_u), EPS_SPEED))
    return min(dt_power, dt_cfl), dt_cfl < dt_power


def step_count(t_end: float, dt: float) -> int:
    """Number of steps to reach ``t_end``; the last one may be shorter."""
    if t_end == 0:
        return 0
    ratio = t_end / dt
    nearest = round(ratio)
    if nearest >= 1 and abs(ratio - nearest) <= 1e-9 * ratio:
        return nearest
    return math.ceil(ratio)


def update(values: np.ndarray, mesh: Mesh, dt: float, c1: float = C1_DEFAULT,
           stabilized: bool = True) -> tuple[np.ndarray, list[FluxBreakdown]]:
    """One forward Euler step; returns the new cell values and the face data."""
    fluxes = face_fluxes(values, mesh, dt, c1, stabilized)
    rhs = np.zeros(mesh.shape)
    for fb in fluxes:
        # cell K owns the face with index K as its "+" face
        rhs += fb.f_new - mesh.minus_neighbor(fb.f_new, fb.axis)
    return values - (dt / mesh.h) * rhs, fluxes


def step(field_: Field, config: RunConfig, dt: float | None = None) -> Field:
    """Advance ``field_`` by ``dt`` (default from :func:`choose_dt`)."""
    if dt is None:
        dt, _ = choose_dt(config, field_.max_abs())
    new, _ = update(field_.values, field_.mesh, dt, config.c1, config.stabilized)
    if not np.all(np.isfinite(new)):
        raise BlowUpError("non-finite state after one step", last_field=field_, step=0)
    return Field(field_.mesh, new, field_.time + dt)


@dataclass(frozen=True, eq=False)
class StepRecord:
    """What observers see after each step."""

    index: int
    dt: float
    old: Field
    new: Field
    fluxes: list[FluxBreakdown]


@dataclass(frozen=True)
class StepStats:
    index: int
    t: float
    dt: float
    mass: float
    max_abs_u: float
    courant: float


@dataclass
class Trajectory:
    """Snapshots at the output cadence plus per-step statistics.

    The first and last states are always kept.  With ``output_every=1``
    every time level is stored.
    """

    config: RunConfig
    dt: float
    cfl_binds: bool
    snapshots: list[Field] = field(default_factory=list)
    steps: list[StepStats] = field(default_factory=list)

    @property
    def initial(self) -> Field:
        return self.snapshots[0]

    @property
    def final(self) -> Field:
        return self.snapshots[-1]

    @property
    def times(self) -> list[float]:
        return [f.time for f in self.snapshots]

    def mass_drift(self) -> float:
        """Largest relative deviation of the mass from its initial value."""
        m0 = self.initial.mass()
        scale = max(abs(m0), self.initial.mesh.cell_volume
                    * float(np.sum(np.abs(self.initial.values))), 1e-300)
        return max((abs(s.mass - m0) / scale for s in self.steps), default=0.0)

    def max_abs_u(self) -> float:
        return max([self.initial.max_abs()] + [s.max_abs_u for s in self.steps])


Observer = Callable[[StepRecord], None]


def initial_field(config: RunConfig) -> Field:
    init = config.initial
    if isinstance(init, ConstantProfile):
        init = init.value  # exact fill instead of quadrature
    return project(init, config.mesh)


def run(config: RunConfig, observers: Sequence[Observer] = (),
        initial: Field | None = None) -> Trajectory:
    """Integrate from the projected initial data up to ``config.t_end``.

    ``observers`` are called after every step with a :class:`StepRecord`.
    A non-finite state raises :class:`BlowUpError` carrying the last finite
    field.
    """
    mesh = config.mesh
    current = initial if initial is not None else initial_field(config)
    dt, cfl_binds = choose_dt(config, current.max_abs())
    if cfl_binds:
        logger.info("CFL bound binds: dt=%.6g (n=%d)", dt, config.n)
    traj = Trajectory(config=config, dt=dt, cfl_binds=cfl_binds, snapshots=[current])
    nsteps = step_count(config.t_end, dt)
    for k in range(nsteps):
        last = k == nsteps - 1
        t_new = config.t_end if last else (k + 1) * dt
        dt_k = t_new - k * dt if last else dt
        with np.errstate(over="ignore", invalid="ignore"):
            new_values, fluxes = update(current.values, mesh, dt_k, config.c1,
                                        config.stabilized)
        if not np.all(np.isfinite(new_values)):
            raise BlowUpError(f"non-finite state at step {k} (t={current.time:.6g})",
                              last_field=current, step=k)
        new = Field(mesh, new_values, t_new)
        record = StepRecord(k, dt_k, current, new, fluxes)
        for obs in observers:
            obs(record)
        max_abs = new.max_abs()
        traj.steps.append(StepStats(k, t_new, dt_k, new.mass(), max_abs,
                                    dt_k * mesh.dim * max_abs / mesh.h))
        if last or (config.output_every and (k + 1) % config.output_every == 0):
            traj.snapshots.append(new)
        current = new
    return traj
