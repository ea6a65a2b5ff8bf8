"""Reference solutions, error norms and mesh-refinement studies.

Exact solutions are planar, ``u(x, t) = w(sum(x), t)``, so that Burgers' flux
``f(u) 1`` reduces to the scalar law ``w_t + d w w_s = 0``.
"""

from __future__ import annotations

import csv
import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from grpburgers.errors import BlowUpError, InputError
from grpburgers.mesh import QUADRATURE_POINTS, Field, Mesh, cell_average, fmt, gauss_nodes
from grpburgers.profiles import ConstantProfile, RiemannProfile, SineProfile
from grpburgers.stepper import RunConfig, run


def godunov_flux(u_minus, u_plus):
    """Exact Godunov flux of ``u^2/2`` in min/max form.

    ``min`` over ``[u^-, u^+]`` for ``u^- <= u^+``, ``max`` over
    ``[u^+, u^-]`` otherwise.  The convex flux attains its minimum at 0
    and its maximum at an endpoint.
    """
    um = np.asarray(u_minus, dtype=float)
    up = np.asarray(u_plus, dtype=float)
    fm, fp = 0.5 * um * um, 0.5 * up * up
    lower = np.where((um <= 0) & (up >= 0), 0.0, np.minimum(fm, fp))
    return np.where(um <= up, lower, np.maximum(fm, fp))


def _planar_coordinate(x: Sequence[np.ndarray]) -> np.ndarray:
    s = np.asarray(x[0], dtype=float)
    for xi in x[1:]:
        s = s + xi
    return s


def smooth_exact(profile, x: Sequence[np.ndarray], t: float, dim: int | None = None,
                 tol: float = 1e-13, max_iter: int = 200) -> np.ndarray:
    """Root of ``u = g(s - d u t)`` by bracketed Newton iteration.

    ``x`` holds one coordinate array per dimension.  Rejects ``t`` at or past
    the breaking time, where the root stops being unique.
    """
    dim = len(x) if dim is None else dim
    s = _planar_coordinate(x)
    if t == 0:
        return profile.g(s)
    t_star = profile.breaking_time(dim)
    if t >= t_star:
        raise InputError(f"t={t} is past the breaking time {t_star:.6g}")
    lo_val, hi_val = profile.bounds()
    lo = np.full(s.shape, float(lo_val))
    hi = np.full(s.shape, float(hi_val))
    u = profile.g(s)
    for _ in range(max_iter):
        arg = s - dim * u * t
        resid = u - profile.g(arg)
        # resid is increasing in u for t < t_star
        lo = np.where(resid < 0, u, lo)
        hi = np.where(resid > 0, u, hi)
        slope = 1.0 + dim * t * profile.dg(arg)
        newton = u - resid / slope
        inside = (newton > lo) & (newton < hi)
        u_next = np.where(inside, newton, 0.5 * (lo + hi))
        u_next = np.where(resid == 0, u, u_next)
        done = np.max(np.abs(u_next - u), initial=0.0) <= tol
        u = u_next
        if done:
            return u
    raise RuntimeError("smooth_exact: no convergence within the iteration limit")


@dataclass(frozen=True)
class _Wave:
    centre: float
    left: float
    right: float

    def extent(self, dim: int, t: float) -> tuple[float, float]:
        if self.left > self.right:
            x = self.centre + dim * t * 0.5 * (self.left + self.right)
            return x, x
        return self.centre + dim * t * self.left, self.centre + dim * t * self.right


def riemann_interaction_time(u_left: float, u_right: float, position: float,
                             dim: int) -> float:
    """First time the two waves of periodic planar Riemann data touch."""
    if u_left == u_right:
        return math.inf
    a0, a1 = _Wave(position, u_left, u_right).extent(dim, 1.0)
    b0, b1 = _Wave(1.0, u_right, u_left).extent(dim, 1.0)
    times = []
    # gaps a1 < b0 and b1 - 1 < a0, linear in t
    for gap0, rate in ((1.0 - position, (b0 - 1.0) - (a1 - position)),
                       (position, (a0 - position) - (b1 - 1.0))):
        if rate < 0:
            times.append(gap0 / -rate)
    return min(times, default=math.inf)


def planar_riemann_exact(u_left: float, u_right: float, x: Sequence[np.ndarray],
                         t: float, position: float = 0.5,
                         dim: int | None = None) -> np.ndarray:
    """Entropy solution for periodic planar Riemann data.

    The data of :class:`~grpburgers.profiles.RiemannProfile` jump twice per
    period: ``u_left -> u_right`` at ``s = position`` and back at ``s = 0``.
    Each jump evolves as an isolated shock or fan until the two waves meet;
    later times are rejected.
    """
    dim = len(x) if dim is None else dim
    s = _planar_coordinate(x)
    if u_left == u_right or t == 0:
        return RiemannProfile(u_left, u_right, position).g(s)
    first = _Wave(position, u_left, u_right)
    second = _Wave(1.0, u_right, u_left)
    a0, a1 = first.extent(dim, t)
    b0, b1 = second.extent(dim, t)
    if not (a1 < b0 and b1 - 1.0 < a0):
        raise InputError(f"waves interact before t={t}; periodic horizon too long")
    # window [b1 - 1, b1): second wave's right edge, u_left, first wave,
    # u_right, second wave
    sw = (b1 - 1.0) + np.mod(s - (b1 - 1.0), 1.0)
    out = np.empty(s.shape)
    out[:] = u_right
    out[sw < a0] = u_left
    if a1 > a0:
        fan = (a0 <= sw) & (sw <= a1)
        out[fan] = ((sw - position) / (dim * t))[fan]
    if b1 > b0:
        fan = sw >= b0
        out[fan] = ((sw - 1.0) / (dim * t))[fan]
    else:
        out[sw >= b0] = u_left
    return out


class ExactSolution:
    """Callable ``exact(t, *x)`` for a planar profile, evaluated in closed form."""

    def __init__(self, profile, dim: int):
        self.profile = profile
        self.dim = dim
        if isinstance(profile, SineProfile):
            self.kind = "smooth-characteristics"
        elif isinstance(profile, RiemannProfile):
            self.kind = "planar-riemann"
        elif isinstance(profile, ConstantProfile):
            self.kind = "constant"
        else:
            raise InputError(f"no closed-form solution for {profile!r}")

    def valid_until(self) -> float:
        if self.kind == "smooth-characteristics":
            return self.profile.breaking_time(self.dim)
        if self.kind == "planar-riemann":
            p = self.profile
            return riemann_interaction_time(p.u_left, p.u_right, p.position, self.dim)
        return math.inf

    def __call__(self, t: float, *x):
        p = self.profile
        if self.kind == "smooth-characteristics":
            return smooth_exact(p, x, t, self.dim)
        if self.kind == "planar-riemann":
            return planar_riemann_exact(p.u_left, p.u_right, x, t, p.position, self.dim)
        return p(*x)


def restrict(fine: Field, coarse_mesh: Mesh) -> Field:
    """Average a fine field onto a coarser mesh whose ``n`` divides it."""
    factor, rem = divmod(fine.mesh.n, coarse_mesh.n)
    if rem or fine.mesh.dim != coarse_mesh.dim:
        raise InputError("fine mesh must refine the coarse mesh by an integer factor")
    shape = []
    for _ in range(coarse_mesh.dim):
        shape += [coarse_mesh.n, factor]
    v = fine.values.reshape(shape)
    return Field(coarse_mesh, v.mean(axis=tuple(range(1, 2 * coarse_mesh.dim, 2))),
                 fine.time)


def fine_grid_reference(config: RunConfig, factor: int = 8) -> Field:
    """Self-convergence reference: same scheme, ``factor`` times finer, half the step.

    The step is halved relative to the fine grid's own power-law step.
    """
    fine_cfg = config.replace(n=config.n * factor, c2=config.c2 / 2.0,
                              cfl=config.cfl / 2.0, output_every=0)
    return restrict(run(fine_cfg).final, config.mesh)


def error_norms(field_: Field, exact, p: float | str = 1, *, mode: str = "average",
                points: int = QUADRATURE_POINTS) -> float:
    """``L^p`` distance between ``field_`` and a reference.

    ``exact`` is a :class:`Field` on the same mesh, a constant, or a
    callable ``exact(*x)`` at ``field_.time``.  ``mode="average"`` compares cell values
    with the cell averages of the reference (the usual finite-volume error);
    ``mode="pointwise"`` integrates ``|u_h - u|^p`` with the projection
    quadrature, which includes the ``O(h)`` piecewise-constant
    approximation error.  ``p`` is 1, 2 or ``"inf"``.
    """
    mesh = field_.mesh
    vol = mesh.cell_volume
    if p in ("inf", math.inf, np.inf):
        p = math.inf
    elif p not in (1, 2):
        raise InputError(f"p must be 1, 2 or 'inf', got {p!r}")
    if isinstance(exact, Field):
        diff = field_.values - exact.values
        return _norm(diff, vol, p)
    if not callable(exact):
        # constant reference, compared without quadrature rounding
        return _norm(field_.values - float(exact), vol, p)
    if mode == "average":
        ref = cell_average(exact, mesh, points)
        return _norm(field_.values - ref, vol, p)
    if mode != "pointwise":
        raise InputError(f"unknown error mode {mode!r}")
    nodes, weights = gauss_nodes(points)
    corner = np.arange(mesh.n) * mesh.h
    lower = np.meshgrid(*([corner] * mesh.dim), indexing="ij")
    acc = np.zeros(mesh.shape)
    worst = 0.0
    for combo in np.ndindex(*([points] * mesh.dim)):
        x = tuple(lower[a] + nodes[q] * mesh.h for a, q in enumerate(combo))
        diff = np.abs(field_.values - exact(*x))
        if p == math.inf:
            worst = max(worst, float(diff.max()))
        else:
            acc += math.prod(weights[q] for q in combo) * diff**p
    if p == math.inf:
        return worst
    return float((vol * acc.sum()) ** (1.0 / p))


def _norm(diff: np.ndarray, vol: float, p: float) -> float:
    a = np.abs(diff)
    if p == math.inf:
        return float(a.max())
    return float((vol * np.sum(a**p)) ** (1.0 / p))


def eoc(coarse: float, fine: float) -> float:
    """``log2(e_h / e_{h/2})``; NaN when either error is zero or missing."""
    if not (coarse > 0 and fine > 0) or not (math.isfinite(coarse) and math.isfinite(fine)):
        return math.nan
    return math.log2(coarse / fine)


CONVERGENCE_COLUMNS = ("level", "n", "h", "dt", "L1", "L2", "Linf",
                       "EOC1", "EOC2", "EOCinf", "runtime_seconds")


@dataclass
class ConvergenceRow:
    level: int
    n: int
    h: float
    dt: float
    errors: dict[str, float]
    eoc: dict[str, float] = field(default_factory=dict)
    runtime_seconds: float = math.nan
    failed: str = ""


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow]
    reference: str
    timing: bool = False

    def column(self, name: str) -> list[float]:
        return [r.errors[name] for r in self.rows]

    def write_csv(self, stream: IO[str]) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(CONVERGENCE_COLUMNS)
        for r in self.rows:
            def num(x):
                return "" if x is None or not math.isfinite(x) else fmt(x)
            writer.writerow([
                r.level, r.n, fmt(r.h), fmt(r.dt),
                *(num(r.errors.get(k, math.nan)) for k in ("L1", "L2", "Linf")),
                *(num(r.eoc.get(k, math.nan)) for k in ("L1", "L2", "Linf")),
                num(r.runtime_seconds) if self.timing else "",
            ])


def convergence_study(template: RunConfig, levels: Sequence[int], *,
                      reference: str = "exact", mode: str = "average",
                      timing: bool = False,
                      observers: Callable[[RunConfig], Sequence] | None = None,
                      on_level: Callable[..., None] | None = None
                      ) -> ConvergenceTable:
    """Run ``template`` at every ``n`` in ``levels`` and tabulate errors at ``t_end``.

    ``reference="exact"`` uses the closed-form planar solution;
    ``"fine-grid"`` uses :func:`fine_grid_reference`.  A blow-up on one level
    is recorded in that row and the remaining levels still run.

    ``observers(cfg)`` builds fresh step observers for each level; after a
    successful level ``on_level(cfg, traj, observers)`` is called.
    """
    rows: list[ConvergenceRow] = []
    exact = None
    if reference == "exact":
        exact = ExactSolution(template.initial, template.dim)
        if template.t_end >= exact.valid_until():
            raise InputError(
                f"exact {exact.kind} solution invalid at t={template.t_end}; "
                "use the fine-grid reference")
    elif reference != "fine-grid":
        raise InputError(f"unknown reference {reference!r}")
    for level, n in enumerate(levels):
        cfg = template.replace(n=int(n))
        start = time.perf_counter()
        row = ConvergenceRow(level, cfg.n, cfg.mesh.h, math.nan, {})
        level_obs = list(observers(cfg)) if observers is not None else []
        try:
            traj = run(cfg, level_obs)
        except BlowUpError as exc:
            row.failed = str(exc)
            row.errors = {k: math.nan for k in ("L1", "L2", "Linf")}
            rows.append(row)
            continue
        row.dt = traj.dt
        final = traj.final
        if exact is not None and exact.kind == "constant":
            ref = float(template.initial.value)
        elif exact is not None:
            def ref(*x, _t=final.time):
                return exact(_t, *x)
        else:
            ref = fine_grid_reference(cfg)
        row.errors = {
            "L1": error_norms(final, ref, 1, mode=mode),
            "L2": error_norms(final, ref, 2, mode=mode),
            "Linf": error_norms(final, ref, "inf", mode=mode),
        }
        row.runtime_seconds = time.perf_counter() - start
        if on_level is not None:
            on_level(cfg, traj, level_obs)
        rows.append(row)
    for prev, cur in zip(rows, rows[1:]):
        cur.eoc = {k: eoc(prev.errors[k], cur.errors[k]) for k in ("L1", "L2", "Linf")}
    return ConvergenceTable(rows, reference, timing)
