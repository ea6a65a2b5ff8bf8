"""Entropy balance, weak-BV and consistency diagnostics, and bound audits.

Entropy pair: ``eta = u^2/2`` with flux ``q = u^3/3`` per direction and
potential ``psi = u^3/6``.  For consecutive states of the scheme and any
cellwise-constant ``phi`` the discrete balance

    int phi D_t eta - sum_faces |s| q_new [phi]
        = - sum |s| D_new [u]^2 <phi>
          - sum |s| (sum_j cross_j) [u] <phi>
          + dt/2 sum |K| phi_K (D_t u_K)^2,

with ``q_new = <u> f_new - <psi>``, holds to rounding.  The quadratic term
uses the actual update ``D_t u_K``, so it is built from the stabilized flux.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from grpburgers.errors import InputError
from grpburgers.flux import (
    C1_DEFAULT, FluxBreakdown, breakdown, burgers_flux, d_rp, entropy_potential,
    face_fluxes,
)
from grpburgers.mesh import Field, Mesh, cell_average, fmt
from grpburgers.reconstruction import gradients, reconstruct_faces
from grpburgers.stepper import StepRecord, Trajectory

EPS = np.finfo(float).eps


def entropy(u):
    return 0.5 * np.square(u)


def entropy_flux(u):
    return np.power(u, 3) / 3.0


def total_entropy(field_: Field) -> float:
    return field_.mesh.cell_volume * _fsum(entropy(field_.values))


def _as_cell_values(phi, mesh: Mesh) -> np.ndarray:
    if phi is None:
        return np.ones(mesh.shape)
    if isinstance(phi, Field):
        return phi.values
    out = np.broadcast_to(np.asarray(phi, dtype=float), mesh.shape)
    return np.array(out)


@dataclass(frozen=True)
class EntropyBalance:
    """Terms of the discrete entropy balance for one step."""

    time_term: float
    flux_term: float
    dissipation: float
    cross: float
    quad: float

    @property
    def lhs(self) -> float:
        return self.time_term - self.flux_term

    @property
    def rhs(self) -> float:
        return -self.dissipation - self.cross + self.quad

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs

    @property
    def scale(self) -> float:
        return max(abs(self.time_term), abs(self.flux_term), abs(self.dissipation),
                   abs(self.cross), abs(self.quad))


def _fsum(a: np.ndarray) -> float:
    # numpy's pairwise summation is plenty next to the 1e-11 balance tolerance
    return float(np.sum(a))


def entropy_balance(old: Field, new: Field, dt: float, fluxes: list[FluxBreakdown],
                    phi=None) -> EntropyBalance:
    """All terms of the entropy balance between ``old`` and ``new``.

    ``fluxes`` must be the face data used to produce ``new`` from ``old``;
    ``phi`` is a :class:`Field`, an array of cell values or ``None`` for 1.
    """
    mesh = old.mesh
    if new.mesh != mesh or len(fluxes) != mesh.dim:
        raise InputError("fields and flux breakdowns do not belong together")
    for fb in fluxes:
        if fb.rec.u_minus.shape != mesh.shape or not np.array_equal(fb.rec.u_minus,
                                                                     old.values):
            raise InputError("flux breakdowns were not computed from the old field")
    phi = _as_cell_values(phi, mesh)
    vol, area = mesh.cell_volume, mesh.face_area
    u0, u1 = old.values, new.values
    dtu = (u1 - u0) / dt
    time_term = vol * _fsum(phi * (entropy(u1) - entropy(u0)) / dt)
    quad = 0.5 * dt * vol * _fsum(phi * dtu * dtu)
    flux_term = dissipation = cross = 0.0
    for fb in fluxes:
        rec = fb.rec
        phi_plus = mesh.plus_neighbor(phi, fb.axis)
        phi_jump, phi_avg = phi_plus - phi, 0.5 * (phi + phi_plus)
        psi_avg = 0.5 * (entropy_potential(rec.u_minus) + entropy_potential(rec.u_plus))
        q_new = rec.avg * fb.f_new - psi_avg
        flux_term += area * _fsum(q_new * phi_jump)
        dissipation += area * _fsum(fb.p_new * rec.jump * phi_avg)
        cross += area * _fsum(fb.cross_sum * rec.jump * phi_avg)
    return EntropyBalance(time_term, flux_term, dissipation, cross, quad)


def entropy_balance_residual(old: Field, new: Field, dt: float,
                             fluxes: list[FluxBreakdown], phi=None) -> float:
    """``LHS - RHS`` of the entropy balance; zero up to rounding."""
    return entropy_balance(old, new, dt, fluxes, phi).residual


def stability_violations(fb: FluxBreakdown) -> np.ndarray:
    """Faces where ``D_new [u]^2 < C1 |[u]|^3`` beyond rounding."""
    jump = fb.jump
    lhs = fb.p_new * jump
    rhs = fb.c1 * np.abs(jump) ** 3
    rounding = 16 * EPS * (np.abs(fb.f_new) + np.abs(fb.f_ec)
                           + np.abs(fb.cross).sum(axis=0)) * np.abs(jump)
    return lhs < rhs - 1e-12 * (np.abs(lhs) + rhs) - rounding


def weak_bv_increment(field_: Field, dt: float) -> float:
    """``dt * sum_faces |s| |[u]|^3`` for one time level."""
    mesh = field_.mesh
    total = 0.0
    for axis in range(mesh.dim):
        jump = mesh.plus_neighbor(field_.values, axis) - field_.values
        total += _fsum(np.abs(jump) ** 3)
    return dt * mesh.face_area * total


REPORT_COLUMNS = ("t", "total_entropy", "balance_residual", "dissipation_sum",
                  "cross_sum", "quad_term", "weak_bv_accum", "max_abs_u", "violations")


@dataclass
class EntropyReport:
    """Per-step entropy diagnostics with ``phi = 1``; use as a run observer."""

    initial_entropy: float | None = None
    rows: list[dict] = field(default_factory=list)
    defects: list[float] = field(default_factory=list)
    scales: list[float] = field(default_factory=list)
    weak_bv: float = 0.0

    def __call__(self, rec: StepRecord) -> None:
        if self.initial_entropy is None:
            self.initial_entropy = total_entropy(rec.old)
        bal = entropy_balance(rec.old, rec.new, rec.dt, rec.fluxes)
        self.weak_bv += weak_bv_increment(rec.old, rec.dt)
        violations = sum(int(stability_violations(fb).sum()) for fb in rec.fluxes)
        self.defects.append(bal.lhs)
        self.scales.append(bal.scale)
        self.rows.append({
            "t": rec.new.time,
            "total_entropy": total_entropy(rec.new),
            "balance_residual": bal.residual,
            "dissipation_sum": bal.dissipation,
            "cross_sum": bal.cross,
            "quad_term": bal.quad,
            "weak_bv_accum": self.weak_bv,
            "max_abs_u": rec.new.max_abs(),
            "violations": violations,
        })

    def entropy_increments(self) -> np.ndarray:
        """``E_{k+1} - E_k`` for every step."""
        e = [self.initial_entropy] + [r["total_entropy"] for r in self.rows]
        return np.diff(np.array(e, dtype=float))

    def max_relative_residual(self) -> float:
        return max((abs(r["balance_residual"]) / s if s > 0 else abs(r["balance_residual"])
                    for r, s in zip(self.rows, self.scales)), default=0.0)

    def total_violations(self) -> int:
        return sum(r["violations"] for r in self.rows)

    def write_csv(self, stream: IO[str]) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for r in self.rows:
            writer.writerow([fmt(r[c]) if c != "violations" else r[c]
                             for c in REPORT_COLUMNS])


def _require_full(traj: Trajectory) -> None:
    if len(traj.snapshots) != len(traj.steps) + 1:
        raise InputError("trajectory must store every time level (output_every=1)")


def _consecutive(traj: Trajectory):
    _require_full(traj)
    for stats, old, new in zip(traj.steps, traj.snapshots, traj.snapshots[1:]):
        yield stats.dt, old, new


def weak_bv_accumulate(traj: Trajectory, tau: float | None = None) -> float:
    """``sum_k dt_k sum_faces |s| |[u^k]|^3`` over steps starting before ``tau``."""
    total = 0.0
    for dt, old, _ in _consecutive(traj):
        if tau is not None and old.time >= tau:
            break
        total += weak_bv_increment(old, dt)
    return total


class WeakBV:
    """Observer form of :func:`weak_bv_accumulate`."""

    def __init__(self):
        self.value = 0.0
        self.history: list[tuple[float, float]] = []

    def __call__(self, rec: StepRecord) -> None:
        self.value += weak_bv_increment(rec.old, rec.dt)
        self.history.append((rec.new.time, self.value))


@dataclass(frozen=True)
class EntropyInequalityResult:
    max_defect: float
    normalized: float
    bound: float
    passed: bool


class EntropyInequality:
    """Tracks ``int phi D_t eta - sum |s| q_new [phi]`` step by step."""

    def __init__(self, phi=None):
        self.phi = phi
        self.defects: list[float] = []
        self.scales: list[float] = []
        self.dts: list[float] = []

    def __call__(self, rec: StepRecord) -> None:
        bal = entropy_balance(rec.old, rec.new, rec.dt, rec.fluxes, self.phi)
        self.defects.append(bal.lhs)
        self.scales.append(bal.scale)
        self.dts.append(rec.dt)

    def result(self, h: float, c_ei: float = 1.0) -> EntropyInequalityResult:
        dt = max(self.dts, default=0.0)
        worst = max(self.defects, default=0.0)
        unit = dt * h ** (-4.0 / 3.0)
        normalized = worst / unit if unit > 0 else 0.0
        bound = c_ei * unit
        return EntropyInequalityResult(worst, normalized, bound, worst <= bound)


def entropy_inequality_check(traj: Trajectory, phi=None,
                             c_ei: float = 1.0) -> EntropyInequalityResult:
    """Largest per-step entropy defect against ``c_ei * dt * h^(-4/3)``.

    ``phi`` must be nonnegative.  Face data are recomputed from the stored
    states with the trajectory's configuration.
    """
    cfg = traj.config
    if phi is not None and np.any(_as_cell_values(phi, cfg.mesh) < 0):
        raise InputError("entropy inequality needs a nonnegative test field")
    obs = EntropyInequality(phi)
    for k, (dt, old, new) in enumerate(_consecutive(traj)):
        fluxes = face_fluxes(old.values, old.mesh, dt, cfg.c1, cfg.stabilized)
        obs(StepRecord(k, dt, old, new, fluxes))
    return obs.result(cfg.mesh.h, c_ei)


# {{{ consistency residuals

def _planar(x):
    s = x[0]
    for xi in x[1:]:
        s = s + xi
    return s


@dataclass(frozen=True)
class TestFunction:
    """``phi(t, x) = (1 + rate * t) * psi(x)`` with ``psi`` smooth and periodic.

    ``gradient_sum`` is ``sum_i d psi / d x_i``, which is all the flux term
    of Burgers' equation needs.
    """

    psi: Callable[..., np.ndarray]
    gradient_sum: Callable[..., np.ndarray]
    rate: float = 0.0

    __test__ = False

    @classmethod
    def sine(cls, dim: int, rate: float = 0.0, shift: float = 0.0) -> TestFunction:
        """``psi = sin(2 pi (sum(x) + shift))``.

        Planar on purpose: a test function of one coordinate only sees the
        transverse average of planar data, which is constant.
        """
        k = 2.0 * np.pi
        return cls(lambda *x: np.sin(k * (_planar(x) + shift)),
                   lambda *x: dim * k * np.cos(k * (_planar(x) + shift)), rate)

    @classmethod
    def positive(cls, dim: int, rate: float = 0.0, shift: float = 0.0) -> TestFunction:
        """``psi = 1.5 + 0.5 sin(2 pi (sum(x) + shift))``, bounded below by 1."""
        k = 2.0 * np.pi
        return cls(lambda *x: 1.5 + 0.5 * np.sin(k * (_planar(x) + shift)),
                   lambda *x: 0.5 * dim * k * np.cos(k * (_planar(x) + shift)), rate)

    @classmethod
    def constant(cls, value: float = 1.0) -> TestFunction:
        return cls(lambda *x: np.full(np.shape(x[0]), value),
                   lambda *x: np.zeros(np.shape(x[0])))

    def time_factor(self, t: float) -> float:
        return 1.0 + self.rate * t

    def time_factor_integral(self, t0: float, t1: float) -> float:
        return (t1 - t0) + 0.5 * self.rate * (t1 * t1 - t0 * t0)


class ConsistencyResidual:
    """Accumulates the weak-form defect of ``u`` (``kind="u"``) or ``eta``.

    ``e = [int w_h phi]_0^tau - int_0^tau int (w_h phi_t + g(u_h) . grad phi)``
    with ``(w, g) = (u, f)`` or ``(eta, q)``; states are frozen on each step
    (left endpoint).  Use as a run observer, then read :attr:`value`.
    """

    def __init__(self, mesh: Mesh, test: TestFunction, kind: str = "u"):
        if kind not in ("u", "eta"):
            raise InputError("kind must be 'u' or 'eta'")
        self.mesh = mesh
        self.test = test
        self.kind = kind
        self.psi = cell_average(test.psi, mesh)
        self.grad = cell_average(test.gradient_sum, mesh)
        self.start: float | None = None
        self.end = 0.0
        self.integral = 0.0
        self.tau = 0.0

    def _density(self, u):
        return u if self.kind == "u" else entropy(u)

    def _flux(self, u):
        return burgers_flux(u) if self.kind == "u" else entropy_flux(u)

    def _pairing(self, u, t: float) -> float:
        return (self.mesh.cell_volume * self.test.time_factor(t)
                * _fsum(self._density(u) * self.psi))

    def __call__(self, rec: StepRecord) -> None:
        u, t0, t1 = rec.old.values, rec.old.time, rec.new.time
        if self.start is None:
            self.start = self._pairing(u, t0)
        vol = self.mesh.cell_volume
        dtphi = self.test.rate * (t1 - t0)
        a_int = self.test.time_factor_integral(t0, t1)
        self.integral += vol * (dtphi * _fsum(self._density(u) * self.psi)
                                + a_int * _fsum(self._flux(u) * self.grad))
        self.end = self._pairing(rec.new.values, t1)
        self.tau = t1

    @property
    def value(self) -> float:
        if self.start is None:
            return 0.0
        return self.end - self.start - self.integral


def _consistency(traj: Trajectory, test: TestFunction, tau: float | None,
                 kind: str) -> float:
    acc = ConsistencyResidual(traj.initial.mesh, test, kind)
    for k, (dt, old, new) in enumerate(_consecutive(traj)):
        if tau is not None and old.time >= tau:
            break
        acc(StepRecord(k, dt, old, new, []))
    return acc.value


def consistency_residual_u(traj: Trajectory, test: TestFunction,
                           tau: float | None = None) -> float:
    """Weak-form defect ``e_u`` of the mass equation up to ``tau``."""
    return _consistency(traj, test, tau, "u")


def consistency_residual_eta(traj: Trajectory, test: TestFunction,
                             tau: float | None = None) -> float:
    """Entropy defect ``e_eta``; the entropy inequality asks only for its positive part."""
    return _consistency(traj, test, tau, "eta")

# }}}


# {{{ bound audits

AUDIT_TOL = 1e-12

AUDIT_CHECKS = (
    "es_d1_lower", "es_d1_upper", "es_d_lower", "es_d_upper", "es_d_cross",
    "es_d_new_lower", "es_d_new_upper", "drp_lower", "drp_upper", "drp_identity",
    "minmod_lambda", "minmod_hull",
)

AUDIT_COLUMNS = ("check", "dt_over_h", "samples", "checked", "degenerate",
                 "violations", "worst_margin", "case", "u_minus", "u_plus", "jump",
                 "avg", "lam", "mu", "p_rp", "p1", "p2", "p_new", "cross_max")


@dataclass
class CheckResult:
    checked: int = 0
    violations: int = 0
    worst_margin: float = math.inf
    worst_sample: dict | None = None


@dataclass
class AuditReport:
    samples: int
    u_bar: float
    dt_over_h: float
    c1: float
    seed: int
    degenerate: int = 0
    checks: dict[str, CheckResult] = field(
        default_factory=lambda: {name: CheckResult() for name in AUDIT_CHECKS})

    @property
    def total_violations(self) -> int:
        return sum(c.violations for c in self.checks.values())

    def write_csv(self, stream: IO[str], header: bool = True) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        if header:
            writer.writerow(AUDIT_COLUMNS)
        if self.samples == 0:
            return
        for name, res in self.checks.items():
            sample = res.worst_sample or {}
            writer.writerow([
                name, fmt(self.dt_over_h), self.samples, res.checked, self.degenerate,
                res.violations, fmt(res.worst_margin) if res.checked else "",
                *(("" if k not in sample else
                   (sample[k] if k == "case" else fmt(sample[k])))
                  for k in AUDIT_COLUMNS[7:]),
            ])


def sample_field(rng: np.random.Generator, shape: tuple[int, ...],
                 u_bar: float) -> np.ndarray:
    """Cell values in ``[-u_bar, u_bar]``: half uniform, half on a 9-point lattice.

    The lattice half produces ties, zero jumps and zero averages.
    """
    uniform = rng.uniform(-u_bar, u_bar, size=shape)
    lattice = rng.integers(-4, 5, size=shape) * (u_bar / 4.0)
    return np.where(rng.random(shape) < 0.5, uniform, lattice)


def _record(res: CheckResult, slack: np.ndarray, mask: np.ndarray, sample_of) -> None:
    """``slack >= -AUDIT_TOL`` passes; smaller values count as violations."""
    s = slack[mask]
    res.checked += int(s.size)
    if s.size == 0:
        return
    res.violations += int(np.count_nonzero(s < -AUDIT_TOL))
    i = int(np.argmin(s))
    if s[i] < res.worst_margin:
        res.worst_margin = float(s[i])
        res.worst_sample = sample_of(np.flatnonzero(mask)[i])


def _audit_direction(report: AuditReport, values: np.ndarray, mesh: Mesh,
                     grads: np.ndarray, axis: int, take: int) -> None:
    ratio = report.dt_over_h
    rec = reconstruct_faces(values, grads, mesh, axis)
    fb = breakdown(rec, ratio * mesh.h, report.c1, stabilized=True)

    def flat(a):
        return np.reshape(a, (-1,))[:take]

    jump, avg = flat(rec.jump), flat(rec.avg)
    big = np.maximum(np.abs(flat(rec.u_minus)), np.abs(flat(rec.u_plus)))
    case = flat(fb.case)
    p1, p2, p_new = flat(fb.p1), flat(fb.p2), flat(fb.p_new)
    p_sigma = p1 + p2
    j2, j3 = jump * jump, jump**3
    nz = jump != 0
    report.degenerate += int(np.count_nonzero(~nz))
    everywhere = np.ones(jump.shape, bool)
    mu = flat(rec.mu)
    lam = flat(rec.lam)
    cross = np.stack([flat(c) for c in fb.cross])

    def sample_of(i):
        return {"case": int(case[i]), "u_minus": flat(rec.u_minus)[i],
                "u_plus": flat(rec.u_plus)[i], "jump": jump[i], "avg": avg[i],
                "lam": lam[i], "mu": mu[i], "p_rp": flat(fb.p_rp)[i], "p1": p1[i],
                "p2": p2[i], "p_new": p_new[i],
                "cross_max": float(np.max(np.abs(cross[:, i]), initial=0.0))}

    c = report.checks
    upper1 = (np.abs(jump) / 12.0 + 0.875 * big) * j2
    _record(c["es_d1_lower"], p1 * jump - j3 / 24.0, nz, sample_of)
    _record(c["es_d1_upper"], upper1 - p1 * jump, nz, sample_of)
    visc = 0.5 * ratio * big * big * j2
    _record(c["es_d_lower"], p_sigma * jump - j3 / 24.0, nz, sample_of)
    _record(c["es_d_upper"], upper1 + visc - p_sigma * jump, nz, sample_of)
    _record(c["es_d_new_lower"], p_new * jump - report.c1 * np.abs(j3), everywhere,
            sample_of)
    _record(c["es_d_new_upper"],
            (np.abs(jump) / 6.0 + 0.875 * big) * j2 + visc - p_new * jump, nz, sample_of)

    # transverse faces of the upwind cell: the bound must hold for the
    # minmod-selected one, so test against the smaller of the two jumps
    side_plus = (fb.case == 2) | (fb.case == 5)
    for j in range(mesh.dim):
        if j == axis:
            continue
        hi = mesh.plus_neighbor(values, j) - values
        lo = values - mesh.minus_neighbor(values, j)
        tj = np.minimum(np.abs(hi), np.abs(lo))
        tj = np.where(side_plus, mesh.plus_neighbor(tj, axis), tj)
        slack = 0.5 * ratio * big * big * flat(tj) - np.abs(cross[j])
        _record(c["es_d_cross"], slack, everywhere, sample_of)

    r_minus, r_plus = flat(rec.r_minus), flat(rec.r_plus)
    r_jump, r_avg = r_plus - r_minus, 0.5 * (r_minus + r_plus)
    rnz = r_jump != 0
    drp = d_rp(r_minus, r_plus)
    ratio_drp = drp / np.where(rnz, np.abs(r_avg) + np.abs(r_jump), 1.0)
    _record(c["drp_lower"], ratio_drp - 1.0 / 48.0, rnz, sample_of)
    _record(c["drp_upper"], 1.0 - ratio_drp, rnz, sample_of)
    f_rp, f_ec_r = flat(fb.f_rp), flat(fb.f_ec_r)
    defect = np.abs(f_rp - f_ec_r + drp * r_jump)
    scale = np.maximum(np.maximum(np.abs(f_rp), np.abs(f_ec_r)), np.abs(drp * r_jump))
    # relative check: the slack is the tolerance left over
    rel = defect / np.where(scale > 0, scale, 1.0)
    _record(c["drp_identity"], AUDIT_TOL - rel,
            everywhere, sample_of)

    _record(c["minmod_lambda"], np.minimum(lam, 1.0 - lam), everywhere, sample_of)
    lam_term, mu_term = flat(rec.lam_term), flat(rec.mu_term)
    lo_hull, hi_hull = np.minimum(0.0, jump), np.maximum(0.0, jump)
    hull = np.inf * np.ones(jump.shape)
    for v in (lam_term - mu_term, lam_term + mu_term):
        hull = np.minimum(hull, np.minimum(v - lo_hull, hi_hull - v))
    _record(c["minmod_hull"], hull, everywhere, sample_of)


def audit_bounds(samples: int, u_bar: float = 2.0, dt_over_h: float = 0.1, *,
                 c1: float = C1_DEFAULT, seed: int = 20240601, dim: int = 2,
                 chunk: int = 128) -> AuditReport:
    """Check every face bound on ``samples`` random stencils.

    Stencils are the faces of random periodic fields on a ``chunk``-per-axis
    mesh; each face sees an independent draw of all the cells it depends on.
    Faces with ``[u] = 0`` are skipped by the jump-guarded checks and counted
    in :attr:`AuditReport.degenerate`.
    """
    if samples < 0:
        raise InputError("sample count must be >= 0")
    if not u_bar > 0:
        raise InputError("u_bar must be positive")
    report = AuditReport(samples, u_bar, dt_over_h, c1, seed)
    rng = np.random.default_rng(seed)
    mesh = Mesh(dim, chunk)
    remaining = samples
    while remaining > 0:
        values = sample_field(rng, mesh.shape, u_bar)
        grads = gradients(values, mesh)
        for axis in range(dim):
            take = min(remaining, mesh.num_cells)
            if take <= 0:
                break
            _audit_direction(report, values, mesh, grads, axis, take)
            remaining -= take
    return report

# }}}
