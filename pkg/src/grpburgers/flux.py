"""Face fluxes for Burgers' equation and their dissipation decompositions.

The Riemann value at a face is chosen from the reconstructed traces
``(r^-, r^+)``:

====  ======================================  ========
case  condition                               u^RP
====  ======================================  ========
1     [r] < 0, <r> > 0                        r^-
2     [r] < 0, <r> <= 0                       r^+
3     0 < r^- <= r^+                          r^-
4     r^- <= 0 <= r^+                         0
5     r^- <= r^+ < 0                          r^+
====  ======================================  ========

Every entropy-stability quantity is carried as a product with a jump, e.g.
``p1 = D1 [u]``, so no branch divides by a jump.  Quotients are exposed only
through the guarded audit properties of :class:`FluxBreakdown`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from grpburgers.errors import ConfigError
from grpburgers.mesh import Mesh
from grpburgers.reconstruction import FaceReconstruction, gradients, reconstruct_faces

C1_MAX = 1.0 / 24.0
C1_DEFAULT = C1_MAX


class Case(IntEnum):
    SHOCK_MINUS = 1
    SHOCK_PLUS = 2
    RARE_MINUS = 3
    RARE_ZERO = 4
    RARE_PLUS = 5


def burgers_flux(u):
    return 0.5 * np.square(u)


def entropy_potential(u):
    """``psi(u) = u^3 / 6``, the potential paired with ``eta = u^2 / 2``."""
    return np.power(u, 3) / 6.0


def check_c1(c1: float) -> float:
    if not 0.0 < c1 <= C1_MAX:
        raise ConfigError(f"C1 must satisfy 0 < C1 <= 1/24, got {c1!r}")
    return float(c1)


def classify(r_minus, r_plus):
    """Case label of each face from its reconstructed traces."""
    r_minus = np.asarray(r_minus, dtype=float)
    r_plus = np.asarray(r_plus, dtype=float)
    shock = r_plus < r_minus
    r_avg = 0.5 * (r_minus + r_plus)
    sonic = ~shock & (r_minus <= 0) & (r_plus >= 0)
    case = np.select(
        [shock & (r_avg > 0), shock, sonic, r_minus > 0],
        [Case.SHOCK_MINUS, Case.SHOCK_PLUS, Case.RARE_ZERO, Case.RARE_MINUS],
        default=Case.RARE_PLUS,
    )
    return case.astype(np.int8)


def _side_select(case, minus, plus, zero=0.0):
    from_minus = (case == Case.SHOCK_MINUS) | (case == Case.RARE_MINUS)
    from_plus = (case == Case.SHOCK_PLUS) | (case == Case.RARE_PLUS)
    return np.where(from_minus, minus, np.where(from_plus, plus, zero))


def riemann_value(r_minus, r_plus):
    """``(case, u^RP)`` for traces ``r^-`` and ``r^+``.

    Scalars in give scalars out (case as :class:`Case`).
    """
    case = classify(r_minus, r_plus)
    u_rp = _side_select(case, np.asarray(r_minus, float), np.asarray(r_plus, float))
    if case.ndim == 0:
        return Case(int(case)), float(u_rp)
    return case, u_rp


def grp_flux_from_traces(r_minus, r_plus, div_minus, div_plus, dt):
    """``(f^RP, f^GRP)`` from traces and side divergences."""
    case = classify(r_minus, r_plus)
    r_side = _side_select(case, np.asarray(r_minus, float), np.asarray(r_plus, float))
    div_side = _side_select(case, np.asarray(div_minus, float),
                            np.asarray(div_plus, float))
    f_rp = burgers_flux(r_side)
    f_grp = f_rp * (1.0 - dt * div_side)
    if np.ndim(f_rp) == 0:
        return float(f_rp), float(f_grp)
    return f_rp, f_grp


def grp_flux(rec: FaceReconstruction, dt: float):
    return grp_flux_from_traces(rec.r_minus, rec.r_plus, rec.div_minus,
                                rec.div_plus, dt)


def ec_flux(jump, avg):
    """Entropy-conservative flux ``(12 <v>^2 + [v]^2) / 24``.

    Written as ``<v>^2/2 + [v]^2/24`` so a zero jump gives ``f(<v>)`` exactly.
    """
    return 0.5 * np.square(avg) + np.square(jump) / 24.0


def stabilized_flux(f_grp, jump, c1: float = C1_DEFAULT):
    """Add ``(1/24 + C1) [u]^2`` on compressive faces (``[u] < 0``)."""
    check_c1(c1)
    jump = np.asarray(jump, dtype=float)
    out = f_grp + np.where(jump < 0, (1.0 / 24.0 + c1) * np.square(jump), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def d_rp(r_minus, r_plus):
    """Dissipation factor of the Riemann flux on the reconstructed traces.

    On faces with ``r^- = r^+`` the value is set to ``<r> + [r]``; the
    corresponding product with ``[r]`` vanishes regardless.
    """
    r_minus = np.asarray(r_minus, dtype=float)
    r_plus = np.asarray(r_plus, dtype=float)
    jump = r_plus - r_minus
    avg = 0.5 * (r_minus + r_plus)
    case = classify(r_minus, r_plus)
    safe = np.where(jump != 0, jump, 1.0)
    # sonic case: (12 <r>^2 + [r]^2) / (24 [r]) without squaring tiny traces
    sonic = 0.5 * avg * (avg / safe) + jump / 24.0
    out = np.select(
        [jump == 0,
         (case == Case.SHOCK_MINUS) | (case == Case.RARE_MINUS),
         (case == Case.SHOCK_PLUS) | (case == Case.RARE_PLUS)],
        [avg + jump, (6.0 * avg - jump) / 12.0, -(6.0 * avg + jump) / 12.0],
        default=sonic,
    )
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class FluxBreakdown:
    """Flux values and dissipation products on every face of one direction.

    ``p_*`` are products with the face jump: ``p_rp = D^RP [r]``,
    ``p1 = D1 [u]``, ``p2 = D2 [u]``, ``p_new = D^New [u]``.
    ``cross[j]`` is the transverse product for direction ``j`` (zero for
    ``j == axis``) built from the limited slope of the upwind side cell.
    """

    rec: FaceReconstruction
    dt: float
    c1: float
    stabilized: bool
    case: np.ndarray
    u_rp: np.ndarray
    dtu_grp: np.ndarray
    f_rp: np.ndarray
    f_grp: np.ndarray
    f_ec: np.ndarray
    f_ec_r: np.ndarray
    stab: np.ndarray
    f_new: np.ndarray
    p_rp: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    cross: np.ndarray

    @property
    def axis(self) -> int:
        return self.rec.axis

    @property
    def jump(self) -> np.ndarray:
        return self.rec.jump

    @property
    def cross_sum(self) -> np.ndarray:
        return self.cross.sum(axis=0)

    @property
    def p_sigma(self) -> np.ndarray:
        """``D_sigma [u] = (D1 + D2) [u]``."""
        return self.p1 + self.p2

    @property
    def p_new(self) -> np.ndarray:
        return -self.f_new + self.f_ec - self.cross_sum

    def quotient(self, product: np.ndarray) -> np.ndarray:
        """``product / [u]`` where ``[u] != 0``, NaN elsewhere."""
        jump = self.jump
        safe = np.where(jump != 0, jump, 1.0)
        return np.where(jump != 0, product / safe, np.nan)


def breakdown(rec: FaceReconstruction, dt: float, c1: float = C1_DEFAULT,
              stabilized: bool = True) -> FluxBreakdown:
    """All flux values and dissipation products for one direction's faces."""
    check_c1(c1)
    case = classify(rec.r_minus, rec.r_plus)
    r_side = _side_select(case, rec.r_minus, rec.r_plus)
    slopes_side = _side_select(case, rec.slopes_minus, rec.slopes_plus)
    f_rp = burgers_flux(r_side)
    div_side = slopes_side.sum(axis=0) / rec.h
    f_grp = f_rp * (1.0 - dt * div_side)
    f_ec = ec_flux(rec.jump, rec.avg)
    if stabilized:
        stab = np.where(rec.jump < 0, (1.0 / 24.0 + c1) * np.square(rec.jump), 0.0)
    else:
        stab = np.zeros_like(f_grp)
    f_new = f_grp + stab
    pref = dt / (2.0 * rec.h) * np.square(r_side)
    cross = pref * slopes_side
    p2 = cross[rec.axis].copy()
    cross[rec.axis] = 0.0
    f_ec_r = ec_flux(rec.r_jump, rec.r_avg)
    return FluxBreakdown(
        rec=rec,
        dt=dt,
        c1=c1,
        stabilized=stabilized,
        case=case,
        u_rp=r_side,
        dtu_grp=-r_side * div_side,
        f_rp=f_rp,
        f_grp=f_grp,
        f_ec=f_ec,
        f_ec_r=f_ec_r,
        stab=stab,
        f_new=f_new,
        p_rp=f_ec_r - f_rp,
        p1=f_ec - f_rp,
        p2=p2,
        cross=cross,
    )


def face_fluxes(values: np.ndarray, mesh: Mesh, dt: float, c1: float = C1_DEFAULT,
                stabilized: bool = True) -> list[FluxBreakdown]:
    """One :class:`FluxBreakdown` per direction for the state ``values``."""
    grads = gradients(values, mesh)
    return [breakdown(reconstruct_faces(values, grads, mesh, axis), dt, c1, stabilized)
            for axis in range(mesh.dim)]
