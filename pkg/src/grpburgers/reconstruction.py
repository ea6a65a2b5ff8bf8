"""Minmod gradients, the piecewise-linear reconstruction and its face factors.

Gradients are limited dimension by dimension.  For a face ``K|L`` of
direction ``i`` the reconstructed traces are

    r^- = u_K + (h/2) g_K,     r^+ = u_L - (h/2) g_L,

with ``g`` the limited slope in direction ``i``.  The face factors compare
the reconstructed jump and average with the raw ones:

    lam = [r] / [u]            (1 when [u] = 0)
    mu  = <u> / <r>            (1 when <u> = <r> = 0, +inf when only <r> = 0)

``mu`` is never used arithmetically.  Consumers go through
:attr:`FaceReconstruction.mu_term`, which is ``2 (mu - 1) <r>`` written as
``2 (<u> - <r>)``; this also covers the infinite branch, where the product is
read as ``2 <u>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from grpburgers.mesh import Field, Mesh, face_states


def minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Smaller-magnitude argument when both are strictly of one sign, else 0."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    out = np.zeros(a.shape)
    pos = (a > 0) & (b > 0)
    neg = (a < 0) & (b < 0)
    out[pos] = np.minimum(a, b)[pos]
    out[neg] = np.maximum(a, b)[neg]
    return out


def gradients(values: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Limited cell gradients, shape ``(dim, *mesh.shape)``."""
    grads = np.empty((mesh.dim, *mesh.shape))
    for axis in range(mesh.dim):
        slope = (mesh.plus_neighbor(values, axis) - values) / mesh.h
        grads[axis] = minmod(mesh.minus_neighbor(slope, axis), slope)
    return grads


def minmod_gradients(field: Field) -> np.ndarray:
    """Limited gradients of a :class:`Field`; see :func:`gradients`."""
    return gradients(field.values, field.mesh)


def face_slopes(field: Field, axis: int) -> np.ndarray:
    """Interfacial slopes ``[u]/h`` on the faces of direction ``axis``."""
    jump, *_ = face_states(field.values, field.mesh, axis)
    return jump / field.mesh.h


@dataclass(frozen=True, eq=False)
class FaceReconstruction:
    """Reconstruction data on every face of one direction.

    All arrays are indexed by the "-" cell.  ``slopes_minus[j]`` is
    ``h * g_j`` in the "-" cell (``slopes_plus`` likewise for the "+" cell);
    ``div_minus`` and ``div_plus`` are the discrete divergences of ``u 1``,
    i.e. the sums of the cell gradients over all directions.
    """

    axis: int
    h: float
    u_minus: np.ndarray
    u_plus: np.ndarray
    jump: np.ndarray
    avg: np.ndarray
    r_minus: np.ndarray
    r_plus: np.ndarray
    slopes_minus: np.ndarray
    slopes_plus: np.ndarray

    @property
    def r_jump(self) -> np.ndarray:
        return self.r_plus - self.r_minus

    @property
    def r_avg(self) -> np.ndarray:
        return 0.5 * (self.r_minus + self.r_plus)

    @property
    def div_minus(self) -> np.ndarray:
        return self.slopes_minus.sum(axis=0) / self.h

    @property
    def div_plus(self) -> np.ndarray:
        return self.slopes_plus.sum(axis=0) / self.h

    @property
    def lam(self) -> np.ndarray:
        jump = self.jump
        safe = np.where(jump != 0, jump, 1.0)
        return np.where(jump != 0, self.r_jump / safe, 1.0)

    @property
    def lam_term(self) -> np.ndarray:
        """``(1 - lam) [u]``, equal to ``h <g_i>``."""
        return self.jump - self.r_jump

    @property
    def mu_infinite(self) -> np.ndarray:
        return (self.r_avg == 0) & (self.avg != 0)

    @property
    def mu(self) -> np.ndarray:
        """Raw ratio for audits only; ``inf`` marks the degenerate branch."""
        r_avg, avg = self.r_avg, self.avg
        safe = np.where(r_avg != 0, r_avg, 1.0)
        out = np.where(r_avg != 0, avg / safe, 1.0)
        return np.where(self.mu_infinite, np.inf, out)

    @property
    def mu_term(self) -> np.ndarray:
        """``2 (mu - 1) <r>``, equal to ``(h/2) [g_i]``."""
        return 2.0 * (self.avg - self.r_avg)


def reconstruct_faces(values: np.ndarray, grads: np.ndarray, mesh: Mesh,
                      axis: int) -> FaceReconstruction:
    """Traces and side data on all faces of direction ``axis``."""
    h = mesh.h
    jump, avg, u_minus, u_plus = face_states(values, mesh, axis)
    slopes_minus = h * grads
    slopes_plus = mesh.plus_neighbor(slopes_minus, axis + 1)
    return FaceReconstruction(
        axis=axis,
        h=h,
        u_minus=u_minus,
        u_plus=u_plus,
        jump=jump,
        avg=avg,
        r_minus=u_minus + 0.5 * slopes_minus[axis],
        r_plus=u_plus - 0.5 * slopes_plus[axis],
        slopes_minus=slopes_minus,
        slopes_plus=slopes_plus,
    )


def reconstruct_face(field: Field, grads: np.ndarray, axis: int,
                     index: tuple[int, ...]) -> dict[str, float]:
    """Scalar view of :func:`reconstruct_faces` for one face."""
    rec = reconstruct_faces(field.values, grads, field.mesh, axis)
    idx = tuple(k % field.mesh.n for k in index)
    keys = ("u_minus", "u_plus", "jump", "avg", "r_minus", "r_plus", "r_jump",
            "r_avg", "lam", "mu", "lam_term", "mu_term", "div_minus", "div_plus")
    out = {k: float(getattr(rec, k)[idx]) for k in keys}
    out["slopes_minus"] = rec.slopes_minus[(slice(None), *idx)].copy()
    out["slopes_plus"] = rec.slopes_plus[(slice(None), *idx)].copy()
    return out
