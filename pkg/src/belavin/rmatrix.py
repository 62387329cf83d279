"""The elliptic Z_n vertex R-matrix and its defining property checks.

R(u) acts on two n-dimensional legs as

    R(u) = sum_alpha  sigma_alpha(u + w/n) / (n sigma_alpha(w/n))  I_alpha x I_alpha^{-1}

with I_alpha = g^{a2} h^{a1} running over alpha in Z_n x Z_n.  The checks in
this module measure, as relative Frobenius residuals:

  * the Yang-Baxter equation on three legs,
  * unitarity        R12(u) R21(-u) = sigma(w+u) sigma(w-u) / sigma(w)^2 * id,
  * crossing         R21^t2(-u-nw) R12^t2(u) = sigma(u) sigma(-u-nw) / sigma(w)^2 * id,
  * Z_n symmetry     (g x g) R (g x g)^{-1} = R  and the same with h,
  * the degeneration of R(-w) / R(w) onto the antisymmetric / symmetric
    subspace (checked through projector annihilation, the factor matrices
    themselves are never needed),
  * quasi-periodicity of R under u -> u+1 and u -> u+tau.

A handle caches the n^2 Kronecker blocks and the denominators, so evaluating
R(u) costs n^2 theta series plus one tensor contraction.
"""

from __future__ import annotations

import numpy as np

from .elliptic import ModularData, sigma, sigma_alpha_table
from .tensor_algebra import (
    LegLayout,
    TensorOperator,
    antisym_projector,
    embed,
    i_alpha,
    permutation,
    rel_diff,
    transpose_leg,
    zn_matrices,
)

__all__ = [
    "RMatrixHandle",
    "belavin_r",
    "belavin_r_derivative",
    "check_qybe",
    "check_unitarity",
    "check_crossing",
    "check_zn_symmetry",
    "check_fusion",
    "check_r_quasiperiod",
]


class RMatrixHandle:
    """Caches everything u-independent about R(u) for one (tau, n, w)."""

    def __init__(self, md: ModularData):
        self.md = md
        n = md.n
        self.zn = zn_matrices(n)
        blocks = []
        for a1 in range(n):
            for a2 in range(n):
                ia = i_alpha((a1, a2), self.zn)
                blocks.append(np.kron(ia, ia.conj().T))  # I_alpha unitary: inv = dagger
        self._blocks = np.stack(blocks)  # (n^2, n^2, n^2), row-major in (a1, a2)
        self._denoms = (n * sigma_alpha_table(md)).reshape(-1)
        self.layout = LegLayout((n, n))

    def _weights(self, u, derivative: bool = False) -> np.ndarray:
        vals = sigma_alpha_table(self.md, u + self.md.w / self.md.n, derivative)
        return vals.reshape(-1) / self._denoms

    def r(self, u) -> TensorOperator:
        mat = np.tensordot(self._weights(u), self._blocks, axes=1)
        return TensorOperator(self.layout, mat)

    def r_derivative(self, u) -> TensorOperator:
        mat = np.tensordot(self._weights(u, derivative=True), self._blocks, axes=1)
        return TensorOperator(self.layout, mat)


def belavin_r(handle: RMatrixHandle, u) -> TensorOperator:
    """R(u) as a two-leg operator (n^2 x n^2 matrix)."""
    return handle.r(u)


def belavin_r_derivative(handle: RMatrixHandle, u) -> TensorOperator:
    """dR/du, from the termwise theta-series derivative."""
    return handle.r_derivative(u)


def _sigma(handle: RMatrixHandle, u) -> complex:
    return sigma(u, handle.md.tau)


def check_qybe(handle: RMatrixHandle, u1, u2, u3) -> float:
    """Relative residual of R12 R13 R23 = R23 R13 R12 on three legs."""
    n = handle.md.n
    lay = LegLayout((n, n, n))
    r12 = embed(handle.r(u1 - u2), lay, (0, 1))
    r13 = embed(handle.r(u1 - u3), lay, (0, 2))
    r23 = embed(handle.r(u2 - u3), lay, (1, 2))
    lhs = r12.mat @ r13.mat @ r23.mat
    rhs = r23.mat @ r13.mat @ r12.mat
    return rel_diff(lhs, rhs)


def check_unitarity(handle: RMatrixHandle, u) -> tuple[float, complex]:
    """Residual of R12(u) R21(-u) against the scalar sigma(w+u)sigma(w-u)/sigma(w)^2.

    Returns (residual, measured scalar); the measured scalar is tr(product)/n^2.
    """
    n = handle.md.n
    w = handle.md.w
    p = permutation(0, 1, handle.layout).mat
    ru = handle.r(u).mat
    rmu = handle.r(-u).mat
    prod = ru @ (p @ rmu @ p)
    theory = _sigma(handle, w + u) * _sigma(handle, w - u) / _sigma(handle, w) ** 2
    scale = max(np.linalg.norm(ru) * np.linalg.norm(rmu), 1e-300)
    resid = float(np.linalg.norm(prod - theory * np.eye(n * n)) / scale)
    measured = complex(np.trace(prod) / (n * n))
    return resid, measured


def check_crossing(handle: RMatrixHandle, u) -> float:
    """Residual of the partial-transpose identity on leg 2."""
    n = handle.md.n
    w = handle.md.w
    p = permutation(0, 1, handle.layout).mat
    r21 = TensorOperator(handle.layout, p @ handle.r(-u - n * w).mat @ p)
    lhs = transpose_leg(r21, 1).mat @ transpose_leg(handle.r(u), 1).mat
    theory = _sigma(handle, u) * _sigma(handle, -u - n * w) / _sigma(handle, w) ** 2
    scale = max(
        np.linalg.norm(r21.mat) * np.linalg.norm(handle.r(u).mat), 1e-300
    )
    return float(np.linalg.norm(lhs - theory * np.eye(n * n)) / scale)


def check_zn_symmetry(handle: RMatrixHandle, u) -> float:
    """Max residual of conjugation invariance under g x g and h x h."""
    zn = handle.zn
    r = handle.r(u).mat
    out = 0.0
    for m in (zn.g, zn.h):
        mm = np.kron(m, m)
        out = max(out, rel_diff(mm @ r @ np.linalg.inv(mm), r))
    return out


def check_fusion(handle: RMatrixHandle) -> tuple[float, float]:
    """Projector annihilation at the degeneration points u = -w and u = +w.

    residual_minus = |P+ R(-w)| / |R(-w)|   (R(-w) maps into the antisymmetric space)
    residual_plus  = |R(+w) P-| / |R(+w)|   (R(+w) kills the antisymmetric space)
    """
    n = handle.md.n
    w = handle.md.w
    p = permutation(0, 1, handle.layout).mat
    eye = np.eye(n * n)
    p_minus = 0.5 * (eye - p)
    p_plus = 0.5 * (eye + p)
    rm = handle.r(-w).mat
    rp = handle.r(w).mat
    res_minus = float(np.linalg.norm(p_plus @ rm) / max(np.linalg.norm(rm), 1e-300))
    res_plus = float(np.linalg.norm(rp @ p_minus) / max(np.linalg.norm(rp), 1e-300))
    return res_minus, res_plus


def check_r_quasiperiod(handle: RMatrixHandle, u) -> float:
    """Max residual over the four shift/conjugation forms.

        R(u+1)   = -g1^{-1} R(u) g1   = -g2 R(u) g2^{-1}
        R(u+tau) = -e^{-2 i pi (u + w/n + tau/2)} h1^{-1} R(u) h1
                 = -e^{-2 i pi (u + w/n + tau/2)} h2 R(u) h2^{-1}
    """
    md = handle.md
    n = md.n
    zn = handle.zn
    eye = np.eye(n)
    r = handle.r(u).mat
    r1 = handle.r(u + 1).mat
    rt = handle.r(u + md.tau).mat
    g1 = np.kron(zn.g, eye)
    g2 = np.kron(eye, zn.g)
    h1 = np.kron(zn.h, eye)
    h2 = np.kron(eye, zn.h)
    ph = -np.exp(-2j * np.pi * (u + md.w / n + md.tau / 2))
    res = [
        rel_diff(r1, -np.linalg.inv(g1) @ r @ g1),
        rel_diff(r1, -g2 @ r @ np.linalg.inv(g2)),
        rel_diff(rt, ph * np.linalg.inv(h1) @ r @ h1),
        rel_diff(rt, ph * h2 @ r @ np.linalg.inv(h2)),
    ]
    return float(max(res))
