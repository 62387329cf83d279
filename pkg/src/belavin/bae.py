"""Bethe-equation residual systems and a multi-start damped least-squares solver.

Every ansatz kind maps to one overdetermined nonlinear system over the packed
real vector (roots, phases, coefficients):

  * one cross-multiplied root equation per Bethe root (two competing terms,
    normalised by the larger, so residuals are scale-free),
  * the 2n-2 lattice sum rules tying the root sums to the integer sectors,
  * the selection rule in logarithmic form, reduced modulo 2 pi i (modulo
    2 pi i / n for the twisted chain, whose printed form is the n-th power).

The n=3 periodic/twisted systems are written out explicitly (and batched so
one evaluation costs a single vectorised theta pass); the general-n system
covers n >= 3 and is cross-checked against the explicit n=3 path.  Reduced
three-term kinds carry their own smaller systems.

solve() runs scipy's Levenberg-Marquardt (trust-region fallback for the
underdetermined reduced systems) from every start, polishes, filters at the
residual tolerance, and quotients the survivors by root permutations and
lattice translations before returning them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize

from .elliptic import reduce_to_cell, sigma
from .report import Report
from .spectrum import SpectralFamily
from .transfer import ChainSpec, a_function, d_function, quantum_det_scalar
from .tq import (
    Z3_DEGENERATE_W,
    Z3_PERIODIC,
    Z3_REDUCED,
    Z3_TWISTED,
    Z4_PERIODIC,
    ZN_GENERAL,
    BetheConfiguration,
    PoleAtBetheRoot,
    default_root_counts,
    lambda_levels,
    lambda_m,
    reduced_lambda2_z3,
    reduced_lambda_z3,
)

__all__ = [
    "PoleInResidual",
    "NoConvergence",
    "FitDiverged",
    "BAESystem",
    "system_for",
    "residual",
    "relation_values",
    "SolveOptions",
    "SolveOutcome",
    "solve",
    "solve_detailed",
    "seed_from_spectrum",
    "random_start",
    "verify_solution",
    "config_to_vector",
    "vector_to_config",
    "canonical_roots",
    "same_configuration",
    "config_lambda",
]

_TWO_PI = 2.0 * np.pi


class PoleInResidual(ArithmeticError):
    """A Q-function hit a zero inside a residual denominator/logarithm."""


class NoConvergence(RuntimeError):
    pass


class FitDiverged(RuntimeError):
    pass


_FULL_KINDS = {Z3_PERIODIC, Z3_TWISTED, Z4_PERIODIC, ZN_GENERAL}
_REDUCED_KINDS = {Z3_REDUCED, Z3_DEGENERATE_W}


@dataclass(frozen=True)
class BAESystem:
    """One ansatz kind on one chain with frozen integer sectors."""

    kind: str
    spec: ChainSpec
    ls: tuple[int, ...]
    ms: tuple[int, ...]
    counts: tuple[int, ...]
    n1: int = 0

    @property
    def n_phis(self) -> int:
        if self.kind in _REDUCED_KINDS:
            return 2
        return self.spec.md.n - 1

    @property
    def n_cs(self) -> int:
        return 0 if self.kind in _REDUCED_KINDS else self.spec.md.n - 1

    @property
    def n_complex(self) -> int:
        return sum(self.counts) + self.n_phis + self.n_cs

    @property
    def n_relations(self) -> int:
        if self.kind in _REDUCED_KINDS:
            return sum(self.counts) + 1
        return sum(self.counts) + len(self.counts) + 1

    def pack(self, roots, phis, cs) -> np.ndarray:
        vals = [z for fam in roots for z in fam] + list(phis) + list(cs)
        flat = np.asarray(vals, dtype=complex)
        return np.column_stack([flat.real, flat.imag]).ravel()

    def unpack(self, x: np.ndarray):
        z = np.asarray(x, dtype=float).reshape(-1, 2)
        flat = z[:, 0] + 1j * z[:, 1]
        roots = []
        pos = 0
        for c in self.counts:
            roots.append(tuple(flat[pos : pos + c]))
            pos += c
        phis = tuple(flat[pos : pos + self.n_phis])
        pos += self.n_phis
        cs = tuple(flat[pos : pos + self.n_cs])
        return tuple(roots), phis, cs


def system_for(cfg: BetheConfiguration, spec: ChainSpec) -> BAESystem:
    return BAESystem(
        kind=cfg.kind,
        spec=spec,
        ls=cfg.ls,
        ms=cfg.ms,
        counts=cfg.counts,
        n1=cfg.n1,
    )


def vector_to_config(sys: BAESystem, x: np.ndarray, selection_branch=None) -> BetheConfiguration:
    roots, phis, cs = sys.unpack(x)
    return BetheConfiguration(
        sys.kind,
        sys.spec.md,
        roots,
        phis,
        cs,
        ls=sys.ls,
        ms=sys.ms,
        n1=sys.n1,
        selection_branch=selection_branch,
    )


def config_to_vector(sys: BAESystem, cfg: BetheConfiguration) -> np.ndarray:
    return sys.pack(cfg.roots, cfg.phis, cfg.cs)


# ---------------------------------------------------------------------------
# batched sigma products
# ---------------------------------------------------------------------------


class _ProductBatch:
    """Two-pass evaluation: register all sigma(x_i - y_j) products, run one
    vectorised theta pass, then fetch each product."""

    def __init__(self, md):
        self.md = md
        self._chunks: list[np.ndarray] = []
        self._offset = 0
        self._vals: np.ndarray | None = None
        self._sw: complex | None = None

    def product(self, points, roots):
        """Fetcher for prod_j sigma(points_i - roots_j) / sigma(w)."""
        pts = np.atleast_1d(np.asarray(points, dtype=complex))
        rts = np.asarray(tuple(roots), dtype=complex)
        npts = pts.shape[0]
        if rts.size == 0:
            return lambda: np.ones(npts, dtype=complex)
        args = (pts[:, None] - rts[None, :]).ravel()
        off = self._offset
        self._chunks.append(args)
        self._offset += args.size
        shape = (npts, rts.size)

        def fetch():
            block = self._vals[off : off + args.size].reshape(shape)
            return np.prod(block / self._sw, axis=1)

        return fetch

    def run(self):
        allargs = (
            np.concatenate(self._chunks) if self._chunks else np.empty(0, dtype=complex)
        )
        self._vals = sigma(allargs, self.md.tau)
        self._sw = sigma(self.md.w, self.md.tau)


def _selection_residual(q_num: np.ndarray, q_den: np.ndarray, expo: complex, power: int):
    """Selection-rule residual Log(V^power)/power for V = prod(num/den) e^expo.

    V equals 1 (a power-th root of 1 before taking the power) at a solution, so
    the principal log is smooth there; building V multiplicatively never takes
    the log of an individual factor, which keeps branch cuts away from the
    solution manifold.  The returned integer is the winding count of the
    factor-wise log sum, kept as bookkeeping data.
    """
    if np.any(np.abs(q_num) < 1e-300) or np.any(np.abs(q_den) < 1e-300):
        raise PoleInResidual("selection-rule Q-value vanished")
    v = complex(np.prod(q_num / q_den) * np.exp(expo))
    vp = v**power
    if not np.isfinite(vp) or vp == 0.0:
        raise PoleInResidual("selection-rule product overflowed")
    res = np.log(vp) / power
    s = np.sum(np.log(q_num)) - np.sum(np.log(q_den)) + expo
    k = int(round((s - res).imag / (_TWO_PI / power)))
    return res, k


def _norm_pair(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    # scale-free root-equation residual; the combined-magnitude denominator
    # stays within a factor 2 of the larger term and is smooth in the inputs
    scale = np.maximum(np.abs(t1) + np.abs(t2), 1e-300)
    return (t1 + t2) / scale


# ---------------------------------------------------------------------------
# relation values per kind
# ---------------------------------------------------------------------------


def _relations_z3(sys: BAESystem, roots, phis, cs):
    md = sys.spec.md
    w, tau, N = md.w, md.tau, sys.spec.N
    th = np.asarray(sys.spec.thetas, dtype=complex)
    twisted = sys.kind == Z3_TWISTED
    sh = 2.0 / 3.0 if twisted else 0.0
    om = np.exp(2j * np.pi / 3)
    pref_z2 = om if twisted else 1.0
    pref_z3 = om**2 if twisted else 1.0
    l1, l2, l3, l4 = (sys.ls[i] + sh for i in range(4))
    m1, m2, m3, m4 = sys.ms
    p1, p2 = phis
    c1, c2 = cs
    r = [np.asarray(fam, dtype=complex) for fam in roots]
    aroots = tuple(th - w)  # a(x) = prod sigma(x - (theta - w)) / sigma(w)

    b = _ProductBatch(md)
    q2_0p = b.product(r[0] + w, roots[1])
    q2_0 = b.product(r[0], roots[1])
    q4_0 = b.product(r[0], roots[3])
    a_0 = b.product(r[0], aroots)
    q1_1m = b.product(r[1] - w, roots[0])
    q1_1 = b.product(r[1], roots[0])
    q3_1m = b.product(r[1] - w, roots[2])
    d_1 = b.product(r[1], tuple(th))  # d(x) = prod sigma(x - theta) / sigma(w)
    q4_2p = b.product(r[2] + w, roots[3])
    q4_2 = b.product(r[2], roots[3])
    q2_2p = b.product(r[2] + w, roots[1])
    a_2 = b.product(r[2], aroots)
    q3_3m = b.product(r[3] - w, roots[2])
    q3_3 = b.product(r[3], roots[2])
    q1_3 = b.product(r[3], roots[0])
    a_3 = b.product(r[3], aroots)
    q1_th = b.product(th - w, roots[0])
    q2_th = b.product(th, roots[1])
    b.run()

    def ee(coef, x):
        return np.exp(2j * np.pi * coef * x)

    out = []
    t1 = pref_z2 * ee(l2, r[0]) * np.exp(p2) * q2_0p() * q2_0()
    t2 = c1 * ee(l3, r[0]) * a_0() * q4_0()
    out.append(_norm_pair(t1, t2))
    t1 = ee(l1, r[1]) * np.exp(p1) * q1_1m() * q1_1()
    t2 = c1 * ee(l3, r[1]) * d_1() * q3_1m()
    out.append(_norm_pair(t1, t2))
    t1 = (
        pref_z3
        * np.exp(-2j * np.pi * ((l1 + l2) * r[2] + (2 * sys.ls[0] + sys.ls[1] + 3 * sh) * w) - p1 - p2)
        * q4_2p()
        * q4_2()
    )
    t2 = c2 * ee(l4, r[2]) * a_2() * q2_2p()
    out.append(_norm_pair(t1, t2))
    t1 = pref_z2 * ee(l2, r[3]) * np.exp(p2) * q3_3m() * q3_3()
    t2 = c2 * ee(l4, r[3]) * a_3() * q1_3()
    out.append(_norm_pair(t1, t2))

    big_t = th.sum()
    s = [fam.sum() for fam in r]
    rules = np.array(
        [
            -s[0] + s[1] - (N / 3.0) * w - (m1 + l1 * tau),
            s[0] - s[1] - s[2] + s[3] - (N / 3.0) * w - (m2 + l2 * tau),
            -big_t - s[2] + s[0] + s[1] - (N / 3.0) * w - (m3 + l3 * tau),
            -big_t - s[1] + s[2] + s[3] + (5.0 * N / 3.0) * w - (m4 + l4 * tau),
        ]
    )
    out.append(rules / np.maximum(1.0, np.abs(rules - rules + 1.0)))

    power = 3 if twisted else 1
    sel_red, k = _selection_residual(
        q1_th(), q2_th(), 2j * np.pi * l1 * big_t + N * p1, power
    )
    out.append(np.array([sel_red]))
    return np.concatenate(out), k


def _relations_general(sys: BAESystem, roots, phis, cs):
    md = sys.spec.md
    n, w, tau, N = md.n, md.w, md.tau, sys.spec.N
    th = np.asarray(sys.spec.thetas, dtype=complex)
    ls, ms = sys.ls, sys.ms
    counts = sys.counts
    big_t = th.sum()

    def q(i, x):
        fam = roots[i - 1]
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        if not fam:
            return np.ones(x.shape[0], dtype=complex)
        vals = sigma((x[:, None] - np.asarray(fam)[None, :]).ravel(), tau).reshape(
            x.shape[0], len(fam)
        )
        return np.prod(vals / sigma(w, tau), axis=1)

    def a(x):
        return a_function(sys.spec, np.atleast_1d(np.asarray(x, dtype=complex)))

    def d(x):
        return d_function(sys.spec, np.atleast_1d(np.asarray(x, dtype=complex)))

    def f_mid(x):
        if n % 2 == 0 and N % 2 == 1:
            return sigma(np.atleast_1d(np.asarray(x, dtype=complex)), tau)
        return 1.0

    def ee(coef, x):
        return np.exp(2j * np.pi * coef * np.asarray(x, dtype=complex))

    out = []
    mid = n // 2 if n % 2 == 0 else -1

    lam = np.asarray(roots[0], dtype=complex)
    t1 = ee(ls[1], lam) * np.exp(phis[1]) * q(2, lam + w) * q(2, lam)
    t2 = cs[0] * ee(ls[n - 1 + 0], lam) * a(lam) * q(4, lam)
    out.append(_norm_pair(t1, t2))

    lam = np.asarray(roots[1], dtype=complex)
    t1 = ee(ls[0], lam) * np.exp(phis[0]) * q(1, lam - w) * q(1, lam)
    t2 = cs[0] * ee(ls[n - 1 + 0], lam) * d(lam) * q(3, lam - w)
    out.append(_norm_pair(t1, t2))

    for i in range(2, n - 1):
        lam = np.asarray(roots[2 * i - 2], dtype=complex)
        t1 = ee(ls[i], lam) * np.exp(phis[i]) * q(2 * i, lam + w) * q(2 * i, lam)
        t2 = cs[i - 1] * ee(ls[n + i - 2], lam) * a(lam) * q(2 * i - 2, lam + w) * q(2 * i + 2, lam)
        if i == mid:
            t2 = t2 * f_mid(lam)
        out.append(_norm_pair(t1, t2))

        lam = np.asarray(roots[2 * i - 1], dtype=complex)
        t1 = ee(ls[i - 1], lam) * np.exp(phis[i - 1]) * q(2 * i - 1, lam - w) * q(2 * i - 1, lam)
        t2 = cs[i - 1] * ee(ls[n + i - 2], lam) * a(lam) * q(2 * i + 1, lam - w) * q(2 * i - 3, lam)
        if i == mid:
            t2 = t2 * f_mid(lam)
        out.append(_norm_pair(t1, t2))

    lam = np.asarray(roots[2 * n - 4], dtype=complex)
    expo = -2j * np.pi * sum(ls[k - 1] * (lam + (n - k) * w) for k in range(1, n))
    t1 = np.exp(expo - sum(phis)) * q(2 * n - 2, lam + w) * q(2 * n - 2, lam)
    t2 = cs[n - 2] * ee(ls[2 * n - 3], lam) * a(lam) * q(2 * n - 4, lam + w)
    out.append(_norm_pair(t1, t2))

    lam = np.asarray(roots[2 * n - 3], dtype=complex)
    t1 = ee(ls[n - 2], lam) * np.exp(phis[n - 2]) * q(2 * n - 3, lam - w) * q(2 * n - 3, lam)
    t2 = cs[n - 2] * ee(ls[2 * n - 3], lam) * a(lam) * q(2 * n - 5, lam)
    out.append(_norm_pair(t1, t2))

    s = [np.sum(np.asarray(fam, dtype=complex)) for fam in roots]
    rules = []
    rules.append(s[1] - s[0] - ((counts[0] - N + N / n) * w + ms[0] + ls[0] * tau))
    for i in range(2, n):
        rules.append(
            s[2 * i - 4]
            + s[2 * i - 1]
            - s[2 * i - 3]
            - s[2 * i - 2]
            - ((counts[2 * i - 2] - counts[2 * i - 4] + N / n) * w + ms[i - 1] + ls[i - 1] * tau)
        )
    rules.append(
        -big_t + s[0] + s[1] - s[2] + ((n - 1) * N / n - counts[2]) * w - ms[n - 1] - ls[n - 1] * tau
    )
    for j in range(2, n - 1):
        rules.append(
            -big_t
            - s[2 * j - 3]
            + s[2 * j - 2]
            + s[2 * j - 1]
            - s[2 * j]
            + (counts[2 * j - 3] - counts[2 * j] + (n - 1) * N / n) * w
            - ms[n + j - 2]
            - ls[n + j - 2] * tau
        )
    rules.append(
        -big_t
        - s[2 * n - 6]
        + s[2 * n - 5]
        + s[2 * n - 4]
        + (counts[2 * n - 6] + (n - 1) * N / n) * w
        - ms[2 * n - 3]
        - ls[2 * n - 3] * tau
    )
    out.append(np.asarray(rules))

    sel_red, k = _selection_residual(
        q(1, th - w), q(2, th), 2j * np.pi * ls[0] * big_t + N * phis[0], 1
    )
    out.append(np.array([sel_red]))
    return np.concatenate(out), k


def _relations_reduced(sys: BAESystem, roots, phis, cs):
    md = sys.spec.md
    w, tau, N = md.w, md.tau, sys.spec.N
    th = np.asarray(sys.spec.thetas, dtype=complex)
    p1, p2 = phis
    degw = sys.kind == Z3_DEGENERATE_W
    l1 = sys.ls[0] if degw else 0
    n1 = sys.n1 if degw else 0

    b = _ProductBatch(md)
    r1 = np.asarray(roots[0], dtype=complex)
    r2 = np.asarray(roots[1], dtype=complex)
    aroots = tuple(th - w)
    a_1 = b.product(r1, aroots)
    d_1 = b.product(r1, tuple(th))
    qb2_1 = b.product(r1, roots[1])
    qb2_1m = b.product(r1 - w, roots[1])
    qb1_1m = b.product(r1 - w, roots[0])
    qb1_1p = b.product(r1 + w, roots[0])
    qb1_2p = b.product(r2 + w, roots[0])
    qb1_2 = b.product(r2, roots[0])
    qb2_2p = b.product(r2 + w, roots[1])
    qb2_2m = b.product(r2 - w, roots[1])
    qb1_thm = b.product(th - w, roots[0])
    qb1_th = b.product(th, roots[0])
    b.run()

    out = []
    e_a = np.exp(2j * np.pi * (1 - n1) * l1 * r1) if degw else 1.0
    t1 = e_a * a_1() * qb2_1() * np.exp(p1 - p2) * qb1_1m()
    t2 = d_1() * qb2_1m() * qb1_1p()
    out.append(_norm_pair(t1, t2))

    e_b = (
        np.exp(2j * np.pi * ((2 * n1 + 1) * l1 * r2 + (n1 + 2) * l1 * w))
        if degw
        else 1.0
    )
    t1 = e_b * np.exp(p1 + 2 * p2) * qb1_2p() * qb2_2m()
    t2 = qb2_2p() * qb1_2()
    out.append(_norm_pair(t1, t2))

    expo = N * p1 + (2j * np.pi * l1 * th.sum() if degw else 0.0)
    sel_red, k = _selection_residual(qb1_thm(), qb1_th(), expo, 1)
    out.append(np.array([sel_red]))
    return np.concatenate(out), k


def relation_values(sys: BAESystem, x: np.ndarray):
    """Complex relation vector (normalised) plus the selection winding count."""
    roots, phis, cs = sys.unpack(x)
    if sys.kind in (Z3_PERIODIC, Z3_TWISTED):
        return _relations_z3(sys, roots, phis, cs)
    if sys.kind in (Z4_PERIODIC, ZN_GENERAL):
        return _relations_general(sys, roots, phis, cs)
    if sys.kind in _REDUCED_KINDS:
        return _relations_reduced(sys, roots, phis, cs)
    raise ValueError(f"unknown system kind {sys.kind!r}")


def residual(sys: BAESystem, x: np.ndarray) -> np.ndarray:
    """Stacked real/imaginary parts of every relation."""
    vals, _ = relation_values(sys, x)
    return np.column_stack([vals.real, vals.imag]).ravel()


def residual_inf(sys: BAESystem, x: np.ndarray) -> float:
    vals, _ = relation_values(sys, x)
    return float(np.abs(vals).max())


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------


@dataclass
class SolveOptions:
    tol: float = 1e-10
    max_nfev: int = 900
    polish_nfev: int = 300


@dataclass
class SolveOutcome:
    configurations: list[BetheConfiguration] = field(default_factory=list)
    n_started: int = 0
    n_converged: int = 0
    failures: list[str] = field(default_factory=list)


def _safe_values(sys: BAESystem, x: np.ndarray):
    try:
        vals, _ = relation_values(sys, x)
        return np.where(np.isfinite(vals), vals, 1e6)
    except (PoleInResidual, PoleAtBetheRoot, FloatingPointError):
        return np.full(sys.n_relations, 1e6, dtype=complex)


def _gauss_newton_polish(sys: BAESystem, x: np.ndarray, iters: int = 8, fd_step: float = 5e-6):
    """Newton-type polish with central differences along the real axis only.

    The relations are holomorphic in the complex unknowns, so the real-axis
    derivative is the full complex derivative (Cauchy-Riemann); solving the
    complex least-squares step halves the work of the real formulation and
    keeps the two real directions exactly consistent.
    """
    nz = sys.n_complex
    for _ in range(iters):
        f0 = _safe_values(sys, x)
        r0 = float(np.abs(f0).max())
        if r0 < 5e-15 or r0 >= 1e6:
            break
        jc = np.zeros((f0.size, nz), dtype=complex)
        z = x.reshape(-1, 2)
        for i in range(nz):
            h = fd_step * max(1.0, abs(complex(z[i, 0], z[i, 1])))
            xp = x.copy()
            xp[2 * i] += h
            xm = x.copy()
            xm[2 * i] -= h
            jc[:, i] = (_safe_values(sys, xp) - _safe_values(sys, xm)) / (2 * h)
        col = np.linalg.norm(jc, axis=0)
        col = np.where(col > 0, col, 1.0)
        accepted = False
        for mu in (0.0, 1e-12, 1e-8, 1e-4, 1e-1):
            if mu == 0.0:
                a_mat, b_vec = jc, -f0
            else:
                a_mat = np.vstack([jc, np.sqrt(mu) * np.diag(col)])
                b_vec = np.concatenate([-f0, np.zeros(nz, dtype=complex)])
            try:
                dz, *_ = np.linalg.lstsq(a_mat, b_vec, rcond=None)
            except np.linalg.LinAlgError:
                continue
            step = np.column_stack([dz.real, dz.imag]).ravel()
            for lam in (1.0, 0.5, 0.25):
                xn = x + lam * step
                if np.abs(_safe_values(sys, xn)).max() < r0:
                    x = xn
                    accepted = True
                    break
            if accepted:
                break
        if not accepted:
            break
    return x


def _solve_one(sys: BAESystem, x0: np.ndarray, opt: SolveOptions):
    m, n_unknown = 2 * sys.n_relations, 2 * sys.n_complex
    method = "lm" if m >= n_unknown else "trf"

    def fun(x):
        try:
            r = residual(sys, x)
            return np.where(np.isfinite(r), r, 1e6)
        except (PoleInResidual, PoleAtBetheRoot, FloatingPointError):
            return np.full(m, 1e6)

    try:
        res = scipy.optimize.least_squares(
            fun, x0, method=method, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=opt.max_nfev
        )
    except (ValueError, np.linalg.LinAlgError):
        # singular Jacobian path: retry once from a jittered start with the
        # trust-region method (its damping handles rank deficiency)
        jitter = x0 + 1e-6 * np.random.default_rng(0).normal(size=x0.shape)
        try:
            res = scipy.optimize.least_squares(
                fun, jitter, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=opt.max_nfev
            )
        except (ValueError, np.linalg.LinAlgError):
            return None, np.inf, 0
    x = res.x
    nfev = int(res.nfev)
    if np.abs(res.fun).max() < 1e-2:  # only polish plausible candidates
        x = _gauss_newton_polish(sys, x)
        try:
            rinf = residual_inf(sys, x)
        except (PoleInResidual, PoleAtBetheRoot):
            return None, np.inf, nfev
        if opt.tol < rinf < 1e-2:
            # a fresh trust region often breaks through optimiser stalls
            try:
                res2 = scipy.optimize.least_squares(
                    fun, x, method=method, xtol=1e-15, ftol=1e-15, gtol=1e-15,
                    max_nfev=opt.polish_nfev,
                )
                nfev += int(res2.nfev)
                x2 = _gauss_newton_polish(sys, res2.x)
                if residual_inf(sys, x2) < rinf:
                    x = x2
            except (ValueError, np.linalg.LinAlgError, PoleInResidual, PoleAtBetheRoot):
                pass
    try:
        rinf = residual_inf(sys, x)
    except (PoleInResidual, PoleAtBetheRoot):
        return None, np.inf, nfev
    return x, rinf, nfev


def canonical_roots(cfg: BetheConfiguration) -> tuple[tuple[complex, ...], ...]:
    """Roots translated into the fundamental cell and sorted, per family."""
    md = cfg.md
    out = []
    for fam in cfg.roots:
        red = [reduce_to_cell(z, md.tau) for z in fam]
        out.append(tuple(sorted(red, key=lambda z: (round(z.real, 6), round(z.imag, 6)))))
    return tuple(out)


def same_configuration(a: BetheConfiguration, b: BetheConfiguration, tol: float = 2e-5) -> bool:
    """Equality modulo root permutations and lattice translations."""
    if a.kind != b.kind or a.counts != b.counts:
        return False
    for fa, fb in zip(canonical_roots(a), canonical_roots(b)):
        used = [False] * len(fb)
        for za in fa:
            hit = False
            for idx, zb in enumerate(fb):
                if used[idx]:
                    continue
                # compare modulo the unit cell in both directions
                d = za - zb
                d = complex(d.real - round(d.real), d.imag)
                d = d - round(d.imag / a.md.tau.imag) * a.md.tau
                d = complex(d.real - round(d.real), d.imag)
                if abs(d) < tol:
                    used[idx] = True
                    hit = True
                    break
            if not hit:
                return False
    return True


def config_lambda(cfg: BetheConfiguration, spec: ChainSpec, m: int, u):
    """Lambda_m dispatcher covering the reduced kinds."""
    if cfg.kind in _REDUCED_KINDS:
        if m == 1:
            return reduced_lambda_z3(cfg, spec, u)
        if m == 2:
            return reduced_lambda2_z3(cfg, spec, u)
        if m == 3:
            return quantum_det_scalar(spec, u)
        raise ValueError(f"level m={m} outside 1..3")
    return lambda_m(cfg, spec, m, u)


def lambda_limit(cfg: BetheConfiguration, spec: ChainSpec, m: int, u, eps: float = 1e-5) -> complex:
    """Lambda_m at a point that may sit on a removable 0/0 of the term family.

    The singularities of the assembled sum at Bethe roots or at points where a
    root collides with theta_j (mod lattice) are removable; a 4-point complex
    average recovers the limit to O(eps^4).
    """
    try:
        return complex(config_lambda(cfg, spec, m, u))
    except (PoleAtBetheRoot, PoleInResidual):
        vals = [
            complex(config_lambda(cfg, spec, m, u + d))
            for d in (eps, -eps, 1j * eps, -1j * eps)
        ]
        return complex(np.mean(vals))


def _dedupe(sys: BAESystem, configs: list[BetheConfiguration]) -> list[BetheConfiguration]:
    kept: list[BetheConfiguration] = []
    for cfg in configs:
        if not any(same_configuration(cfg, other) for other in kept):
            kept.append(cfg)
    return kept


def random_start(sys: BAESystem, rng) -> np.ndarray:
    """Roots uniform in the cell, phases uniform in [-pi, pi]^2, coefficients
    log-uniform in magnitude over [1e-3, 1e3] with uniform phase."""
    md = sys.spec.md
    roots = []
    for c in sys.counts:
        fam = [
            complex(rng.uniform(-0.5, 0.5), 0) + rng.uniform(-0.5, 0.5) * md.tau
            for _ in range(c)
        ]
        roots.append(tuple(fam))
    phis = tuple(
        complex(rng.uniform(-np.pi, np.pi), rng.uniform(-np.pi, np.pi))
        for _ in range(sys.n_phis)
    )
    cs = tuple(
        10.0 ** rng.uniform(-3, 3) * np.exp(2j * np.pi * rng.uniform())
        for _ in range(sys.n_cs)
    )
    return sys.pack(roots, phis, cs)


def solve_detailed(
    sys: BAESystem,
    seeds,
    options: SolveOptions | None = None,
) -> SolveOutcome:
    """Run the damped least-squares solver from every seed and deduplicate."""
    opt = options or SolveOptions()
    outcome = SolveOutcome()
    raw: list[tuple[float, BetheConfiguration]] = []
    for idx, x0 in enumerate(seeds):
        outcome.n_started += 1
        x, rinf, _ = _solve_one(sys, np.asarray(x0, dtype=float), opt)
        if x is None or rinf > opt.tol:
            outcome.failures.append(f"seed {idx}: residual {rinf:.2e}")
            continue
        outcome.n_converged += 1
        _, k = relation_values(sys, x)
        raw.append((rinf, vector_to_config(sys, x, selection_branch=k)))
    raw.sort(key=lambda pair: pair[0])
    outcome.configurations = _dedupe(sys, [cfg for _, cfg in raw])
    return outcome


def solve(sys: BAESystem, seeds, options: SolveOptions | None = None) -> list[BetheConfiguration]:
    """Converged, gauge-deduplicated configurations (see solve_detailed)."""
    return solve_detailed(sys, seeds, options).configurations


# ---------------------------------------------------------------------------
# seeding from an exact-diagonalization family
# ---------------------------------------------------------------------------


def _sum_rule_targets(sys: BAESystem) -> np.ndarray | None:
    """Solve the lattice sum rules for the family sums (full n=3 kinds only)."""
    if sys.kind not in (Z3_PERIODIC, Z3_TWISTED):
        return None
    md = sys.spec.md
    N = sys.spec.N
    sh = 2.0 / 3.0 if sys.kind == Z3_TWISTED else 0.0
    tau, w = md.tau, md.w
    big_t = sum(sys.spec.thetas)
    rhs = np.array(
        [
            sys.ms[0] + (sys.ls[0] + sh) * tau + (N / 3.0) * w,
            sys.ms[1] + (sys.ls[1] + sh) * tau + (N / 3.0) * w,
            sys.ms[2] + (sys.ls[2] + sh) * tau + (N / 3.0) * w + big_t,
            sys.ms[3] + (sys.ls[3] + sh) * tau - (5.0 * N / 3.0) * w + big_t,
        ]
    )
    mat = np.array(
        [
            [-1, 1, 0, 0],
            [1, -1, -1, 1],
            [1, 1, -1, 0],
            [0, -1, 1, 1],
        ],
        dtype=complex,
    )
    return np.linalg.solve(mat, rhs)


def seed_from_spectrum(
    fam: SpectralFamily,
    state: int,
    sys: BAESystem,
    rng=None,
    fit_nfev: int = 700,
    restarts: int = 4,
    misfit_target: float = 1e-5,
    misfit_tol: float = 0.35,
) -> np.ndarray:
    """Warm start: fit the ansatz to the state's Lambda samples on a grid.

    Free parameters are the roots (the last root of each family eliminated
    through the sum rules when available), phases and coefficients; the fit
    minimises the mismatch of the first two Lambda levels on 4N+6 grid points,
    restarting from fresh random draws until the relative misfit drops below
    misfit_target (or the restart budget runs out; the best attempt wins).
    The result is a starting vector for solve(), not a verified solution.
    Raises FitDiverged when the best misfit stays above misfit_tol.
    """
    rng = np.random.default_rng(0x5EED) if rng is None else rng
    spec = sys.spec
    npts = 4 * spec.N + 6
    from .spectrum import _lattice_avoiding_points

    grid = np.array(_lattice_avoiding_points(spec, rng, npts))
    targets = [np.asarray([fam.lambda_values(m, u)[state] for u in grid]) for m in (1, 2)]
    scales = [np.maximum(np.abs(t), 1.0) for t in targets]
    sums = _sum_rule_targets(sys)
    counts = sys.counts

    def assemble(xfree: np.ndarray) -> np.ndarray:
        z = xfree.reshape(-1, 2)
        flat = z[:, 0] + 1j * z[:, 1]
        pos = 0
        roots = []
        for i, c in enumerate(counts):
            take = c - 1 if (sums is not None and c > 0) else c
            fam_roots = list(flat[pos : pos + take])
            pos += take
            if sums is not None and c > 0:
                fam_roots.append(sums[i] - np.sum(fam_roots))
            roots.append(tuple(fam_roots))
        phis = tuple(flat[pos : pos + sys.n_phis])
        pos += sys.n_phis
        cs = tuple(flat[pos : pos + sys.n_cs])
        return sys.pack(roots, phis, cs)

    def misfit(xfree: np.ndarray) -> np.ndarray:
        x = assemble(xfree)
        cfg = vector_to_config(sys, x)
        try:
            if sys.kind in _REDUCED_KINDS:
                lam_vals = [np.asarray(config_lambda(cfg, spec, m, grid)) for m in (1, 2)]
            else:
                lam_vals = lambda_levels(cfg, spec, (1, 2), grid)
            out = []
            for vals, tgt, sc in zip(lam_vals, targets, scales):
                diff = (np.asarray(vals) - tgt) / sc
                out.append(np.column_stack([diff.real, diff.imag]).ravel())
            return np.concatenate(out)
        except (PoleAtBetheRoot, PoleInResidual, FloatingPointError):
            return np.full(4 * npts, 1e3)

    n_free = sum((c - 1 if (sums is not None and c > 0) else c) for c in counts)
    n_free += sys.n_phis + sys.n_cs
    method = "lm" if 4 * npts >= 2 * n_free else "trf"

    best_x, best_cost = None, np.inf
    for _ in range(max(1, restarts)):
        x0full = random_start(sys, rng)
        roots, phis, cs = sys.unpack(x0full)
        free = []
        for fam_roots in roots:
            cut = len(fam_roots) - 1 if (sums is not None and fam_roots) else len(fam_roots)
            free.extend(fam_roots[:cut])
        free.extend(phis)
        free.extend(cs)
        xfree0 = np.column_stack(
            [np.asarray(free, complex).real, np.asarray(free, complex).imag]
        ).ravel()
        try:
            fit = scipy.optimize.least_squares(
                misfit, xfree0, method=method, xtol=1e-15, ftol=1e-15, gtol=1e-15,
                max_nfev=fit_nfev,
            )
        except (ValueError, np.linalg.LinAlgError):
            continue
        cost = np.abs(fit.fun).max()
        if cost < best_cost:
            best_cost, best_x = cost, fit.x
        if cost < misfit_target:
            break
    if best_x is None or best_cost > misfit_tol:
        raise FitDiverged(f"Lambda fit stalled at relative misfit {best_cost:.3e}")
    return assemble(best_x)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def verify_solution(
    cfg: BetheConfiguration,
    spec: ChainSpec,
    fam: SpectralFamily | None = None,
    residual_tol: float = 1e-10,
    functional_tol: float = 1e-8,
    match_tol: float = 1e-8,
    seed: int = 1234,
) -> Report:
    """Residual norm, functional relations of the assembled Lambda, lattice
    phases, the selection rule, and (optionally) the distance to the nearest
    exact-diagonalization branch on a 10-point grid."""
    rng = np.random.default_rng(seed)
    sys = system_for(cfg, spec)
    report = Report(config={"task": "verify-solution", "kind": cfg.kind})
    x = config_to_vector(sys, cfg)
    try:
        rinf = residual_inf(sys, x)
    except (PoleInResidual, PoleAtBetheRoot):
        rinf = np.inf
    report.add("bae-residual-max", rinf, residual_tol)

    md = cfg.md
    w, tau, N = md.w, md.tau, spec.N
    from .spectrum import _lattice_avoiding_points

    def lam(m, u):
        return lambda_limit(cfg, spec, m, u)

    root_points = [z for fam_roots in canonical_roots(cfg) for z in fam_roots]
    probe = _lattice_avoiding_points(spec, rng, 12, min_dist=0.04, avoid=root_points)
    scale2 = max(abs(complex(lam(2, probe[0]))), 1e-6)

    thetas_unique = []
    for th in spec.thetas:
        if all(abs(th - s) > 1e-12 for s in thetas_unique):
            thetas_unique.append(th)
    for j, th in enumerate(thetas_unique, start=1):
        l1v = complex(lam(1, th))
        l2v = complex(lam(2, th - w))
        l3v = complex(lam(3, th))
        scale = max(abs(l1v) * max(abs(l2v), scale2), abs(l3v), 1e-12)
        report.add(f"tq-recursion j={j}", abs(l1v * l2v - l3v) / scale, functional_tol)
        report.add(f"tq-zero j={j}", abs(complex(lam(2, th + w))) / scale2, functional_tol)

    u = probe[1]
    base1 = complex(lam(1, u))
    base2 = complex(lam(2, u))
    omega = np.exp(2j * np.pi / 3)
    twisted = cfg.kind == Z3_TWISTED
    for m, base in ((1, base1), (2, base2)):
        ph1 = (-1.0) ** (m * N)
        ph2 = ph1 * np.exp(
            -2j * np.pi * (m * N * (u + w / 3 + tau / 2 - (m - 1) * w / 2) - m * sum(spec.thetas))
        )
        if twisted:
            ph1 *= omega ** (-m)
        r1 = abs(complex(lam(m, u + 1)) - ph1 * base) / max(abs(base), 1e-12)
        r2 = abs(complex(lam(m, u + tau)) - ph2 * base) / max(abs(base), 1e-12)
        report.add(f"tq-shift-1 m={m}", r1, functional_tol)
        report.add(f"tq-shift-tau m={m}", r2, functional_tol)

    prod_lam = complex(np.prod([lam(1, th) for th in spec.thetas]))
    prod_a = complex(np.prod([a_function(spec, th) for th in spec.thetas]))
    if twisted:
        sel_res = abs(prod_lam**3 - prod_a**3) / max(abs(prod_a) ** 3, 1e-12)
        report.add("tq-selection-cubed", sel_res, functional_tol)
    else:
        sel_res = abs(prod_lam - prod_a) / max(abs(prod_a), 1e-12)
        report.add("tq-selection", sel_res, functional_tol)

    if fam is not None:
        grid = np.array(probe[2:12])
        tq_vals = np.asarray([lam(1, g) for g in grid])
        devs = []
        for state in range(fam.size):
            ed = np.array([fam.lambda_values(1, g)[state] for g in grid])
            devs.append(float(np.max(np.abs(tq_vals - ed) / np.maximum(np.abs(ed), 1.0))))
        best = int(np.argmin(devs))
        report.add(f"ed-match state={best}", devs[best], match_tol)
        report.extras["matched_state"] = best
        report.extras["ed_deviation"] = devs[best]
    return report
