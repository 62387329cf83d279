"""Inhomogeneous T-Q assembly: Q-functions, the Z/X term family, and Lambda_m.

A configuration packs Bethe roots lambda^{(i)}_j (one list per Q-function),
exponential phases phi_i, inhomogeneous coefficients c_i and the integer
sectors (l_i, m_i).  Supported flavours:

  zn-general              2n-2 Q-functions; the term family is

      Z_1 = e^{2 i pi l_1 u + phi_1} a(u) Q1(u-w) / Q2(u)
      Z_i = e^{2 i pi l_i u + phi_i} d(u) Q_{2i-2}(u+w) Q_{2i-1}(u-w)
                                           / (Q_{2i-3}(u) Q_{2i}(u))
      Z_n = e^{-2 i pi sum_k l_k (u + (n-k) w) - sum phi} d(u)
                                           Q_{2n-2}(u+w) / Q_{2n-3}(u)
      X_1 = c_1 e^{2 i pi l_n u} a d Q3(u-w) / (Q1 Q2)
      X_j = c_j e^{2 i pi l_{n+j-1} u} a d Q_{2j-2}(u+w) Q_{2j+1}(u-w)
                                           / (Q_{2j-1} Q_{2j})
      X_{n-1} = c_{n-1} e^{2 i pi l_{2n-2} u} a d Q_{2n-4}(u+w)
                                           / (Q_{2n-3} Q_{2n-2})

    with an extra factor f(u) on X_{n/2} for even n (1 for even N, sigma(u)
    for odd N, which keeps every root count integral).

  z3-periodic / z4-periodic   aliases of zn-general at n = 3, 4 (with the
    root-count rule specialised); independent hand-written transcriptions of
    the five-term / seven-term displays live in lambda_z3_display and
    lambda_z4_display for cross-validation.

  z3-twisted              the omega_3-decorated five functions of the G = h
    twisted chain (every exponent l_i -> l_i + 2/3, prefactors omega_3 on Z_2
    and omega_3^2 on Z_3).

  z3-homogeneous-reduced  the three-term form with two reduced Q-functions,
    valid at N = 3l with root counts (2l, l) and all sector integers zero.

  z3-degenerate-w         the three-term form at the discrete crossing values
    w = (3 m1 + 3 l1 tau) / (2N - 3 Mbar1), second-level count
    Mbar2 = (n1+1) Mbar1 - (2 n1 + 1) N / 3.

Lambda_m is the sum over admissible interleavings of m terms with the k-th
factor shifted by (k-1) w; an X at slot 2j forbids its four diagram
neighbours, i.e. the previous chosen index must be <= 2j-3 and the next
>= 2j+3.  Level m = n collapses to a(u) prod_k d(u - k w), the quantum
determinant, which the single surviving all-Z interleaving reproduces
identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .elliptic import ModularData, sigma, sigma_derivative
from .transfer import ChainSpec, a_function, d_function, quantum_det_scalar

__all__ = [
    "KindMismatch",
    "ConstraintViolated",
    "PoleAtBetheRoot",
    "Z3_PERIODIC",
    "Z3_TWISTED",
    "Z4_PERIODIC",
    "ZN_GENERAL",
    "Z3_REDUCED",
    "Z3_DEGENERATE_W",
    "BetheConfiguration",
    "TQTermSet",
    "default_root_counts",
    "q_function",
    "zx_functions",
    "admissible_sequences",
    "lambda_m",
    "lambda_levels",
    "reduced_lambda_z3",
    "reduced_lambda2_z3",
    "lambda_z3_display",
    "lambda_z4_display",
    "lambda_z3_twisted_display",
]

Z3_PERIODIC = "z3-periodic"
Z3_TWISTED = "z3-twisted"
Z4_PERIODIC = "z4-periodic"
ZN_GENERAL = "zn-general"
Z3_REDUCED = "z3-homogeneous-reduced"
Z3_DEGENERATE_W = "z3-degenerate-w"

_FULL_KINDS = {Z3_PERIODIC, Z3_TWISTED, Z4_PERIODIC, ZN_GENERAL}
_REDUCED_KINDS = {Z3_REDUCED, Z3_DEGENERATE_W}


class KindMismatch(ValueError):
    pass


class ConstraintViolated(ValueError):
    pass


class PoleAtBetheRoot(ArithmeticError):
    """Evaluation point within the guard distance of a Q-function zero."""


def default_root_counts(n: int, N: int) -> tuple[int, ...]:
    """Root counts N_1..N_{2n-2} from the parity rule.

    Odd n: N_{2i-1} = N_{2i} = N_{2(n-i)-1} = N_{2(n-i)} = i(n-i) N / 2.
    Even n: same, plus i/2 when N is odd (the sigma(u) factor on the middle X
    supplies the extra zero).
    """
    counts = [0] * (2 * n - 2)
    top = (n - 1) // 2 if n % 2 else n // 2
    for i in range(1, top + 1):
        val = i * (n - i) * N / 2
        if n % 2 == 0 and N % 2 == 1:
            val += i / 2
        if abs(val - round(val)) > 1e-12:
            raise ConstraintViolated(f"non-integer root count for n={n}, N={N}, i={i}")
        for slot in (2 * i - 1, 2 * i, 2 * (n - i) - 1, 2 * (n - i)):
            counts[slot - 1] = int(round(val))
    return tuple(counts)


@dataclass(frozen=True)
class BetheConfiguration:
    """Roots, phases, coefficients and integer sectors for one ansatz kind."""

    kind: str
    md: ModularData
    roots: tuple[tuple[complex, ...], ...]
    phis: tuple[complex, ...]
    cs: tuple[complex, ...]
    ls: tuple[int, ...]
    ms: tuple[int, ...]
    n1: int = 0
    selection_branch: int | None = None

    def __init__(self, kind, md, roots, phis, cs, ls, ms, n1=0, selection_branch=None):
        object.__setattr__(self, "kind", str(kind))
        object.__setattr__(self, "md", md)
        object.__setattr__(
            self, "roots", tuple(tuple(complex(z) for z in fam) for fam in roots)
        )
        object.__setattr__(self, "phis", tuple(complex(p) for p in phis))
        object.__setattr__(self, "cs", tuple(complex(c) for c in cs))
        object.__setattr__(self, "ls", tuple(int(v) for v in ls))
        object.__setattr__(self, "ms", tuple(int(v) for v in ms))
        object.__setattr__(self, "n1", int(n1))
        object.__setattr__(
            self, "selection_branch", None if selection_branch is None else int(selection_branch)
        )
        self._validate()

    def _validate(self):
        n = self.md.n
        if self.kind in _FULL_KINDS:
            if self.kind in (Z3_PERIODIC, Z3_TWISTED) and n != 3:
                raise KindMismatch(f"{self.kind} requires n=3, got n={n}")
            if self.kind == Z4_PERIODIC and n != 4:
                raise KindMismatch(f"{self.kind} requires n=4, got n={n}")
            if len(self.roots) != 2 * n - 2:
                raise KindMismatch(
                    f"{self.kind} needs {2*n-2} root families, got {len(self.roots)}"
                )
            if len(self.phis) != n - 1 or len(self.cs) != n - 1:
                raise KindMismatch(f"{self.kind} needs n-1 phases and coefficients")
            if len(self.ls) != 2 * n - 2 or len(self.ms) != 2 * n - 2:
                raise KindMismatch(f"{self.kind} needs 2n-2 sector integer pairs")
        elif self.kind in _REDUCED_KINDS:
            if n != 3:
                raise KindMismatch(f"{self.kind} requires n=3")
            if len(self.roots) != 2:
                raise KindMismatch("reduced kinds carry two root families")
            if len(self.phis) != 2 or len(self.cs) != 0:
                raise KindMismatch("reduced kinds carry 2 phases and no coefficients")
        else:
            raise KindMismatch(f"unknown configuration kind {self.kind!r}")

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(len(fam) for fam in self.roots)

    def check_counts(self, N: int) -> None:
        """Enforce the parity root-count rule for the full kinds."""
        if self.kind in _FULL_KINDS:
            expect = default_root_counts(self.md.n, N)
            if self.counts != expect:
                raise ConstraintViolated(
                    f"root counts {self.counts} violate the parity rule {expect}"
                )


@lru_cache(maxsize=8)
def _sigma_prime_zero(md: ModularData) -> float:
    return abs(sigma_derivative(0.0, md.tau))


def q_function(cfg: BetheConfiguration, i: int, u, guard: float = 1e-8):
    """Q^{(i)}(u) = prod_j sigma(u - lambda^{(i)}_j) / sigma(w); empty product is 1.

    Raises PoleAtBetheRoot when any factor sits within ~guard of a zero.
    """
    fam = cfg.roots[i - 1]
    md = cfg.md
    uu = np.asarray(u, dtype=complex)
    flat = np.atleast_1d(uu)
    if not fam:
        out = np.ones_like(flat)
        return complex(out[0]) if uu.ndim == 0 else out.reshape(uu.shape)
    args = flat[:, None] - np.array(fam)[None, :]
    vals = sigma(args.ravel(), md.tau).reshape(args.shape)
    if guard > 0 and np.any(np.abs(vals) < guard * _sigma_prime_zero(md)):
        raise PoleAtBetheRoot(f"Q^{({i})} evaluated within {guard} of a root")
    sw = sigma(md.w, md.tau)
    out = np.prod(vals / sw, axis=1)
    return complex(out[0]) if uu.ndim == 0 else out.reshape(uu.shape)


@dataclass(frozen=True)
class TQTermSet:
    """Callables for the term family of one configuration on one chain."""

    kind: str
    z: tuple  # z[i-1] evaluates Z_i(u)
    x: tuple  # x[j-1] evaluates X_j(u)
    a: object
    d: object
    q: object


def _check_chain(cfg: BetheConfiguration, spec: ChainSpec) -> None:
    if cfg.md is not spec.md and (
        cfg.md.n != spec.md.n or cfg.md.tau != spec.md.tau or cfg.md.w != spec.md.w
    ):
        raise KindMismatch("configuration and chain carry different model data")
    if cfg.kind == Z3_TWISTED:
        if spec.twist != (1, 0):
            raise KindMismatch("z3-twisted configurations require the (1,0)-twisted chain")
    elif cfg.kind in _FULL_KINDS or cfg.kind in _REDUCED_KINDS:
        if spec.twist is not None:
            raise KindMismatch(f"{cfg.kind} configurations require the periodic chain")


def zx_functions(cfg: BetheConfiguration, spec: ChainSpec) -> TQTermSet:
    """Build the Z_1..Z_n and X_1..X_{n-1} closures for a full-kind configuration."""
    _check_chain(cfg, spec)
    if cfg.kind not in _FULL_KINDS:
        raise KindMismatch(f"zx_functions needs a full T-Q kind, got {cfg.kind}")
    md = cfg.md
    n, w, tau = md.n, md.w, md.tau
    N = spec.N
    ls, phis, cs = cfg.ls, cfg.phis, cfg.cs
    twisted = cfg.kind == Z3_TWISTED
    sh = 2.0 / 3.0 if twisted else 0.0
    om = np.exp(2j * np.pi / 3)

    # Q, a, d evaluations repeat across the Z/X closures (the same shifted
    # argument grid shows up in several terms), so memoise on the value bytes
    cache: dict = {}

    def _key(tag, u):
        arr = np.asarray(u, dtype=complex)
        return (tag, arr.shape, arr.tobytes())

    def a(u):
        key = _key("a", u)
        if key not in cache:
            cache[key] = a_function(spec, u)
        return cache[key]

    def d(u):
        key = _key("d", u)
        if key not in cache:
            cache[key] = d_function(spec, u)
        return cache[key]

    def q(i, u):
        key = _key(i, u)
        if key not in cache:
            cache[key] = q_function(cfg, i, u)
        return cache[key]

    def e(coef, u):
        return np.exp(2j * np.pi * coef * np.asarray(u, dtype=complex))

    def make_z(i):
        if i == 1:
            return lambda u: e(ls[0] + sh, u) * np.exp(phis[0]) * a(u) * q(1, np.asarray(u) - w) / q(2, u)
        if i < n:
            pref = om if (twisted and i == 2) else 1.0
            return (
                lambda u, i=i, pref=pref: pref
                * e(ls[i - 1] + sh, u)
                * np.exp(phis[i - 1])
                * d(u)
                * q(2 * i - 2, np.asarray(u) + w)
                * q(2 * i - 1, np.asarray(u) - w)
                / (q(2 * i - 3, u) * q(2 * i, u))
            )
        if twisted:
            # omega^2 d(u) e^{-2 i pi[(l1+l2+4/3) u + (2 l1 + l2 + 2) w] - phi1 - phi2} Q4(u+w)/Q3(u)
            def zn(u):
                uu = np.asarray(u, dtype=complex)
                expo = -2j * np.pi * ((ls[0] + ls[1] + 4.0 / 3.0) * uu + (2 * ls[0] + ls[1] + 2.0) * w)
                return om**2 * d(u) * np.exp(expo - phis[0] - phis[1]) * q(4, uu + w) / q(3, uu)

        else:

            def zn(u):
                uu = np.asarray(u, dtype=complex)
                expo = -2j * np.pi * sum(ls[k - 1] * (uu + (n - k) * w) for k in range(1, n))
                return d(u) * np.exp(expo - sum(phis)) * q(2 * n - 2, uu + w) / q(2 * n - 3, uu)

        return zn

    even_middle = n // 2 if n % 2 == 0 else None

    def f_mid(u):
        if N % 2 == 1:
            return sigma(np.asarray(u, dtype=complex), tau)
        return 1.0

    def make_x(j):
        lcoef = ls[n + j - 2] + sh

        def xj(u):
            uu = np.asarray(u, dtype=complex)
            val = cs[j - 1] * e(lcoef, uu) * a(u) * d(u)
            if j == 1:
                val = val * q(3, uu - w) / (q(1, uu) * q(2, uu))
            elif j == n - 1:
                val = val * q(2 * n - 4, uu + w) / (q(2 * n - 3, uu) * q(2 * n - 2, uu))
            else:
                val = (
                    val
                    * q(2 * j - 2, uu + w)
                    * q(2 * j + 1, uu - w)
                    / (q(2 * j - 1, uu) * q(2 * j, uu))
                )
            if even_middle is not None and j == even_middle:
                val = val * f_mid(uu)
            return val

        return xj

    z = tuple(make_z(i) for i in range(1, n + 1))
    x = tuple(make_x(j) for j in range(1, n))
    return TQTermSet(kind=cfg.kind, z=z, x=x, a=a, d=d, q=q)


def admissible_sequences(n: int, m: int) -> list[tuple[int, ...]]:
    """Increasing index sequences of length m in 1..2n-1 obeying the X-exclusion.

    Odd indices 2j-1 are Z_j slots, even indices 2j are X_j slots; choosing an
    X at 2j forbids 2j-2, 2j-1 (previous <= 2j-3) and 2j+1, 2j+2 (next >= 2j+3).
    """
    if not 1 <= m <= n:
        raise ValueError(f"level m={m} outside 1..{n}")
    top = 2 * n - 1
    out: list[tuple[int, ...]] = []

    def rec(start: int, prev: int | None, acc: list[int]):
        if len(acc) == m:
            out.append(tuple(acc))
            return
        for i in range(start, top + 1):
            if i % 2 == 0 and prev is not None and prev > i - 3:
                continue
            if prev is not None and prev % 2 == 0 and i < prev + 3:
                continue
            acc.append(i)
            rec(i + 1, i, acc)
            acc.pop()

    rec(1, None, [])
    return out


def _lambda_from_terms(ts: TQTermSet, n: int, w: complex, m: int, u):
    shifted = {}
    factor_cache = {}

    def term(idx: int, shift: int):
        key = (idx, shift)
        if key not in factor_cache:
            if shift not in shifted:
                shifted[shift] = np.asarray(u, dtype=complex) - shift * w
            uu = shifted[shift]
            if idx % 2 == 1:
                factor_cache[key] = ts.z[(idx - 1) // 2](uu)
            else:
                factor_cache[key] = ts.x[idx // 2 - 1](uu)
        return factor_cache[key]

    total = None
    for seq in admissible_sequences(n, m):
        prod = term(seq[0], 0)
        for k, idx in enumerate(seq[1:], start=1):
            prod = prod * term(idx, k)
        total = prod if total is None else total + prod
    return total


def lambda_m(cfg: BetheConfiguration, spec: ChainSpec, m: int, u):
    """Level-m eigenvalue function from the constrained interleaving sum.

    The k-th factor is evaluated at u - (k-1) w.  Level m = n returns the
    quantum determinant a(u) prod_k d(u - k w) directly.
    """
    _check_chain(cfg, spec)
    n = cfg.md.n
    if not 1 <= m <= n:
        raise ValueError(f"level m={m} outside 1..{n}")
    if m == n:
        return quantum_det_scalar(spec, u)
    return _lambda_from_terms(zx_functions(cfg, spec), n, cfg.md.w, m, u)


def lambda_levels(cfg: BetheConfiguration, spec: ChainSpec, levels, u) -> list:
    """Several Lambda_m over the same points, sharing one term-set cache."""
    _check_chain(cfg, spec)
    n = cfg.md.n
    ts = zx_functions(cfg, spec)
    out = []
    for m in levels:
        if m == n:
            out.append(quantum_det_scalar(spec, u))
        else:
            out.append(_lambda_from_terms(ts, n, cfg.md.w, m, u))
    return out


# ---------------------------------------------------------------------------
# Hand-written transcriptions of the small-n displays (cross-validation only)
# ---------------------------------------------------------------------------


def lambda_z3_display(cfg: BetheConfiguration, spec: ChainSpec, m: int, u):
    """Five-term / five-product / determinant displays for the periodic n=3 chain."""
    if cfg.kind != Z3_PERIODIC:
        raise KindMismatch("expected a z3-periodic configuration")
    md = cfg.md
    w = md.w
    l1, l2, l3, l4 = cfg.ls[0], cfg.ls[1], cfg.ls[2], cfg.ls[3]
    p1, p2 = cfg.phis
    c1, c2 = cfg.cs
    uu = np.asarray(u, dtype=complex)

    def a(x):
        return a_function(spec, x)

    def d(x):
        return d_function(spec, x)

    def q(i, x):
        return q_function(cfg, i, x)

    def ee(c, x):
        return np.exp(2j * np.pi * c * x)

    def z1(x):
        return a(x) * ee(l1, x) * np.exp(p1) * q(1, x - w) / q(2, x)

    def z2(x):
        return d(x) * ee(l2, x) * np.exp(p2) * q(2, x + w) * q(3, x - w) / (q(1, x) * q(4, x))

    def z3(x):
        return d(x) * np.exp(-2j * np.pi * ((l1 + l2) * x + (2 * l1 + l2) * w) - p1 - p2) * q(4, x + w) / q(3, x)

    def x1(x):
        return c1 * a(x) * d(x) * ee(l3, x) * q(3, x - w) / (q(1, x) * q(2, x))

    def x2(x):
        return c2 * a(x) * d(x) * ee(l4, x) * q(2, x + w) / (q(3, x) * q(4, x))

    if m == 1:
        return z1(uu) + z2(uu) + z3(uu) + x1(uu) + x2(uu)
    if m == 2:
        return (
            z1(uu) * z2(uu - w)
            + z1(uu) * z3(uu - w)
            + z2(uu) * z3(uu - w)
            + x1(uu) * z3(uu - w)
            + z1(uu) * x2(uu - w)
        )
    if m == 3:
        return a_function(spec, uu) * d_function(spec, uu - w) * d_function(spec, uu - 2 * w)
    raise ValueError(f"level m={m} outside 1..3")


def lambda_z3_twisted_display(cfg: BetheConfiguration, spec: ChainSpec, m: int, u):
    """The omega_3-decorated displays for the G = h twisted n=3 chain."""
    if cfg.kind != Z3_TWISTED:
        raise KindMismatch("expected a z3-twisted configuration")
    md = cfg.md
    w = md.w
    om = np.exp(2j * np.pi / 3)
    l1, l2, l3, l4 = cfg.ls[0], cfg.ls[1], cfg.ls[2], cfg.ls[3]
    p1, p2 = cfg.phis
    c1, c2 = cfg.cs
    uu = np.asarray(u, dtype=complex)

    def a(x):
        return a_function(spec, x)

    def d(x):
        return d_function(spec, x)

    def q(i, x):
        return q_function(cfg, i, x)

    def ee(c, x):
        return np.exp(2j * np.pi * c * x)

    def z1(x):
        return a(x) * ee(l1 + 2 / 3, x) * np.exp(p1) * q(1, x - w) / q(2, x)

    def z2(x):
        return om * d(x) * ee(l2 + 2 / 3, x) * np.exp(p2) * q(2, x + w) * q(3, x - w) / (q(1, x) * q(4, x))

    def z3(x):
        return (
            om**2
            * d(x)
            * np.exp(-2j * np.pi * ((l1 + l2 + 4 / 3) * x + (2 * l1 + l2 + 2) * w) - p1 - p2)
            * q(4, x + w)
            / q(3, x)
        )

    def x1(x):
        return c1 * a(x) * d(x) * ee(l3 + 2 / 3, x) * q(3, x - w) / (q(1, x) * q(2, x))

    def x2(x):
        return c2 * a(x) * d(x) * ee(l4 + 2 / 3, x) * q(2, x + w) / (q(3, x) * q(4, x))

    if m == 1:
        return z1(uu) + z2(uu) + z3(uu) + x1(uu) + x2(uu)
    if m == 2:
        return (
            z1(uu) * z2(uu - w)
            + z1(uu) * z3(uu - w)
            + z2(uu) * z3(uu - w)
            + x1(uu) * z3(uu - w)
            + z1(uu) * x2(uu - w)
        )
    if m == 3:
        return a_function(spec, uu) * d_function(spec, uu - w) * d_function(spec, uu - 2 * w)
    raise ValueError(f"level m={m} outside 1..3")


def lambda_z4_display(cfg: BetheConfiguration, spec: ChainSpec, m: int, u):
    """Literal n=4 displays: 7 terms, 13 pair products, 7 triples, 1 quadruple."""
    if cfg.kind not in (Z4_PERIODIC, ZN_GENERAL) or cfg.md.n != 4:
        raise KindMismatch("expected an n=4 configuration")
    md = cfg.md
    w = md.w
    tau = md.tau
    N = spec.N
    ls = cfg.ls
    p1, p2, p3 = cfg.phis
    c1, c2, c3 = cfg.cs
    uu = np.asarray(u, dtype=complex)

    def a(x):
        return a_function(spec, x)

    def d(x):
        return d_function(spec, x)

    def q(i, x):
        return q_function(cfg, i, x)

    def ee(c, x):
        return np.exp(2j * np.pi * c * x)

    def f2(x):
        return sigma(np.asarray(x, dtype=complex), tau) if N % 2 == 1 else 1.0

    def z1(x):
        return ee(ls[0], x) * np.exp(p1) * a(x) * q(1, x - w) / q(2, x)

    def z2(x):
        return ee(ls[1], x) * np.exp(p2) * d(x) * q(2, x + w) * q(3, x - w) / (q(1, x) * q(4, x))

    def z3(x):
        return ee(ls[2], x) * np.exp(p3) * d(x) * q(4, x + w) * q(5, x - w) / (q(3, x) * q(6, x))

    def z4(x):
        expo = -2j * np.pi * (ls[0] * (x + 3 * w) + ls[1] * (x + 2 * w) + ls[2] * (x + w))
        return np.exp(expo - p1 - p2 - p3) * d(x) * q(6, x + w) / q(5, x)

    def x1(x):
        return c1 * ee(ls[3], x) * a(x) * d(x) * q(3, x - w) / (q(1, x) * q(2, x))

    def x2(x):
        return c2 * ee(ls[4], x) * a(x) * d(x) * q(2, x + w) * q(5, x - w) * f2(x) / (q(3, x) * q(4, x))

    def x3(x):
        return c3 * ee(ls[5], x) * a(x) * d(x) * q(4, x + w) / (q(5, x) * q(6, x))

    u0, u1, u2, u3 = uu, uu - w, uu - 2 * w, uu - 3 * w
    if m == 1:
        return z1(u0) + z2(u0) + z3(u0) + z4(u0) + x1(u0) + x2(u0) + x3(u0)
    if m == 2:
        return (
            z1(u0) * z2(u1)
            + z1(u0) * z3(u1)
            + z1(u0) * z4(u1)
            + z2(u0) * z3(u1)
            + z2(u0) * z4(u1)
            + z3(u0) * z4(u1)
            + x1(u0) * (z3(u1) + z4(u1))
            + (z1(u0) + z2(u0)) * x3(u1)
            + x1(u0) * x3(u1)
            + z1(u0) * x2(u1)
            + x2(u0) * z4(u1)
        )
    if m == 3:
        return (
            z1(u0) * z2(u1) * z3(u2)
            + z1(u0) * z2(u1) * z4(u2)
            + z1(u0) * z3(u1) * z4(u2)
            + z2(u0) * z3(u1) * z4(u2)
            + z1(u0) * z2(u1) * x3(u2)
            + z1(u0) * x2(u1) * z4(u2)
            + x1(u0) * z3(u1) * z4(u2)
        )
    if m == 4:
        return z1(u0) * z2(u1) * z3(u2) * z4(u3)
    raise ValueError(f"level m={m} outside 1..4")


# ---------------------------------------------------------------------------
# Reduced three-term forms
# ---------------------------------------------------------------------------


def _validate_reduced(cfg: BetheConfiguration, spec: ChainSpec, tol: float = 1e-10) -> None:
    md = cfg.md
    N = spec.N
    mb1, mb2 = cfg.counts
    if cfg.kind == Z3_REDUCED:
        if N % 3 != 0:
            raise ConstraintViolated(f"homogeneous-reduced kind needs N = 3l, got N={N}")
        ell = N // 3
        if (mb1, mb2) != (2 * ell, ell):
            raise ConstraintViolated(
                f"reduced counts ({mb1},{mb2}) must be (2l, l) = ({2*ell},{ell})"
            )
        if any(cfg.ls) or any(cfg.ms):
            raise ConstraintViolated("homogeneous-reduced kind requires all sector integers zero")
    else:
        l1 = cfg.ls[0]
        m1 = cfg.ms[0]
        denom = 2 * N - 3 * mb1
        if denom == 0:
            raise ConstraintViolated("2N - 3*Mbar1 must be nonzero")
        w_req = (3 * m1 + 3 * l1 * md.tau) / denom
        if abs(md.w - w_req) > tol:
            raise ConstraintViolated(
                f"w = {md.w} is not at the discrete value {w_req} for these sectors"
            )
        mb2_req = (cfg.n1 + 1) * mb1 - (2 * cfg.n1 + 1) * N / 3.0
        if abs(mb2_req - round(mb2_req)) > 1e-9 or round(mb2_req) <= 0 or mb2 != round(mb2_req):
            raise ConstraintViolated(
                f"Mbar2 = {mb2} does not satisfy (n1+1) Mbar1 - (2 n1 + 1) N / 3 = {mb2_req}"
            )


def reduced_lambda_z3(cfg: BetheConfiguration, spec: ChainSpec, u):
    """The homogeneous three-term value for the two reduced n=3 kinds."""
    t1, t2, t3 = _reduced_terms(cfg, spec)
    uu = np.asarray(u, dtype=complex)
    return t1(uu) + t2(uu) + t3(uu)


def _reduced_terms(cfg: BetheConfiguration, spec: ChainSpec):
    """The three reduced closures (validated), shared by both Lambda levels."""
    if cfg.kind not in _REDUCED_KINDS:
        raise KindMismatch(f"reduced evaluation for kind {cfg.kind!r}")
    _check_chain(cfg, spec)
    _validate_reduced(cfg, spec)
    md = cfg.md
    w = md.w
    p1, p2 = cfg.phis
    if cfg.kind == Z3_REDUCED:
        lcoefs = (0.0, 0.0, 0.0)
        wterm = 0.0
    else:
        l1, n1 = cfg.ls[0], cfg.n1
        lcoefs = (float(l1), float(n1 * l1), float((n1 + 1) * l1))
        wterm = (n1 + 2) * l1 * w

    def qb(i, x):
        return q_function(cfg, i, x)

    def t1(x):
        x = np.asarray(x, dtype=complex)
        return (
            a_function(spec, x)
            * np.exp(2j * np.pi * lcoefs[0] * x + p1)
            * qb(1, x - w)
            / qb(1, x)
        )

    def t2(x):
        x = np.asarray(x, dtype=complex)
        return (
            d_function(spec, x)
            * np.exp(2j * np.pi * lcoefs[1] * x + p2)
            * qb(1, x + w)
            * qb(2, x - w)
            / (qb(1, x) * qb(2, x))
        )

    def t3(x):
        x = np.asarray(x, dtype=complex)
        return (
            d_function(spec, x)
            * np.exp(-2j * np.pi * (lcoefs[2] * x + wterm) - p1 - p2)
            * qb(2, x + w)
            / qb(2, x)
        )

    return t1, t2, t3


def reduced_lambda2_z3(cfg: BetheConfiguration, spec: ChainSpec, u):
    """Level-2 value of the reduced form: the three all-Z pair products."""
    t1, t2, t3 = _reduced_terms(cfg, spec)
    w = cfg.md.w
    uu = np.asarray(u, dtype=complex)
    return t1(uu) * t2(uu - w) + t1(uu) * t3(uu - w) + t2(uu) * t3(uu - w)
