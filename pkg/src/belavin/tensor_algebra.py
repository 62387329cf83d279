"""Dense complex operators on labelled tensor products of small spaces.

Leg convention: the leftmost leg is the slowest (most significant) index, i.e.
kron(A, B) puts A on leg 0.  Everything is a plain (D, D) complex matrix plus
the ordered list of leg dimensions; all operations return new operators.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DimensionMismatch",
    "InvalidOrder",
    "BadLegSet",
    "LegLayout",
    "TensorOperator",
    "ZnMatrices",
    "zn_matrices",
    "i_alpha",
    "identity",
    "embed",
    "permutation",
    "antisym_projector",
    "antisym_isometry",
    "partial_trace",
    "transpose_leg",
    "operator_rank",
    "rel_diff",
]


class DimensionMismatch(ValueError):
    pass


class InvalidOrder(ValueError):
    pass


class BadLegSet(ValueError):
    pass


@dataclass(frozen=True)
class LegLayout:
    dims: tuple[int, ...]

    def __init__(self, dims: Iterable[int]):
        object.__setattr__(self, "dims", tuple(int(d) for d in dims))
        if any(d < 2 for d in self.dims):
            raise DimensionMismatch(f"every leg dimension must be >= 2, got {self.dims}")

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def __len__(self) -> int:
        return len(self.dims)


@dataclass
class TensorOperator:
    """Square matrix on the tensor product described by layout."""

    layout: LegLayout
    mat: np.ndarray

    def __post_init__(self):
        self.mat = np.asarray(self.mat, dtype=complex)
        d = self.layout.dim
        if self.mat.shape != (d, d):
            raise DimensionMismatch(
                f"matrix shape {self.mat.shape} does not match layout dim {d}"
            )

    def __matmul__(self, other: "TensorOperator") -> "TensorOperator":
        if self.layout != other.layout:
            raise DimensionMismatch("operator layouts differ")
        return TensorOperator(self.layout, self.mat @ other.mat)

    def __add__(self, other: "TensorOperator") -> "TensorOperator":
        if self.layout != other.layout:
            raise DimensionMismatch("operator layouts differ")
        return TensorOperator(self.layout, self.mat + other.mat)

    def __sub__(self, other: "TensorOperator") -> "TensorOperator":
        if self.layout != other.layout:
            raise DimensionMismatch("operator layouts differ")
        return TensorOperator(self.layout, self.mat - other.mat)

    def __mul__(self, scalar) -> "TensorOperator":
        return TensorOperator(self.layout, self.mat * scalar)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.mat))

    def as_tensor(self) -> np.ndarray:
        d = self.layout.dims
        return self.mat.reshape(*d, *d)


def identity(layout: LegLayout) -> TensorOperator:
    return TensorOperator(layout, np.eye(layout.dim, dtype=complex))


def rel_diff(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius distance relative to the larger of the two sides."""
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
    return float(np.linalg.norm(a - b) / scale)


def embed(op: TensorOperator, target: LegLayout, positions: Sequence[int]) -> TensorOperator:
    """Place op on the listed legs of target, identity on the rest.

    positions[k] is the target leg carrying op's k-th leg; any ordering
    (including non-contiguous and permuted) is allowed.
    """
    pos = [int(i) for i in positions]
    L = len(target)
    if len(pos) != len(op.layout) or len(set(pos)) != len(pos):
        raise DimensionMismatch("positions must be distinct and match op leg count")
    if any(i < 0 or i >= L for i in pos):
        raise DimensionMismatch(f"positions {pos} out of range for {L} legs")
    for k, i in enumerate(pos):
        if target.dims[i] != op.layout.dims[k]:
            raise DimensionMismatch(
                f"target leg {i} has dim {target.dims[i]}, op leg {k} has dim {op.layout.dims[k]}"
            )
    rest = [i for i in range(L) if i not in pos]
    k, r = len(pos), len(rest)

    big = op.as_tensor()
    if r:
        rdims = [target.dims[i] for i in rest]
        eye = np.eye(math.prod(rdims), dtype=complex).reshape(*rdims, *rdims)
        big = np.multiply.outer(big, eye)
    # big axes: op_out(k), op_in(k), rest_out(r), rest_in(r)
    src_out = {leg: a for a, leg in enumerate(pos)}
    src_out.update({leg: 2 * k + a for a, leg in enumerate(rest)})
    src_in = {leg: k + a for a, leg in enumerate(pos)}
    src_in.update({leg: 2 * k + r + a for a, leg in enumerate(rest)})
    order = [src_out[i] for i in range(L)] + [src_in[i] for i in range(L)]
    d = target.dim
    return TensorOperator(target, big.transpose(order).reshape(d, d))


def permutation(i: int, j: int, layout: LegLayout) -> TensorOperator:
    """Swap of legs i and j (an involution)."""
    if layout.dims[i] != layout.dims[j]:
        raise DimensionMismatch("swapped legs must have equal dimension")
    L = len(layout)
    d = layout.dim
    t = np.eye(d, dtype=complex).reshape(*layout.dims, *layout.dims)
    order = list(range(2 * L))
    order[i], order[j] = order[j], order[i]
    return TensorOperator(layout, t.transpose(order).reshape(d, d))


def _perm_parity(perm: Sequence[int]) -> int:
    inv = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                inv += 1
    return inv % 2


def _perm_operator(perm: Sequence[int], n: int) -> np.ndarray:
    """Operator sending v_1 x ... x v_m to v_{perm^-1(1)} x ... x v_{perm^-1(m)}."""
    m = len(perm)
    d = n**m
    t = np.eye(d, dtype=complex).reshape((n,) * (2 * m))
    inv = [0] * m
    for k, pk in enumerate(perm):
        inv[pk] = k
    order = list(range(m)) + [m + inv[k] for k in range(m)]
    return t.transpose(order).reshape(d, d)


@lru_cache(maxsize=None)
def _antisym_mat(m: int, n: int) -> np.ndarray:
    acc = np.zeros((n**m, n**m), dtype=complex)
    for perm in itertools.permutations(range(m)):
        sign = -1.0 if _perm_parity(perm) else 1.0
        acc += sign * _perm_operator(perm, n)
    acc /= math.factorial(m)
    acc.setflags(write=False)
    return acc


def antisym_projector(m: int, n: int) -> TensorOperator:
    """Projector onto the antisymmetric subspace of m legs of dimension n.

    Rank is binomial(n, m); orders m > n (where the subspace is empty) are
    rejected rather than returning the zero operator.
    """
    if m < 2 or m > n:
        raise InvalidOrder(f"antisymmetrizer order m={m} must satisfy 2 <= m <= n={n}")
    return TensorOperator(LegLayout((n,) * m), _antisym_mat(m, n).copy())


@lru_cache(maxsize=None)
def antisym_isometry(m: int, n: int) -> np.ndarray:
    """Isometry V with V V^dag = antisym projector and V^dag V = identity.

    Columns span the antisymmetric subspace; shape (n^m, binomial(n, m)).
    """
    if m < 2 or m > n:
        raise InvalidOrder(f"antisymmetrizer order m={m} must satisfy 2 <= m <= n={n}")
    p = _antisym_mat(m, n)
    evals, evecs = np.linalg.eigh(p)
    cols = evecs[:, evals > 0.5]
    rank = math.comb(n, m)
    if cols.shape[1] != rank:
        raise RuntimeError(f"antisymmetric subspace rank {cols.shape[1]} != C({n},{m})")
    cols = np.ascontiguousarray(cols.astype(complex))
    cols.setflags(write=False)
    return cols


def partial_trace(op: TensorOperator, legs: Sequence[int]) -> TensorOperator:
    """Contract the listed legs (row against column index); keeps the rest in order."""
    L = len(op.layout)
    traced = sorted(set(int(i) for i in legs))
    if not traced or any(i < 0 or i >= L for i in traced):
        raise BadLegSet(f"legs {legs} is not a nonempty subset of range({L})")
    keep = [i for i in range(L) if i not in traced]
    t = op.as_tensor()
    sub = [0] * (2 * L)
    nxt = 0
    for i in range(L):
        sub[i] = nxt
        nxt += 1
    for i in range(L):
        sub[L + i] = sub[i] if i in traced else nxt
        if i not in traced:
            nxt += 1
    out_sub = [sub[i] for i in keep] + [sub[L + i] for i in keep]
    res = np.einsum(t, sub, out_sub)
    if not keep:
        return complex(res)
    lay = LegLayout(tuple(op.layout.dims[i] for i in keep))
    d = lay.dim
    return TensorOperator(lay, res.reshape(d, d))


def transpose_leg(op: TensorOperator, leg: int) -> TensorOperator:
    """Partial transpose on a single leg."""
    L = len(op.layout)
    t = op.as_tensor()
    order = list(range(2 * L))
    order[leg], order[L + leg] = order[L + leg], order[leg]
    d = op.layout.dim
    return TensorOperator(op.layout, t.transpose(order).reshape(d, d))


def operator_rank(mat: np.ndarray, rel_tol: float = 1e-8) -> int:
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


@dataclass(frozen=True)
class ZnMatrices:
    """The clock and shift matrices g, h with g h = omega^{-1} h g."""

    n: int
    g: np.ndarray
    h: np.ndarray
    omega: complex


@lru_cache(maxsize=None)
def zn_matrices(n: int) -> ZnMatrices:
    omega = np.exp(2j * np.pi / n)
    g = np.diag(omega ** np.arange(n)).astype(complex)
    h = np.zeros((n, n), dtype=complex)
    for i in range(n):
        h[i, (i + 1) % n] = 1.0
    g.setflags(write=False)
    h.setflags(write=False)
    return ZnMatrices(n, g, h, complex(omega))


def i_alpha(alpha: Sequence[int], zn: ZnMatrices) -> np.ndarray:
    """g^{a2} h^{a1} for alpha = (a1, a2), components reduced mod n."""
    a1, a2 = (int(a) % zn.n for a in alpha)
    return np.linalg.matrix_power(zn.g, a2) @ np.linalg.matrix_power(zn.h, a1)
