"""Theta functions with characteristics and the sigma/zeta family built on them.

The basic object is the series

    theta[a; b](u, tau) = sum_m exp{ i*pi * [ (m+a)^2 tau + 2 (m+a)(u+b) ] }

summed over integer m, convergent for Im(tau) > 0.  Everything else is a
specialisation of the characteristic (a, b) and of the modulus:

    sigma(u)        = theta[1/2; 1/2](u, tau)          (odd, simple zero at 0)
    theta_j(u)      = theta[1/2 - j/n; 1/2](u, n*tau)
    sigma_alpha(u)  = theta[1/2 + a1/n; 1/2 + a2/n](u, tau)
    zeta(u)         = sigma'(u) / sigma(u)

Evaluation reduces u into the fundamental cell spanned by (1, tau) using the
exact quasi-periodic phases before summing, so large |Im u| never reaches the
exponentials.  Characteristics are kept as exact rationals; the lattice-shift
phases exp(2*pi*i*a*p) are computed with integer modular arithmetic so they do
not drift with the shift size.

All evaluators accept a scalar or an ndarray of points and are pure functions,
safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "EllipticError",
    "NonconvergentModulus",
    "TailBoundExceeded",
    "PoleAtLatticePoint",
    "DegenerateCrossingParameter",
    "ThetaCharacteristic",
    "TruncationPolicy",
    "ModularData",
    "theta",
    "theta_derivative",
    "theta_j",
    "sigma",
    "sigma_derivative",
    "sigma_alpha",
    "sigma_alpha_derivative",
    "sigma_alpha_table",
    "zeta",
    "reduce_to_cell",
]

_MIN_TERMS = 20          # floor on the summation half-width M
_MAX_TERMS = 480         # adaptive growth gives up past this
_REL_TAIL = 1e-16        # adaptive target: tail <= _REL_TAIL * series scale


class EllipticError(ValueError):
    """Base class for elliptic-evaluation failures."""


class NonconvergentModulus(EllipticError):
    """The effective modulus has Im <= 0; the series does not converge."""


class TailBoundExceeded(EllipticError):
    """The truncation policy cannot certify the requested tail bound."""


class PoleAtLatticePoint(EllipticError):
    """zeta(u) evaluated at (or too close to) a zero of sigma."""


class DegenerateCrossingParameter(EllipticError):
    """Some sigma_alpha(w/n) vanishes, so R-matrix denominators blow up."""


def _as_fraction(x) -> Fraction:
    # floats convert exactly (Fraction(0.5) == 1/2); no rounding happens here
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class ThetaCharacteristic:
    """Characteristic pair (a, b), stored as exact rationals."""

    a: Fraction
    b: Fraction

    def __init__(self, a, b):
        object.__setattr__(self, "a", _as_fraction(a))
        object.__setattr__(self, "b", _as_fraction(b))


_HALF_HALF = ThetaCharacteristic(Fraction(1, 2), Fraction(1, 2))


@dataclass(frozen=True)
class TruncationPolicy:
    """Fixed-width summation over m in [-max_terms, max_terms].

    The geometric tail estimate (on the cell-reduced argument) must come out
    <= tail_tol, otherwise evaluation raises TailBoundExceeded.  Passing
    policy=None to the evaluators selects the adaptive default instead: M grows
    from _MIN_TERMS until the tail is below _REL_TAIL relative to the running
    series scale.
    """

    max_terms: int
    tail_tol: float

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be a positive integer")
        if not (self.tail_tol > 0.0):
            raise ValueError("tail_tol must be positive")


def _rational_phase(fr: Fraction, k: np.ndarray) -> np.ndarray:
    """exp(2*pi*i * fr * k) for integer array k, computed mod 1 exactly."""
    num, den = fr.numerator, fr.denominator
    rem = (num * k.astype(object)) % den  # python ints: no overflow
    return np.exp(2j * np.pi * (np.asarray(rem, dtype=float) / den))


def _term_log_magnitude(mm: float, itau: float, y: float) -> float:
    # log|exp{i pi[(m+a)^2 tau + 2(m+a)(u+b)]}| = -pi[(m+a)^2 Im tau + 2(m+a) Im(u+b)]
    return -math.pi * (mm * mm * itau + 2.0 * mm * y)


def _theta_eval(chi: ThetaCharacteristic, u, tau_eff, policy, derivative: bool):
    tau = complex(tau_eff)
    if not (tau.imag > 0.0):
        raise NonconvergentModulus(f"Im(tau_eff) = {tau.imag} is not positive")

    uarr = np.asarray(u, dtype=complex)
    scalar = uarr.ndim == 0
    pts = np.atleast_1d(uarr)

    # lattice reduction u = u0 + p + q*tau with u0 in the fundamental cell
    q = np.rint(pts.imag / tau.imag).astype(np.int64)
    u1 = pts - q * tau
    p = np.rint(u1.real).astype(np.int64)
    u0 = u1 - p

    af, bf = float(chi.a), float(chi.b)

    # theta(u0 + p + q tau) = exp{2i pi a p} exp{-i pi q^2 tau - 2i pi q(u0+b)} theta(u0)
    # (the -2i pi q p piece is a multiple of 2 pi i and drops out)
    if np.any(p) or np.any(q):
        phase = (
            _rational_phase(chi.a, p)
            * _rational_phase(-chi.b, q)
            * np.exp(-1j * np.pi * (q.astype(float) ** 2) * tau - 2j * np.pi * q * u0)
        )
    else:
        phase = np.ones_like(u0)

    ymax = float(np.max(np.abs((u0 + bf).imag))) if pts.size else 0.0
    itau = tau.imag

    def run(M: int):
        m = np.arange(-M, M + 1, dtype=float)
        mm = m + af
        expo = (1j * np.pi * tau) * (mm * mm)[:, None] + (2j * np.pi) * mm[:, None] * (u0 + bf)[None, :]
        terms = np.exp(expo)
        val = terms.sum(axis=0)
        der = (2j * np.pi * mm[:, None] * terms).sum(axis=0) if derivative else None
        scale = max(float(np.max(np.abs(terms))), float(np.max(np.abs(val))), 1e-300)
        return val, der, scale

    if policy is None:
        M = _MIN_TERMS
        while True:
            val, der, scale = run(M)
            nxt = max(
                math.exp(_term_log_magnitude(M + 1 + af, itau, -ymax)),
                math.exp(_term_log_magnitude(-(M + 1) + af, itau, ymax)),
            )
            # conservative derivative weight folded into the same check
            if nxt * (1.0 + 2.0 * np.pi * (M + 2)) <= _REL_TAIL * scale:
                break
            M += 16
            if M > _MAX_TERMS:
                raise TailBoundExceeded(
                    f"adaptive summation did not converge below {_REL_TAIL} by M={_MAX_TERMS}"
                )
    else:
        M = policy.max_terms
        e_hi = math.exp(_term_log_magnitude(M + 1 + af, itau, -ymax))
        e_hi2 = math.exp(_term_log_magnitude(M + 2 + af, itau, -ymax))
        e_lo = math.exp(_term_log_magnitude(-(M + 1) + af, itau, ymax))
        e_lo2 = math.exp(_term_log_magnitude(-(M + 2) + af, itau, ymax))
        tail = 0.0
        for e1, e2 in ((e_hi, e_hi2), (e_lo, e_lo2)):
            if e1 == 0.0:
                continue
            r = e2 / e1
            if r >= 1.0:
                raise TailBoundExceeded("series terms not yet decaying at max_terms")
            tail += e1 / (1.0 - r)
        if tail > policy.tail_tol:
            raise TailBoundExceeded(
                f"geometric tail estimate {tail:.3e} exceeds tail_tol {policy.tail_tol:.3e}"
            )
        val, der, _ = run(M)

    if derivative:
        out = phase * (der - 2j * np.pi * q * val)
    else:
        out = phase * val
    return complex(out[0]) if scalar else out.reshape(uarr.shape)


def theta(chi, u, tau_eff, policy: TruncationPolicy | None = None):
    """theta[a; b](u, tau_eff); u may be a scalar or an ndarray."""
    if not isinstance(chi, ThetaCharacteristic):
        chi = ThetaCharacteristic(*chi)
    return _theta_eval(chi, u, tau_eff, policy, derivative=False)


def theta_derivative(chi, u, tau_eff, policy: TruncationPolicy | None = None):
    """d/du theta[a; b](u, tau_eff), via the termwise-differentiated series."""
    if not isinstance(chi, ThetaCharacteristic):
        chi = ThetaCharacteristic(*chi)
    return _theta_eval(chi, u, tau_eff, policy, derivative=True)


def sigma(u, tau, policy: TruncationPolicy | None = None):
    """sigma(u) = theta[1/2; 1/2](u, tau): odd, with a simple zero at u = 0."""
    return _theta_eval(_HALF_HALF, u, tau, policy, derivative=False)


def sigma_derivative(u, tau, policy: TruncationPolicy | None = None):
    return _theta_eval(_HALF_HALF, u, tau, policy, derivative=True)


def zeta(u, tau, policy: TruncationPolicy | None = None):
    """Logarithmic derivative sigma'(u)/sigma(u).

    Raises PoleAtLatticePoint when |sigma(u)| < 1e-12 * |sigma'(u)|, i.e. the
    point sits within ~1e-12 of a lattice zero.
    """
    num = sigma_derivative(u, tau, policy)
    den = sigma(u, tau, policy)
    n_arr = np.atleast_1d(np.asarray(num))
    d_arr = np.atleast_1d(np.asarray(den))
    if np.any(np.abs(d_arr) < 1e-12 * np.abs(n_arr)):
        raise PoleAtLatticePoint("zeta evaluated at a zero of sigma")
    out = np.asarray(num) / np.asarray(den)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ModularData:
    """The triple (tau, n, w): modulus, symmetry order, crossing parameter.

    Validates Im(tau) > 0, n >= 2, and that every sigma_alpha(w/n) stays away
    from zero (relative magnitude >= 1e-12), since those are denominators of
    the vertex weights.
    """

    tau: complex
    n: int
    w: complex

    def __init__(self, tau, n, w):
        object.__setattr__(self, "tau", complex(tau))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "w", complex(w))
        if not (self.tau.imag > 0.0):
            raise NonconvergentModulus(f"Im(tau) = {self.tau.imag} must be positive")
        if self.n < 2:
            raise ValueError(f"symmetry order n = {self.n} must be >= 2")
        vals = np.abs(sigma_alpha_table(self))
        if vals.min() < 1e-12 * vals.max():
            raise DegenerateCrossingParameter(
                f"min |sigma_alpha(w/n)| = {vals.min():.3e} is degenerate for w = {self.w}"
            )


def _alpha_char(alpha, n: int) -> ThetaCharacteristic:
    a1, a2 = alpha
    return ThetaCharacteristic(
        Fraction(1, 2) + Fraction(int(a1), n), Fraction(1, 2) + Fraction(int(a2), n)
    )


def theta_j(j: int, u, md: ModularData, policy: TruncationPolicy | None = None):
    """theta[1/2 - j/n; 1/2](u, n*tau)."""
    chi = ThetaCharacteristic(Fraction(1, 2) - Fraction(int(j), md.n), Fraction(1, 2))
    return _theta_eval(chi, u, md.n * md.tau, policy, derivative=False)


def sigma_alpha(alpha, u, md: ModularData, policy: TruncationPolicy | None = None):
    """theta[1/2 + a1/n; 1/2 + a2/n](u, tau); alpha = (a1, a2) in Z_n x Z_n."""
    return _theta_eval(_alpha_char(alpha, md.n), u, md.tau, policy, derivative=False)


def sigma_alpha_derivative(alpha, u, md: ModularData, policy: TruncationPolicy | None = None):
    return _theta_eval(_alpha_char(alpha, md.n), u, md.tau, policy, derivative=True)


def sigma_alpha_table(md: ModularData, u=None, derivative: bool = False) -> np.ndarray:
    """All n^2 values sigma_alpha(u) as an (n, n) array indexed [a1, a2].

    Defaults to u = w/n, the denominator point of the vertex weights.
    """
    point = md.w / md.n if u is None else u
    out = np.empty((md.n, md.n), dtype=complex)
    for a1 in range(md.n):
        for a2 in range(md.n):
            out[a1, a2] = _theta_eval(
                _alpha_char((a1, a2), md.n), point, md.tau, None, derivative
            )
    return out


def reduce_to_cell(z, tau) -> complex:
    """Translate z by the (1, tau) lattice into the fundamental cell around 0."""
    tau = complex(tau)
    z = complex(z)
    q = round(z.imag / tau.imag)
    z = z - q * tau
    return z - round(z.real)
