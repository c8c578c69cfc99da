"""Superoscillations from the binomial expansion of the weak-measurement pointer state.

    ((1 + a)/2 e^{i lam x / N} + (1 - a)/2 e^{-i lam x / N})^N
        = sum_n c_n exp(i lam x (2n - N) / N)

with c_n = C(N, n) (1 + a)^n (1 - a)^(N - n) / 2^N. Every wavenumber lies in
[-1, 1], yet near x = 0 the sum behaves like exp(i lam a x) for any a.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from .errors import ZeroModulus

EXACT_MAX_TERMS = 64


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


@dataclass(frozen=True)
class SuperoscSpec:
    alpha: float
    n_terms: int
    scale: float = 1.0

    def __post_init__(self):
        if int(self.n_terms) != self.n_terms or self.n_terms < 1:
            raise ValueError("n_terms must be a positive integer")
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        if not self.scale > 0:
            raise ValueError("scale must be positive")


@dataclass(frozen=True, eq=False)
class FourierSum:
    """f(x) = sum_n c_n exp(i * scale * k_n * x) with every |k_n| <= 1.

    `exact` optionally carries (Re c_n, Im c_n, k_n) as Fraction triples.
    When present and the coefficients cancel heavily, evaluation switches to
    extended precision so the rounding of c_n cannot swamp the result.
    """

    coefficients: np.ndarray
    wavenumbers: np.ndarray
    scale: float = 1.0
    exact: tuple | None = None

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        k = np.asarray(self.wavenumbers, dtype=float)
        if c.shape != k.shape or c.ndim != 1:
            raise ValueError("coefficients and wavenumbers must be equal-length 1-D arrays")
        if np.any(np.abs(k) > 1 + 1e-12):
            raise ValueError("wavenumbers must satisfy |k| <= 1")
        if self.exact is not None and len(self.exact) != c.size:
            raise ValueError("exact coefficients must match coefficients in length")
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "wavenumbers", k)

    @property
    def magnitude(self) -> float:
        """sum_n |c_n|, the size of the terms that cancel down to |f| near x = 0."""
        return float(np.abs(self.coefficients).sum())


# Above this sum_n |c_n| the double-precision path loses more than ~1e-10.
EXTENDED_MAGNITUDE = 1e6


def _binomial_coefficients_exact(alpha: complex, n: int) -> list[tuple[Fraction, Fraction]]:
    # Gaussian rationals as (re, im) Fraction pairs
    def mul(x, y):
        return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])

    a = (Fraction(alpha.real), Fraction(alpha.imag))
    plus = ((1 + a[0]) / 2, a[1] / 2)
    minus = ((1 - a[0]) / 2, -a[1] / 2)
    plus_pow = [(Fraction(1), Fraction(0))]
    minus_pow = [(Fraction(1), Fraction(0))]
    for _ in range(n):
        plus_pow.append(mul(plus_pow[-1], plus))
        minus_pow.append(mul(minus_pow[-1], minus))
    out = []
    for k in range(n + 1):
        re, im = mul(plus_pow[k], minus_pow[n - k])
        out.append((math.comb(n, k) * re, math.comb(n, k) * im))
    return out


def _binomial_coefficients_float(alpha: complex, n: int) -> list[complex]:
    p, q = (1 + alpha) / 2, (1 - alpha) / 2
    return [math.comb(n, k) * p**k * q ** (n - k) for k in range(n + 1)]


def _round_pairs(pairs) -> np.ndarray:
    return np.array([complex(float(re), float(im)) for re, im in pairs], dtype=complex)


def superoscillation_coefficients(alpha: complex, n: int) -> np.ndarray:
    """c_n; exact rational arithmetic rounded once for n <= EXACT_MAX_TERMS."""
    if n <= EXACT_MAX_TERMS:
        return _round_pairs(_binomial_coefficients_exact(complex(alpha), n))
    return np.array(_binomial_coefficients_float(complex(alpha), n), dtype=complex)


def binomial_wavenumbers(n: int) -> np.ndarray:
    return np.array([(2 * k - n) / n for k in range(n + 1)])


def build_superoscillation_complex(alpha: complex, n_terms: int, scale: float = 1.0) -> FourierSum:
    """Same construction for a complex weak value `alpha`."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    alpha = complex(alpha)
    if n_terms <= EXACT_MAX_TERMS:
        pairs = _binomial_coefficients_exact(alpha, n_terms)
        exact = tuple((re, im, Fraction(2 * k - n_terms, n_terms)) for k, (re, im) in enumerate(pairs))
        return FourierSum(_round_pairs(pairs), binomial_wavenumbers(n_terms), scale, exact)
    return FourierSum(superoscillation_coefficients(alpha, n_terms), binomial_wavenumbers(n_terms), scale)


def build_superoscillation(spec: SuperoscSpec) -> FourierSum:
    return build_superoscillation_complex(float(spec.alpha), spec.n_terms, spec.scale)


def _terms_sum(f: FourierSum, xs: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """sum_n w_n c_n exp(i scale k_n x) at each x."""
    if f.exact is not None and f.magnitude > EXTENDED_MAGNITUDE:
        digits = 25 + int(math.ceil(math.log10(f.magnitude * max(1.0, np.abs(weights).max()))))
        out = np.empty(xs.shape, dtype=complex)
        with mpmath.workdps(digits):
            coeffs = [mpmath.mpc(_mp(re), _mp(im)) for re, im, _ in f.exact]
            ks = [_mp(k) for _, _, k in f.exact]
            scale = mpmath.mpf(f.scale)
            for i, x in enumerate(xs):
                mx = mpmath.mpf(x)
                total = mpmath.fsum(
                    mpmath.mpf(w) * c * mpmath.expj(scale * k * mx) for w, c, k in zip(weights, coeffs, ks)
                )
                out[i] = complex(total)
        return out
    terms = (weights * f.coefficients)[None, :] * np.exp(1j * f.scale * np.outer(xs, f.wavenumbers))
    out = np.empty(xs.shape, dtype=complex)
    for i, row in enumerate(terms):
        out[i] = complex(math.fsum(row.real), math.fsum(row.imag))
    return out


def evaluate(f: FourierSum, xs) -> np.ndarray:
    """Pointwise f(x), each point's terms summed with compensation (or in
    extended precision when exact coefficients cancel heavily)."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    return _terms_sum(f, xs, np.ones(f.coefficients.size))


def local_frequency(f: FourierSum, x: float, h: float = 1e-4) -> float:
    """d/dx arg f by a central difference of the phase."""
    lo, mid, hi = evaluate(f, [x - h, x, x + h])
    if min(abs(lo), abs(mid), abs(hi)) <= 1e-12:
        raise ZeroModulus(f"|f| vanishes near x={x}; phase undefined")
    # angle of the ratio avoids explicit unwrapping
    return float(np.angle(hi * np.conj(lo)) / (2 * h))


def analytic_local_frequency(f: FourierSum, x: float) -> float:
    """Im(f'/f) from the exact derivative sum_n i scale k_n c_n e^{...}."""
    xs = np.array([float(x)])
    val = evaluate(f, xs)[0]
    if abs(val) <= 1e-12:
        raise ZeroModulus(f"|f| vanishes at x={x}")
    der = 1j * f.scale * _terms_sum(f, xs, f.wavenumbers)[0]
    return float((der / val).imag)


# ---------------------------------------------------------------------------
# Shift superposition: sum_n c_n f(t - a_n) ~ f(t - target)


@dataclass(frozen=True)
class AffineShift:
    """a = slope * k + offset. The default maps k in [-1, 1] onto [0, 1]."""

    slope: float = 0.5
    offset: float = 0.5

    def __call__(self, k):
        return self.slope * k + self.offset

    def inverse(self, a: float) -> float:
        return (a - self.offset) / self.slope


def shift_demo_spec(target_shift: float, n_coefficients: int, shift_map: AffineShift = AffineShift()) -> SuperoscSpec:
    """Spec whose coefficients, mapped through `shift_map`, aim at `target_shift`."""
    return SuperoscSpec(alpha=shift_map.inverse(target_shift), n_terms=n_coefficients - 1)


def gaussian(width: float = 1.0) -> Callable:
    """exp(-t^2 / (2 width^2)); works on floats and mpmath numbers."""
    w2 = 2 * mpmath.mpf(width) ** 2

    def f(t):
        return mpmath.exp(-mpmath.mpf(t) ** 2 / w2)

    return f


def shift_coefficients_exact(spec: SuperoscSpec) -> list[Fraction]:
    """c_n as exact rationals (real alpha only)."""
    n = spec.n_terms
    a = Fraction(spec.alpha)
    p, q = (1 + a) / 2, (1 - a) / 2
    return [math.comb(n, k) * p**k * q ** (n - k) for k in range(n + 1)]


def shift_sum(sample_f: Callable, coefficients: Sequence, shifts: Sequence, ts: Sequence[float]) -> np.ndarray:
    """sum_n c_n f(t - a_n) at each t, evaluated in extended precision.

    Superoscillatory c_n alternate in sign and can sum in magnitude to many
    orders above the result, so the working precision is raised by that many
    digits. Coefficients and shifts may be Fractions, ints or floats.
    """
    magnitude = float(sum(abs(c) for c in coefficients))
    digits = 30 + int(math.ceil(math.log10(max(magnitude, 1.0))))
    out = np.empty(len(ts))
    with mpmath.workdps(digits):
        mc = [_mp(c) for c in coefficients]
        ma = [_mp(a) for a in shifts]
        for i, t in enumerate(ts):
            mt = mpmath.mpf(t)
            out[i] = float(mpmath.fsum(c * sample_f(mt - a) for c, a in zip(mc, ma)))
    return out


def shift_superposition_values(
    sample_f: Callable,
    spec: SuperoscSpec,
    ts: Sequence[float],
    shift_map: AffineShift = AffineShift(),
) -> np.ndarray:
    """sum_n c_n f(t - a_n) with a_n = shift_map(k_n)."""
    n = spec.n_terms
    shifts = [Fraction(shift_map.slope) * Fraction(2 * k - n, n) + Fraction(shift_map.offset) for k in range(n + 1)]
    return shift_sum(sample_f, shift_coefficients_exact(spec), shifts, ts)


def shift_superposition(
    sample_f: Callable,
    spec: SuperoscSpec,
    shift_map: AffineShift = AffineShift(),
    target_shift: float | None = None,
    window: tuple[float, float] = (-10.0, 10.0),
    n_points: int = 401,
) -> float:
    """max over `window` of |sum_n c_n f(t - a_n) - f(t - target_shift)|.

    `target_shift` defaults to shift_map(alpha), the shift the coefficients aim at.
    """
    if target_shift is None:
        target_shift = shift_map(spec.alpha)
    ts = np.linspace(window[0], window[1], n_points)
    approx = shift_superposition_values(sample_f, spec, ts, shift_map)
    exact = np.array([float(sample_f(t - target_shift)) for t in ts])
    return float(np.max(np.abs(approx - exact)))
