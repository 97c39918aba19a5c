"""Analytic layer: the drift map F, its fixed point, and Sturm root counting.

Conditioned on the red share x, one step adds on average 2 F(x) red balls
where

    2 F(x) = 1 - (1 - r) P_BB(x) + r P_RR(x),

so E[alpha_{t+1} | alpha_t] = alpha_t + (F(alpha_t) - alpha_t) / (t + 2) and
E[alpha_t] converges to the unique fixed point of F in (0, 1).  Clearing
denominators in F(x) = x leaves the cubic returned by ``cubic_Q``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import DomainError, MixingMatrix, p_bb_raw, p_rr_raw

BRACKET_EPS = 1e-15
BISECTION_WIDTH = 1e-14
STURM_ENDPOINT_SHIFT = 1e-12
CLOSED_FORM_RESIDUAL = 1e-13


class SolverInconsistency(RuntimeError):
    """The drift map and the cubic disagree about where the fixed point is."""


def _check_interior(x: float) -> float:
    x = float(x)
    if not 0.0 < x < 1.0:
        raise DomainError(f"x must lie in the open interval (0, 1), got {x!r}")
    return x


# ---------------------------------------------------------------------------
# drift map


def _denominators(x: float, pi: MixingMatrix) -> tuple[float, float]:
    """1 - x + rho_r (2x - 1) and x - rho_b (2x - 1), as sums of non-negative terms.

    The expanded forms cancel catastrophically near x in {0, 1} when rho is
    near 0 or 1.
    """
    rr, rb = pi.rho_r, pi.rho_b
    return rr * x + (1.0 - rr) * (1.0 - x), rb * (1.0 - x) + (1.0 - rb) * x


def drift_F(x: float, r: float, pi: MixingMatrix) -> float:
    x = _check_interior(x)
    rb, rr = pi.rho_b, pi.rho_r
    den_r, den_b = _denominators(x, pi)
    # -x + rho_b (2x - 1) == -den_b
    blue_term = rb * (r - 1.0) * (x - 1.0) / -den_b
    red_term = r * rr * x / den_r
    f = 0.5 * (1.0 + blue_term + red_term)
    lo, hi = r / 2.0, (1.0 + r) / 2.0
    if not lo - 1e-12 <= f <= hi + 1e-12:
        raise SolverInconsistency(f"F({x}) = {f} escapes [{lo}, {hi}]")
    return min(max(f, lo), hi)


def drift_F_via_kernels(x: float, r: float, pi: MixingMatrix) -> float:
    """Same map assembled from the attachment kernels (independent check)."""
    x = _check_interior(x)
    return 0.5 * (1.0 - (1.0 - r) * p_bb_raw(x, pi.rho_b) + r * p_rr_raw(x, pi.rho_r))


def drift_F_prime(x: float, r: float, pi: MixingMatrix) -> float:
    x = _check_interior(x)
    rb, rr = pi.rho_b, pi.rho_r
    den_r, den_b = _denominators(x, pi)
    blue = (rb - 1.0) * rb * (r - 1.0) / den_b**2
    red = r * (rr - 1.0) * rr / den_r**2
    return 0.5 * (blue - red)


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial with coefficients in ascending degree order.

    Coefficients are floats, or ``Fraction`` for exact arithmetic.
    """

    coefficients: tuple

    def __init__(self, coefficients: Sequence[float]):
        cs = tuple(c if isinstance(c, Fraction) else float(c) for c in coefficients)
        object.__setattr__(self, "coefficients", cs)

    @property
    def degree(self) -> int:
        """Index of the last nonzero coefficient; -1 for the zero polynomial."""
        for i in range(len(self.coefficients) - 1, -1, -1):
            if self.coefficients[i] != 0:
                return i
        return -1

    def trim(self, rel_tol: float = 0.0) -> Polynomial:
        """Drop trailing coefficients with ``|c| <= rel_tol * max|c|``."""
        scale = max((abs(c) for c in self.coefficients), default=0.0)
        cs = list(self.coefficients)
        while cs and abs(cs[-1]) <= rel_tol * scale:
            cs.pop()
        return Polynomial(cs)

    def is_zero(self) -> bool:
        return self.degree < 0

    def exact(self) -> Polynomial:
        return Polynomial([Fraction(c) for c in self.coefficients])

    def __call__(self, x: float) -> float:
        acc = 0 * x
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def derivative(self) -> Polynomial:
        return Polynomial([i * c for i, c in enumerate(self.coefficients)][1:])

    def scaled(self, factor: float) -> Polynomial:
        return Polynomial([factor * c for c in self.coefficients])

    def normalized(self) -> Polynomial:
        """Divide by the largest absolute coefficient (sign preserved)."""
        scale = max(abs(c) for c in self.coefficients)
        return Polynomial([c / scale for c in self.coefficients])

    def remainder(self, divisor: Polynomial) -> Polynomial:
        num = list(self.trim().coefficients)
        den = divisor.trim().coefficients
        if not den:
            raise ZeroDivisionError("polynomial division by zero")
        dd = len(den) - 1
        lead = den[-1]
        while len(num) - 1 >= dd and num:
            q = num[-1] / lead
            shift = len(num) - 1 - dd
            for i, c in enumerate(den):
                num[shift + i] -= q * c
            num.pop()  # leading term cancels by construction
        return Polynomial(num)


def cubic_Q(r: float, pi: MixingMatrix) -> Polynomial:
    """Numerator of F(x) - x after clearing denominators."""
    rb, rr = pi.rho_b, pi.rho_r
    c3 = 2.0 * (-1.0 + 2.0 * rb) * (-1.0 + 2.0 * rr)
    c2 = -3.0 + 7.0 * rb + rb * r + 4.0 * rr - 10.0 * rb * rr + r * rr - 4.0 * rb * r * rr
    c1 = 1.0 - 3.0 * rb - 2.0 * rb * r - rr + 3.0 * rb * rr + 4.0 * rb * r * rr
    c0 = rb * r - rb * r * rr
    return Polynomial([c0, c1, c2, c3])


# ---------------------------------------------------------------------------
# Sturm sequences

ENDPOINT_ROOT_TOL = 1e-13


def sturm_sequence(p: Polynomial) -> list[Polynomial]:
    """p0 = p, p1 = p', p_i = -rem(p_{i-2}, p_{i-1}), each rescaled to max |c| = 1.

    The chain is built in exact rational arithmetic on the (exactly
    representable) float coefficients.  Floating-point remainders lose all
    accuracy when the leading coefficient is tiny, e.g. Q near rho = 1/2.
    """
    p0 = p.exact().trim()
    if p0.is_zero():
        raise DomainError("Sturm sequence of the zero polynomial is undefined")
    seq = [p0.normalized()]
    p1 = p0.derivative().trim()
    if p1.is_zero():
        return seq
    seq.append(p1.normalized())
    while True:
        rem = seq[-2].remainder(seq[-1]).trim()
        if rem.is_zero():
            return seq
        seq.append(rem.scaled(-1).normalized())


def sign_changes(values: Sequence[float]) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _near_root(p: Polynomial, x: float, scale: float) -> bool:
    return abs(float(p(Fraction(x)))) <= ENDPOINT_ROOT_TOL * scale


def sturm_root_count(p: Polynomial, a: float, b: float) -> int:
    """Number of distinct real roots of ``p`` strictly inside ``(a, b)``.

    An endpoint at (or within rounding of) a root is moved inward by 1e-12,
    so that root is not counted; the moved endpoint must evaluate to an
    exactly nonzero value.
    """
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")
    seq = sturm_sequence(p)
    p0 = seq[0]
    scale = max(abs(float(c)) for c in p0.coefficients)
    if _near_root(p0, a, scale):
        a = a + STURM_ENDPOINT_SHIFT
    if _near_root(p0, b, scale):
        b = b - STURM_ENDPOINT_SHIFT
    fa, fb = Fraction(a), Fraction(b)
    if not a < b or p0(fa) == 0 or p0(fb) == 0:
        raise DomainError("could not move the interval endpoints off a root")
    return sign_changes([q(fa) for q in seq]) - sign_changes([q(fb) for q in seq])


# ---------------------------------------------------------------------------
# fixed point


class Method(enum.Enum):
    CLOSED_CASE = "closed"
    BISECTION = "bisection"


@dataclass(frozen=True)
class FixedPointResult:
    alpha: float
    residual: float
    certified_unique: bool
    method: Method


def _interior_quadratic_root(a2: float, a1: float, a0: float) -> float | None:
    """The root of a2 x^2 + a1 x + a0 lying in (0, 1).

    None when rounding leaves zero or two candidates (a root at an endpoint
    can drift inside); the caller then falls back to bisection.
    """
    if a2 == 0.0:
        x = -a0 / a1
        return x if 0.0 < x < 1.0 else None
    disc = a1 * a1 - 4.0 * a2 * a0
    q = -0.5 * (a1 + math.copysign(math.sqrt(max(disc, 0.0)), a1))
    roots = [q / a2] + ([a0 / q] if q != 0.0 else [])
    inside = [x for x in roots if 0.0 < x < 1.0]
    return inside[0] if len(inside) == 1 else None


def _closed_form(r: float, pi: MixingMatrix) -> float | None:
    rr, rb = pi.rho_r, pi.rho_b
    if rr == 1.0 and rb == 1.0:
        return r
    if rr == 0.0 and rb == 0.0:
        return 0.5
    if rr == 0.5 and rb == 0.5:
        return r
    if rr == 1.0:
        # P_RR == 1: 2(1-2rb) x^2 + (1+r)(3rb-1) x - 2 r rb = 0
        return _interior_quadratic_root(2.0 * (1.0 - 2.0 * rb), (1.0 + r) * (3.0 * rb - 1.0),
                                        -2.0 * r * rb)
    if rb == 0.0:
        # P_BB == 0: 2(2rr-1) x^2 + (3 - 4rr - r rr) x - (1 - rr) = 0
        return _interior_quadratic_root(2.0 * (2.0 * rr - 1.0), 3.0 - 4.0 * rr - r * rr,
                                        -(1.0 - rr))
    return None


def _bisect(r: float, pi: MixingMatrix) -> float:
    lo, hi = BRACKET_EPS, 1.0 - BRACKET_EPS
    g_lo = drift_F(lo, r, pi) - lo
    g_hi = drift_F(hi, r, pi) - hi
    if not (g_lo > 0.0 and g_hi < 0.0):
        raise SolverInconsistency(
            f"G does not change sign on [{lo}, {hi}]: G(lo)={g_lo}, G(hi)={g_hi}"
        )
    while hi - lo > BISECTION_WIDTH:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if drift_F(mid, r, pi) - mid > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fixed_point(r: float, pi: MixingMatrix) -> FixedPointResult:
    """The unique alpha in (0, 1) with F(alpha) = alpha."""
    r = float(r)
    if not 0.0 < r < 1.0:
        raise DomainError(f"r must lie in (0, 1), got {r!r}")
    alpha = _closed_form(r, pi)
    method = Method.CLOSED_CASE
    # The quadratic closed forms are ill-conditioned when their two roots
    # nearly coincide (e.g. rho_r = 1 with r and rho_b close to 1).
    if alpha is not None and abs(drift_F(alpha, r, pi) - alpha) > CLOSED_FORM_RESIDUAL:
        alpha = None
    if alpha is None:
        alpha = _bisect(r, pi)
        method = Method.BISECTION
    residual = abs(drift_F(alpha, r, pi) - alpha)
    unique = sturm_root_count(cubic_Q(r, pi), 0.0, 1.0) == 1
    return FixedPointResult(alpha, residual, unique, method)


def steady_cut_fraction(r: float, pi: MixingMatrix, alpha: float | None = None) -> float:
    """Long-run share of edges crossing the red/blue cut."""
    if alpha is None:
        alpha = fixed_point(r, pi).alpha
    return 1.0 - ((1.0 - r) * p_bb_raw(alpha, pi.rho_b) + r * p_rr_raw(alpha, pi.rho_r))
