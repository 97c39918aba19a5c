"""Domain types and single-step attachment kernels of the biased preferential
attachment (BPA) model.

A new vertex of color X picks a tentative neighbour by preferential
attachment and keeps it with probability rho_X when the colors agree, or
1 - rho_X when they differ; rejected picks are redrawn.  Summing the
geometric series of rejections gives the closed forms implemented here.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain where the model is defined."""


class Color(enum.IntEnum):
    RED = 0
    BLUE = 1

    @property
    def complement(self) -> Color:
        return Color.BLUE if self is Color.RED else Color.RED

    @property
    def letter(self) -> str:
        return "R" if self is Color.RED else "B"


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class MixingMatrix:
    """The 2x2 row-stochastic strategy matrix.

    Row ``RED`` is ``(rho_r, 1 - rho_r)`` and row ``BLUE`` is
    ``(1 - rho_b, rho_b)``; each player controls only its own row.
    """

    rho_r: float
    rho_b: float

    def __post_init__(self):
        object.__setattr__(self, "rho_r", _check_probability("rho_r", self.rho_r))
        object.__setattr__(self, "rho_b", _check_probability("rho_b", self.rho_b))

    @classmethod
    def homophily(cls) -> MixingMatrix:
        return cls(1.0, 1.0)

    @classmethod
    def heterophily(cls) -> MixingMatrix:
        return cls(0.0, 0.0)

    @classmethod
    def unbiased(cls) -> MixingMatrix:
        return cls(0.5, 0.5)

    def rho(self, color: Color) -> float:
        return self.rho_r if color is Color.RED else self.rho_b

    def row(self, color: Color) -> tuple[float, float]:
        """Acceptance probabilities ``(toward RED, toward BLUE)`` for ``color``."""
        if color is Color.RED:
            return (self.rho_r, 1.0 - self.rho_r)
        return (1.0 - self.rho_b, self.rho_b)

    def as_array(self) -> np.ndarray:
        return np.array([self.row(Color.RED), self.row(Color.BLUE)])

    def with_rho(self, color: Color, value: float) -> MixingMatrix:
        if color is Color.RED:
            return MixingMatrix(value, self.rho_b)
        return MixingMatrix(self.rho_r, value)

    @property
    def profile(self) -> Profile:
        for p in (Profile.HOMOPHILY, Profile.HETEROPHILY, Profile.UNBIASED):
            if p.matrix == self:
                return p
        return Profile.CUSTOM


class Profile(enum.Enum):
    """Named strategy profiles; ``CUSTOM`` covers every other matrix."""

    HOMOPHILY = "homophily"
    HETEROPHILY = "heterophily"
    UNBIASED = "unbiased"
    CUSTOM = "custom"

    @property
    def matrix(self) -> MixingMatrix:
        if self is Profile.HOMOPHILY:
            return MixingMatrix.homophily()
        if self is Profile.HETEROPHILY:
            return MixingMatrix.heterophily()
        if self is Profile.UNBIASED:
            return MixingMatrix.unbiased()
        raise DomainError("the custom profile has no fixed matrix")

    @classmethod
    def parse(cls, name: str) -> Profile:
        try:
            profile = cls(name.strip().lower())
        except ValueError:
            raise DomainError(
                f"unknown profile {name!r}; expected homophily, heterophily or unbiased"
            ) from None
        if profile is cls.CUSTOM:
            raise DomainError("'custom' is not a named profile; pass rho_r and rho_b")
        return profile


@dataclass(frozen=True)
class ModelParams:
    """Parameters of BPA(n, r, pi): red arrival rate, mixing matrix, step count."""

    r: float
    pi: MixingMatrix
    n: int = 0

    def __post_init__(self):
        r = float(self.r)
        if not 0.0 < r < 1.0:
            raise DomainError(f"r must lie in the open interval (0, 1), got {r!r}")
        object.__setattr__(self, "r", r)
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"n must be a non-negative integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))


# The two scalar kernels below are also compiled by numba for the simulators,
# so they stay free of Python objects.  The denominator 1 - x + rho (2x - 1)
# is evaluated as rho x + (1 - rho)(1 - x): the same value, but a sum of
# non-negative terms, so it does not cancel when rho is near 1 and x near 0.
# It also returns exactly 0 and 1 at rho in {0, 1}.

def p_rr_raw(x: float, rho_r: float) -> float:
    same = rho_r * x
    return same / (same + (1.0 - rho_r) * (1.0 - x))


def p_bb_raw(x: float, rho_b: float) -> float:
    same = rho_b * (1.0 - x)
    return same / (same + (1.0 - rho_b) * x)


def _check_fraction(x: float) -> float:
    x = float(x)
    if not 0.0 < x < 1.0:
        raise DomainError(f"red degree fraction must lie in (0, 1), got {x!r}")
    return x


def p_same(color: Color, x: float, pi: MixingMatrix) -> float:
    """Probability that an arriving vertex of ``color`` attaches to its own color.

    ``x`` is the current red share of the degree mass.  For RED this is
    ``rho_r x / (1 - x + rho_r (2x - 1))``; for BLUE it is
    ``(rho_b - rho_b x) / (rho_b + x - 2 rho_b x)``.
    """
    x = _check_fraction(x)
    if Color(color) is Color.RED:
        return p_rr_raw(x, pi.rho_r)
    return p_bb_raw(x, pi.rho_b)


def step_outcome_distribution(
    x: float, pi: MixingMatrix, r: float, color: Color | None = None
) -> np.ndarray:
    """Distribution of the number of new red balls (0, 1 or 2) in one step.

    With ``color=None`` the arrival color is mixed in with weights
    ``(r, 1 - r)``; otherwise the distribution is conditional on it.
    """
    x = _check_fraction(x)
    prr = p_rr_raw(x, pi.rho_r)
    pbb = p_bb_raw(x, pi.rho_b)
    if color is None:
        p0 = (1.0 - r) * pbb
        p2 = r * prr
        p1 = (1.0 - r) * (1.0 - pbb) + r * (1.0 - prr)  # not 1 - p0 - p2, which can dip below 0
    elif Color(color) is Color.RED:
        p0, p1, p2 = 0.0, 1.0 - prr, prr
    else:
        p0, p1, p2 = pbb, 1.0 - pbb, 0.0
    return np.array([p0, p1, p2])
