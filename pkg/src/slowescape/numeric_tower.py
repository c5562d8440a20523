"""Level-index numbers for iterated-exponential magnitudes, plus precision policy.

A :class:`LevelIndex` ``(level, index)`` stands for ``exp`` applied ``level``
times to ``index``.  In normal form ``index`` lies in ``[1, e)`` when
``level >= 1`` and in ``(0, e)`` when ``level == 0``, so lexicographic order on
the pair is the order of the represented values.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from typing import Union

import mpmath

from .errors import CapacityError, DomainError

E = math.e
# working precision for normalisation; the stored index is a double
_NORM_BITS = 128
# relative index gap below which two same-level values are not told apart
TIE_EPSILON = 2.0 ** -50
# ln(value) above this cannot be held as an mpf exponent in practice
_MPF_LOG_LIMIT = 1e30

Real = Union[int, float, mpmath.mpf]


class Ordering(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1
    INDISTINGUISHABLE = 2


@dataclass(frozen=True, order=True)
class LevelIndex:
    level: int
    index: float

    def __post_init__(self):
        if not isinstance(self.level, int) or self.level < 0:
            raise DomainError(f"level must be a non-negative int, got {self.level!r}")
        x = self.index
        if not math.isfinite(x) or x <= 0.0:
            raise DomainError(f"index must be positive and finite, got {x!r}")
        if x >= E or (self.level >= 1 and x < 1.0):
            raise DomainError(f"({self.level}, {x}) is not in normal form")

    # -- construction -------------------------------------------------
    @classmethod
    def from_real(cls, v: Real) -> "LevelIndex":
        return from_real(v)

    @classmethod
    def parse(cls, text: str) -> "LevelIndex":
        text = text.strip()
        if not text.startswith("L") or ":" not in text:
            raise DomainError(f"malformed level-index literal {text!r}")
        level, index = text[1:].split(":", 1)
        return cls(int(level), float(index))

    # -- conversion ---------------------------------------------------
    def to_real(self) -> float:
        """Represented value as a double; raises CapacityError on overflow."""
        try:
            v = mpmath.mpf(self.index)
            with mpmath.workprec(_NORM_BITS):
                for _ in range(self.level):
                    if v > 710:
                        raise OverflowError
                    v = mpmath.exp(v)
            out = float(v)
            if math.isinf(out):
                raise OverflowError
            return out
        except OverflowError:
            raise CapacityError(f"{self} exceeds double range",
                                log_magnitude=self._log_estimate()) from None

    def to_mpf(self, prec: int = _NORM_BITS) -> mpmath.mpf:
        """Represented value as an mpf (arbitrary exponent) when feasible."""
        if not self.fits_mpf():
            raise CapacityError(f"{self} has no finite mpf representation",
                                log_magnitude=math.inf)
        with mpmath.workprec(prec):
            v = mpmath.mpf(self.index)
            for _ in range(self.level):
                v = mpmath.exp(v)
            return +v

    def _log_fits(self) -> bool:
        try:
            return self.to_real() < _MPF_LOG_LIMIT
        except CapacityError:
            return False

    def fits_mpf(self) -> bool:
        if self.level <= 3:
            return True
        return LevelIndex(self.level - 1, self.index)._log_fits()

    def fits_double(self) -> bool:
        try:
            self.to_real()
            return True
        except CapacityError:
            return False

    def _log_estimate(self) -> float | None:
        if self.level == 0:
            return math.log(self.index)
        try:
            return LevelIndex(self.level - 1, self.index).to_real()
        except CapacityError:
            return math.inf

    def __str__(self) -> str:
        return f"L{self.level}:{self.index!r}"


def from_real(v: Real) -> LevelIndex:
    """Normal form of a positive real (float, int or mpf)."""
    if isinstance(v, LevelIndex):
        return v
    if isinstance(v, float) and not math.isfinite(v):
        raise DomainError(f"non-finite input {v!r}")
    with mpmath.workprec(_NORM_BITS):
        x = mpmath.mpf(v)
        if not mpmath.isfinite(x) or x <= 0:
            raise DomainError(f"level-index needs a positive finite value, got {v!r}")
        level = 0
        while x >= mpmath.e:
            x = mpmath.log(x)
            level += 1
        idx = float(x)
    if idx >= E:
        idx = math.nextafter(E, 0.0)
    if level >= 1 and idx < 1.0:
        idx = 1.0
    return LevelIndex(level, idx)


def from_mpf(v: mpmath.mpf) -> LevelIndex:
    return from_real(v)


def compare(a: LevelIndex, b: LevelIndex, tie_epsilon: float = TIE_EPSILON) -> Ordering:
    if a.level != b.level:
        return Ordering.LESS if a.level < b.level else Ordering.GREATER
    if a.index == b.index:
        return Ordering.EQUAL
    # relative, so tiny level-0 values still order correctly
    if abs(a.index - b.index) < tie_epsilon * max(a.index, b.index):
        return Ordering.INDISTINGUISHABLE
    return Ordering.LESS if a.index < b.index else Ordering.GREATER


def apply_exp(a: LevelIndex) -> LevelIndex:
    if a.level == 0 and a.index < 1.0:
        return LevelIndex(0, math.exp(a.index))
    return LevelIndex(a.level + 1, a.index)


def apply_log(a: LevelIndex) -> LevelIndex:
    if a.level >= 1:
        return LevelIndex(a.level - 1, a.index)
    if a.index <= 1.0:
        raise DomainError(f"log of {a} is not positive")
    return LevelIndex(0, math.log(a.index))


def add_real(a: LevelIndex, d: float) -> LevelIndex:
    """``a + d`` for a moderate real ``d``; exact below mpf capacity.

    Beyond that capacity the shift is below the stored index resolution and
    ``a`` is returned unchanged.
    """
    if not a.fits_mpf():
        return a
    with mpmath.workprec(_NORM_BITS):
        v = a.to_mpf() + mpmath.mpf(d)
        if v <= 0:
            raise DomainError(f"{a} + {d} is not positive")
        return from_real(v)


def mul_real(a: LevelIndex, c: float) -> LevelIndex:
    """``c * a`` for a moderate positive real ``c``."""
    if c <= 0:
        raise DomainError("multiplier must be positive")
    if a.level == 0:
        with mpmath.workprec(_NORM_BITS):
            return from_real(mpmath.mpf(a.index) * c)
    if a.level == 1:
        with mpmath.workprec(_NORM_BITS):
            return from_real(mpmath.exp(mpmath.mpf(a.index)) * c)
    return apply_exp(add_real(apply_log(a), math.log(c)))


def exp_of(x: Real | LevelIndex) -> LevelIndex:
    """The level-index form of ``exp(x)`` for real or level-index ``x``."""
    if isinstance(x, LevelIndex):
        return apply_exp(x)
    x = float(x)
    if x < 1.0:
        return LevelIndex(0, math.exp(x)) if x > -700 else from_real(mpmath.exp(x))
    return apply_exp(from_real(x))


@dataclass(frozen=True)
class PrecisionPolicy:
    base_bits: int = 64
    max_bits: int = 16384
    target_rel_err: float = 1e-12

    def __post_init__(self):
        if self.base_bits <= 0 or self.max_bits <= 0:
            raise DomainError("bit counts must be positive")
        if self.base_bits > self.max_bits:
            raise DomainError("base_bits exceeds max_bits")
        if not 0.0 < self.target_rel_err < 1.0:
            raise DomainError("target_rel_err must lie in (0, 1)")

    @classmethod
    def from_env(cls) -> "PrecisionPolicy":
        bits = int(os.environ.get("SLOWESCAPE_BITS", "64"))
        return cls(base_bits=bits, max_bits=max(bits, 16384))

    def ladder(self):
        bits = self.base_bits
        while bits <= self.max_bits:
            yield bits
            bits *= 2


DEFAULT_POLICY = PrecisionPolicy()
