"""
Numeric modes shared by every module.

Exact mode works on ``fractions.Fraction``. Float mode keeps partition-scale
quantities as ``LogWeight`` (sign plus log-magnitude) and everything bounded
(probabilities, polymer weights, cluster sums) as plain floats.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import logsumexp

from .exceptions import ParameterError

EXACT = 'exact'
FLOAT = 'float'
MODES = (EXACT, FLOAT)


def to_exact(value):
    """Convert int, str, float or Fraction to a Fraction without binary noise."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        return Fraction(repr(float(value)))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ParameterError(f'Not a rational number: {value!r}') from e


def check_mode(mode):
    if mode not in MODES:
        raise ParameterError(f'Unknown numeric mode: {mode!r} (expected one of {MODES})')
    return mode


def safe_log(x):
    """log(x) with log(0) = -inf."""
    return math.log(x) if x > 0 else -math.inf


@dataclass(frozen=True)
class LogWeight:
    """Signed value stored as sign * exp(log_abs)."""

    sign: int
    log_abs: float

    @classmethod
    def zero(cls):
        return cls(0, -math.inf)

    @classmethod
    def one(cls):
        return cls(1, 0.0)

    @classmethod
    def from_log(cls, log_abs, sign=1):
        if sign == 0 or log_abs == -math.inf:
            return cls.zero()
        return cls(1 if sign > 0 else -1, float(log_abs))

    @classmethod
    def from_float(cls, value):
        if isinstance(value, LogWeight):
            return value
        if isinstance(value, Fraction):
            if value == 0:
                return cls.zero()
            log_abs = math.log(abs(value.numerator)) - math.log(value.denominator)
            return cls(1 if value > 0 else -1, log_abs)
        value = float(value)
        if value == 0:
            return cls.zero()
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    @classmethod
    def from_logs(cls, logs, signs=None):
        """Stable signed sum of exp(logs)."""
        logs = np.asarray(logs, dtype=float)
        if logs.size == 0 or np.all(np.isneginf(logs)):
            return cls.zero()
        if signs is None:
            return cls.from_log(float(logsumexp(logs)))
        signs = np.asarray(signs, dtype=float)
        value, sign = logsumexp(logs, b=signs, return_sign=True)
        if sign == 0 or np.isneginf(value):
            return cls.zero()
        return cls.from_log(float(value), int(sign))

    @property
    def log(self):
        if self.sign < 0:
            raise ValueError('log of a negative weight')
        return self.log_abs

    def __float__(self):
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)

    def __bool__(self):
        return self.sign != 0

    def __neg__(self):
        return LogWeight(-self.sign, self.log_abs)

    def __add__(self, other):
        other = LogWeight.from_float(other)
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        return LogWeight.from_logs([self.log_abs, other.log_abs], [self.sign, other.sign])

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-LogWeight.from_float(other))

    def __rsub__(self, other):
        return LogWeight.from_float(other) - self

    def __mul__(self, other):
        other = LogWeight.from_float(other)
        if self.sign == 0 or other.sign == 0:
            return LogWeight.zero()
        return LogWeight(self.sign * other.sign, self.log_abs + other.log_abs)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = LogWeight.from_float(other)
        if other.sign == 0:
            raise ZeroDivisionError('division by a zero weight')
        if self.sign == 0:
            return LogWeight.zero()
        return LogWeight(self.sign * other.sign, self.log_abs - other.log_abs)

    def __rtruediv__(self, other):
        return LogWeight.from_float(other) / self

    def __pow__(self, exponent):
        if self.sign == 0:
            return LogWeight.one() if exponent == 0 else LogWeight.zero()
        sign = self.sign if int(exponent) % 2 else 1
        return LogWeight(sign, self.log_abs * exponent)

    def isclose(self, other, rel_tol=1e-9):
        other = LogWeight.from_float(other)
        if self.sign != other.sign:
            return False
        if self.sign == 0:
            return True
        return abs(self.log_abs - other.log_abs) <= rel_tol

    def __str__(self):
        if self.sign == 0:
            return '0'
        if abs(self.log_abs) < 700:
            return repr(float(self))
        prefix = '-' if self.sign < 0 else ''
        return f'{prefix}exp({self.log_abs!r})'


def as_weight(value, mode):
    """Lift a number into the partition-scale representation of ``mode``."""
    if mode == EXACT:
        return to_exact(value)
    return LogWeight.from_float(value)


def relative_error(approx, exact):
    """|1 - approx/exact| as a float, for any mix of Fraction, float and LogWeight."""
    if isinstance(approx, LogWeight) or isinstance(exact, LogWeight):
        ratio = LogWeight.from_float(approx) / LogWeight.from_float(exact)
        return abs(1.0 - float(ratio))
    return abs(1.0 - float(approx) / float(exact))
