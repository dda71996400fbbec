"""Small argument checks shared by the config objects and the estimator."""

from __future__ import annotations

import math
import numbers


def check_interval(name: str, value, low: float, high: float,
                   closed_left: bool = True, closed_right: bool = True) -> float:
    if not isinstance(value, numbers.Real) or isinstance(value, bool) or math.isnan(value):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    ok_left = value >= low if closed_left else value > low
    ok_right = value <= high if closed_right else value < high
    if not (ok_left and ok_right):
        lb = "[" if closed_left else "("
        rb = "]" if closed_right else ")"
        raise ValueError(f"{name} must lie in {lb}{low}, {high}{rb}, got {value!r}")
    return float(value)


def check_positive(name: str, value) -> float:
    if not isinstance(value, numbers.Real) or isinstance(value, bool) or not value > 0:
        raise ValueError(f"{name} must be a positive number, got {value!r}")
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return float(value)


def check_positive_int(name: str, value) -> int:
    if not isinstance(value, numbers.Integral) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_nonnegative_int(name: str, value) -> int:
    if not isinstance(value, numbers.Integral) or isinstance(value, bool) or value < 0:
        raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
    return int(value)
