from __future__ import annotations

import math

DEFAULT_PRECISION = 6


def format_number(value, precision: int = DEFAULT_PRECISION) -> str:
    """Integers (and integral floats below 2**53) exactly, other reals to ``precision`` significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    if value.is_integer() and abs(value) < 2**53:
        return str(int(value))
    return f"{value:.{precision}g}"
