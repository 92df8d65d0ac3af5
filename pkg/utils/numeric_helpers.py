# utils/numeric_helpers.py

"""
Provides helper functions for rendering points and numeric values.
"""

from enum import Enum

import numpy as np

__all__ = ["FLOAT_DIGITS", "format_float", "point_to_list", "format_point", "to_jsonable"]

# Significant digits needed to round-trip a double.
FLOAT_DIGITS = 17


def format_float(value):
    """
    Renders a float with 17 significant digits.

    Args:
        value (float or None): The value to render.

    Returns:
        str: The rendered value, or an empty string for None.
    """
    if value is None:
        return ""
    return format(float(value), f".{FLOAT_DIGITS}g")


def point_to_list(point):
    """
    Converts a point to a plain list of Python floats.

    Args:
        point (numpy.ndarray): The point.

    Returns:
        list: The coordinates.
    """
    return [float(c) for c in np.atleast_1d(point)]


def format_point(point, precision=6):
    """
    Renders a point for log messages, abbreviating long grid functions.

    Args:
        point (numpy.ndarray): The point.
        precision (int): Digits after the decimal point.

    Returns:
        str: A compact representation.
    """
    coords = np.atleast_1d(point)
    if coords.size > 6:
        head = ", ".join(f"{c:.{precision}g}" for c in coords[:3])
        return f"[{head}, ... ({coords.size} nodes)]"
    return "[" + ", ".join(f"{c:.{precision}g}" for c in coords) + "]"


def to_jsonable(value):
    """
    Recursively converts numpy values, enums and tuples into JSON-serializable objects.
    """
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    return value
