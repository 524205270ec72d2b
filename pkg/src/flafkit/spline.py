"""Uniform Catmull-Rom spline primitives for the spline adaptive filter.

The curve is defined over equally spaced control points q with knot spacing
dx, centred on zero.  An input x is located inside a span i with a local
abscissa u in [0, 1); its value is

    s(x) = [u^3, u^2, u, 1] . C . q[i-1 : i+3]

with C the uniform Catmull-Rom basis matrix.  With control points on a
straight line the curve reproduces that line exactly, which is what makes the
linear-ramp initialisation behave as an identity mapping.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "CATMULL_ROM_BASIS",
    "linear_ramp",
    "locate_span",
    "control_weights",
    "spline_value",
]

# Rows scaled by 1/2; acts on [u^3, u^2, u, 1] from the left.
CATMULL_ROM_BASIS = 0.5 * np.array(
    [
        [-1.0, 3.0, -3.0, 1.0],
        [2.0, -5.0, 4.0, -1.0],
        [-1.0, 0.0, 1.0, 0.0],
        [0.0, 2.0, 0.0, 0.0],
    ]
)

_BASIS_T = np.ascontiguousarray(CATMULL_ROM_BASIS.T)


def linear_ramp(n_points: int, knot_spacing: float) -> np.ndarray:
    """Control points on the identity line: q_i = (i - (n-1)/2) * dx.

    For n_points=25, knot_spacing=0.25 this is [-3.0, -2.75, ..., 2.75, 3.0].
    """
    if n_points < 4:
        raise ConfigurationError(f"need at least 4 control points, got {n_points}")
    if knot_spacing <= 0:
        raise ConfigurationError(f"knot spacing must be positive, got {knot_spacing}")
    return (np.arange(n_points) - (n_points - 1) / 2.0) * knot_spacing


def locate_span(x: float, knot_spacing: float, n_points: int, counter=None):
    """Map x to its span index i and local abscissa u.

    i is clamped to [1, n_points - 3] so the 4-point window q[i-1 : i+3] is
    always in range; inputs beyond the spline support therefore evaluate on
    the edge span instead of erroring.
    """
    if not math.isfinite(x):
        raise DomainError(f"cannot evaluate spline at non-finite input {x!r}")
    u_norm = x / knot_spacing + (n_points - 1) / 2.0
    floor = math.floor(u_norm)
    i = min(max(int(floor), 1), n_points - 3)
    u = u_norm - floor
    if counter is not None:
        counter.tally(mul=1, add=2)
    return i, u


def control_weights(u: float, counter=None) -> np.ndarray:
    """C^T . [u^3, u^2, u, 1]: the weight of each window control point at u.

    This 4-vector gives both the curve value (dotted with the window) and the
    gradient of that value with respect to the window's control points.
    """
    u2 = u * u
    uv = np.array([u2 * u, u2, u, 1.0])
    if counter is not None:
        counter.tally(mul=2 + 16, add=12)
    return _BASIS_T @ uv


def spline_value(x: float, q: np.ndarray, knot_spacing: float, counter=None) -> float:
    """Evaluate the curve at x over control points q."""
    i, u = locate_span(x, knot_spacing, len(q), counter)
    w = control_weights(u, counter)
    if counter is not None:
        counter.tally(mul=4, add=3)
    return float(np.dot(w, q[i - 1 : i + 3]))
