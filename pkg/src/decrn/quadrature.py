"""Composite Simpson quadrature with panel doubling.

Integrands here (history powers, their entropy-weighted variants) are
smooth or piecewise-C1, so doubling the panel count until two successive
composite-Simpson values agree is a reliable absolute-error control.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import NumericError

__all__ = ["simpson_nodes", "simpson_weights", "simpson_fixed", "simpson_adaptive"]

_WEIGHT_CACHE: dict[int, np.ndarray] = {}


def simpson_nodes(a: float, b: float, panels: int) -> np.ndarray:
    return np.linspace(a, b, panels + 1)


def simpson_weights(a: float, b: float, panels: int) -> np.ndarray:
    if panels % 2 or panels < 2:
        raise ValueError("composite Simpson needs an even panel count >= 2")
    pattern = _WEIGHT_CACHE.get(panels)
    if pattern is None:
        pattern = np.ones(panels + 1)
        pattern[1:-1:2] = 4.0
        pattern[2:-1:2] = 2.0
        pattern.setflags(write=False)
        _WEIGHT_CACHE[panels] = pattern
    return pattern * ((b - a) / panels / 3.0)


def simpson_fixed(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int) -> float:
    nodes = simpson_nodes(a, b, panels)
    return float(np.dot(simpson_weights(a, b, panels), np.asarray(f(nodes), dtype=float)))


def simpson_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-10,
    start_panels: int = 256,
    max_doublings: int = 6,
) -> float:
    """Integrate f over [a, b] to absolute tolerance ``tol``.

    Panel count starts at ``start_panels`` and doubles until two successive
    values agree; failure to converge raises a numeric error rather than
    returning a silent best effort.
    """
    if b <= a:
        return 0.0
    panels = start_panels
    previous = simpson_fixed(f, a, b, panels)
    for _ in range(max_doublings):
        panels *= 2
        current = simpson_fixed(f, a, b, panels)
        if abs(current - previous) <= tol:
            return current
        previous = current
    raise NumericError(
        f"quadrature over [{a:.6g}, {b:.6g}] did not reach tolerance {tol:g} "
        f"within {panels} panels"
    )
