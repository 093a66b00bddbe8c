"""Initial-history functions on the interval [-tau_max, 0].

Three concrete forms: a constant point, a sampled grid with monotone-safe
cubic (or linear) interpolation, and one closed-form expression per
species.  Every history is validated at construction: it must be strictly
positive on its whole interval, which is checked by dense sampling (1001
uniform points plus any grid knots).  Evaluation outside the interval is
an error, never extrapolation.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import CrnParseError, PreconditionError
from .exprs import ExprNode, parse_expression

__all__ = [
    "HistoryFunction",
    "ConstantHistory",
    "SampledHistory",
    "ExpressionHistory",
    "history_from_json",
    "load_history",
]

_DOMAIN_SLACK = 1e-9
_VALIDATION_POINTS = 1001


class HistoryFunction:
    """Common interface: callable on scalars or arrays of s in [-tau_max, 0]."""

    tau_max: float
    n_species: int
    smooth: bool

    def _eval(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, s):
        scalar = np.ndim(s) == 0
        arr = np.atleast_1d(np.asarray(s, dtype=float))
        lo = -self.tau_max - _DOMAIN_SLACK
        if arr.min(initial=0.0) < lo or arr.max(initial=0.0) > _DOMAIN_SLACK:
            raise PreconditionError(
                f"history evaluated outside [-{self.tau_max}, 0] (got s in "
                f"[{arr.min():.6g}, {arr.max():.6g}])"
            )
        arr = np.clip(arr, -self.tau_max, 0.0)
        values = self._eval(arr)
        return values[0] if scalar else values

    def to_json(self) -> dict:
        raise NotImplementedError

    def _validate_positive(self, extra_knots=()):
        lo = -self.tau_max
        pts = np.linspace(lo, 0.0, _VALIDATION_POINTS)
        if len(extra_knots):
            pts = np.union1d(pts, np.asarray(extra_knots, dtype=float))
        vals = self._eval(pts)
        if not np.isfinite(vals).all():
            raise PreconditionError("history is not finite everywhere on its interval")
        if vals.min() <= 0.0:
            j = int(np.unravel_index(np.argmin(vals), vals.shape)[0])
            raise PreconditionError(
                f"history is not strictly positive (min {vals.min():.6g} near s={pts[j]:.6g})"
            )


class ConstantHistory(HistoryFunction):
    """psi(s) = value for all s."""

    smooth = True

    def __init__(self, value, tau_max: float):
        self.value = np.asarray(value, dtype=float)
        if self.value.ndim != 1 or self.value.size == 0:
            raise PreconditionError("constant history needs a 1-d value vector")
        self.tau_max = float(tau_max)
        if self.tau_max < 0:
            raise PreconditionError("tau_max must be non-negative")
        self.n_species = self.value.size
        self._validate_positive()

    def _eval(self, s: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.value, (s.size, self.n_species)).copy()

    def to_json(self) -> dict:
        return {"type": "constant", "value": self.value.tolist()}


class SampledHistory(HistoryFunction):
    """Grid samples on [grid[0], 0] with pchip (order 3) or linear (order 1)."""

    def __init__(self, grid, values, order: int = 3):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise PreconditionError("sampled history needs at least two grid points")
        if np.any(np.diff(grid) <= 0):
            raise PreconditionError("sampled history grid must be strictly increasing")
        if abs(grid[-1]) > _DOMAIN_SLACK:
            raise PreconditionError("sampled history grid must end at s = 0")
        if values.shape[0] != grid.size or values.ndim != 2:
            raise PreconditionError("sampled history needs one value row per grid point")
        if order not in (1, 3):
            raise PreconditionError("interpolation order must be 1 or 3")
        self.grid = grid
        self.values = values
        self.order = order
        self.tau_max = float(-grid[0])
        self.n_species = values.shape[1]
        self.smooth = False
        if order == 3:
            self._interp = PchipInterpolator(grid, values, axis=0, extrapolate=False)
        else:
            self._interp = None
        self._validate_positive(extra_knots=grid)

    def _eval(self, s: np.ndarray) -> np.ndarray:
        if self._interp is not None:
            return np.asarray(self._interp(s))
        out = np.empty((s.size, self.n_species))
        for j in range(self.n_species):
            out[:, j] = np.interp(s, self.grid, self.values[:, j])
        return out

    def to_json(self) -> dict:
        return {
            "type": "sampled",
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "order": self.order,
        }


class ExpressionHistory(HistoryFunction):
    """One closed-form expression in s per species."""

    smooth = True

    def __init__(self, exprs, tau_max: float):
        texts = list(exprs)
        if not texts:
            raise PreconditionError("expression history needs at least one expression")
        self.texts = tuple(str(t) for t in texts)
        self.asts: tuple[ExprNode, ...] = tuple(parse_expression(t) for t in self.texts)
        self.tau_max = float(tau_max)
        if self.tau_max < 0:
            raise PreconditionError("tau_max must be non-negative")
        self.n_species = len(self.asts)
        self._validate_positive()

    def _eval(self, s: np.ndarray) -> np.ndarray:
        out = np.empty((s.size, self.n_species))
        for j, ast in enumerate(self.asts):
            out[:, j] = ast.eval(s)
        return out

    def to_json(self) -> dict:
        return {"type": "expr", "exprs": list(self.texts)}


def history_from_json(obj: dict, tau_max: float | None = None, n_species: int | None = None) -> HistoryFunction:
    """Build a history from its JSON form.

    ``tau_max`` is required for constant and expression histories (a
    sampled grid fixes its own interval) and is normally the network's
    largest delay.  ``n_species`` adds a species-count consistency check.
    """
    if not isinstance(obj, dict) or "type" not in obj:
        raise CrnParseError("history JSON must be an object with a 'type' key")
    kind = obj["type"]
    try:
        if kind == "constant":
            if tau_max is None:
                raise PreconditionError("tau_max is required for a constant history")
            hist: HistoryFunction = ConstantHistory(obj["value"], tau_max)
        elif kind == "sampled":
            hist = SampledHistory(obj["grid"], obj["values"], int(obj.get("order", 3)))
            if tau_max is not None and hist.tau_max < tau_max - _DOMAIN_SLACK:
                raise PreconditionError(
                    f"sampled history covers [-{hist.tau_max}, 0] but [-{tau_max}, 0] is needed"
                )
        elif kind == "expr":
            if tau_max is None:
                raise PreconditionError("tau_max is required for an expression history")
            hist = ExpressionHistory(obj["exprs"], tau_max)
        else:
            raise CrnParseError(f"unknown history type {kind!r}")
    except KeyError as exc:
        raise CrnParseError(f"history JSON is missing the {exc.args[0]!r} key") from exc
    if n_species is not None and hist.n_species != n_species:
        raise PreconditionError(
            f"history has {hist.n_species} species but the network has {n_species}"
        )
    return hist


def load_history(path: str | Path, tau_max: float | None = None, n_species: int | None = None) -> HistoryFunction:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CrnParseError(f"history file is not valid JSON: {exc}") from exc
    return history_from_json(obj, tau_max=tau_max, n_species=n_species)
