"""Exact linear algebra over the rationals.

Stoichiometric data is integer-valued, so ranks, subspace bases and
nullspaces are computed with ``Fraction`` arithmetic: face and vertex
verdicts must never depend on a floating-point rank tolerance.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple[Fraction, ...]
Matrix = list[list[Fraction]]

__all__ = ["to_fractions", "rref", "rank", "row_basis", "nullspace"]


def to_fractions(rows: Iterable[Sequence]) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def rref(matrix: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form. Returns (nonzero rows, pivot columns)."""
    rows = [list(r) for r in matrix]
    if not rows:
        return [], []
    n_cols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = Fraction(1) / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(matrix: Matrix) -> int:
    return len(rref(matrix)[1])


def row_basis(matrix: Matrix) -> tuple[Vector, ...]:
    """Canonical basis (RREF rows) of the row space."""
    reduced, _ = rref(matrix)
    return tuple(tuple(row) for row in reduced)


def nullspace(matrix: Matrix, n_cols: int | None = None) -> tuple[Vector, ...]:
    """Canonical basis of {x : M x = 0}, one vector per free column."""
    if n_cols is None:
        if not matrix:
            raise ValueError("n_cols is required for an empty matrix")
        n_cols = len(matrix[0])
    reduced, pivots = rref(matrix)
    free = [c for c in range(n_cols) if c not in pivots]
    basis: list[Vector] = []
    for fc in free:
        vec = [Fraction(0)] * n_cols
        vec[fc] = Fraction(1)
        for row_idx, pc in enumerate(pivots):
            vec[pc] = -reduced[row_idx][fc]
        basis.append(tuple(vec))
    return tuple(basis)
