"""Compatibility-class geometry for delayed networks.

The conserved functional of the delayed flow is

    C_a(x_t) = a^T [ x(t) + sum_i k_i (integral_{t-tau_i}^t x(s)^{y_i} ds) y_i ],

constant in t for every a orthogonal to the stoichiometric subspace.  Its
value on the initial history pins the compatibility class.  For a species
subset W the boundary face where exactly the W species vanish is
classified as empty / facet / vertex / other through two computations:

* an exact-rational dimension, dim(S  intersect  {v : v|_W = 0}), which
  realizes the dimension of the reachable difference set on the face: the
  state may move freely on the complement of W and the delayed-integral
  weights of the W-disjoint reactions contribute their source complexes,
  all of which vanish on W, and any two attainable values differ by an
  element of S;
* an emptiness decision: whether the class values are attainable on the
  face at all, solved as a margin-maximization linear program over the
  face state and the positive integral weights, with the returned witness
  re-verified in exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.optimize import linprog

from . import ratlinalg
from .errors import NumericError, PreconditionError
from .model import ReactionNetwork
from .quadrature import simpson_adaptive
from .structure import stoich_subspace_basis

__all__ = [
    "ConservedBasis",
    "ClassSpec",
    "FaceTag",
    "FaceClass",
    "conserved_basis",
    "g_functional",
    "class_values",
    "zw_dimension",
    "face_nonempty",
    "classify_face",
]

STRICT_MARGIN = 1e-9
_EQUALITY_TOL = 1e-7


@dataclass(frozen=True)
class ConservedBasis:
    """Exact-rational basis of the orthogonal complement of S."""

    vectors: tuple[tuple[Fraction, ...], ...]

    def __len__(self):
        return len(self.vectors)

    def as_array(self, dtype=float) -> np.ndarray:
        if not self.vectors:
            return np.zeros((0, 0))
        return np.array([[dtype(v) for v in vec] for vec in self.vectors])


@dataclass(frozen=True)
class ClassSpec:
    """Conserved basis plus the class values c_a pinned by one history."""

    basis: ConservedBasis
    values: tuple[float, ...]
    g_point: tuple[float, ...]


class FaceTag(str, Enum):
    EMPTY = "Empty"
    FACET = "Facet"
    VERTEX = "Vertex"
    OTHER = "Other"


@dataclass(frozen=True)
class FaceClass:
    tag: FaceTag
    zw_dim: int
    witness_point: tuple[float, ...] | None = None
    witness_weights: tuple[tuple[int, float], ...] | None = None


def conserved_basis(network: ReactionNetwork) -> ConservedBasis:
    """Nullspace of the reaction-vector matrix, i.e. a basis of S-perp."""
    rows = []
    n = network.n_species
    for rxn in network.reactions:
        row = [Fraction(0)] * n
        for idx, coeff in rxn.target.terms:
            row[idx] += coeff
        for idx, coeff in rxn.source.terms:
            row[idx] -= coeff
        rows.append(row)
    return ConservedBasis(ratlinalg.nullspace(rows, n))


def g_functional(history: Callable, network: ReactionNetwork, tol: float = 1e-10) -> np.ndarray:
    """x(0) plus the delayed source-complex loads.

    ``history`` is any callable mapping s (scalar or array) in
    [-tau_max, 0] to states; the per-reaction integrals run over
    [-tau_i, 0] and are evaluated by adaptive composite Simpson to the
    absolute tolerance ``tol``.  Objects exposing ``aligned_integral``
    (trajectory windows) integrate with panels aligned to their
    smoothness breaks instead.
    """
    point = np.asarray(history(0.0), dtype=float).copy()
    src = network.source_matrix
    aligned = getattr(history, "aligned_integral", None)
    for i, rxn in enumerate(network.reactions):
        tau = rxn.delay
        if tau == 0.0:
            continue
        exponents = src[i]

        def integrand(s):
            vals = np.asarray(history(s), dtype=float)
            return np.prod(vals ** exponents, axis=1)

        if aligned is not None:
            integral = float(aligned(integrand, -tau, 0.0, tol))
        else:
            integral = simpson_adaptive(integrand, -tau, 0.0, tol=tol)
        point += (rxn.rate_constant * integral) * exponents
    return point


def class_values(history: Callable, network: ReactionNetwork,
                 basis: ConservedBasis | None = None, tol: float = 1e-10) -> ClassSpec:
    """Class values c_a = a^T g(history) for every conserved vector a."""
    if basis is None:
        basis = conserved_basis(network)
    g_point = g_functional(history, network, tol=tol)
    values = tuple(float(np.dot([float(v) for v in vec], g_point)) for vec in basis.vectors)
    return ClassSpec(basis=basis, values=values, g_point=tuple(float(v) for v in g_point))


def _w_indices(network: ReactionNetwork, subset) -> tuple[int, ...]:
    indices = []
    for item in subset:
        indices.append(network.species_index(item) if isinstance(item, str) else int(item))
    out = tuple(sorted(set(indices)))
    if not out:
        raise PreconditionError("W must be a non-empty species subset")
    if out[-1] >= network.n_species:
        raise PreconditionError(f"species index {out[-1]} out of range")
    return out


def zw_dimension(network: ReactionNetwork, subset) -> int:
    """dim( S intersect {v : v_j = 0 for j in W} ), exact over rationals."""
    w = _w_indices(network, subset)
    basis = stoich_subspace_basis(network)
    if not basis:
        return 0
    restricted = [[vec[j] for j in w] for vec in basis]
    return len(basis) - ratlinalg.rank(restricted)


def _disjoint_delayed(network: ReactionNetwork, w: tuple[int, ...]) -> list[int]:
    wset = frozenset(w)
    return [
        i
        for i, rxn in enumerate(network.reactions)
        if rxn.delay > 0 and not (wset & rxn.source.support)
    ]


@dataclass(frozen=True)
class FaceFeasibility:
    nonempty: bool
    witness_point: tuple[float, ...] | None
    witness_weights: tuple[tuple[int, float], ...] | None
    margin: float


def _verify_witness_exact(network, w, spec, q, thetas, theta_idx, margin, scale):
    """Re-substitute the witness with Fraction arithmetic against the
    integer constraint data; floats enter exactly (binary rationals)."""
    n = network.n_species
    point = [Fraction(0)] * n
    free = [j for j in range(n) if j not in w]
    min_needed = Fraction(margin * scale) / 2
    for j, val in zip(free, q):
        fv = Fraction(float(val))
        if fv < min_needed:
            return False
        point[j] += fv
    for idx, theta in zip(theta_idx, thetas):
        ft = Fraction(float(theta))
        if ft < min_needed:
            return False
        for sp, coeff in network.reactions[idx].source.terms:
            point[sp] += ft * coeff
    tol = Fraction(_EQUALITY_TOL) * Fraction(float(scale))
    for vec, target in zip(spec.basis.vectors, spec.values):
        total = sum(a * p for a, p in zip(vec, point))
        if abs(total - Fraction(float(target))) > tol:
            return False
    return True


def face_nonempty(network: ReactionNetwork, subset, spec: ClassSpec,
                  margin: float = STRICT_MARGIN) -> FaceFeasibility:
    """Decide whether the face of vanishing-W states attains the class values.

    Feasibility of  p = q + sum theta_i y_i  with q = 0 on W, q strictly
    positive off W, theta_i strictly positive for every delayed reaction
    whose source avoids W (reactions without delay contribute nothing),
    and a^T p = c_a for every conserved vector a.  Strictness is handled
    by maximizing a common scaled margin; any witness is re-verified with
    exact rational arithmetic before the face is declared non-empty.
    """
    w = _w_indices(network, subset)
    free = [j for j in range(network.n_species) if j not in w]
    theta_idx = _disjoint_delayed(network, w)
    scale = 1.0 + max((abs(v) for v in spec.values), default=0.0)
    if not spec.basis.vectors:
        # The whole orthant is one class: any positive point on the face works.
        q = tuple(1.0 for _ in free)
        thetas = tuple(1.0 for _ in theta_idx)
        point = np.zeros(network.n_species)
        point[free] = 1.0
        for idx in theta_idx:
            point += network.source_matrix[idx]
        return FaceFeasibility(True, tuple(point), tuple(zip(theta_idx, thetas)), 1.0)

    n_q = len(free)
    n_t = len(theta_idx)
    n_var = n_q + n_t + 1  # q..., theta..., margin m
    objective = np.zeros(n_var)
    objective[-1] = -1.0  # maximize m
    a_mat = spec.basis.as_array()  # (p, n)
    a_eq = np.zeros((len(spec.values), n_var))
    for row, vec in enumerate(a_mat):
        a_eq[row, :n_q] = vec[free]
        for col, idx in enumerate(theta_idx):
            a_eq[row, n_q + col] = float(np.dot(vec, network.source_matrix[idx]))
    b_eq = np.array(spec.values)
    # q_j >= scale * m  and  theta_i >= scale * m  as  scale*m - var <= 0
    a_ub = np.zeros((n_q + n_t, n_var))
    for i in range(n_q + n_t):
        a_ub[i, i] = -1.0
        a_ub[i, -1] = scale
    b_ub = np.zeros(n_q + n_t)
    bounds = [(0.0, None)] * (n_q + n_t) + [(0.0, 1.0)]
    result = linprog(objective, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                     bounds=bounds, method="highs")
    if result.status == 2:  # infeasible: class values unattainable on the face
        return FaceFeasibility(False, None, None, 0.0)
    if result.status != 0:
        raise NumericError(f"face feasibility LP failed: {result.message}")
    m_opt = float(result.x[-1])
    if m_opt < margin:
        # attainable only on the closure, not with all free coordinates positive
        return FaceFeasibility(False, None, None, m_opt)
    q = result.x[:n_q]
    thetas = result.x[n_q : n_q + n_t]
    if not _verify_witness_exact(network, w, spec, q, thetas, theta_idx, margin, scale):
        raise NumericError("face feasibility witness failed exact rational verification")
    point = np.zeros(network.n_species)
    point[free] = q
    for idx, theta in zip(theta_idx, thetas):
        point += theta * network.source_matrix[idx]
    return FaceFeasibility(True, tuple(point), tuple(zip(theta_idx, map(float, thetas))), m_opt)


def classify_face(network: ReactionNetwork, subset, spec: ClassSpec) -> FaceClass:
    """Empty / Facet / Vertex by emptiness plus the exact face dimension."""
    w = _w_indices(network, subset)
    zw = zw_dimension(network, w)
    feas = face_nonempty(network, w, spec)
    if not feas.nonempty:
        return FaceClass(FaceTag.EMPTY, zw)
    dim_s = len(stoich_subspace_basis(network))
    if zw == dim_s - 1:
        tag = FaceTag.FACET
    elif zw == 0:
        tag = FaceTag.VERTEX
    else:
        tag = FaceTag.OTHER
    return FaceClass(tag, zw, feas.witness_point, feas.witness_weights)
