"""Complex-balanced equilibria: global point and in-class representative.

The route is kernel-then-logs: an exact rational nullspace of the kinetic
Laplacian gives one strictly positive weight vector per linkage class
(Matrix-Tree structure); matching complex monomials to those weights is a
linear problem in log concentrations with one free offset per linkage
class, solved in least squares and verified against the balance residual.
Delays never move equilibria, so everything here is delay-independent
except the in-class selection, which matches the delayed conserved values
of a given initial history.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import ratlinalg
from .errors import NumericError, PreconditionError
from .geometry import ClassSpec, ConservedBasis, class_values, conserved_basis
from .model import Complex, ReactionNetwork, undelayed_drift
from .structure import build_reaction_graph, is_weakly_reversible, linkage_classes

__all__ = [
    "KineticLaplacian",
    "EquilibriumResult",
    "kinetic_laplacian",
    "positive_kernel",
    "complex_balance_residual",
    "solve_complex_balanced",
    "equilibrium_in_class",
]


@dataclass(frozen=True)
class KineticLaplacian:
    """Rate-weighted Laplacian over distinct complexes.

    Column z accumulates the outflow of complex z on the diagonal and the
    inflow it feeds into each product complex off the diagonal, so column
    sums vanish and A @ Psi(x) = 0 is exactly complex balance.
    """

    matrix: np.ndarray
    complexes: tuple[Complex, ...]


@dataclass(frozen=True)
class EquilibriumResult:
    point: np.ndarray
    cb_residual: float
    drift_residual: float


def kinetic_laplacian(network: ReactionNetwork) -> KineticLaplacian:
    m = len(network.complexes)
    index = network.complex_index
    mat = np.zeros((m, m))
    for rxn in network.reactions:
        s = index[rxn.source]
        t = index[rxn.target]
        mat[t, s] += rxn.rate_constant
        mat[s, s] -= rxn.rate_constant
    mat.setflags(write=False)
    return KineticLaplacian(mat, network.complexes)


def _kernel_fractions(network: ReactionNetwork) -> list[Fraction]:
    """Strictly positive kernel vector of the Laplacian, exact, per class."""
    graph = build_reaction_graph(network)
    classes = linkage_classes(graph)
    index = network.complex_index
    m = len(network.complexes)
    entries: dict[tuple[int, int], Fraction] = {}
    for rxn in network.reactions:
        s = index[rxn.source]
        t = index[rxn.target]
        k = Fraction(rxn.rate_constant)
        entries[(t, s)] = entries.get((t, s), Fraction(0)) + k
        entries[(s, s)] = entries.get((s, s), Fraction(0)) - k
    kernel = [Fraction(0)] * m
    for comp in classes:
        local = {node: i for i, node in enumerate(comp)}
        rows = [[Fraction(0)] * len(comp) for _ in comp]
        for (t, s), val in entries.items():
            if t in local and s in local:
                rows[local[t]][local[s]] += val
        basis = ratlinalg.nullspace(rows, len(comp))
        if len(basis) != 1:
            raise PreconditionError(
                "Laplacian kernel is not one-dimensional on a linkage class; "
                "the network is not weakly reversible"
            )
        vec = basis[0]
        if all(v > 0 for v in vec):
            pass
        elif all(v < 0 for v in vec):
            vec = tuple(-v for v in vec)
        else:
            raise PreconditionError(
                "Laplacian kernel vector is not strictly one-signed; "
                "the network is not weakly reversible"
            )
        for node, i in local.items():
            kernel[node] = vec[i]
    return kernel


def positive_kernel(network: ReactionNetwork) -> np.ndarray:
    """Float view of the exact per-class positive Laplacian kernel."""
    return np.array([float(v) for v in _kernel_fractions(network)])


def complex_balance_residual(network: ReactionNetwork, x: np.ndarray) -> float:
    """max over complexes of |inflow - outflow| at x."""
    x = np.asarray(x, dtype=float)
    index = network.complex_index
    balance = np.zeros(len(network.complexes))
    for rxn in network.reactions:
        rate = rxn.rate_constant * float(np.prod(x ** rxn.source.vector(network.n_species)))
        balance[index[rxn.target]] += rate
        balance[index[rxn.source]] -= rate
    return float(np.abs(balance).max())


def _conserved_projector(basis: ConservedBasis) -> np.ndarray | None:
    if not len(basis):
        return None
    cols = np.array([[float(v) for v in vec] for vec in basis.vectors]).T  # (n, p)
    q, _ = np.linalg.qr(cols)
    return q


def solve_complex_balanced(network: ReactionNetwork, tol: float = 1e-10) -> EquilibriumResult:
    """Global complex-balanced point, canonicalized and verified.

    Requires weak reversibility.  Guaranteed to succeed at deficiency
    zero; otherwise the balance residual decides, and rate constants off
    the balanced variety are reported as an error instead of an
    approximate answer.  The returned point is the class representative
    whose logarithm has no component along the conserved directions.
    """
    graph = build_reaction_graph(network)
    if not is_weakly_reversible(graph):
        raise PreconditionError("complex balance requires a weakly reversible network")
    kernel = positive_kernel(network)
    classes = linkage_classes(graph)
    m = len(network.complexes)
    n = network.n_species
    coeffs = np.array([cplx.vector(n) for cplx in network.complexes])  # (m, n)
    offsets = np.zeros((m, len(classes)))
    for col, comp in enumerate(classes):
        offsets[list(comp), col] = 1.0
    design = np.hstack([coeffs, offsets])
    rhs = np.log(kernel)
    solution = np.linalg.lstsq(design, rhs, rcond=None)[0]
    # one multiplicative refinement pass (additive in logs)
    solution += np.linalg.lstsq(design, rhs - design @ solution, rcond=None)[0]
    log_x = solution[:n]
    projector = _conserved_projector(conserved_basis(network))
    if projector is not None:
        log_x = log_x - projector @ (projector.T @ log_x)
    point = np.exp(log_x)
    residual = complex_balance_residual(network, point)
    if not np.isfinite(residual) or residual > tol:
        raise PreconditionError(
            f"not complex balanced for these rate constants (residual {residual:.3e})"
        )
    drift = float(np.abs(undelayed_drift(network, point)).max())
    return EquilibriumResult(point=point, cb_residual=residual, drift_residual=drift)


def equilibrium_in_class(
    network: ReactionNetwork,
    history=None,
    base: EquilibriumResult | None = None,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> EquilibriumResult:
    """Unique positive equilibrium sharing the class values of ``history``.

    Walks the equilibrium manifold x = exp(log xbar + u), u in S-perp, by
    damped Newton until the delayed conserved values of the constant
    history at x match those of ``history``.
    """
    if base is None:
        base = solve_complex_balanced(network, tol=tol)
    basis = conserved_basis(network)
    p = len(basis)
    if p == 0:
        return base
    if history is None:
        raise PreconditionError(
            "the network has conserved quantities; an initial history is needed "
            "to select the in-class equilibrium"
        )
    spec: ClassSpec = class_values(history, network, basis=basis)
    target = np.array(spec.values)
    a_mat = basis.as_array()  # (p, n)
    cols = np.array([[float(v) for v in vec] for vec in basis.vectors]).T
    q_cols, _ = np.linalg.qr(cols)  # (n, p), orthonormal span of S-perp
    src = network.source_matrix
    k_tau = network.rate_constants * network.delays
    log_base = np.log(base.point)

    def residual_state(beta):
        x = np.exp(log_base + q_cols @ beta)
        monomials = k_tau * np.prod(x[None, :] ** src, axis=1)  # k_i tau_i x^{y_i}
        g_point = x + src.T @ monomials
        return a_mat @ g_point - target, x, monomials

    beta = np.zeros(p)
    res, x, monomials = residual_state(beta)
    norm = float(np.abs(res).max())
    for _ in range(max_iter):
        if norm <= tol:
            cb = complex_balance_residual(network, x)
            drift = float(np.abs(undelayed_drift(network, x)).max())
            return EquilibriumResult(point=x, cb_residual=cb, drift_residual=drift)
        jac = a_mat @ (x[:, None] * q_cols + src.T @ (monomials[:, None] * (src @ q_cols)))
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"singular Jacobian in the in-class Newton solve: {exc}") from exc
        scale = 1.0
        for _ in range(30):
            new_res, new_x, new_mono = residual_state(beta + scale * step)
            new_norm = float(np.abs(new_res).max())
            if new_norm < norm:
                break
            scale *= 0.5
        beta = beta + scale * step
        res, x, monomials, norm = new_res, new_x, new_mono, new_norm
    raise NumericError(
        f"in-class equilibrium Newton did not converge in {max_iter} iterations "
        f"(residual {norm:.3e}, last iterate {np.array2string(x, precision=8)})"
    )
