"""Persistence and stability certificates.

A complex-balanced delayed mass-action system is persistent when, for
every semilocking species set W, the boundary face of vanishing-W states
is empty, a facet, or a vertex of the compatibility class; any
two-dimensional stoichiometric subspace certifies on its own.  These are
sufficient conditions only, so the verdict is Persistent or Inconclusive,
never a claim of non-persistence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibrium import EquilibriumResult, equilibrium_in_class, solve_complex_balanced
from .errors import PreconditionError
from .geometry import ClassSpec, ConservedBasis, FaceClass, FaceTag, class_values, classify_face, conserved_basis, zw_dimension
from .model import ReactionNetwork
from .structure import analyze_structure, enumerate_semilocking

__all__ = [
    "FaceReport",
    "PersistenceCertificate",
    "StabilityStatement",
    "LemmaReport",
    "certify",
    "stability_statement",
    "lemma_checks",
]

ROUTE_FACES = "FaceClassification"
ROUTE_2D = "TwoDimCorollary"


@dataclass(frozen=True)
class FaceReport:
    indices: tuple[int, ...]
    species: tuple[str, ...]
    locking: bool
    face: FaceClass


@dataclass(frozen=True)
class PersistenceCertificate:
    verdict: str  # "Persistent" | "Inconclusive"
    route: str | None
    routes: tuple[str, ...]
    per_w: tuple[FaceReport, ...]
    weakly_reversible: bool
    deficiency: int
    dim_s: int
    cb_residual: float | None
    notes: tuple[str, ...]


@dataclass(frozen=True)
class StabilityStatement:
    equilibrium: EquilibriumResult
    claim: str
    route: str


@dataclass(frozen=True)
class LemmaReport:
    checked: int
    vertex_like: int
    violations: tuple[tuple[str, ...], ...]

    @property
    def consistent(self) -> bool:
        return not self.violations


def certify(network: ReactionNetwork, history=None) -> PersistenceCertificate:
    """Assemble the persistence certificate for one network and history.

    Complex balance is verified numerically first; without it no route
    applies and the verdict is Inconclusive with the reason recorded.
    Face classification needs the class values of the history whenever
    conserved quantities exist.
    """
    report = analyze_structure(network)
    notes: list[str] = []
    try:
        balanced = solve_complex_balanced(network)
    except PreconditionError as exc:
        return PersistenceCertificate(
            verdict="Inconclusive",
            route=None,
            routes=(),
            per_w=(),
            weakly_reversible=report.weakly_reversible,
            deficiency=report.deficiency,
            dim_s=report.dim_s,
            cb_residual=None,
            notes=(f"complex balance not established: {exc}",),
        )
    basis = conserved_basis(network)
    if len(basis) and history is None:
        raise PreconditionError(
            "the network has conserved quantities; an initial history is needed "
            "to pin the compatibility class"
        )
    if len(basis):
        spec = class_values(history, network, basis=basis)
    else:
        spec = ClassSpec(basis=basis, values=(), g_point=())
    catalog = enumerate_semilocking(network)
    per_w: list[FaceReport] = []
    bad: list[str] = []
    for indices, locking in catalog:
        face = classify_face(network, indices, spec)
        names = tuple(network.species[j] for j in indices)
        per_w.append(FaceReport(indices=indices, species=names, locking=locking, face=face))
        if face.tag is FaceTag.EMPTY and face.zw_dim == 0:
            notes.append(
                f"W={{{', '.join(names)}}} is empty at the given class values; "
                "an empty face certifies persistence exactly as a vertex does"
            )
        if face.tag is FaceTag.OTHER:
            bad.append(
                f"W={{{', '.join(names)}}} has face dimension {face.zw_dim}, strictly "
                f"between 0 and dim S - 1 = {report.dim_s - 1}: outside the certified cases"
            )
    routes: list[str] = []
    if not bad:
        routes.append(ROUTE_FACES)
    else:
        notes.extend(bad)
    if report.dim_s == 2:
        routes.append(ROUTE_2D)
    return PersistenceCertificate(
        verdict="Persistent" if routes else "Inconclusive",
        route=routes[0] if routes else None,
        routes=tuple(routes),
        per_w=tuple(per_w),
        weakly_reversible=report.weakly_reversible,
        deficiency=report.deficiency,
        dim_s=report.dim_s,
        cb_residual=balanced.cb_residual,
        notes=tuple(notes),
    )


def stability_statement(network: ReactionNetwork, history,
                        certificate: PersistenceCertificate) -> StabilityStatement:
    """Global-stability claim for the in-class equilibrium; persistence-gated."""
    if certificate.verdict != "Persistent":
        raise PreconditionError("the certificate does not establish persistence")
    equilibrium = equilibrium_in_class(network, history)
    return StabilityStatement(
        equilibrium=equilibrium,
        claim=(
            "the in-class positive equilibrium is globally asymptotically stable "
            "with respect to all positive initial data in its compatibility class"
        ),
        route=certificate.route,
    )


def lemma_checks(network: ReactionNetwork) -> LemmaReport:
    """Internal consistency: a zero-dimensional face forces a locking set.

    A violation would falsify the face-dimension computation or the
    semilocking enumeration, so this doubles as a self-check on randomly
    generated networks.
    """
    catalog = enumerate_semilocking(network)
    violations: list[tuple[str, ...]] = []
    vertex_like = 0
    for indices, locking in catalog:
        if zw_dimension(network, indices) == 0:
            vertex_like += 1
            if not locking:
                violations.append(tuple(network.species[j] for j in indices))
    return LemmaReport(checked=len(catalog), vertex_like=vertex_like,
                       violations=tuple(violations))
