"""Structural analysis of the undelayed network.

Linkage classes, (weak) reversibility, the stoichiometric subspace over
exact rationals, the deficiency, and exhaustive semilocking/locking set
enumeration.  Time delays play no role here: they change the dynamics,
not the network structure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import ratlinalg
from .errors import CapabilityError
from .model import Complex, ReactionNetwork

__all__ = [
    "ReactionGraph",
    "StructureReport",
    "SemilockingCatalog",
    "build_reaction_graph",
    "linkage_classes",
    "is_weakly_reversible",
    "is_reversible",
    "stoich_subspace_basis",
    "stoich_dimension",
    "deficiency",
    "is_semilocking",
    "is_locking",
    "enumerate_semilocking",
    "analyze_structure",
]

MAX_SEMILOCKING_SPECIES = 24


@dataclass(frozen=True)
class ReactionGraph:
    """Directed graph on distinct complexes; one edge per reaction."""

    nodes: tuple[Complex, ...]
    edges: tuple[tuple[int, int, int], ...]  # (source node, target node, reaction index)


@dataclass(frozen=True)
class StructureReport:
    linkage_classes: tuple[tuple[int, ...], ...]
    weakly_reversible: bool
    reversible: bool
    stoich_basis: tuple[tuple[Fraction, ...], ...]
    dim_s: int
    deficiency: int


@dataclass(frozen=True)
class SemilockingCatalog:
    """All semilocking species sets, as sorted index tuples, with locking flags."""

    sets: tuple[tuple[int, ...], ...]
    locking: tuple[bool, ...]

    def __iter__(self):
        return iter(zip(self.sets, self.locking))

    def __len__(self):
        return len(self.sets)


def build_reaction_graph(network: ReactionNetwork) -> ReactionGraph:
    index = network.complex_index
    edges = tuple(
        (index[rxn.source], index[rxn.target], i) for i, rxn in enumerate(network.reactions)
    )
    return ReactionGraph(network.complexes, edges)


def linkage_classes(graph: ReactionGraph) -> tuple[tuple[int, ...], ...]:
    """Connected components of the undirected graph, ordered by smallest node."""
    n = len(graph.nodes)
    adjacency: list[set[int]] = [set() for _ in range(n)]
    for src, tgt, _ in graph.edges:
        adjacency[src].add(tgt)
        adjacency[tgt].add(src)
    seen: set[int] = set()
    classes: list[tuple[int, ...]] = []
    for start in range(n):
        if start in seen:
            continue
        stack, comp = [start], set()
        while stack:
            node = stack.pop()
            if node in comp:
                continue
            comp.add(node)
            stack.extend(adjacency[node] - comp)
        seen |= comp
        classes.append(tuple(sorted(comp)))
    return tuple(classes)


def _reachable(adjacency: list[set[int]], start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for nxt in adjacency[node]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def is_weakly_reversible(graph: ReactionGraph) -> bool:
    """True when every linkage class is strongly connected."""
    n = len(graph.nodes)
    fwd: list[set[int]] = [set() for _ in range(n)]
    back: list[set[int]] = [set() for _ in range(n)]
    for src, tgt, _ in graph.edges:
        fwd[src].add(tgt)
        back[tgt].add(src)
    for comp in linkage_classes(graph):
        members = set(comp)
        start = comp[0]
        if not (members <= _reachable(fwd, start) and members <= _reachable(back, start)):
            return False
    return True


def is_reversible(network: ReactionNetwork) -> bool:
    pairs = {(rxn.source, rxn.target) for rxn in network.reactions}
    return all((tgt, src) in pairs for src, tgt in pairs)


def _reaction_vector_rows(network: ReactionNetwork) -> ratlinalg.Matrix:
    rows = []
    n = network.n_species
    for rxn in network.reactions:
        row = [Fraction(0)] * n
        for idx, coeff in rxn.target.terms:
            row[idx] += coeff
        for idx, coeff in rxn.source.terms:
            row[idx] -= coeff
        rows.append(row)
    return rows


def stoich_subspace_basis(network: ReactionNetwork) -> tuple[tuple[Fraction, ...], ...]:
    """Exact-rational basis (canonical RREF rows) of span{y' - y}."""
    return ratlinalg.row_basis(_reaction_vector_rows(network))


def stoich_dimension(network: ReactionNetwork) -> int:
    return len(stoich_subspace_basis(network))


def deficiency(network: ReactionNetwork) -> int:
    graph = build_reaction_graph(network)
    value = len(graph.nodes) - len(linkage_classes(graph)) - stoich_dimension(network)
    assert value >= 0, "deficiency must be non-negative for a valid network"
    return value


def _support_masks(network: ReactionNetwork) -> tuple[list[int], list[int]]:
    src_masks, tgt_masks = [], []
    for rxn in network.reactions:
        src_masks.append(sum(1 << idx for idx in rxn.source.support))
        tgt_masks.append(sum(1 << idx for idx in rxn.target.support))
    return src_masks, tgt_masks


def is_semilocking(network: ReactionNetwork, indices) -> bool:
    """Definition-level check: producing a W species requires consuming one."""
    w = frozenset(indices)
    if not w:
        return False
    for rxn in network.reactions:
        if w & rxn.target.support and not (w & rxn.source.support):
            return False
    return True


def is_locking(network: ReactionNetwork, indices) -> bool:
    w = frozenset(indices)
    return bool(w) and all(w & rxn.source.support for rxn in network.reactions)


def enumerate_semilocking(network: ReactionNetwork, minimal_only: bool = False) -> SemilockingCatalog:
    """Exhaustive scan of the 2^n - 1 non-empty species subsets.

    Subsets failing the semilocking implication for some reaction are
    discarded as soon as that reaction is seen.  Capped at
    ``MAX_SEMILOCKING_SPECIES`` species; larger networks get a capability
    error rather than an open-ended run.
    """
    n = network.n_species
    if n > MAX_SEMILOCKING_SPECIES:
        raise CapabilityError(
            f"semilocking enumeration is exhaustive and capped at "
            f"{MAX_SEMILOCKING_SPECIES} species (network has {n})"
        )
    src_masks, tgt_masks = _support_masks(network)
    pairs = list(zip(src_masks, tgt_masks))
    sets: list[tuple[int, ...]] = []
    locking_flags: list[bool] = []
    for mask in range(1, 1 << n):
        ok = True
        locking = True
        for src, tgt in pairs:
            if mask & src:
                continue
            locking = False
            if mask & tgt:
                ok = False
                break
        if not ok:
            continue
        sets.append(tuple(j for j in range(n) if mask >> j & 1))
        locking_flags.append(locking)
    if minimal_only:
        keep = []
        as_sets = [frozenset(s) for s in sets]
        for i, w in enumerate(as_sets):
            if not any(other < w for other in as_sets):
                keep.append(i)
        sets = [sets[i] for i in keep]
        locking_flags = [locking_flags[i] for i in keep]
    return SemilockingCatalog(tuple(sets), tuple(locking_flags))


def analyze_structure(network: ReactionNetwork) -> StructureReport:
    graph = build_reaction_graph(network)
    classes = linkage_classes(graph)
    basis = stoich_subspace_basis(network)
    dim_s = len(basis)
    return StructureReport(
        linkage_classes=classes,
        weakly_reversible=is_weakly_reversible(graph),
        reversible=is_reversible(network),
        stoich_basis=basis,
        dim_s=dim_s,
        deficiency=len(graph.nodes) - len(classes) - dim_s,
    )
