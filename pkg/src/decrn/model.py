"""Core network model: species, complexes, reactions and mass-action rates.

Concentration vectors follow species declaration order throughout the
package.  Model objects are immutable and hashable, so they can be shared
across threads and used as dictionary keys without copying.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Iterable, Mapping

import numpy as np

__all__ = [
    "Complex",
    "Reaction",
    "ReactionNetwork",
    "mass_action_rate",
    "reaction_rates",
    "undelayed_drift",
    "delayed_drift",
]


@dataclass(frozen=True)
class Complex:
    """Sparse non-negative integer combination of species.

    ``terms`` holds ``(species_index, coefficient)`` pairs with coefficient
    > 0, sorted by index; the empty tuple is the zero complex.  Equality is
    exact coefficient-map equality.
    """

    terms: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        last = -1
        for idx, coeff in self.terms:
            if idx <= last:
                raise ValueError("complex terms must be strictly sorted by species index")
            if coeff <= 0:
                raise ValueError("stored stoichiometric coefficients must be positive")
            last = idx

    @classmethod
    def from_coeffs(cls, coeffs: Mapping[int, int] | Iterable[tuple[int, int]]) -> "Complex":
        merged: dict[int, int] = {}
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for idx, coeff in items:
            merged[int(idx)] = merged.get(int(idx), 0) + int(coeff)
        return cls(tuple(sorted((i, c) for i, c in merged.items() if c)))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def support(self) -> frozenset[int]:
        return frozenset(idx for idx, _ in self.terms)

    def coefficient(self, index: int) -> int:
        for idx, coeff in self.terms:
            if idx == index:
                return coeff
        return 0

    def vector(self, n_species: int) -> np.ndarray:
        vec = np.zeros(n_species)
        for idx, coeff in self.terms:
            vec[idx] = coeff
        return vec

    def format(self, names: tuple[str, ...]) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for idx, coeff in self.terms:
            parts.append(names[idx] if coeff == 1 else f"{coeff} {names[idx]}")
        return " + ".join(parts)


@dataclass(frozen=True)
class Reaction:
    """One directed reaction source -> target with rate constant and delay."""

    source: Complex
    target: Complex
    rate_constant: float
    delay: float = 0.0

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError("reaction source and target complexes must differ")
        if not (self.rate_constant > 0 and np.isfinite(self.rate_constant)):
            raise ValueError("rate constant must be positive and finite")
        if not (self.delay >= 0 and np.isfinite(self.delay)):
            raise ValueError("delay must be non-negative and finite")


@dataclass(frozen=True)
class ReactionNetwork:
    """A mass-action network: ordered species and ordered reactions."""

    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]

    def __post_init__(self):
        if len(set(self.species)) != len(self.species):
            raise ValueError("species names must be unique")
        if not self.reactions:
            raise ValueError("a network needs at least one reaction")
        n = len(self.species)
        covered: set[int] = set()
        for rxn in self.reactions:
            for cplx in (rxn.source, rxn.target):
                for idx, _ in cplx.terms:
                    if idx >= n:
                        raise ValueError(f"complex refers to species index {idx} >= {n}")
                covered |= cplx.support
        missing = [self.species[j] for j in range(n) if j not in covered]
        if missing:
            raise ValueError(f"species never appear in any complex: {', '.join(missing)}")

    # -- derived, cached views -------------------------------------------------

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    def species_index(self, name: str) -> int:
        try:
            return self.species.index(name)
        except ValueError:
            raise KeyError(f"unknown species {name!r}") from None

    @cached_property
    def source_matrix(self) -> np.ndarray:
        """(r, n) matrix of source-complex coefficients (read-only)."""
        mat = np.array([rxn.source.vector(self.n_species) for rxn in self.reactions])
        mat.setflags(write=False)
        return mat

    @cached_property
    def target_matrix(self) -> np.ndarray:
        mat = np.array([rxn.target.vector(self.n_species) for rxn in self.reactions])
        mat.setflags(write=False)
        return mat

    @cached_property
    def rate_constants(self) -> np.ndarray:
        arr = np.array([rxn.rate_constant for rxn in self.reactions])
        arr.setflags(write=False)
        return arr

    @cached_property
    def delays(self) -> np.ndarray:
        arr = np.array([rxn.delay for rxn in self.reactions])
        arr.setflags(write=False)
        return arr

    @property
    def tau_max(self) -> float:
        return float(self.delays.max()) if self.n_reactions else 0.0

    @cached_property
    def complexes(self) -> tuple[Complex, ...]:
        """Distinct complexes in first-appearance order (source, then target)."""
        seen: dict[Complex, None] = {}
        for rxn in self.reactions:
            seen.setdefault(rxn.source)
            seen.setdefault(rxn.target)
        return tuple(seen)

    @cached_property
    def complex_index(self) -> dict[Complex, int]:
        return {cplx: i for i, cplx in enumerate(self.complexes)}

    def reaction_vectors(self) -> np.ndarray:
        return self.target_matrix - self.source_matrix

    def with_delays(self, delays: Iterable[float]) -> "ReactionNetwork":
        delays = tuple(float(d) for d in delays)
        if len(delays) != self.n_reactions:
            raise ValueError("need one delay per reaction")
        rxns = tuple(replace(rxn, delay=d) for rxn, d in zip(self.reactions, delays))
        return ReactionNetwork(self.species, rxns)

    def with_rate_constants(self, rates: Iterable[float]) -> "ReactionNetwork":
        rates = tuple(float(k) for k in rates)
        if len(rates) != self.n_reactions:
            raise ValueError("need one rate constant per reaction")
        rxns = tuple(replace(rxn, rate_constant=k) for rxn, k in zip(self.reactions, rates))
        return ReactionNetwork(self.species, rxns)


def mass_action_rate(x: Iterable[float], reaction: Reaction) -> float:
    """Power-law rate k * prod_j x_j^{y_j} with the 0^0 = 1 convention."""
    x = np.asarray(x, dtype=float)
    rate = reaction.rate_constant
    for idx, coeff in reaction.source.terms:
        rate *= x[idx] ** coeff
    return float(rate)


def reaction_rates(network: ReactionNetwork, x: np.ndarray) -> np.ndarray:
    """All r mass-action rates at state x, in reaction order."""
    x = np.asarray(x, dtype=float)
    return network.rate_constants * np.prod(x[None, :] ** network.source_matrix, axis=1)


def undelayed_drift(network: ReactionNetwork, x: np.ndarray) -> np.ndarray:
    """Mass-action drift sum_i k_i x^{y_i} (y'_i - y_i)."""
    rates = reaction_rates(network, x)
    return network.target_matrix.T @ rates - network.source_matrix.T @ rates


def delayed_drift(network: ReactionNetwork, lookup: Callable[[float], np.ndarray]) -> np.ndarray:
    """Delayed mass-action drift at one instant.

    ``lookup(s)`` must return the state s time units in the past, for every
    s in [0, tau_max]; the result is
    sum_i k_i [ x(t - tau_i)^{y_i} y'_i  -  x(t)^{y_i} y_i ].
    """
    x_now = np.asarray(lookup(0.0), dtype=float)
    src = network.source_matrix
    delayed = np.empty_like(src)
    for i, tau in enumerate(network.delays):
        delayed[i] = x_now if tau == 0.0 else np.asarray(lookup(float(tau)), dtype=float)
    k = network.rate_constants
    rates_delayed = k * np.prod(delayed ** src, axis=1)
    rates_now = k * np.prod(x_now[None, :] ** src, axis=1)
    return network.target_matrix.T @ rates_delayed - src.T @ rates_now
