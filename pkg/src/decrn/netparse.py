"""Plain-text reaction network format (``.crn``): parser and formatter.

Grammar, one statement per line::

    line     ::= reaction | "species" name+ | comment | blank
    reaction ::= side arrow side ";" "k" "=" num ("," num)?
                 (";" "tau" "=" num ("," num)?)?
    side     ::= term ("+" term)* | "0"
    term     ::= [int] name
    arrow    ::= "->" | "<->"

Everything after ``#`` is a comment.  Whitespace is insignificant except
inside names.  A missing ``tau`` clause means zero delay.  A reversible
arrow ``<->`` takes two comma-separated rate constants (and delays), the
forward direction first, and expands to two reactions with the forward one
emitted first.  ``parse_network(format_network(n)) == n`` for every valid
network.
"""

from __future__ import annotations

import re

from .errors import CrnParseError
from .model import Complex, Reaction, ReactionNetwork

__all__ = ["parse_network", "format_network"]

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE = re.compile(r"\d+")
_NUM_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


class _Scanner:
    """Single-line cursor with 1-based column reporting."""

    def __init__(self, text: str, lineno: int):
        self.text = text
        self.lineno = lineno
        self.pos = 0

    @property
    def column(self) -> int:
        return self.pos + 1

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def fail(self, message: str) -> CrnParseError:
        return CrnParseError(message, self.lineno, self.column)

    def try_literal(self, literal: str) -> bool:
        self.skip_ws()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def expect_literal(self, literal: str) -> None:
        if not self.try_literal(literal):
            raise self.fail(f"expected {literal!r}")

    def try_regex(self, pattern: re.Pattern) -> str | None:
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if m is None:
            return None
        self.pos = m.end()
        return m.group(0)


def _parse_side(scanner: _Scanner, species_order: list[str], species_index: dict[str, int]) -> Complex:
    coeffs: dict[int, int] = {}
    while True:
        scanner.skip_ws()
        col = scanner.column
        coeff_text = scanner.try_regex(_INT_RE)
        name = scanner.try_regex(_NAME_RE)
        if coeff_text is not None and name is None:
            if int(coeff_text) == 0 and not coeffs:
                # bare "0": the zero complex, must stand alone
                scanner.skip_ws()
                return Complex()
            scanner.pos = col - 1
            raise scanner.fail("expected a species name after the coefficient")
        if name is None:
            raise scanner.fail("expected a species term")
        coeff = int(coeff_text) if coeff_text is not None else 1
        if coeff == 0:
            raise CrnParseError("zero coefficients are not allowed in a term", scanner.lineno, col)
        if name not in species_index:
            species_index[name] = len(species_order)
            species_order.append(name)
        idx = species_index[name]
        coeffs[idx] = coeffs.get(idx, 0) + coeff
        if not scanner.try_literal("+"):
            return Complex.from_coeffs(coeffs)


def _parse_clause(scanner: _Scanner, key: str) -> tuple[list[float], int]:
    scanner.skip_ws()
    col = scanner.column
    name = scanner.try_regex(_NAME_RE)
    if name != key:
        raise CrnParseError(f"expected a '{key}=' clause", scanner.lineno, col)
    scanner.expect_literal("=")
    values: list[float] = []
    while True:
        scanner.skip_ws()
        vcol = scanner.column
        num = scanner.try_regex(_NUM_RE)
        if num is None:
            raise CrnParseError(f"expected a number in the '{key}' clause", scanner.lineno, vcol)
        values.append(float(num))
        if not scanner.try_literal(","):
            break
    return values, col


def _parse_reaction_line(
    scanner: _Scanner, species_order: list[str], species_index: dict[str, int]
) -> list[Reaction]:
    source = _parse_side(scanner, species_order, species_index)
    scanner.skip_ws()
    arrow_col = scanner.column
    if scanner.try_literal("<->"):
        reversible = True
    elif scanner.try_literal("->"):
        reversible = False
    else:
        raise scanner.fail("expected '->' or '<->'")
    target = _parse_side(scanner, species_order, species_index)
    scanner.expect_literal(";")
    n_dir = 2 if reversible else 1
    ks, k_col = _parse_clause(scanner, "k")
    if len(ks) != n_dir:
        raise CrnParseError(
            f"'{'<->' if reversible else '->'}' needs {n_dir} rate constant(s), got {len(ks)}",
            scanner.lineno,
            k_col,
        )
    taus = [0.0] * n_dir
    if scanner.try_literal(";"):
        taus, tau_col = _parse_clause(scanner, "tau")
        if len(taus) != n_dir:
            raise CrnParseError(
                f"'{'<->' if reversible else '->'}' needs {n_dir} delay(s), got {len(taus)}",
                scanner.lineno,
                tau_col,
            )
    else:
        tau_col = k_col
    if not scanner.at_end():
        raise scanner.fail("unexpected trailing text")
    for k in ks:
        if k <= 0:
            raise CrnParseError("rate constants must be positive", scanner.lineno, k_col)
    for tau in taus:
        if tau < 0:
            raise CrnParseError("delays must be non-negative", scanner.lineno, tau_col)
    if source == target:
        raise CrnParseError("reaction source and target complexes are equal", scanner.lineno, arrow_col)
    pairs = [(source, target, ks[0], taus[0])]
    if reversible:
        pairs.append((target, source, ks[1], taus[1]))
    return [Reaction(src, tgt, k, tau) for src, tgt, k, tau in pairs]


def parse_network(text: str) -> ReactionNetwork:
    """Parse ``.crn`` text into a :class:`ReactionNetwork`.

    Species order is the declaration order: names listed on ``species``
    lines first, then first appearance in the reactions.  Reversible
    reactions expand into two entries, the forward direction first.
    """
    species_order: list[str] = []
    species_index: dict[str, int] = {}
    reactions: list[Reaction] = []
    declared: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        scanner = _Scanner(line, lineno)
        head = _NAME_RE.match(line.strip())
        if head is not None and head.group(0) == "species":
            if reactions:
                raise CrnParseError("species declarations must precede reactions", lineno, 1)
            scanner.try_regex(_NAME_RE)  # consume the keyword
            saw_name = False
            while not scanner.at_end():
                col = scanner.column
                name = scanner.try_regex(_NAME_RE)
                if name is None:
                    raise CrnParseError("expected a species name", lineno, col)
                if name in declared:
                    raise CrnParseError(f"duplicate species declaration {name!r}", lineno, col)
                declared.add(name)
                species_index[name] = len(species_order)
                species_order.append(name)
                saw_name = True
            if not saw_name:
                raise CrnParseError("'species' line declares no names", lineno, 1)
            continue
        reactions.extend(_parse_reaction_line(scanner, species_order, species_index))
    if not reactions:
        raise CrnParseError("no reactions found", None, None)
    try:
        return ReactionNetwork(tuple(species_order), tuple(reactions))
    except ValueError as exc:  # e.g. a declared species that never appears
        raise CrnParseError(str(exc)) from exc


def _format_number(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def format_network(network: ReactionNetwork) -> str:
    """Canonical ``.crn`` text; inverse of :func:`parse_network`.

    One line per reaction in declaration order, with ``tau`` always
    emitted.  A ``species`` header is added only when the declared order
    differs from first-appearance order.
    """
    appearance: list[str] = []
    for rxn in network.reactions:
        for cplx in (rxn.source, rxn.target):
            for idx, _ in cplx.terms:
                name = network.species[idx]
                if name not in appearance:
                    appearance.append(name)
    lines = []
    if tuple(appearance) != network.species:
        lines.append("species " + " ".join(network.species))
    for rxn in network.reactions:
        lines.append(
            f"{rxn.source.format(network.species)} -> {rxn.target.format(network.species)}"
            f" ; k={_format_number(rxn.rate_constant)} ; tau={_format_number(rxn.delay)}"
        )
    return "\n".join(lines) + "\n"
