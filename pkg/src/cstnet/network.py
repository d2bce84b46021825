"""Reaction networks, their integer matrices and structural invariants."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .linalg import ExactMatrix, in_column_span, nullspace, rank, rref, to_exact


class NetworkError(ValueError):
    pass


class Complex:
    """A formal nonnegative integer combination of species.

    Stored sparsely as ``{species name: coefficient}``; zero coefficients are
    dropped. The empty complex is the zero complex ``0``.
    """

    __slots__ = ("_terms", "_key")

    def __init__(self, terms: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[str, int] = {}
        for name, coeff in items:
            if not isinstance(coeff, int) or isinstance(coeff, bool):
                raise NetworkError(f"coefficient of {name!r} must be an integer, got {coeff!r}")
            if coeff < 0:
                raise NetworkError(f"negative coefficient {coeff} for {name!r}")
            merged[name] = merged.get(name, 0) + coeff
        self._terms = {k: v for k, v in merged.items() if v}
        self._key = frozenset(self._terms.items())

    @classmethod
    def of(cls, **terms: int) -> Complex:
        return cls(terms)

    @property
    def terms(self) -> dict[str, int]:
        return dict(self._terms)

    @property
    def species(self) -> tuple[str, ...]:
        return tuple(self._terms)

    def get(self, name: str) -> int:
        return self._terms.get(name, 0)

    def is_zero(self) -> bool:
        return not self._terms

    def without(self, names: Iterable[str]) -> Complex:
        names = set(names)
        return Complex({k: v for k, v in self._terms.items() if k not in names})

    def plus(self, name: str, coeff: int) -> Complex:
        return Complex(list(self._terms.items()) + [(name, coeff)])

    def __eq__(self, other) -> bool:
        return isinstance(other, Complex) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __len__(self) -> int:
        return len(self._terms)

    def __repr__(self) -> str:
        return f"Complex({self._terms})"

    def __str__(self) -> str:
        return format_complex(self)


def format_complex(c: Complex, order: Sequence[str] | None = None) -> str:
    if c.is_zero():
        return "0"
    names = [s for s in order if c.get(s)] if order is not None else list(c.species)
    return " + ".join(name if c.get(name) == 1 else f"{c.get(name)} {name}" for name in names)


@dataclass(frozen=True)
class Reaction:
    source: Complex
    target: Complex
    rate: Fraction | None = field(default=None, compare=True)

    def __post_init__(self):
        if self.source == self.target:
            raise NetworkError(f"trivial reaction {self.source} -> {self.target}")
        if self.rate is not None:
            rate = Fraction(to_exact(self.rate))
            if rate <= 0:
                raise NetworkError(f"rate constant must be positive, got {rate}")
            object.__setattr__(self, "rate", rate)

    @classmethod
    def of(cls, source: Mapping[str, int], target: Mapping[str, int], rate=None) -> Reaction:
        return cls(Complex(source), Complex(target), rate)

    @property
    def key(self) -> tuple[Complex, Complex]:
        return self.source, self.target

    @property
    def species(self) -> tuple[str, ...]:
        seen = dict.fromkeys(self.source.species)
        seen.update(dict.fromkeys(self.target.species))
        return tuple(seen)

    def reversed(self, rate=None) -> Reaction:
        return Reaction(self.target, self.source, rate)

    def with_rate(self, rate) -> Reaction:
        return Reaction(self.source, self.target, rate)

    def is_inflow(self) -> bool:
        return self.source.is_zero() and len(self.target) == 1 and next(iter(self.target.terms.values())) == 1

    def is_outflow(self) -> bool:
        return self.target.is_zero() and len(self.source) == 1 and next(iter(self.source.terms.values())) == 1

    def is_flow(self) -> bool:
        return self.is_inflow() or self.is_outflow()

    def flow_species(self) -> str | None:
        if self.is_inflow():
            return self.target.species[0]
        if self.is_outflow():
            return self.source.species[0]
        return None

    def __str__(self) -> str:
        return f"{self.source} -> {self.target}"


def inflow(name: str, rate=None) -> Reaction:
    return Reaction(Complex(), Complex({name: 1}), rate)


def outflow(name: str, rate=None) -> Reaction:
    return Reaction(Complex({name: 1}), Complex(), rate)


class ReactionNetwork:
    """An ordered list of distinct reactions.

    Species are ordered by first appearance in the reaction list (source terms
    before target terms). Repeated reactions are dropped, keeping the first.
    """

    __slots__ = ("species", "reactions", "_index", "_matrices")

    def __init__(self, reactions: Iterable[Reaction] = ()):
        kept: dict[tuple, Reaction] = {}
        for r in reactions:
            if not isinstance(r, Reaction):
                raise TypeError(f"expected Reaction, got {type(r).__name__}")
            kept.setdefault(r.key, r)
        self.reactions: tuple[Reaction, ...] = tuple(kept.values())
        species: dict[str, None] = {}
        for r in self.reactions:
            for name in r.source.species:
                species.setdefault(name)
            for name in r.target.species:
                species.setdefault(name)
        self.species: tuple[str, ...] = tuple(species)
        self._index = {s: i for i, s in enumerate(self.species)}
        self._matrices = None

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    def index(self, name: str) -> int:
        return self._index[name]

    def __len__(self) -> int:
        return len(self.reactions)

    def __iter__(self):
        return iter(self.reactions)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReactionNetwork):
            return NotImplemented
        return self.species == other.species and [
            (r.source, r.target, r.rate) for r in self.reactions
        ] == [(r.source, r.target, r.rate) for r in other.reactions]

    def __hash__(self) -> int:
        return hash((self.species, tuple((r.source, r.target, r.rate) for r in self.reactions)))

    def __repr__(self) -> str:
        return f"ReactionNetwork({self.n_species} species, {self.n_reactions} reactions)"

    def __str__(self) -> str:
        return "\n".join(
            f"{format_complex(r.source, self.species)} -> {format_complex(r.target, self.species)}"
            for r in self.reactions
        )

    def extend(self, reactions: Iterable[Reaction]) -> ReactionNetwork:
        return ReactionNetwork(list(self.reactions) + list(reactions))

    def rates(self) -> tuple[Fraction | None, ...]:
        return tuple(r.rate for r in self.reactions)

    def vector(self, c: Complex) -> tuple[int, ...]:
        return tuple(c.get(s) for s in self.species)

    def reaction_vector(self, r: Reaction) -> tuple[int, ...]:
        return tuple(r.target.get(s) - r.source.get(s) for s in self.species)

    def matrices(self) -> tuple[ExactMatrix, ExactMatrix]:
        if self._matrices is None:
            self._matrices = build_matrices(self)
        return self._matrices


def build_matrices(net: ReactionNetwork, reactions: Sequence[int] | None = None) -> tuple[ExactMatrix, ExactMatrix]:
    """Stoichiometric matrix and source matrix (species x reactions).

    ``reactions`` optionally restricts (and orders) the columns.
    """
    idx = range(net.n_reactions) if reactions is None else reactions
    n = net.n_species
    sources = [net.vector(net.reactions[j].source) for j in idx]
    targets = [net.vector(net.reactions[j].target) for j in idx]
    gamma = ExactMatrix.from_columns([tuple(t - s for s, t in zip(src, tgt)) for src, tgt in zip(sources, targets)], n)
    gamma_l = ExactMatrix.from_columns(sources, n)
    return gamma, gamma_l


def target_matrix(net: ReactionNetwork) -> ExactMatrix:
    return ExactMatrix.from_columns([net.vector(r.target) for r in net.reactions], net.n_species)


class OpennessTag(enum.Enum):
    CLOSED = "closed"
    OPEN_NO_OUTFLOWS = "open-no-outflows"
    OPEN_WITH_OUTFLOWS = "open-with-outflows"
    FULLY_OPEN = "fully-open"


@dataclass(frozen=True)
class Openness:
    tag: OpennessTag
    inflow_species: frozenset[str]
    outflow_species: frozenset[str]


def classify_openness(net: ReactionNetwork) -> Openness:
    inflows = frozenset(r.flow_species() for r in net.reactions if r.is_inflow())
    outflows = frozenset(r.flow_species() for r in net.reactions if r.is_outflow())
    everything = frozenset(net.species)
    if not inflows and not outflows:
        tag = OpennessTag.CLOSED
    elif inflows == outflows == everything:
        tag = OpennessTag.FULLY_OPEN
    elif outflows:
        tag = OpennessTag.OPEN_WITH_OUTFLOWS
    else:
        tag = OpennessTag.OPEN_NO_OUTFLOWS
    return Openness(tag, inflows, outflows)


def stoichiometric_rank(net: ReactionNetwork) -> int:
    return rank(net.matrices()[0])


def conservation_laws(net: ReactionNetwork) -> list[tuple]:
    """Basis of ``{c : c^T Gamma = 0}`` in reduced row echelon form."""
    gamma, _ = net.matrices()
    if net.n_species == 0:
        return []
    basis = nullspace(gamma.T) if gamma.cols else [
        tuple(int(i == j) for j in range(net.n_species)) for i in range(net.n_species)
    ]
    if not basis:
        return []
    reduced, pivots = rref(ExactMatrix(basis))
    return [tuple(to_exact(v) for v in reduced.row(i)) for i in range(len(pivots))]


def complexes(net: ReactionNetwork) -> list[Complex]:
    seen: dict[Complex, None] = {}
    for r in net.reactions:
        seen.setdefault(r.source)
        seen.setdefault(r.target)
    return list(seen)


def linkage_classes(net: ReactionNetwork) -> list[list[Complex]]:
    nodes = complexes(net)
    parent = {c: c for c in nodes}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for r in net.reactions:
        a, b = find(r.source), find(r.target)
        if a != b:
            parent[b] = a
    groups: dict[Complex, list[Complex]] = {}
    for c in nodes:
        groups.setdefault(find(c), []).append(c)
    return list(groups.values())


def deficiency(net: ReactionNetwork) -> int:
    return len(complexes(net)) - len(linkage_classes(net)) - stoichiometric_rank(net)


def same_compatibility_class(net: ReactionNetwork, x: Sequence, y: Sequence) -> bool:
    if len(x) != net.n_species or len(y) != net.n_species:
        raise NetworkError(
            f"state vectors must have length {net.n_species}, got {len(x)} and {len(y)}"
        )
    diff = [to_exact(b) - to_exact(a) for a, b in zip(x, y)]
    gamma, _ = net.matrices()
    if gamma.cols == 0:
        return all(d == 0 for d in diff)
    return in_column_span(gamma, diff)


def non_flow_indices(net: ReactionNetwork) -> list[int]:
    return [j for j, r in enumerate(net.reactions) if not r.is_flow()]


def canonical_form(net: ReactionNetwork) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Order-free structural identity: sorted species and sorted reaction strings."""
    order = sorted(net.species)
    lines = sorted(
        f"{format_complex(r.source, order)} -> {format_complex(r.target, order)}" for r in net.reactions
    )
    return tuple(order), tuple(lines)


def structurally_equal(a: ReactionNetwork, b: ReactionNetwork) -> bool:
    return canonical_form(a) == canonical_form(b)
