"""Cyclic sequestration-transmutation (CST) networks.

Reaction ``R_i`` links ``X_i`` to ``X_{i+1}`` (indices mod ``n``) and is either
a sequestration ``a_i X_i + b_{i+1} X_{i+1} -> 0`` or a transmutation
``a_i X_i -> b_{i+1} X_{i+1}``. Arrays here are 0-based: ``a[i]`` is the
coefficient of ``X_i`` in ``R_i`` and ``b[i]`` the coefficient of ``X_i`` in
``R_{i-1}``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

from .network import (
    Complex,
    Openness,
    OpennessTag,
    Reaction,
    ReactionNetwork,
    classify_openness,
    inflow,
    outflow,
)


class Kind(enum.Enum):
    SEQUESTRATION = "S"
    TRANSMUTATION = "T"


S, T = Kind.SEQUESTRATION, Kind.TRANSMUTATION


class NotCst(ValueError):
    """The network is not a CST network; ``reason`` says why."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


@dataclass(frozen=True)
class CstStructure:
    species: tuple[str, ...]
    kinds: tuple[Kind, ...]
    a: tuple[int, ...]
    b: tuple[int, ...]
    openness: Openness
    network: ReactionNetwork | None = None
    reaction_index: tuple[int, ...] = ()

    def __post_init__(self):
        n = len(self.species)
        if n < 2:
            raise NotCst("a CST cycle needs at least two species")
        if not (len(self.kinds) == len(self.a) == len(self.b) == n):
            raise ValueError("kinds, a and b must each have one entry per species")
        if min(self.a) < 1 or min(self.b) < 1:
            raise ValueError("CST coefficients must be positive")

    @property
    def n(self) -> int:
        return len(self.species)

    @property
    def s(self) -> int:
        return sum(k is S for k in self.kinds)

    @property
    def t(self) -> int:
        return sum(k is T for k in self.kinds)

    @property
    def prod_a(self) -> int:
        return math.prod(self.a)

    @property
    def prod_b(self) -> int:
        return math.prod(self.b)

    def rotated(self, k: int) -> CstStructure:
        """Same cycle started at position ``k``."""
        k %= self.n

        def rot(seq):
            return tuple(seq[k:]) + tuple(seq[:k])

        return replace(
            self,
            species=rot(self.species),
            kinds=rot(self.kinds),
            a=rot(self.a),
            b=rot(self.b),
            reaction_index=rot(self.reaction_index) if self.reaction_index else (),
        )

    def reaction(self, i: int) -> Reaction:
        j = (i + 1) % self.n
        x, y = self.species[i], self.species[j]
        if self.kinds[i] is S:
            return Reaction(Complex({x: self.a[i], y: self.b[j]}), Complex())
        return Reaction(Complex({x: self.a[i]}), Complex({y: self.b[j]}))


def cst_reactions(species: Sequence[str], kinds: Sequence[Kind], a: Sequence[int], b: Sequence[int]) -> list[Reaction]:
    n = len(species)
    out = []
    for i in range(n):
        j = (i + 1) % n
        x, y = species[i], species[j]
        if kinds[i] is S:
            out.append(Reaction(Complex({x: a[i], y: b[j]}), Complex()))
        else:
            out.append(Reaction(Complex({x: a[i]}), Complex({y: b[j]})))
    return out


def cst_network(
    kinds: Sequence[Kind | str],
    a: Sequence[int],
    b: Sequence[int],
    *,
    inflows: Sequence[int] | str = (),
    outflows: Sequence[int] | str = (),
    species: Sequence[str] | None = None,
) -> ReactionNetwork:
    """Assemble a CST network; ``inflows``/``outflows`` are cycle positions or ``"all"``."""
    n = len(kinds)
    kinds = [k if isinstance(k, Kind) else Kind(k) for k in kinds]
    species = list(species) if species is not None else [f"X{i + 1}" for i in range(n)]
    if inflows == "all":
        inflows = range(n)
    if outflows == "all":
        outflows = range(n)
    reactions = cst_reactions(species, kinds, a, b)
    for i in range(n):
        if i in outflows:
            reactions.append(outflow(species[i]))
        if i in inflows:
            reactions.append(inflow(species[i]))
    return ReactionNetwork(reactions)


def fully_open(st_or_net) -> ReactionNetwork:
    from .inheritance import add_all_flows

    net = st_or_net.network if isinstance(st_or_net, CstStructure) else st_or_net
    return add_all_flows(net)


def _shape(r: Reaction) -> tuple[Kind, str, int, str, int] | None:
    """Classify a reaction as ``(kind, X, a, Y, b)`` or None."""
    src, tgt = r.source.terms, r.target.terms
    if not tgt and len(src) == 2:
        (x, a), (y, b) = src.items()
        return S, x, a, y, b
    if len(src) == 1 and len(tgt) == 1:
        (x, a), = src.items()
        (y, b), = tgt.items()
        if x != y:
            return T, x, a, y, b
    return None


def recognize_cst(net: ReactionNetwork) -> CstStructure:
    """Extract the CST cycle of ``net`` or raise :class:`NotCst`.

    The cycle starts at the lexicographically smallest species. When every
    reaction is a sequestration the direction is towards the smaller
    neighbour (ties: lower reaction index first).
    """
    core = [j for j, r in enumerate(net.reactions) if not r.is_flow()]
    shapes = {}
    for j in core:
        sh = _shape(net.reactions[j])
        if sh is None:
            raise NotCst(f"reaction {net.reactions[j]} is neither a sequestration nor a transmutation")
        shapes[j] = sh
    cycle_species = {name for j in core for name in (shapes[j][1], shapes[j][3])}
    flow_only = [s for s in net.species if s not in cycle_species]
    if flow_only:
        raise NotCst(f"species {flow_only} appear only in flow reactions")
    n = len(cycle_species)
    if n < 2:
        raise NotCst("a CST cycle needs at least two species")
    if len(core) != n:
        raise NotCst(f"{len(core)} non-flow reactions on {n} species; a CST has one per species")
    incident: dict[str, list[int]] = {s: [] for s in cycle_species}
    for j in core:
        incident[shapes[j][1]].append(j)
        incident[shapes[j][3]].append(j)
    for name, js in incident.items():
        if len(js) != 2:
            raise NotCst(f"species {name} takes part in {len(js)} non-flow reactions, not 2")

    start = min(cycle_species)
    candidates = []
    for first in sorted(incident[start]):
        walk = _walk(start, first, incident, shapes, n)
        if walk is not None:
            candidates.append(walk)
    if not candidates:
        raise NotCst("reaction graph is not a single consistently oriented cycle")
    if len(candidates) > 1:
        # all sequestrations: go towards the smaller neighbour
        candidates.sort(key=lambda w: (w[0][1], w[1][0]))
    order, reactions = candidates[0]

    kinds, a, b = [], [0] * n, [0] * n
    for i, j in enumerate(reactions):
        kind, x, ca, y, cb = shapes[j]
        if kind is S and x != order[i]:
            x, ca, y, cb = y, cb, x, ca
        kinds.append(kind)
        a[i] = ca
        b[(i + 1) % n] = cb
    return CstStructure(tuple(order), tuple(kinds), tuple(a), tuple(b), classify_openness(net), net, tuple(reactions))


def _walk(start, first, incident, shapes, n):
    order, used = [start], [first]
    current, j = start, first
    for step in range(n):
        kind, x, _, y, _ = shapes[j]
        if kind is T and x != current:
            return None
        nxt = y if x == current else x
        if step == n - 1:
            return (order, used) if nxt == start and len(set(used)) == n else None
        if nxt in order:
            return None
        order.append(nxt)
        others = [k for k in incident[nxt] if k != j]
        if len(others) != 1:
            return None
        j = others[0]
        used.append(j)
        current = nxt
    return None


class Multistationarity(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"
    NOT_APPLICABLE = "not-applicable"


class Rule(str, enum.Enum):
    """Which closed-form criterion decided a verdict."""

    CLOSED_OR_INFLOW_ONLY = "closed-or-inflow-only"
    INJECTIVE_WITH_OUTFLOWS = "injective-with-outflows"
    NON_INJECTIVE_PARTIALLY_OPEN = "non-injective-partially-open"
    SEQUESTRATION_PRESENT = "non-injective-with-sequestration"
    NONLINEAR_TRANSMUTATION = "non-injective-nonlinear-transmutation"
    LINEAR_TRANSMUTATION = "non-injective-linear-transmutation"


@dataclass(frozen=True)
class CstVerdict:
    injective_mass_action: bool
    injective_general: bool
    multistationary: Multistationarity
    rule_fired: Rule
    nondegenerate: bool | None = None

    def __post_init__(self):
        if self.multistationary is Multistationarity.YES and self.injective_mass_action:
            raise ValueError("an injective network cannot be multistationary")


def general_kinetics_fails(n: int, s: int, prod_a: int, prod_b: int) -> bool:
    """All-sequestration even cycles with unbalanced products lose general-kinetics injectivity."""
    return s == n and n % 2 == 0 and prod_a != prod_b


def outflow_injective(n: int, s: int, prod_a: int, prod_b: int) -> bool:
    return s == n or s % 2 == 1 or prod_a >= prod_b


def classify_params(
    n: int, s: int, prod_a: int, prod_b: int, any_a_above_one: bool, tag: OpennessTag
) -> CstVerdict:
    """Verdict from the cycle's summary parameters alone."""
    if tag in (OpennessTag.CLOSED, OpennessTag.OPEN_NO_OUTFLOWS):
        # inflows lift the rank to n, so a singular cycle (s even, prod a = prod b)
        # leaves no nonzero minor product and injectivity fails
        inj = tag is OpennessTag.CLOSED or s % 2 == 1 or prod_a != prod_b
        return CstVerdict(
            inj,
            inj and not general_kinetics_fails(n, s, prod_a, prod_b),
            Multistationarity.NOT_APPLICABLE,
            Rule.CLOSED_OR_INFLOW_ONLY,
        )
    inj = outflow_injective(n, s, prod_a, prod_b)
    # with outflows, general kinetics only adds the all-sequestration even case
    inj_general = inj and not general_kinetics_fails(n, s, prod_a, prod_b)
    if inj:
        return CstVerdict(True, inj_general, Multistationarity.NO, Rule.INJECTIVE_WITH_OUTFLOWS)
    if tag is OpennessTag.OPEN_WITH_OUTFLOWS:
        return CstVerdict(False, False, Multistationarity.UNKNOWN, Rule.NON_INJECTIVE_PARTIALLY_OPEN)
    if s > 0:
        return CstVerdict(False, False, Multistationarity.YES, Rule.SEQUESTRATION_PRESENT)
    if any_a_above_one:
        return CstVerdict(False, False, Multistationarity.YES, Rule.NONLINEAR_TRANSMUTATION, nondegenerate=True)
    return CstVerdict(False, False, Multistationarity.NO, Rule.LINEAR_TRANSMUTATION)


def classify_cst(st: CstStructure) -> CstVerdict:
    return classify_params(st.n, st.s, st.prod_a, st.prod_b, max(st.a) > 1, st.openness.tag)


def is_sequestration_network(st: CstStructure) -> bool:
    """One transmutation ``X -> m Y`` and unit-coefficient sequestrations elsewhere."""
    if st.t != 1 or any(x != 1 for x in st.a):
        return False
    i = st.kinds.index(T)
    return all(st.b[j] == 1 for j in range(st.n) if j != (i + 1) % st.n)
