"""Network moves that preserve nondegenerate multistationarity, and embedded networks.

A :class:`LiftingPlan` starts from a seed network and applies moves:

* ``add-flows``: add ``0 <-> X`` for every species;
* ``add-species Y [into I as-reactant|as-product C]...``: insert a new species
  into existing reactions (1-based index ``I``) together with ``0 <-> Y``;
* ``add-reaction SRC -> TGT``: add a reaction whose reaction vector lies in
  the stoichiometric subspace.

Plan files hold one directive per line (``#`` comments)::

    seed net1.crn
    target vegfr.crn
    add-species VR into 2 as-product 1
    add-flows
    add-reaction VR + R -> VRR

``seed``/``target`` paths are relative to the plan file.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .cst import NotCst, classify_cst, is_sequestration_network, recognize_cst, Multistationarity
from .linalg import in_column_span
from .network import (
    NetworkError,
    Reaction,
    ReactionNetwork,
    canonical_form,
    inflow,
    outflow,
)
from .parser import ParseError, SPECIES_RE, _LineParser, load_network


class InheritanceError(ValueError):
    pass


class MembershipFailed(InheritanceError):
    """Reaction vector is outside the stoichiometric subspace."""


def _flow_pair(name: str) -> list[Reaction]:
    return [outflow(name), inflow(name)]


def add_all_flows(net: ReactionNetwork) -> ReactionNetwork:
    """Add ``X -> 0`` and ``0 -> X`` for every species lacking them."""
    return net.extend(r for name in net.species for r in _flow_pair(name))


def add_species_with_flow(
    net: ReactionNetwork, name: str, insertions: Mapping[int, tuple[int, int]] | None = None
) -> ReactionNetwork:
    """Insert species ``name`` into reactions and add ``0 <-> name``.

    ``insertions`` maps a 0-based reaction index to ``(reactant coefficient,
    product coefficient)`` of the new species.
    """
    if name in net.species:
        raise InheritanceError(f"species {name!r} already exists")
    if not SPECIES_RE.fullmatch(name):
        raise InheritanceError(f"invalid species name {name!r}")
    insertions = dict(insertions or {})
    for j, (cs, ct) in insertions.items():
        if not 0 <= j < net.n_reactions:
            raise InheritanceError(f"reaction index {j} out of range")
        if cs < 0 or ct < 0:
            raise InheritanceError("insertion coefficients must be nonnegative")
    reactions = []
    for j, r in enumerate(net.reactions):
        cs, ct = insertions.get(j, (0, 0))
        if cs or ct:
            src, tgt = r.source.plus(name, cs), r.target.plus(name, ct)
            if src == tgt:
                raise InheritanceError(f"inserting {name} makes reaction {j + 1} trivial")
            r = Reaction(src, tgt, r.rate)
        reactions.append(r)
    return ReactionNetwork(reactions + _flow_pair(name))


def add_dependent_reaction(net: ReactionNetwork, reaction: Reaction) -> ReactionNetwork:
    """Append ``reaction`` if its reaction vector lies in the stoichiometric subspace."""
    unknown = [s for s in reaction.species if s not in net.species]
    if unknown:
        raise MembershipFailed(f"reaction {reaction} uses species {unknown} not in the network")
    vec = net.reaction_vector(reaction)
    gamma, _ = net.matrices()
    if gamma.cols == 0 or not in_column_span(gamma, vec):
        raise MembershipFailed(f"reaction vector of {reaction} is outside the stoichiometric subspace")
    return net.extend([reaction])


@dataclass(frozen=True)
class EmbeddingSpec:
    removed_species: frozenset[str] = frozenset()
    removed_reactions: frozenset[int] = frozenset()

    def __init__(self, removed_species: Iterable[str] = (), removed_reactions: Iterable[int] = ()):
        object.__setattr__(self, "removed_species", frozenset(removed_species))
        object.__setattr__(self, "removed_reactions", frozenset(removed_reactions))

    def is_empty(self) -> bool:
        return not self.removed_species and not self.removed_reactions


def embed_network(net: ReactionNetwork, spec: EmbeddingSpec) -> ReactionNetwork:
    """Remove reactions (0-based indices) and species, then trivial and repeated reactions."""
    bad_species = spec.removed_species - set(net.species)
    if bad_species:
        raise InheritanceError(f"unknown species {sorted(bad_species)}")
    bad_idx = [j for j in spec.removed_reactions if not 0 <= j < net.n_reactions]
    if bad_idx:
        raise InheritanceError(f"reaction indices out of range: {sorted(bad_idx)}")
    kept = []
    for j, r in enumerate(net.reactions):
        if j in spec.removed_reactions:
            continue
        src, tgt = r.source.without(spec.removed_species), r.target.without(spec.removed_species)
        if src == tgt:
            continue
        kept.append(Reaction(src, tgt, r.rate))
    return ReactionNetwork(kept)


class StepKind(enum.Enum):
    ADD_ALL_FLOWS = "add-flows"
    ADD_SPECIES_WITH_FLOW = "add-species"
    ADD_DEPENDENT_REACTION = "add-reaction"


@dataclass(frozen=True)
class LiftStep:
    kind: StepKind
    species: str | None = None
    insertions: tuple[tuple[int, int, int], ...] = ()
    reaction: Reaction | None = None
    source_line: int | None = None

    def __post_init__(self):
        if self.kind is StepKind.ADD_SPECIES_WITH_FLOW and not self.species:
            raise ValueError("add-species step needs a species name")
        if self.kind is StepKind.ADD_DEPENDENT_REACTION and self.reaction is None:
            raise ValueError("add-reaction step needs a reaction")

    @classmethod
    def add_flows(cls) -> LiftStep:
        return cls(StepKind.ADD_ALL_FLOWS)

    @classmethod
    def add_species(cls, name: str, insertions: Mapping[int, tuple[int, int]] = ()) -> LiftStep:
        items = insertions.items() if isinstance(insertions, Mapping) else insertions
        return cls(StepKind.ADD_SPECIES_WITH_FLOW, species=name, insertions=tuple((j, cs, ct) for j, (cs, ct) in items))

    @classmethod
    def add_reaction(cls, reaction: Reaction) -> LiftStep:
        return cls(StepKind.ADD_DEPENDENT_REACTION, reaction=reaction)

    def apply(self, net: ReactionNetwork) -> ReactionNetwork:
        if self.kind is StepKind.ADD_ALL_FLOWS:
            return add_all_flows(net)
        if self.kind is StepKind.ADD_SPECIES_WITH_FLOW:
            return add_species_with_flow(net, self.species, {j: (cs, ct) for j, cs, ct in self.insertions})
        return add_dependent_reaction(net, self.reaction)

    def describe(self) -> str:
        if self.kind is StepKind.ADD_ALL_FLOWS:
            return "add-flows"
        if self.kind is StepKind.ADD_SPECIES_WITH_FLOW:
            parts = [f"add-species {self.species}"]
            for j, cs, ct in self.insertions:
                if cs:
                    parts.append(f"into {j + 1} as-reactant {cs}")
                if ct:
                    parts.append(f"into {j + 1} as-product {ct}")
            return " ".join(parts)
        return f"add-reaction {self.reaction}"


@dataclass(frozen=True)
class LiftingPlan:
    seed: ReactionNetwork
    steps: tuple[LiftStep, ...]
    target: ReactionNetwork
    seed_name: str = "seed"
    target_name: str = "target"


@dataclass
class StepResult:
    index: int
    step: str
    ok: bool
    message: str = ""
    n_species: int = 0
    n_reactions: int = 0


@dataclass
class LiftReport:
    ok: bool
    steps: list[StepResult]
    final: ReactionNetwork | None
    matches_target: bool
    failed_step: int | None = None
    seed_assessment: str = ""
    seed_nondegenerate: bool = False
    conclusion: str = ""
    messages: list[str] = field(default_factory=list)


def assess_seed(net: ReactionNetwork) -> tuple[bool, str]:
    """Whether the seed is known to have multiple nondegenerate positive equilibria."""
    try:
        st = recognize_cst(net)
    except NotCst as exc:
        return False, f"seed is not a CST network ({exc.reason}); no certified multistationarity"
    verdict = classify_cst(st)
    if verdict.multistationary is not Multistationarity.YES:
        return False, f"seed CST verdict is {verdict.multistationary.value} ({verdict.rule_fired.value})"
    if verdict.nondegenerate:
        return True, f"seed is a fully open CST with nondegenerate multistationarity ({verdict.rule_fired.value})"
    if is_sequestration_network(st):
        return True, (
            f"seed is a fully open sequestration network (n={st.n} odd, m={max(st.b)}>1); "
            "multistationary with nondegenerate equilibria"
        )
    return False, f"seed is multistationary ({verdict.rule_fired.value}) but nondegeneracy is not certified"


def verify_lifting_plan(plan: LiftingPlan) -> LiftReport:
    net = plan.seed
    results: list[StepResult] = []
    for i, step in enumerate(plan.steps, start=1):
        try:
            net = step.apply(net)
        except (InheritanceError, NetworkError) as exc:
            results.append(StepResult(i, step.describe(), False, str(exc), net.n_species, net.n_reactions))
            return LiftReport(False, results, None, False, failed_step=i, messages=[f"step {i} failed: {exc}"])
        results.append(StepResult(i, step.describe(), True, "", net.n_species, net.n_reactions))
    matches = canonical_form(net) == canonical_form(plan.target)
    nondeg, assessment = assess_seed(plan.seed)
    report = LiftReport(matches, results, net, matches, None, assessment, nondeg)
    if not matches:
        ours, theirs = set(canonical_form(net)[1]), set(canonical_form(plan.target)[1])
        report.messages.append(
            f"final network differs from target: missing {sorted(theirs - ours)}, extra {sorted(ours - theirs)}"
        )
    elif nondeg:
        report.conclusion = (
            f"target inherits nondegenerate multistationarity from seed {plan.seed_name} "
            f"via {len(plan.steps)} steps"
        )
    else:
        report.conclusion = "plan is valid; no multistationarity conclusion since the seed is not certified"
    return report


# -- plan files -------------------------------------------------------------

_INSERT_RE = re.compile(r"into\s+(\d+)\s+as-(reactant|product)\s+(\d+)")


def parse_plan(text: str, base: Path | None = None, *, seed: ReactionNetwork | None = None,
               target: ReactionNetwork | None = None) -> LiftingPlan:
    base = base or Path(".")
    steps: list[LiftStep] = []
    seed_name, target_name = "seed", "target"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head in ("seed", "target"):
            if not rest:
                raise ParseError(lineno, 1, f"{head} needs a file path")
            try:
                loaded = load_network(base / rest)
            except OSError as exc:
                raise ParseError(lineno, len(head) + 2, f"cannot read {rest}: {exc}") from None
            if head == "seed":
                seed, seed_name = loaded, Path(rest).stem
            else:
                target, target_name = loaded, Path(rest).stem
        elif head == "add-flows":
            if rest:
                raise ParseError(lineno, len(head) + 2, "add-flows takes no arguments")
            steps.append(LiftStep(StepKind.ADD_ALL_FLOWS, source_line=lineno))
        elif head == "add-species":
            name, _, clauses = rest.partition(" ")
            if not SPECIES_RE.fullmatch(name):
                raise ParseError(lineno, len(head) + 2, f"invalid species name {name!r}")
            clauses = clauses.replace(",", " ")
            leftover = _INSERT_RE.sub("", clauses).strip()
            if leftover:
                raise ParseError(lineno, line.find(leftover) + 1, f"expected 'into I as-reactant|as-product C', got {leftover!r}")
            ins: dict[int, list[int]] = {}
            for m in _INSERT_RE.finditer(clauses):
                j, side, c = int(m.group(1)) - 1, m.group(2), int(m.group(3))
                if j < 0:
                    raise ParseError(lineno, 1, "reaction indices are 1-based")
                pair = ins.setdefault(j, [0, 0])
                pair[0 if side == "reactant" else 1] += c
            steps.append(LiftStep(StepKind.ADD_SPECIES_WITH_FLOW, species=name,
                                  insertions=tuple((j, cs, ct) for j, (cs, ct) in sorted(ins.items())),
                                  source_line=lineno))
        elif head == "add-reaction":
            p = _LineParser(raw.split("#", 1)[0], lineno)
            p.skip_ws()
            p.pos += len("add-reaction")
            src = p.complex()
            if p.arrow():
                raise ParseError(lineno, p.pos, "add-reaction takes one irreversible reaction")
            tgt = p.complex()
            if not p.at_end():
                raise p.error("unexpected text after reaction")
            try:
                reaction = Reaction(src, tgt)
            except NetworkError as exc:
                raise ParseError(lineno, 1, str(exc)) from None
            steps.append(LiftStep(StepKind.ADD_DEPENDENT_REACTION, reaction=reaction, source_line=lineno))
        else:
            raise ParseError(lineno, 1, f"unknown directive {head!r}")
    if seed is None:
        raise ParseError(1, 1, "plan has no seed network")
    if target is None:
        raise ParseError(1, 1, "plan has no target network")
    return LiftingPlan(seed, tuple(steps), target, seed_name, target_name)


def load_plan(path: str | Path) -> LiftingPlan:
    path = Path(path)
    return parse_plan(path.read_text(encoding="utf-8"), path.parent)
