"""Structured analysis reports and their JSON encoding (schema version 1)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Any

from .cst import CstStructure, CstVerdict, Multistationarity, NotCst, classify_cst, recognize_cst
from .injectivity import InjectivityVerdict, injective_general, injective_mass_action
from .network import ReactionNetwork, classify_openness, conservation_laws, deficiency, stoichiometric_rank
from .parser import format_reaction
from .witness import (
    DeterminantCertificate,
    TwoStateWitness,
    WitnessError,
    construct_sequestration_certificate,
    construct_transmutation_witness,
    verify_certificate,
    verify_two_state_witness,
)

SCHEMA_VERSION = 1


def q(x) -> str:
    """Exact number as a string (``"3/2"``, ``"-4"``)."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def network_dict(net: ReactionNetwork) -> dict:
    op = classify_openness(net)
    return {
        "species": list(net.species),
        "reactions": [format_reaction(net, r) for r in net.reactions],
        "n_species": net.n_species,
        "n_reactions": net.n_reactions,
        "openness": {
            "tag": op.tag.value,
            "inflow_species": sorted(op.inflow_species),
            "outflow_species": sorted(op.outflow_species),
        },
        "rank": stoichiometric_rank(net),
        "deficiency": deficiency(net),
        "conservation_laws": [[q(v) for v in law] for law in conservation_laws(net)],
    }


def structure_dict(st: CstStructure) -> dict:
    return {
        "n": st.n,
        "species": list(st.species),
        "kinds": [k.value for k in st.kinds],
        "a": list(st.a),
        "b": list(st.b),
        "s": st.s,
        "t": st.t,
        "prod_a": st.prod_a,
        "prod_b": st.prod_b,
    }


def injectivity_dict(v: InjectivityVerdict) -> dict:
    def ev(e):
        return {"rows": list(e.rows), "cols": list(e.cols), "sign": e.sign}

    return {
        "kinetics": v.kinetics.value,
        "injective": v.injective,
        "exact": v.exact,
        "rank": v.rank,
        "reason": v.reason,
        "n_nonzero_products": len(v.evidence),
        "conflict": [ev(e) for e in v.conflict] if v.conflict else None,
    }


def verdict_dict(v: CstVerdict) -> dict:
    return {
        "injective_mass_action": v.injective_mass_action,
        "injective_general": v.injective_general,
        "multistationary": v.multistationary.value,
        "rule": v.rule_fired.value,
        "nondegenerate": v.nondegenerate,
    }


def witness_dict(w: TwoStateWitness) -> dict:
    rep = verify_two_state_witness(w)
    return {
        "type": "two-state-witness",
        "reactions": [format_reaction(w.network, r) for r in w.network.reactions],
        "species": list(w.network.species),
        "rates": [q(k) for k in w.rates],
        "state_a": [q(x) for x in w.state_a],
        "state_b": [q(x) for x in w.state_b],
        "exact": w.exact,
        "verified": rep.ok,
        "nondegeneracy_factor": [q(rep.factor_a), q(rep.factor_b)],
        "failures": rep.failures,
    }


def certificate_dict(c: DeterminantCertificate) -> dict:
    return {
        "type": "determinant-certificate",
        "cycle": list(c.structure.species),
        "d": [q(x) for x in c.d],
        "epsilon": q(c.epsilon),
        "halvings": c.halvings,
        "diagonal": [q(x) for x in c.diagonal],
        "det_value": q(c.det_value),
        "row_sums": [q(x) for x in c.row_sums],
        "verified": verify_certificate(c),
    }


@dataclass
class AnalysisReport:
    network: ReactionNetwork
    structure: CstStructure | None
    not_cst_reason: str | None
    mass_action: InjectivityVerdict
    general: InjectivityVerdict
    verdict: CstVerdict | None
    evidence: TwoStateWitness | DeterminantCertificate | None = None
    evidence_error: str | None = None
    source: str | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        if self.verdict is None:
            return True
        v = self.verdict
        agree = v.injective_mass_action == self.mass_action.injective and v.injective_general == self.general.injective
        return agree and not (v.multistationary is Multistationarity.YES and self.mass_action.injective)

    def to_dict(self) -> dict:
        evidence = None
        if isinstance(self.evidence, TwoStateWitness):
            evidence = witness_dict(self.evidence)
        elif isinstance(self.evidence, DeterminantCertificate):
            evidence = certificate_dict(self.evidence)
        return {
            "schema": SCHEMA_VERSION,
            "command": "analyze",
            "source": self.source,
            "network": network_dict(self.network),
            "cst": structure_dict(self.structure) if self.structure else None,
            "not_cst_reason": self.not_cst_reason,
            "injectivity": {
                "mass_action": injectivity_dict(self.mass_action),
                "general": injectivity_dict(self.general),
            },
            "verdict": verdict_dict(self.verdict) if self.verdict else None,
            "consistent": self.consistent,
            "evidence": evidence,
            "evidence_error": self.evidence_error,
        }


def build_evidence(st: CstStructure, verdict: CstVerdict):
    if verdict.multistationary is not Multistationarity.YES:
        return None
    if st.s == 0:
        return construct_transmutation_witness(st)
    return construct_sequestration_certificate(st)


def analyze_network(net: ReactionNetwork, source: str | None = None, *, with_evidence: bool = True) -> AnalysisReport:
    try:
        st = recognize_cst(net)
        reason = None
    except NotCst as exc:
        st, reason = None, exc.reason
    ma, gen = injective_mass_action(net), injective_general(net)
    verdict = classify_cst(st) if st is not None else None
    report = AnalysisReport(net, st, reason, ma, gen, verdict, source=source)
    if with_evidence and st is not None:
        try:
            report.evidence = build_evidence(st, verdict)
        except WitnessError as exc:
            report.evidence_error = str(exc)
    return report


@lru_cache(maxsize=None)
def analysis_schema() -> dict:
    text = resources.files("cstnet.schema").joinpath("analysis.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(doc: dict) -> None:
    """Raise :class:`jsonschema.ValidationError` if ``doc`` violates the analysis schema."""
    import jsonschema

    jsonschema.validate(doc, analysis_schema())


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False)
