"""Injectivity and multistationarity analysis of cyclic sequestration-transmutation networks."""

from .cst import (
    CstStructure,
    CstVerdict,
    Kind,
    Multistationarity,
    NotCst,
    Rule,
    classify_cst,
    cst_network,
    recognize_cst,
)
from .dynamics import jacobian, mass_action_rates, reduced_jacobian, residual, simulate
from .inheritance import EmbeddingSpec, LiftingPlan, LiftStep, embed_network, load_plan, verify_lifting_plan
from .injectivity import injective_general, injective_mass_action
from .network import (
    Complex,
    NetworkError,
    OpennessTag,
    Reaction,
    ReactionNetwork,
    canonical_form,
    classify_openness,
    conservation_laws,
    deficiency,
    stoichiometric_rank,
)
from .parser import ParseError, format_network, load_network, parse_network
from .report import AnalysisReport, analyze_network
from .witness import (
    DeterminantCertificate,
    TwoStateWitness,
    construct_sequestration_certificate,
    construct_transmutation_witness,
    verify_certificate,
    verify_two_state_witness,
)

__version__ = "0.1.0"
