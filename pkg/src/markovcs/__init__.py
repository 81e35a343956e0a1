"""Markov systems as language recognizers: contraction certificates, automaton
extraction, perturbation stability and discretization of noisy maps."""

from .dfa import DFA, canonical, dfa_equiv, format_dfa, is_isomorphic, minimize_dfa, parse_dfa
from .discretize import KernelSpec, RegionRecognizer, build_mcs, build_system, refinement_check
from .doeblin import (
    bounded_density,
    certify_quasi_compact,
    condition_d_check,
    quasi_compact_bound,
    yosida_decompose,
)
from .ergodicity import (
    NotCertifiedError,
    certify_weak_ergodicity,
    d0_certificate,
    decay_bound,
    dobrushin,
    dobrushin_nullspace_check,
)
from .errors import (
    BudgetExceededError,
    DiscretizationError,
    InvalidKernelError,
    MCSError,
    NotARecognizerError,
    SpaceMismatchError,
    UnknownSymbolError,
)
from .extraction import (
    definite_language_table,
    definite_order,
    extract_dfa,
    operator_cover,
    orbit_cover,
)
from .io import load_bundled, load_system, save_system
from .measures import (
    MarkovOperator,
    MarkovSystem,
    SignedMeasure,
    StateSpace,
    apply,
    compose,
    compose_word,
    operator_distance,
    tv_norm,
    validate_markov,
    word_distribution,
)
from .recognition import MCS, Recognizer, Verdict, classify, enumerate_classify, induced_gap
from .stability import perturb, stability_margin, verify_stability

__all__ = [
    "BudgetExceededError",
    "DFA",
    "DiscretizationError",
    "InvalidKernelError",
    "KernelSpec",
    "MCS",
    "MCSError",
    "MarkovOperator",
    "MarkovSystem",
    "NotARecognizerError",
    "NotCertifiedError",
    "Recognizer",
    "RegionRecognizer",
    "SignedMeasure",
    "SpaceMismatchError",
    "StateSpace",
    "UnknownSymbolError",
    "Verdict",
    "apply",
    "bounded_density",
    "build_mcs",
    "build_system",
    "canonical",
    "certify_quasi_compact",
    "certify_weak_ergodicity",
    "classify",
    "compose",
    "compose_word",
    "condition_d_check",
    "d0_certificate",
    "decay_bound",
    "definite_language_table",
    "definite_order",
    "dfa_equiv",
    "dobrushin",
    "dobrushin_nullspace_check",
    "enumerate_classify",
    "extract_dfa",
    "format_dfa",
    "induced_gap",
    "is_isomorphic",
    "load_bundled",
    "load_system",
    "minimize_dfa",
    "operator_cover",
    "operator_distance",
    "orbit_cover",
    "parse_dfa",
    "perturb",
    "quasi_compact_bound",
    "refinement_check",
    "save_system",
    "stability_margin",
    "tv_norm",
    "validate_markov",
    "verify_stability",
    "word_distribution",
    "yosida_decompose",
]
