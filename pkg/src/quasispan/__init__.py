"""Exact spanning-set engine for depth-truncated quasimodules.

The package derives identity instances from residue extraction against a
quasi-locality polynomial, applies them as exact rewrite rules to normalize
mode words into difference-zero and difference-one spanning forms, and
measures the resulting quotient and subspace data with rational linear
algebra.  Everything is verified against a brute-force free-boson oracle.
"""

from .algebra import (
    AlgebraInstance,
    AxiomReport,
    AxiomWindow,
    Echelon,
    QuotientBasis,
    SubspaceBasis,
    SubspaceDecomposition,
    c1_subspace,
    c_n_subspace,
    check_axioms,
    decompose_against,
    quotient_representatives,
)
from .cofinite import (
    AnnihilationCertificate,
    cofinite_equivalence_check,
    difference_one_words,
    module_cn_quotient,
    uniform_annihilation_order,
    verify_annihilation,
)
from .exact import ONE, QuasiPolynomial, Rational, as_rational, binom, quasi_poly
from .heisenberg import (
    build_adjoint_quasimodule,
    build_fock_quasimodule,
    build_heisenberg,
    build_trivial_algebra,
    weight_zero_state,
)
from .identities import (
    commutator_expand,
    quasi_assoc_sides,
    quasi_comm_sides,
    replacement_rhs,
    residue_tables,
    straighten_rhs,
    verify_residue_derivation,
)
from .modes import (
    Expression,
    ModeSymbol,
    Monomial,
    evaluate,
    evaluate_adjoint,
    expression_from_json,
    expression_to_json,
    make_expression,
    mode,
    single,
)
from .quasimodule import (
    AnnihilationBound,
    QuasimoduleInstance,
    TruncationOverflow,
    validate_quasimodule,
)
from .rewrite import (
    AnnihilationViolation,
    BudgetExceeded,
    MetricViolation,
    NormalizationTrace,
    expand_word_mode,
    express_algebra_element,
    express_module_element,
    normalize_diff0,
    normalize_diff1,
    replace_generator_c2,
    transpose_adjacent,
)

__all__ = [
    "AlgebraInstance",
    "AnnihilationBound",
    "AnnihilationCertificate",
    "AnnihilationViolation",
    "AxiomReport",
    "AxiomWindow",
    "BudgetExceeded",
    "Echelon",
    "Expression",
    "MetricViolation",
    "ModeSymbol",
    "Monomial",
    "NormalizationTrace",
    "ONE",
    "QuasiPolynomial",
    "QuasimoduleInstance",
    "QuotientBasis",
    "Rational",
    "SubspaceBasis",
    "SubspaceDecomposition",
    "TruncationOverflow",
    "as_rational",
    "binom",
    "build_adjoint_quasimodule",
    "build_fock_quasimodule",
    "build_heisenberg",
    "build_trivial_algebra",
    "c1_subspace",
    "c_n_subspace",
    "check_axioms",
    "cofinite_equivalence_check",
    "commutator_expand",
    "decompose_against",
    "difference_one_words",
    "evaluate",
    "evaluate_adjoint",
    "expand_word_mode",
    "express_algebra_element",
    "express_module_element",
    "expression_from_json",
    "expression_to_json",
    "make_expression",
    "mode",
    "module_cn_quotient",
    "normalize_diff0",
    "normalize_diff1",
    "quasi_assoc_sides",
    "quasi_comm_sides",
    "quasi_poly",
    "quotient_representatives",
    "replace_generator_c2",
    "replacement_rhs",
    "residue_tables",
    "single",
    "straighten_rhs",
    "transpose_adjacent",
    "uniform_annihilation_order",
    "validate_quasimodule",
    "verify_annihilation",
    "verify_residue_derivation",
    "weight_zero_state",
]

__version__ = "0.1.0"
