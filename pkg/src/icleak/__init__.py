"""Exact leakage of index codes to a guessing adversary."""

from .bounds import (converse_inequality_check, uniform_report, max_mass_sum, product_identity_check,
                     rate_bounds)
from .codes import (CompositeCode, DecoderSet, DeterministicCode, StochasticCode, code_from_coloring,
                    code_from_function, composite_code, determinize, error_probability, format_code, good_set,
                    good_sets, identity_code, is_zero_error_valid, parse_code, synthesize_decoders)
from .errors import BudgetExceeded, CapExceeded, IcleakError, InvariantViolation, ValidationError
from .graph import ConfusionGraph, Graph, build_confusion_graph, check_vertex_transitive, confusable
from .invariants import (chromatic_number, clique_number, fractional_chromatic_number, independence_number, mais,
                         rate_bracket)
from .leakage import (enumerate_zero_error_codes, guess_lists, leakage, optimal_zero_error_leakage, ps_posterior,
                      ps_prior, top_c_mass)
from .logexpr import Bits, parse_bits
from .model import (AdversarySpec, Distribution, GuessBudget, Instance, KnownRate, Layout, conditional,
                    load_instance, marginal, product_extend)
from .simulate import estimate_ps

__version__ = "0.1.0"

__all__ = [
    "AdversarySpec",
    "Bits",
    "BudgetExceeded",
    "build_confusion_graph",
    "CapExceeded",
    "check_vertex_transitive",
    "chromatic_number",
    "clique_number",
    "code_from_coloring",
    "code_from_function",
    "composite_code",
    "CompositeCode",
    "conditional",
    "confusable",
    "ConfusionGraph",
    "converse_inequality_check",
    "DecoderSet",
    "DeterministicCode",
    "determinize",
    "Distribution",
    "enumerate_zero_error_codes",
    "error_probability",
    "estimate_ps",
    "format_code",
    "fractional_chromatic_number",
    "good_set",
    "good_sets",
    "Graph",
    "guess_lists",
    "GuessBudget",
    "IcleakError",
    "identity_code",
    "independence_number",
    "Instance",
    "InvariantViolation",
    "is_zero_error_valid",
    "KnownRate",
    "Layout",
    "leakage",
    "load_instance",
    "mais",
    "marginal",
    "max_mass_sum",
    "optimal_zero_error_leakage",
    "parse_bits",
    "parse_code",
    "product_extend",
    "product_identity_check",
    "ps_posterior",
    "ps_prior",
    "rate_bounds",
    "rate_bracket",
    "StochasticCode",
    "synthesize_decoders",
    "top_c_mass",
    "uniform_report",
    "ValidationError",
]
