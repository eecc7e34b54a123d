"""Verification suites: hypothesis measurement, displayed relations and conclusions."""

from .conformal import suite_conformally_flat, suite_type_d_structure, uniform_type_d
from .diagnose import Diagnosis, diagnose
from .factorization import suite_factorization
from .pointwise import suite_brackets, suite_congruence, suite_k_subspace, suite_weyl_kundt_char
from .props import PROPOSITIONS, run_proposition
from .records import Check, SuiteResult, dumps
from .registry import ANCHORS, SUITES, get_suite, run_all, run_suite, suite_names
from .surjectivity import suite_surjectivity

__all__ = [
    "ANCHORS", "Check", "Diagnosis", "PROPOSITIONS", "SUITES", "SuiteResult", "diagnose", "dumps", "get_suite",
    "run_all", "run_proposition", "run_suite", "suite_brackets", "suite_conformally_flat", "suite_congruence",
    "suite_factorization", "suite_k_subspace", "suite_surjectivity", "suite_type_d_structure",
    "suite_names", "suite_weyl_kundt_char", "uniform_type_d",
]
