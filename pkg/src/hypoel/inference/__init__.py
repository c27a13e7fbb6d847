"""Forward-chaining derivation of hypoellipticity facts."""

from .catalog import (CatalogEntry, CatalogError, Expectation, Guard, RegressionResult, catalog,
                      catalog_axioms, catalog_closure, check_expectation, derive_catalog, get_entry,
                      load_entry, regress)
from .engine import (MAX_ROUNDS, OFFSET_LIMIT, REFLEXIVE, Answer, Closure, Contradiction, Derivation,
                     InconsistentAxiomsError, ProofTrace, UnknownOperatorError, derive,
                     find_contradictions, query, replay, replay_all)
from .facts import (FactSyntaxError, Pattern, canonicalize, conflict_zone, entails, match,
                    parse_fact, parse_statement)
from .rules import FAMILIES, STATIC_RULES, Clause, Rule, all_rule_ids

__all__ = [
    "Answer", "CatalogEntry", "CatalogError", "Clause", "Closure", "Contradiction", "Derivation",
    "Expectation", "FAMILIES", "FactSyntaxError", "Guard", "InconsistentAxiomsError", "MAX_ROUNDS",
    "OFFSET_LIMIT", "Pattern", "ProofTrace", "REFLEXIVE", "RegressionResult", "Rule", "STATIC_RULES",
    "UnknownOperatorError", "all_rule_ids", "canonicalize", "catalog", "catalog_axioms",
    "catalog_closure", "check_expectation", "conflict_zone", "derive", "derive_catalog", "entails",
    "find_contradictions", "get_entry", "load_entry", "match", "parse_fact", "parse_statement",
    "query", "regress", "replay", "replay_all",
]
