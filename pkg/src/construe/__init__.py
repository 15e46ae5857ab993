"""construe: translate natural-language text into logical expressions by
matching declaratively defined constructions against concept-tagged input,
validating candidates with knowledge-base tests, and recursively composing
the surviving interpretations."""

from .constructions import (Construction, Repository, TemplateVariant,
                            TypedSlot, derive_keys, expand_variants,
                            load_constructions, parse_construction)
from .interpreter import (EngineConfig, Interpretation, ParseGraph, compose,
                          finalize, interpret, resolve_anaphora, retrieve,
                          window_loop)
from .kb import (ContextStack, KnowledgeBase, UnknownTermError,
                 UntypedTermError, Violation, lint_kb, load_kb)
from .logic import (Expr, canonical_form, equal_modulo_renaming, free_vars,
                    parse_expr, print_expr, quantify_existential,
                    rename_query_vars, simplify, substitute)
from .tagger import Lexicon, TagChart, load_lexicon, segment, tag, tokenize

__version__ = "0.1.0"

__all__ = [
    "Construction", "ContextStack", "EngineConfig", "Expr", "Interpretation",
    "KnowledgeBase", "Lexicon", "ParseGraph", "Repository", "TagChart",
    "TemplateVariant", "TypedSlot", "UnknownTermError", "UntypedTermError",
    "Violation", "canonical_form", "compose", "derive_keys",
    "equal_modulo_renaming", "expand_variants", "finalize", "free_vars",
    "interpret", "lint_kb", "load_constructions", "load_kb", "load_lexicon",
    "parse_construction", "parse_expr", "print_expr", "quantify_existential",
    "rename_query_vars", "resolve_anaphora", "retrieve", "segment",
    "simplify", "substitute", "tag", "tokenize", "window_loop",
]
