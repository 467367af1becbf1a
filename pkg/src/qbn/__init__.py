"""Query-by-navigation engine over fact-based conceptual schemas."""

from .schema import (
    Diagnostic,
    DiagnosticError,
    NamingEntry,
    Schema,
    default_naming,
    parse_schema,
    serialize_schema,
)
from .paths import (
    EMPTY,
    ENTER,
    EXIT,
    PathExpr,
    PathStep,
    canonical_text,
    is_legal_focus,
    is_wellformed,
    parse_path,
)
from .verbalize import VerbalizeOptions, verbalize
from .navigate import (
    Associate,
    Enlarge,
    IllegalMove,
    Move,
    NodePresentation,
    Refine,
    ReversePath,
    Session,
    apply_move,
    associations,
    enlargements,
    new_session,
    present,
    refinements,
    set_options,
)
from .population import (
    PairBag,
    Population,
    ResultView,
    compose,
    evaluate,
    load_population,
    relation_of_role,
    relation_of_type,
    result_view,
    serialize_population,
    transpose,
)

__version__ = "0.1.0"

__all__ = [
    "Diagnostic",
    "DiagnosticError",
    "NamingEntry",
    "Schema",
    "default_naming",
    "parse_schema",
    "serialize_schema",
    "EMPTY",
    "ENTER",
    "EXIT",
    "PathExpr",
    "PathStep",
    "canonical_text",
    "is_legal_focus",
    "is_wellformed",
    "parse_path",
    "VerbalizeOptions",
    "verbalize",
    "Associate",
    "Enlarge",
    "IllegalMove",
    "Move",
    "NodePresentation",
    "Refine",
    "ReversePath",
    "Session",
    "apply_move",
    "associations",
    "enlargements",
    "new_session",
    "present",
    "refinements",
    "set_options",
    "PairBag",
    "Population",
    "ResultView",
    "compose",
    "evaluate",
    "load_population",
    "relation_of_role",
    "relation_of_type",
    "result_view",
    "serialize_population",
    "transpose",
    "__version__",
]
