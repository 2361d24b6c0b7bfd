"""Trace-query engine: describe temporal behavior of a black-box agent,
get back matching clips from a library of abstracted simulation traces."""

from .abstraction import (
    Car,
    Episode,
    EpisodeStep,
    PredicateDef,
    RawState,
    SimConfig,
    abstract_state,
    default_vocab,
    simulate,
)
from .automata import (
    DEFAULT_STATE_BUDGET,
    StateBudgetExceeded,
    SymbolicAutomaton,
    compile_formula,
    describe,
    reverse,
)
from .engine import (
    Clip,
    ClipMatch,
    QueryResult,
    SearchConfig,
    SearchCounters,
    find_all,
    find_first,
    run_query,
)
from .ltlf import (
    FALSE,
    TRUE,
    Always,
    And,
    Eventually,
    Formula,
    FormulaSyntaxError,
    Letter,
    Next,
    Not,
    Or,
    Pred,
    UnknownPredicateError,
    Until,
    accept_at_end,
    evaluate,
    expand,
    format_formula,
    letter,
    parse,
    progress,
    simplify,
)
from .querylang import (
    Constraint,
    Literal,
    SchemaError,
    StructuredQuery,
    to_ltlf,
    validate,
    warn_contradiction,
)
from .store import TraceLibrary, build_library, load_library, save_library

__version__ = "0.1.0"
