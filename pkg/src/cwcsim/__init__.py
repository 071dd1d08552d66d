"""Stochastic multiset rewriting on a 2D grid.

Surface models (nse/se/sme/cell/monitor declarations) are parsed, lowered
to ground rewrite rules over an explicit grid of labelled compartments,
and simulated with Gillespie's direct method.
"""

from .compiler import (
    CompiledModel,
    CompileError,
    compile_model,
    emit_ground_model,
    eval_coords,
    shift,
    validate,
)
from .engine import (
    EnsembleSeries,
    Trajectory,
    build_channels,
    run_ensemble,
    simulate_run,
    step,
)
from .matching import (
    CompartmentPattern,
    ContentVar,
    Match,
    MatchClass,
    OpenCompartment,
    OpenTerm,
    Pattern,
    PatternError,
    RewriteRule,
    WrapVar,
    apply_rewrite,
    collect_sites,
    count_matches,
    enumerate_matches,
    instantiate,
    match_classes,
)
from .monitors import Monitor, evaluate_monitor, write_ensemble_csv, write_run_csv
from .surface import (
    Diagnostic,
    ParseError,
    SurfaceModel,
    parse_coord_expr,
    parse_model,
    parse_term_text,
)
from .terms import (
    TOP_LABEL,
    Atom,
    Compartment,
    Coordinate,
    Term,
    TermError,
    multiplicity,
    render_term,
    terms_equal,
)

__version__ = "0.1.0"
