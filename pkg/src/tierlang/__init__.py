"""Tiered while-language toolkit.

Programs compute over words with two tiers of data: tier 1 steers loops
and may only shrink, tier 0 may grow but cannot steer.  The package
bundles the type checker and tier inference, a small-step interpreter
with loop-count bookkeeping, deterministic schedulers and an
interleaving explorer, empirical harnesses for non-interference and
polynomial bounds, and a compiler from clocked Turing machines into
safe programs.
"""

from .lang import (
    DEFAULT_ALPHABET,
    Alphabet,
    Assign,
    Command,
    Expr,
    If,
    OpCall,
    Program,
    Seq,
    Skip,
    Span,
    Store,
    Tier,
    Var,
    While,
    Word,
    assigned_vars,
    free_vars,
    is_truth_value,
    join_all,
    meet_all,
    ops_used,
    seq_all,
    subword,
    unary,
    word_literal,
)
from .ops import OperatorDef, Registry, builtins, default_registry, validate_class
from .parser import ParseError, SourceFile, parse, pretty
from .semantics import eval_expr, run_sequential, step_command
from .scheduling import (
    ExplorationReport,
    FirstAlive,
    GlobalConfig,
    RoundRobin,
    Scheduler,
    SeededRandom,
    explore,
    quietness_test,
    run_with_scheduler,
    step_global,
)
from .analysis import (
    FitReport,
    GrowthTable,
    NiReport,
    SubwordReport,
    TierPreservationReport,
    fit_polynomial,
    measure_growth,
    ni_suite,
    scheduled_run_stores,
    store_equiv,
    subword_invariant,
    tier_one_projection,
    tier_preservation,
)
from .typecheck import (
    CheckReport,
    Diagnostic,
    InferenceReport,
    check_program,
    check_safe_sigs,
    command_tiers,
    expr_tiers,
    infer_tiers,
    maximal_safe_sigs,
    type_command,
    type_expr,
)
from .tm import CompiledProgram, TMSpec, compile_tm, parse_tm, simulate_tm

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_ALPHABET", "Alphabet", "Assign", "Command", "Expr", "If", "OpCall",
    "Program", "Seq", "Skip", "Span", "Store", "Tier", "Var", "While", "Word",
    "assigned_vars", "free_vars", "is_truth_value", "join_all", "meet_all",
    "ops_used", "seq_all", "subword", "unary", "word_literal",
    "OperatorDef", "Registry", "builtins", "default_registry", "validate_class",
    "ParseError", "SourceFile", "parse", "pretty",
    "eval_expr", "run_sequential", "step_command",
    "ExplorationReport", "FirstAlive", "GlobalConfig", "RoundRobin", "Scheduler",
    "SeededRandom", "explore", "quietness_test", "run_with_scheduler", "step_global",
    "FitReport", "GrowthTable", "NiReport", "SubwordReport", "TierPreservationReport",
    "fit_polynomial", "measure_growth", "ni_suite", "scheduled_run_stores",
    "store_equiv", "subword_invariant", "tier_one_projection", "tier_preservation",
    "CheckReport", "Diagnostic", "InferenceReport", "check_program",
    "check_safe_sigs", "command_tiers", "expr_tiers", "infer_tiers",
    "maximal_safe_sigs", "type_command", "type_expr",
    "CompiledProgram", "TMSpec", "compile_tm", "parse_tm", "simulate_tm",
]
