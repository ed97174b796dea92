"""binpd: binarization and depth-1 partial deduction for definite logic
programs, with a stratifiability analyzer, an LD-resolution interpreter,
and an answer-preservation verifier."""

from .binarize import (BinarizedProgram, binarize_clause, binarize_program,
                       binarize_query, fresh_cont_pred, is_binary_program,
                       terminator_clause)
from .engine import (Answer, Limits, Metrics, RunStatus, solve,
                     successful_derivation_length)
from .pd import (Budget, CallPattern, GeneralizedAtom, NontermDiagnosis,
                 NontermReason, Success, budget_for, check_closedness_independence,
                 continuations_closed, detect_growth, generalize, partial_deduce,
                 rename_atom, unfold_depth1)
from .postopt import OptReport, fold_eps, optimize, remove_unreachable
from .stratify import (DependencyGraph, Stratification, Violation,
                       ViolationReason, all_violations, b_stratify,
                       dependency_graph, resolvent_length_bound,
                       validate_stratification)
from .syntax import (PrologSyntaxError, ReservedConstructError, SourceUnit,
                     parse_program, parse_query, print_clause, print_program,
                     print_query, print_term)
from .terms import (Clause, Compound, FreshScope, PredSym, Program, Query,
                    Subst, Term, Var, apply_subst, compose, rename_apart,
                    unify, variant_eq)
from .verify import (BenchRow, CorpusEntry, EquivalenceReport, TransformResult,
                     answers_equal_mod_renaming, bench, load_corpus,
                     run_transform, verify_pipeline)

__version__ = "0.1.0"
