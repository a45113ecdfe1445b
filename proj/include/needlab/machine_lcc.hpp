#pragma once
// The binder-group-free fragment: plain lambda terms with constructors,
// case and seq.  Reduction positions are found by descending through
// function/scrutinee/first-argument positions only.

#include "needlab/machine.hpp"

namespace needlab {

// WHNF: an abstraction or a constructor application at the root.
bool is_lcc_whnf(const ExprPtr& e, WhnfKind* kind = nullptr);

// One step.  Rules: nbeta (direct substitution), ncase (simultaneous
// substitution of the scrutinee's arguments), nseq.  Expects canonical
// input without binder groups; throws BadExpr otherwise.
StepResult step_lcc(const ExprPtr& e);

// Budgeted evaluation over step_lcc; throws BadExpr on binder-group input.
EvalOutcome evaluate_lcc(const ExprPtr& e, const EvalLimits& limits = {},
                         Trace* trace = nullptr);

}  // namespace needlab
