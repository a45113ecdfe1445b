#pragma once
// Call-by-name strategy on the full syntax: instead of sharing results via
// the environment, demanded bindings are copied verbatim to the use site.

#include "needlab/machine.hpp"

namespace needlab {

// Demand labeling for the by-name strategy.  Starting at the root with T,
// the walk stays transparent through the top prefix of binder groups and
// then descends with S through function/scrutinee/first-argument positions.
// A binder group met after the prefix is a hoisting redex, so the walk
// never fails; the terminal position is reported in `needed`.
LabelingOutcome label_name(const ExprPtr& e);

// By-name WHNF: a (possibly empty) prefix of binder groups around an
// abstraction or a constructor application.  Variables are never looked
// through here; a variable body still needs a copy step.
bool is_name_whnf(const ExprPtr& e, WhnfKind* kind = nullptr);

// One step.  Rules: beta (direct substitution), gcp (copy a binding's
// right-hand side to the demanded occurrence), lapp/lcase/lseq (hoist a
// binder group out of the demanded position), seq-c, case (direct
// simultaneous substitution of the scrutinee's arguments).
// Expects canonical input; the result is not canonicalized.
StepResult step_name(const ExprPtr& e);

EvalOutcome evaluate_name(const ExprPtr& e, const EvalLimits& limits = {},
                          Trace* trace = nullptr);

}  // namespace needlab
