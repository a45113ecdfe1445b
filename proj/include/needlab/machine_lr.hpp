#pragma once
// The call-by-need machine on the full language (letrec, case, constructors,
// seq): needed-subterm labeling, normal-order stepping, evaluation to weak
// head normal form, and a registry of unrestricted rewrite rules for the
// correctness checker.

#include "needlab/machine.hpp"

namespace needlab {

// Marks the needed subterm of `e` by chasing through applications, seq
// scrutinees, case scrutinees and top-letrec bindings. Fails on cyclic
// variable dependencies (the term then has no normal-order redex and cannot
// converge). Expects a term obeying the distinct-binder convention.
LabelingOutcome label_lr(const ExprPtr& e);

// Weak head normal forms: values, letrec around a value, and letrec whose
// body reaches a constructor binding through a variable chain.
bool is_lr_whnf(const ExprPtr& e, WhnfKind* kind = nullptr);

// One normal-order step. Expects canonical input; the result is not
// canonicalized (evaluate_lr does that between steps).
StepResult step_lr(const ExprPtr& e);

EvalOutcome evaluate_lr(const ExprPtr& e, const EvalLimits& limits = {},
                        Trace* trace = nullptr);

// ---------------------------------------------------------------------------
// Unrestricted transformations
// ---------------------------------------------------------------------------
//
// Every machine rule is also available as a plain rewrite applicable at any
// position (no labels, no normal-order restriction), together with garbage
// collection, letrec hoisting out of argument positions, and binding inlining.
// "bad-seq" (seq s t -> t without evaluating s) is deliberately unsound and
// exists so the checker has a guaranteed counterexample to find.

struct RuleApplication {
  Position at;     // position of the rewritten node
  ExprPtr result;  // canonicalized whole-term result
};

const std::vector<std::string>& transformation_rules();

std::vector<RuleApplication> find_applications(const std::string& rule,
                                               const ExprPtr& e);

// First application of `rule` at exactly position `at`; throws BadExpr if the
// rule does not match there.
ExprPtr apply_transformation_lr(const std::string& rule, const ExprPtr& e,
                                const Position& at);

}  // namespace needlab
