#pragma once
// Types shared by the three step machines: labeling results, single-step
// results, evaluation outcomes and traces.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "needlab/syntax.hpp"

namespace needlab {

// ---------------------------------------------------------------------------
// Labeling
// ---------------------------------------------------------------------------

enum class LabelKind { S, T, V, W };
std::string label_to_string(LabelKind k);

// Result of a successful labeling pass: the final label of every visited
// position plus the chase bookkeeping needed to apply copy/use-site rules.
struct Labeling {
  std::map<Position, LabelKind> labels;
  Position needed;  // the subterm that must be evaluated next (label S)

  // Variable occurrences visited while chasing through the top letrec, in
  // chase order. The last entry of `chase_v` is the use site that copy and
  // chain rules target; `chase_w` holds pass-through chain links.
  std::vector<Position> chase_v;
  std::vector<Position> chase_w;

  std::optional<Position> target() const {
    if (chase_v.empty()) return std::nullopt;
    return chase_v.back();
  }
};

struct LabelingOutcome {
  std::optional<Labeling> success;
  Position fail_at;    // only meaningful on failure
  std::string reason;  // "" on success
  bool ok() const { return success.has_value(); }
};

// ---------------------------------------------------------------------------
// Stepping and evaluation
// ---------------------------------------------------------------------------

enum class WhnfKind { AWHNF, CWHNF };  // abstraction vs constructor head
std::string whnf_to_string(WhnfKind k);

struct StepResult {
  enum class Kind { Reduced, Whnf, Stuck };
  Kind kind;

  // Reduced
  ExprPtr next;      // not yet canonicalized
  std::string rule;  // rule mnemonic, e.g. "lbeta"
  Position redex;

  // Whnf
  std::optional<WhnfKind> whnf;

  // Stuck
  std::string reason;
  Position at;

  static StepResult reduced(ExprPtr next, std::string rule, Position redex) {
    StepResult r;
    r.kind = Kind::Reduced;
    r.next = std::move(next);
    r.rule = std::move(rule);
    r.redex = std::move(redex);
    return r;
  }
  static StepResult whnf_result(WhnfKind k) {
    StepResult r;
    r.kind = Kind::Whnf;
    r.whnf = k;
    return r;
  }
  static StepResult stuck(std::string reason, Position at) {
    StepResult r;
    r.kind = Kind::Stuck;
    r.reason = std::move(reason);
    r.at = std::move(at);
    return r;
  }
};

struct TraceEntry {
  int index = 0;  // 1-based step number
  std::string rule;
  Position redex;
  ExprPtr result;  // canonicalized state after the step
};
using Trace = std::vector<TraceEntry>;

struct EvalOutcome {
  enum class Kind { Converged, Stuck, BudgetExhausted };
  Kind kind;
  ExprPtr final_expr;  // WHNF, stuck state, or last state at budget
  std::optional<WhnfKind> whnf;
  int steps = 0;
  std::string reason;  // stuck detail; "state-cycle" marks a detected loop

  bool converged() const { return kind == Kind::Converged; }
  // Stuck states (including detected state cycles) definitively fail to
  // converge; budget exhaustion is inconclusive.
  bool definitely_diverges() const { return kind == Kind::Stuck; }
};

struct EvalLimits {
  int max_steps = 10000;
  // States larger than this many nodes abort to BudgetExhausted; growth-only
  // loops would otherwise eat unbounded time in pathological corpus entries.
  int size_limit = 200000;
  // When false the evaluator never reports "state-cycle" and loops run to the
  // step budget; useful for observing raw budget exhaustion.
  bool detect_cycles = true;
};

// Shared evaluation loop: canonicalizes between steps, records an optional
// trace, stops on WHNF / stuck states / budget, and reports detected state
// cycles as definitive non-convergence ("state-cycle").
EvalOutcome run_machine(const ExprPtr& start,
                        const std::function<StepResult(const ExprPtr&)>& step,
                        const EvalLimits& limits, Trace* trace);

}  // namespace needlab
