#pragma once
// The unfolded-tree view of terms: recursive bindings are expanded on demand
// into a (possibly infinite) tree whose nodes carry plain head labels. The
// module provides a positional label oracle (it_label), lazy tree handles,
// finite prefixes for comparison, and a budgeted normal-order tree reducer.

#include "needlab/syntax.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace needlab {

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------
//
// Head symbols of tree nodes. `children` is the number of child positions the
// label admits:
//   App 2, CaseT 1+#alts, AltPat 1, Seq 2, Constr ar(c), Lam 1, Var 0, Bot 0.
//
// Tree positions differ from machine positions in one place: below a case,
// child 1 is the scrutinee and child 1+i is the i-th *alternative node*
// (labelled AltPat with the pattern), whose own child 1 is the alternative
// body.

struct TreeLabel {
  enum class Kind { App, CaseT, AltPat, Seq, Constr, Lam, Var, Bot };
  Kind kind;
  std::string name;           // CaseT: type; Constr/AltPat: constructor; Var: name
  std::vector<Name> binders;  // Lam: the binder; AltPat: the pattern variables
  int children = 0;

  bool operator==(const TreeLabel&) const = default;  // not alpha-aware
};

std::string print_label(const TreeLabel& l);

// Label of the unfolded tree of `s` at tree position `p`, or nullopt when the
// position does not exist in the tree. A cyclic chain of bindings that never
// produces a head symbol yields the Bot label (a leaf with no reduction rule).
std::optional<TreeLabel> it_label(const ExprPtr& s, const Position& p);

// ---------------------------------------------------------------------------
// Lazy handles
// ---------------------------------------------------------------------------

namespace detail {
struct TreeCtx;
struct EnvFrame;
struct SynthNode;

// A node of the unfolded tree: either a source subterm paired with an
// environment of pending expansions/substitutions, or a synthesized node
// produced by a reduction step. `alt >= 0` selects an alternative node of a
// case expression.
struct TreeClosure {
  ExprPtr expr;
  EnvFrame* env = nullptr;
  int alt = -1;
  std::shared_ptr<SynthNode> synth;
};

// Memoized observable node: head label, the closure it was expanded from,
// and the closures of its children.
struct ResolvedNode;
}  // namespace detail

// On-demand view of the unfolded tree. Exposes only the head label and
// 1-based child access; the head is memoized. A handle is single-threaded;
// handles for distinct expressions are independent.
class TreeHandle {
 public:
  const TreeLabel& head() const;
  int child_count() const;
  TreeHandle child(int i) const;  // throws BadExpr when out of range

 private:
  TreeHandle(std::shared_ptr<detail::TreeCtx> ctx, detail::TreeClosure c);

  std::shared_ptr<detail::TreeCtx> ctx_;
  detail::TreeClosure c_;
  mutable std::shared_ptr<const detail::ResolvedNode> resolved_;

  void resolve() const;

  friend TreeHandle tree_of(const ExprPtr& s);
  friend class TreeStepper;
};

TreeHandle tree_of(const ExprPtr& s);

// ---------------------------------------------------------------------------
// Finite prefixes
// ---------------------------------------------------------------------------

// All labels at positions of length <= depth; prefix-closed by construction.
struct TreePrefix {
  int depth = 0;
  std::map<Position, TreeLabel> labels;
};

TreePrefix prefix(const TreeHandle& t, int depth);

// One `position: label` line per entry; `indented` switches to a tree layout.
std::string print_prefix(const TreePrefix& p, bool indented = false);

// Prefix equality to the given depth, identifying trees that differ only in
// the names bound by Lam/AltPat labels along matching paths.
bool tree_eq_upto(const ExprPtr& a, const ExprPtr& b, int depth);
bool tree_eq_upto(const TreeHandle& a, const TreeHandle& b, int depth);

// ---------------------------------------------------------------------------
// Normal-order tree reduction
// ---------------------------------------------------------------------------
//
// The redex search walks the call-by-name spine (function of an application,
// scrutinee of a case, first argument of a seq). Contracting a redex extends
// pending environments instead of rewriting the tree, so a step that
// textually touches infinitely many positions stays finite.

struct TreeStepResult {
  enum class Kind { Reduced, Answer, NoRedexFound, DescentLimit };
  Kind kind;
  std::optional<TreeHandle> next;  // set when kind == Reduced
  std::string rule;                // "betaTr" | "seqTr" | "caseTr"
};

TreeStepResult tree_step(const TreeHandle& t, int descent_limit = 2000);

enum class TreeVerdict { Converged, Exhausted };

struct TreeEvalResult {
  TreeVerdict verdict = TreeVerdict::Exhausted;
  int steps = 0;
  // "answer" | "no-redex" | "step-budget" | "descent-limit"
  std::string reason;

  bool converged() const { return verdict == TreeVerdict::Converged; }
  // A verdict that more budget could not change: an answer was reached, or
  // the spine ended with no redex at all (e.g. a Bot head in demand position).
  bool definitive() const { return converged() || reason == "no-redex"; }
};

TreeEvalResult tree_converges(const ExprPtr& s, int step_budget = 10000,
                              int descent_limit = 2000);

}  // namespace needlab
