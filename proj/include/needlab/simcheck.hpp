#pragma once
// Bounded behavioural comparison: observation contexts, finite-depth
// similarity checks in both chain and iterate form, open-term extension via
// closing substitutions, convergence admissibility probes, transformation
// correctness sweeps over a corpus, and a deterministic corpus generator.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "needlab/machine.hpp"
#include "needlab/syntax.hpp"

namespace needlab {

// ---------------------------------------------------------------------------
// Calculus selection
// ---------------------------------------------------------------------------

enum class Calculus { LR, Name, Lcc };
std::string calculus_to_string(Calculus c);

// Runs the selected machine. Lcc rejects terms containing letrec.
EvalOutcome eval_in(Calculus c, const ExprPtr& e, const EvalLimits& limits = {});

// ---------------------------------------------------------------------------
// Observation contexts
// ---------------------------------------------------------------------------

// A single observation applied to a candidate value:
//   Apply       ([.] arg)           for a closed argument `arg`
//   CaseSelect  case_T [.] of ...   the alternative for `ctor` returns its
//                                   `index`-th pattern variable, every other
//                                   alternative diverges
//   CaseProbe   case_T [.] of ...   the alternative for `ctor` returns True,
//                                   every other alternative diverges
struct QContext {
  enum class Kind { Apply, CaseSelect, CaseProbe };
  Kind kind = Kind::Apply;
  ExprPtr arg;     // Apply only
  Name type_name;  // CaseSelect / CaseProbe
  Name ctor;       // CaseSelect / CaseProbe
  int index = 0;   // CaseSelect only, 1-based
};

std::string print_q(const QContext& q);
std::string print_q_chain(const std::vector<QContext>& chain);

// Wraps `e` in the observation context. Case contexts build one alternative
// per constructor of the type, in signature order.
ExprPtr apply_q(const QContext& q, const ExprPtr& e, const SignatureTable& sig);

// All closed argument terms of size <= size_bound built from a diverging leaf,
// a pool of abstractions (the defaults \x.x, \x.<diverge>, \x.\y.x plus any
// caller extras, each counting as size 1) and saturated constructor
// applications (size 1 + sum of argument sizes). Ordered smallest size first
// in a fixed construction order, so the first witness found is minimal.
std::vector<ExprPtr> enumerate_CE(const SignatureTable& sig, int size_bound,
                                  const std::vector<ExprPtr>& abstraction_pool = {});

// Observation contexts available for a signature: one CaseProbe per
// (type, constructor), one CaseSelect per (type, constructor, argument
// index), and one Apply per argument in `ce`, in that order (cheapest
// observations first, so refutation witnesses come out minimal).
std::vector<QContext> enumerate_Q(const SignatureTable& sig,
                                  const std::vector<ExprPtr>& ce);

// ---------------------------------------------------------------------------
// Bounded similarity
// ---------------------------------------------------------------------------

struct SimConfig {
  // Name is the default comparison machine: it handles the full language and
  // detects the enumerated divergence probes as state cycles, so verdicts
  // stay conclusive where the LR machine would burn its whole step budget.
  Calculus calculus = Calculus::Name;
  int k = 3;               // observation depth / maximum chain length
  int arg_size = 3;        // size bound for enumerated arguments
  int args_per_level = 6;  // Apply contexts kept per level (smallest first)
  int max_steps = 2000;    // per-evaluation step budget
  int size_limit = 200000;
  bool use_chains = false;  // check_mutual_sim: chain search vs iterates
  const SignatureTable* sig = nullptr;  // defaults to default_signature()

  const SignatureTable& signature() const;
  EvalLimits limits() const { return EvalLimits{max_steps, size_limit}; }
};

// HoldsToDepth: no refutation found and every tested chain was conclusive.
// Refuted: a chain where the left side converges and the right side
//          definitively does not; `witness` lists the observations in the
//          order they are applied (first observation on the values first).
// BudgetExhausted: no refutation, but at least one chain was inconclusive.
struct SimVerdict {
  enum class Kind { HoldsToDepth, Refuted, BudgetExhausted };
  Kind kind = Kind::HoldsToDepth;
  int depth = 0;
  std::vector<QContext> witness;
  std::string detail;

  bool holds() const { return kind == Kind::HoldsToDepth; }
  bool refuted() const { return kind == Kind::Refuted; }

  static SimVerdict holds_to(int k);
  static SimVerdict refuted_by(std::vector<QContext> w, std::string detail = "");
  static SimVerdict budget(std::string detail = "");
};

std::string print_verdict(const SimVerdict& v);

// Literal chain search: tests every context chain Q1(...Qn(s)...) up to
// length k, evaluating the composed terms from scratch. Requires closed
// inputs.
SimVerdict bounded_le_Q(const ExprPtr& s1, const ExprPtr& s2,
                        const SimConfig& cfg);

// Evaluate-then-probe recursion: evaluates both sides once, then compares
// Q(v1) against Q(v2) at depth k-1 for every context Q. Equivalent verdicts
// to bounded_le_Q at equal bounds, but shares work across chains. Requires
// closed inputs.
SimVerdict bounded_sim_iterates(const ExprPtr& s1, const ExprPtr& s2,
                                const SimConfig& cfg);

// Both directions (s1 <= s2, s2 <= s1) with the configured checker.
std::pair<SimVerdict, SimVerdict> check_mutual_sim(const ExprPtr& s1,
                                                   const ExprPtr& s2,
                                                   const SimConfig& cfg);

// Open terms: instantiates the shared free variables with closed enumerated
// arguments (first `n_substitutions` assignments, smallest first) and checks
// each instance. A refutation records the substitution in `detail`.
SimVerdict open_extension_check(const ExprPtr& s1, const ExprPtr& s2,
                                const SimConfig& cfg, int n_substitutions);

// Tests one instance of the convergence-admissibility law
//   Q(s) converges  iff  s converges to v and Q(v) converges.
// Returns true/false when every needed evaluation is conclusive, nullopt
// otherwise.
std::optional<bool> check_admissibility(const ExprPtr& s, const QContext& q,
                                        const SimConfig& cfg);

// ---------------------------------------------------------------------------
// Transformation correctness
// ---------------------------------------------------------------------------

struct TransformReport {
  std::string rule;
  int instances = 0;       // rewrite applications tested
  int counterexamples = 0; // definitive convergence mismatches
  int inconclusive = 0;    // budget-limited comparisons
  std::vector<std::string> witnesses;  // one line per counterexample
  bool ok() const { return counterexamples == 0; }
};

std::string print_report(const TransformReport& r);

// Applies `rule` at every matching position of every corpus term and compares
// convergence before/after in cfg.calculus. A side that converges while the
// other does not finish within budget counts as a counterexample: the corpus
// is sized so honest transformations stay well inside the step budget.
TransformReport check_transformation(const std::string& rule,
                                     const std::vector<ExprPtr>& corpus,
                                     const SimConfig& cfg);
// The rule registry itself lives next to the rewrites: see machine_lr.hpp,
// transformation_rules() / find_applications() / apply_transformation_lr().

// ---------------------------------------------------------------------------
// Corpus generation
// ---------------------------------------------------------------------------

// Deterministic pseudo-random closed (or mostly closed) well-formed terms:
// saturated constructor applications, complete case alternatives in signature
// order, distinct binders, letrec groups of 1-3 bindings. Generation is
// biased toward terms that converge quickly so downstream comparisons stay
// conclusive.
std::vector<ExprPtr> gen_corpus(const SignatureTable& sig, std::uint64_t seed,
                                int count, int size_bound,
                                bool closed_only = true);

}  // namespace needlab
