#include "needlab/simcheck.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "needlab/machine_lcc.hpp"
#include "needlab/machine_lr.hpp"
#include "needlab/machine_name.hpp"
#include "needlab/print.hpp"

namespace needlab {

// ---------------------------------------------------------------------------
// Calculus selection
// ---------------------------------------------------------------------------

std::string calculus_to_string(Calculus c) {
  switch (c) {
    case Calculus::LR: return "lr";
    case Calculus::Name: return "name";
    case Calculus::Lcc: return "lcc";
  }
  return "?";
}

EvalOutcome eval_in(Calculus c, const ExprPtr& e, const EvalLimits& limits) {
  switch (c) {
    case Calculus::LR: return evaluate_lr(e, limits);
    case Calculus::Name: return evaluate_name(e, limits);
    case Calculus::Lcc: return evaluate_lcc(e, limits);
  }
  throw BadExpr("unknown calculus");
}

const SignatureTable& SimConfig::signature() const {
  static const SignatureTable fallback = default_signature();
  return sig ? *sig : fallback;
}

// ---------------------------------------------------------------------------
// Observation contexts
// ---------------------------------------------------------------------------

std::string print_q(const QContext& q) {
  switch (q.kind) {
    case QContext::Kind::Apply: return "app(" + print(q.arg) + ")";
    case QContext::Kind::CaseSelect:
      return "select_" + q.type_name + "(" + q.ctor + "." +
             std::to_string(q.index) + ")";
    case QContext::Kind::CaseProbe:
      return "probe_" + q.type_name + "(" + q.ctor + ")";
  }
  return "?";
}

std::string print_q_chain(const std::vector<QContext>& chain) {
  if (chain.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i) out += " then ";
    out += print_q(chain[i]);
  }
  return out;
}

ExprPtr apply_q(const QContext& q, const ExprPtr& e, const SignatureTable& sig) {
  if (q.kind == QContext::Kind::Apply) return app(e, q.arg);
  const TypeInfo* ti = sig.find_type(q.type_name);
  if (!ti) throw BadExpr("observation on undeclared type: " + q.type_name);
  std::vector<Alt> alts;
  int fresh = 0;
  for (const ConstrInfo& ci : ti->constructors) {
    std::vector<Name> vars;
    vars.reserve(ci.arity);
    for (int i = 0; i < ci.arity; ++i)
      vars.push_back("_q" + std::to_string(++fresh));
    ExprPtr rhs;
    if (ci.name != q.ctor) {
      rhs = omega();
    } else if (q.kind == QContext::Kind::CaseProbe) {
      rhs = constr("True", {});
    } else {
      if (q.index < 1 || q.index > ci.arity)
        throw BadExpr("selection index out of range for " + q.ctor);
      rhs = var(vars[static_cast<std::size_t>(q.index - 1)]);
    }
    alts.push_back(Alt{ci.name, std::move(vars), std::move(rhs)});
  }
  return case_of(q.type_name, e, std::move(alts));
}

std::vector<ExprPtr> enumerate_CE(const SignatureTable& sig, int size_bound,
                                  const std::vector<ExprPtr>& abstraction_pool) {
  std::vector<std::vector<ExprPtr>> by_size(
      static_cast<std::size_t>(std::max(size_bound, 0)) + 1);
  std::set<std::string> seen;
  auto add = [&](int size, const ExprPtr& e) {
    if (seen.insert(print(e)).second)
      by_size[static_cast<std::size_t>(size)].push_back(e);
  };

  if (size_bound >= 1) {
    add(1, omega());
    add(1, lam("x", var("x")));
    add(1, lam("x", omega()));
    add(1, lam("x", lam("y", var("x"))));
    for (const ExprPtr& e : abstraction_pool)
      if (is<Lam>(e) && is_closed(e)) add(1, e);
    for (const TypeInfo& ti : sig.types())
      for (const ConstrInfo& ci : ti.constructors)
        if (ci.arity == 0) add(1, constr(ci.name, {}));
  }

  for (int size = 2; size <= size_bound; ++size) {
    for (const TypeInfo& ti : sig.types()) {
      for (const ConstrInfo& ci : ti.constructors) {
        if (ci.arity == 0 || ci.arity > size - 1) continue;
        // Enumerate argument size splits summing to size - 1, then the
        // cartesian product of arguments of those exact sizes.
        std::vector<ExprPtr> args(static_cast<std::size_t>(ci.arity));
        std::function<void(int, int)> fill = [&](int slot, int budget) {
          const int remaining = ci.arity - slot;
          if (remaining == 0) {
            if (budget == 0) add(size, constr(ci.name, args));
            return;
          }
          for (int s = 1; s + (remaining - 1) <= budget; ++s) {
            for (const ExprPtr& a : by_size[static_cast<std::size_t>(s)]) {
              args[static_cast<std::size_t>(slot)] = a;
              fill(slot + 1, budget - s);
            }
          }
        };
        fill(0, size - 1);
      }
    }
  }

  std::vector<ExprPtr> out;
  for (const auto& bucket : by_size)
    out.insert(out.end(), bucket.begin(), bucket.end());
  return out;
}

std::vector<QContext> enumerate_Q(const SignatureTable& sig,
                                  const std::vector<ExprPtr>& ce) {
  std::vector<QContext> qs;
  for (const TypeInfo& ti : sig.types()) {
    for (const ConstrInfo& ci : ti.constructors) {
      QContext probe;
      probe.kind = QContext::Kind::CaseProbe;
      probe.type_name = ti.name;
      probe.ctor = ci.name;
      qs.push_back(std::move(probe));
    }
  }
  for (const TypeInfo& ti : sig.types()) {
    for (const ConstrInfo& ci : ti.constructors) {
      for (int i = 1; i <= ci.arity; ++i) {
        QContext sel;
        sel.kind = QContext::Kind::CaseSelect;
        sel.type_name = ti.name;
        sel.ctor = ci.name;
        sel.index = i;
        qs.push_back(std::move(sel));
      }
    }
  }
  for (const ExprPtr& arg : ce) {
    QContext ap;
    ap.kind = QContext::Kind::Apply;
    ap.arg = arg;
    qs.push_back(std::move(ap));
  }
  return qs;
}

// ---------------------------------------------------------------------------
// Bounded similarity
// ---------------------------------------------------------------------------

SimVerdict SimVerdict::holds_to(int k) {
  SimVerdict v;
  v.kind = Kind::HoldsToDepth;
  v.depth = k;
  return v;
}

SimVerdict SimVerdict::refuted_by(std::vector<QContext> w, std::string detail) {
  SimVerdict v;
  v.kind = Kind::Refuted;
  v.witness = std::move(w);
  v.detail = std::move(detail);
  return v;
}

SimVerdict SimVerdict::budget(std::string detail) {
  SimVerdict v;
  v.kind = Kind::BudgetExhausted;
  v.detail = std::move(detail);
  return v;
}

std::string print_verdict(const SimVerdict& v) {
  switch (v.kind) {
    case SimVerdict::Kind::HoldsToDepth:
      return "HoldsToDepth(" + std::to_string(v.depth) + ")";
    case SimVerdict::Kind::Refuted:
      return "Refuted[" + print_q_chain(v.witness) + "]";
    case SimVerdict::Kind::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

namespace {

void require_closed(const ExprPtr& e, const char* side) {
  if (!is_closed(e))
    throw BadExpr(std::string("similarity check requires closed terms: ") +
                  side + " has free variables");
}

// Observation set for one check: every probe and selection, plus the first
// args_per_level enumerated arguments.
std::vector<QContext> observation_set(const SimConfig& cfg) {
  const SignatureTable& sig = cfg.signature();
  std::vector<ExprPtr> ce = enumerate_CE(sig, cfg.arg_size);
  if (cfg.args_per_level >= 0 &&
      ce.size() > static_cast<std::size_t>(cfg.args_per_level))
    ce.resize(static_cast<std::size_t>(cfg.args_per_level));
  return enumerate_Q(sig, ce);
}

}  // namespace

SimVerdict bounded_le_Q(const ExprPtr& s1, const ExprPtr& s2,
                        const SimConfig& cfg) {
  require_closed(s1, "left");
  require_closed(s2, "right");
  const SignatureTable& sig = cfg.signature();
  const std::vector<QContext> qs = observation_set(cfg);

  struct Item {
    ExprPtr a, b;
    std::vector<QContext> path;
  };
  std::deque<Item> queue;
  queue.push_back(Item{s1, s2, {}});
  bool ambiguous = false;
  std::string ambig_detail;

  while (!queue.empty()) {
    Item it = std::move(queue.front());
    queue.pop_front();

    // Identical sides of a deterministic machine behave identically: the
    // whole subtree holds, even where evaluation would be inconclusive.
    if (alpha_eq(it.a, it.b)) continue;

    EvalOutcome oa = eval_in(cfg.calculus, it.a, cfg.limits());
    if (oa.definitely_diverges()) continue;  // vacuous: extensions stay vacuous
    if (!oa.converged()) {
      ambiguous = true;
      if (ambig_detail.empty())
        ambig_detail = "left side inconclusive at chain [" +
                       print_q_chain(it.path) + "]";
      continue;
    }
    EvalOutcome ob = eval_in(cfg.calculus, it.b, cfg.limits());
    if (ob.definitely_diverges())
      return SimVerdict::refuted_by(it.path,
                                    "right side diverges: " + ob.reason);
    if (!ob.converged()) {
      ambiguous = true;
      if (ambig_detail.empty())
        ambig_detail = "right side inconclusive at chain [" +
                       print_q_chain(it.path) + "]";
      continue;
    }
    if (static_cast<int>(it.path.size()) >= cfg.k) continue;
    for (const QContext& q : qs) {
      std::vector<QContext> path = it.path;
      path.push_back(q);
      queue.push_back(
          Item{apply_q(q, it.a, sig), apply_q(q, it.b, sig), std::move(path)});
    }
  }
  return ambiguous ? SimVerdict::budget(ambig_detail)
                   : SimVerdict::holds_to(cfg.k);
}

namespace {

// Shared state for the evaluate-then-probe recursion. Results are memoized on
// (canonical left, canonical right, remaining depth): distinct observation
// orders frequently reach the same value pair.
struct IterState {
  const SimConfig& cfg;
  const SignatureTable& sig;
  const std::vector<QContext>& qs;

  enum class R { Holds, Budget, Refuted };
  struct Result {
    R r = R::Holds;
    std::vector<QContext> suffix;  // for Refuted: observations from here down
    std::string detail;
  };
  std::unordered_map<std::string, Result> memo;

  Result run(const ExprPtr& a, const ExprPtr& b, int depth) {
    const std::string key = print(canonicalize(a)) + '\x01' +
                            print(canonicalize(b)) + '\x01' +
                            std::to_string(depth);
    auto hit = memo.find(key);
    if (hit != memo.end()) return hit->second;
    Result res = compute(a, b, depth);
    memo.emplace(key, res);
    return res;
  }

  Result compute(const ExprPtr& a, const ExprPtr& b, int depth) {
    Result res;
    // Deterministic machines: alpha-equal sides hold at every depth.
    if (alpha_eq(a, b)) return res;
    EvalOutcome oa = eval_in(cfg.calculus, a, cfg.limits());
    if (oa.definitely_diverges()) return res;  // vacuously holds
    if (!oa.converged()) {
      res.r = R::Budget;
      res.detail = "left side inconclusive";
      return res;
    }
    EvalOutcome ob = eval_in(cfg.calculus, b, cfg.limits());
    if (ob.definitely_diverges()) {
      res.r = R::Refuted;
      res.detail = "right side diverges: " + ob.reason;
      return res;
    }
    if (!ob.converged()) {
      res.r = R::Budget;
      res.detail = "right side inconclusive";
      return res;
    }
    if (depth == 0) return res;
    bool budget = false;
    std::string budget_detail;
    for (const QContext& q : qs) {
      Result sub = run(apply_q(q, oa.final_expr, sig),
                       apply_q(q, ob.final_expr, sig), depth - 1);
      if (sub.r == R::Refuted) {
        res.r = R::Refuted;
        res.suffix.reserve(sub.suffix.size() + 1);
        res.suffix.push_back(q);
        res.suffix.insert(res.suffix.end(), sub.suffix.begin(),
                          sub.suffix.end());
        res.detail = sub.detail;
        return res;
      }
      if (sub.r == R::Budget && !budget) {
        budget = true;
        budget_detail = sub.detail;
      }
    }
    if (budget) {
      res.r = R::Budget;
      res.detail = budget_detail;
    }
    return res;
  }
};

}  // namespace

SimVerdict bounded_sim_iterates(const ExprPtr& s1, const ExprPtr& s2,
                                const SimConfig& cfg) {
  require_closed(s1, "left");
  require_closed(s2, "right");
  const std::vector<QContext> qs = observation_set(cfg);
  IterState st{cfg, cfg.signature(), qs, {}};
  IterState::Result r = st.run(s1, s2, cfg.k);
  switch (r.r) {
    case IterState::R::Holds: return SimVerdict::holds_to(cfg.k);
    case IterState::R::Budget: return SimVerdict::budget(r.detail);
    case IterState::R::Refuted:
      return SimVerdict::refuted_by(std::move(r.suffix), std::move(r.detail));
  }
  return SimVerdict::budget("unreachable");
}

std::pair<SimVerdict, SimVerdict> check_mutual_sim(const ExprPtr& s1,
                                                   const ExprPtr& s2,
                                                   const SimConfig& cfg) {
  auto check = cfg.use_chains ? bounded_le_Q : bounded_sim_iterates;
  return {check(s1, s2, cfg), check(s2, s1, cfg)};
}

SimVerdict open_extension_check(const ExprPtr& s1, const ExprPtr& s2,
                                const SimConfig& cfg, int n_substitutions) {
  std::set<Name> names;
  for (const Name& n : free_vars(s1)) names.insert(n);
  for (const Name& n : free_vars(s2)) names.insert(n);
  auto check = cfg.use_chains ? bounded_le_Q : bounded_sim_iterates;
  if (names.empty()) return check(s1, s2, cfg);

  const std::vector<Name> vars(names.begin(), names.end());
  const std::vector<ExprPtr> ce = enumerate_CE(cfg.signature(), cfg.arg_size);
  if (ce.empty()) throw BadExpr("no closed arguments available");

  // Walk assignments odometer-style over the size-ordered argument list, so
  // early substitutions use the smallest arguments.
  std::vector<std::size_t> idx(vars.size(), 0);
  bool ambiguous = false;
  std::string ambig_detail;
  for (int taken = 0; taken < n_substitutions; ++taken) {
    std::vector<std::pair<Name, ExprPtr>> pairs;
    std::string shown;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      pairs.emplace_back(vars[i], ce[idx[i]]);
      if (!shown.empty()) shown += ", ";
      shown += vars[i] + " -> " + print(ce[idx[i]]);
    }
    SimVerdict v = check(subst(s1, pairs), subst(s2, pairs), cfg);
    if (v.refuted()) {
      v.detail = "under {" + shown + "}" +
                 (v.detail.empty() ? "" : "; " + v.detail);
      return v;
    }
    if (!v.holds()) {
      ambiguous = true;
      if (ambig_detail.empty()) ambig_detail = "under {" + shown + "}";
    }
    // Advance the odometer; stop early once every assignment has been used.
    std::size_t pos = 0;
    while (pos < idx.size()) {
      if (++idx[pos] < ce.size()) break;
      idx[pos] = 0;
      ++pos;
    }
    if (pos == idx.size()) break;
  }
  return ambiguous ? SimVerdict::budget(ambig_detail)
                   : SimVerdict::holds_to(cfg.k);
}

std::optional<bool> check_admissibility(const ExprPtr& s, const QContext& q,
                                        const SimConfig& cfg) {
  const SignatureTable& sig = cfg.signature();
  EvalOutcome oqs = eval_in(cfg.calculus, apply_q(q, s, sig), cfg.limits());
  EvalOutcome os = eval_in(cfg.calculus, s, cfg.limits());
  if (os.converged()) {
    EvalOutcome oqv =
        eval_in(cfg.calculus, apply_q(q, os.final_expr, sig), cfg.limits());
    if (oqs.converged() && oqv.converged()) return true;
    if (oqs.definitely_diverges() && oqv.definitely_diverges()) return true;
    if (oqs.converged() && oqv.definitely_diverges()) return false;
    if (oqs.definitely_diverges() && oqv.converged()) return false;
    return std::nullopt;
  }
  if (os.definitely_diverges()) {
    // The right-hand side of the law is false; Q(s) must not converge.
    if (oqs.converged()) return false;
    if (oqs.definitely_diverges()) return true;
    return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Transformation correctness
// ---------------------------------------------------------------------------

std::string print_report(const TransformReport& r) {
  std::ostringstream os;
  os << "rule=" << r.rule << " instances=" << r.instances
     << " counterexamples=" << r.counterexamples
     << " inconclusive=" << r.inconclusive;
  return os.str();
}

TransformReport check_transformation(const std::string& rule,
                                     const std::vector<ExprPtr>& corpus,
                                     const SimConfig& cfg) {
  TransformReport rep;
  rep.rule = rule;
  auto verdict_name = [](const EvalOutcome& o) -> std::string {
    if (o.converged()) return "converged";
    if (o.definitely_diverges()) return "diverges(" + o.reason + ")";
    return "inconclusive";
  };
  for (const ExprPtr& s : corpus) {
    std::vector<RuleApplication> apps = find_applications(rule, s);
    if (apps.empty()) continue;
    EvalOutcome before = eval_in(cfg.calculus, s, cfg.limits());
    for (const RuleApplication& ap : apps) {
      EvalOutcome after = eval_in(cfg.calculus, ap.result, cfg.limits());
      ++rep.instances;
      const bool bc = before.converged();
      const bool ac = after.converged();
      if (bc && ac) continue;
      if (before.definitely_diverges() && after.definitely_diverges()) continue;
      if (bc != ac) {
        // One side converged and the other did not finish: counted as a
        // counterexample even when the failing side only ran out of budget,
        // since corpus terms converge well inside the step budget.
        ++rep.counterexamples;
        rep.witnesses.push_back(rule + " at " + position_to_string(ap.at) +
                                " on " + print(s) + ": before " +
                                verdict_name(before) + ", after " +
                                verdict_name(after));
      } else {
        ++rep.inconclusive;
      }
    }
  }
  return rep;
}

}  // namespace needlab
