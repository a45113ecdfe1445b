#include "needlab/machine_lr.hpp"

#include <unordered_map>

#include <cassert>
#include <functional>
#include <map>
#include <set>

#include "needlab/print.hpp"

namespace needlab {

std::string label_to_string(LabelKind k) {
  switch (k) {
    case LabelKind::S: return "S";
    case LabelKind::T: return "T";
    case LabelKind::V: return "V";
    case LabelKind::W: return "W";
  }
  return "?";
}

std::string whnf_to_string(WhnfKind k) {
  return k == WhnfKind::AWHNF ? "AWHNF" : "CWHNF";
}

// ---------------------------------------------------------------------------
// Labeling
// ---------------------------------------------------------------------------
//
// A single marker chases the needed subterm: down the first child of
// applications, seq and case (their other children are never needed yet),
// through the top letrec's bindings when a bound variable turns up, stopping
// at values, at letrec nodes in demand position, and at free variables.
// Visiting a binding twice means the term cycles and can never reach a WHNF.

LabelingOutcome label_lr(const ExprPtr& root) {
  Labeling lab;
  const auto* top = get_if<Letrec>(root);
  const int n = top ? static_cast<int>(top->bindings.size()) : 0;
  std::unordered_map<Name, int> top_binder;
  if (top)
    for (int i = 0; i < n; ++i) top_binder[top->bindings[i].name] = i;

  Position p;
  if (top) {
    lab.labels[{}] = LabelKind::V;
    p = {n + 1};  // start at the body
  }

  for (;;) {
    ExprPtr node = subterm_at(root, p);
    if (is<App>(node) || is<Seq>(node) || is<Case>(node)) {
      lab.labels[p] = LabelKind::V;
      p.push_back(1);
      continue;
    }
    if (const auto* v = get_if<Var>(node)) {
      // The chase path crosses no binder except the top letrec, so any
      // variable here is either bound by the top letrec or free.
      auto it = top_binder.find(v->name);
      if (it == top_binder.end()) break;  // free variable: terminal
      const int j = it->second;
      if (!p.empty() && p[0] == j + 1)
        return LabelingOutcome{std::nullopt, p, "variable depends on itself"};
      const Position rhs_pos = {j + 1};
      if (lab.labels.count(rhs_pos))
        return LabelingOutcome{std::nullopt, p, "cyclic variable dependencies"};
      const bool in_body = (p[0] == n + 1);
      const bool whole_rhs = (!in_body && p.size() == 1);
      if (whole_rhs) {
        lab.labels[p] = LabelKind::W;
        lab.chase_w.push_back(p);
      } else {
        lab.labels[p] = LabelKind::V;
        lab.chase_v.push_back(p);
      }
      p = rhs_pos;
      continue;
    }
    break;  // Lam, Constr, Letrec in demand position, or non-source node
  }
  lab.labels[p] = LabelKind::S;
  lab.needed = p;
  return LabelingOutcome{std::move(lab), {}, ""};
}

// ---------------------------------------------------------------------------
// WHNF
// ---------------------------------------------------------------------------

bool is_lr_whnf(const ExprPtr& e, WhnfKind* kind) {
  auto out = [&](WhnfKind k) {
    if (kind) *kind = k;
    return true;
  };
  if (is<Lam>(e)) return out(WhnfKind::AWHNF);
  if (is<Constr>(e)) return out(WhnfKind::CWHNF);
  const auto* l = get_if<Letrec>(e);
  if (!l) return false;
  if (is<Lam>(l->body)) return out(WhnfKind::AWHNF);
  if (is<Constr>(l->body)) return out(WhnfKind::CWHNF);
  const auto* v = get_if<Var>(l->body);
  if (!v) return false;
  // Variable chain from the body to a constructor binding. A chain ending in
  // an abstraction is not a WHNF: the abstraction still gets copied out.
  std::unordered_map<Name, int> idx;
  for (std::size_t i = 0; i < l->bindings.size(); ++i) idx[l->bindings[i].name] = i;
  std::set<int> visited;
  Name cur = v->name;
  for (;;) {
    auto it = idx.find(cur);
    if (it == idx.end()) return false;
    if (!visited.insert(it->second).second) return false;  // cycle
    const ExprPtr& rhs = l->bindings[it->second].rhs;
    if (is<Constr>(rhs)) return out(WhnfKind::CWHNF);
    if (const auto* w = get_if<Var>(rhs)) {
      cur = w->name;
      continue;
    }
    return false;
  }
}

// ---------------------------------------------------------------------------
// Stepping
// ---------------------------------------------------------------------------

namespace {

// Case alternative for a constructor, or nullptr.
const Alt* alt_for(const Case& c, const Name& ctor) {
  for (const auto& a : c.alts)
    if (a.ctor == ctor) return &a;
  return nullptr;
}

}  // namespace

StepResult step_lr(const ExprPtr& e) {
  WhnfKind wk;
  if (is_lr_whnf(e, &wk)) return StepResult::whnf_result(wk);

  LabelingOutcome lo = label_lr(e);
  if (!lo.ok()) return StepResult::stuck(lo.reason, lo.fail_at);
  const Labeling& lab = *lo.success;
  const Position& needed = lab.needed;
  ExprPtr node = subterm_at(e, needed);

  if (is<Var>(node))
    return StepResult::stuck("free variable in demand position", needed);
  if (needed.empty())
    return StepResult::stuck("no rule applies", needed);

  Position parent_pos(needed.begin(), needed.end() - 1);
  ExprPtr parent = subterm_at(e, parent_pos);
  const int slot = needed.back();

  // Demanded subterm under an application / seq / case node.
  if (const auto* a = get_if<App>(parent); a && slot == 1) {
    if (const auto* l = get_if<Lam>(node)) {
      ExprPtr red = letrec({Binding{l->binder, a->arg}}, l->body);
      return StepResult::reduced(replace_at(e, parent_pos, red), "lbeta", parent_pos);
    }
    if (const auto* l = get_if<Letrec>(node)) {
      ExprPtr red = letrec(l->bindings, app(l->body, a->arg));
      return StepResult::reduced(replace_at(e, parent_pos, red), "lapp", parent_pos);
    }
    return StepResult::stuck("constructor applied as function", parent_pos);
  }
  if (const auto* s = get_if<Seq>(parent); s && slot == 1) {
    if (is_value(node))
      return StepResult::reduced(replace_at(e, parent_pos, s->second), "seq-c", parent_pos);
    if (const auto* l = get_if<Letrec>(node)) {
      ExprPtr red = letrec(l->bindings, seq(l->body, s->second));
      return StepResult::reduced(replace_at(e, parent_pos, red), "lseq", parent_pos);
    }
    return StepResult::stuck("seq scrutinee is not evaluable", parent_pos);
  }
  if (const auto* c = get_if<Case>(parent); c && slot == 1) {
    if (const auto* k = get_if<Constr>(node)) {
      const Alt* alt = alt_for(*c, k->ctor);
      if (!alt) return StepResult::stuck("case type mismatch", parent_pos);
      ExprPtr red;
      if (alt->vars.empty()) {
        red = alt->rhs;
      } else {
        std::vector<Binding> bs;
        for (std::size_t i = 0; i < alt->vars.size(); ++i)
          bs.push_back(Binding{alt->vars[i], k->args[i]});
        red = letrec(std::move(bs), alt->rhs);
      }
      return StepResult::reduced(replace_at(e, parent_pos, red), "case-c", parent_pos);
    }
    if (is<Lam>(node))
      return StepResult::stuck("case scrutinee is an abstraction", parent_pos);
    if (const auto* l = get_if<Letrec>(node)) {
      ExprPtr red = letrec(l->bindings, case_of(c->type_name, l->body, c->alts));
      return StepResult::reduced(replace_at(e, parent_pos, red), "lcase", parent_pos);
    }
    return StepResult::stuck("case scrutinee is not evaluable", parent_pos);
  }

  // Demanded subterm sits in the top letrec.
  const auto* top = get_if<Letrec>(e);
  if (top && parent_pos.empty()) {
    const int n = static_cast<int>(top->bindings.size());
    if (slot == n + 1) {
      // Demanded body: only a letrec can be demanded here (values and chains
      // were caught by the WHNF check, variables chase or are free).
      if (const auto* l = get_if<Letrec>(node)) {
        std::vector<Binding> bs = top->bindings;
        bs.insert(bs.end(), l->bindings.begin(), l->bindings.end());
        return StepResult::reduced(letrec(std::move(bs), l->body), "llet-in", {});
      }
      return StepResult::stuck("no rule applies to the letrec body", needed);
    }
    const int j = slot - 1;  // demanded binding index
    if (const auto* l = get_if<Letrec>(node)) {
      // Flatten the nested letrec into the top environment.
      std::vector<Binding> bs(top->bindings.begin(), top->bindings.begin() + j);
      bs.insert(bs.end(), l->bindings.begin(), l->bindings.end());
      bs.push_back(Binding{top->bindings[j].name, l->body});
      bs.insert(bs.end(), top->bindings.begin() + j + 1, top->bindings.end());
      return StepResult::reduced(letrec(std::move(bs), top->body), "llet-e", {});
    }
    auto target = lab.target();
    assert(target && "value in a binding is only demanded through a chase");
    const bool target_in_body = ((*target)[0] == n + 1);
    if (is<Lam>(node)) {
      // Copy the abstraction to the use site.
      return StepResult::reduced(replace_at(e, *target, node),
                                 target_in_body ? "cp-in" : "cp-e", *target);
    }
    if (const auto* k = get_if<Constr>(node)) {
      Position tparent(target->begin(), target->end() - 1);
      ExprPtr tp = subterm_at(e, tparent);
      if (const auto* s = get_if<Seq>(tp)) {
        return StepResult::reduced(replace_at(e, tparent, s->second),
                                   target_in_body ? "seq-in" : "seq-e", tparent);
      }
      if (const auto* c = get_if<Case>(tp)) {
        const Alt* alt = alt_for(*c, k->ctor);
        if (!alt) return StepResult::stuck("case type mismatch", tparent);
        const std::string rule = target_in_body ? "case-in" : "case-e";
        if (alt->vars.empty())
          return StepResult::reduced(replace_at(e, tparent, alt->rhs), rule, tparent);
        // Share the constructor arguments through fresh bindings so the
        // scrutinee binding stays a constructor application.
        NameSupply fresh;
        std::vector<Name> ys;
        for (std::size_t i = 0; i < k->args.size(); ++i) ys.push_back(fresh.fresh());
        std::vector<Binding> pattern_bs;
        std::vector<ExprPtr> yvars;
        for (std::size_t i = 0; i < ys.size(); ++i) {
          pattern_bs.push_back(Binding{alt->vars[i], var(ys[i])});
          yvars.push_back(var(ys[i]));
        }
        ExprPtr replaced = replace_at(e, tparent, letrec(std::move(pattern_bs), alt->rhs));
        const auto& topl = as<Letrec>(replaced);
        std::vector<Binding> bs = topl.bindings;
        bs[j].rhs = constr(k->ctor, std::move(yvars));
        for (std::size_t i = 0; i < ys.size(); ++i)
          bs.push_back(Binding{ys[i], k->args[i]});
        return StepResult::reduced(letrec(std::move(bs), topl.body), rule, tparent);
      }
      return StepResult::stuck("constructor applied as function", tparent);
    }
    return StepResult::stuck("no rule applies to the demanded binding", needed);
  }

  return StepResult::stuck("no rule applies", needed);
}

// ---------------------------------------------------------------------------
// Evaluation driver (shared by all machines)
// ---------------------------------------------------------------------------

EvalOutcome run_machine(const ExprPtr& start,
                        const std::function<StepResult(const ExprPtr&)>& stepf,
                        const EvalLimits& limits, Trace* trace) {
  ExprPtr e = canonicalize(start);
  auto key = [](const std::string& s) {
    std::uint64_t h2 = 1469598103934665603ull;
    for (char c : s) {
      h2 ^= static_cast<unsigned char>(c);
      h2 *= 1099511628211ull;
    }
    return std::pair<std::uint64_t, std::uint64_t>(std::hash<std::string>{}(s), h2);
  };
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  if (limits.detect_cycles) seen.insert(key(print(e)));
  int steps = 0;
  for (;;) {
    StepResult r = stepf(e);
    if (r.kind == StepResult::Kind::Whnf)
      return EvalOutcome{EvalOutcome::Kind::Converged, e, r.whnf, steps, ""};
    if (r.kind == StepResult::Kind::Stuck)
      return EvalOutcome{EvalOutcome::Kind::Stuck, e, std::nullopt, steps, r.reason};
    if (steps >= limits.max_steps)
      return EvalOutcome{EvalOutcome::Kind::BudgetExhausted, e, std::nullopt, steps, ""};
    e = canonicalize(r.next);
    ++steps;
    if (trace) trace->push_back(TraceEntry{steps, r.rule, r.redex, e});
    if (term_size(e) > limits.size_limit)
      return EvalOutcome{EvalOutcome::Kind::BudgetExhausted, e, std::nullopt, steps,
                         "size-limit"};
    if (limits.detect_cycles && !seen.insert(key(print(e))).second)
      return EvalOutcome{EvalOutcome::Kind::Stuck, e, std::nullopt, steps, "state-cycle"};
  }
}

EvalOutcome evaluate_lr(const ExprPtr& e, const EvalLimits& limits, Trace* trace) {
  return run_machine(e, step_lr, limits, trace);
}

// ---------------------------------------------------------------------------
// Unrestricted transformations
// ---------------------------------------------------------------------------

namespace {

void all_positions(const ExprPtr& e, Position& cur, std::vector<Position>& out) {
  out.push_back(cur);
  const int n = child_count(e);
  for (int i = 1; i <= n; ++i) {
    cur.push_back(i);
    all_positions(child_at(e, i), cur, out);
    cur.pop_back();
  }
}

// Free occurrences of `x` in e (shadow-aware), positions relative to e.
void occurrences(const ExprPtr& e, const Name& x, Position& cur,
                 std::vector<Position>& out) {
  if (const auto* v = get_if<Var>(e)) {
    if (v->name == x) out.push_back(cur);
    return;
  }
  if (const auto* l = get_if<Lam>(e)) {
    if (l->binder == x) return;
    cur.push_back(1);
    occurrences(l->body, x, cur, out);
    cur.pop_back();
    return;
  }
  if (const auto* l = get_if<Letrec>(e)) {
    for (const auto& b : l->bindings)
      if (b.name == x) return;
    const int n = child_count(e);
    for (int i = 1; i <= n; ++i) {
      cur.push_back(i);
      occurrences(child_at(e, i), x, cur, out);
      cur.pop_back();
    }
    return;
  }
  if (const auto* c = get_if<Case>(e)) {
    cur.push_back(1);
    occurrences(c->scrutinee, x, cur, out);
    cur.pop_back();
    for (std::size_t i = 0; i < c->alts.size(); ++i) {
      bool shadowed = false;
      for (const auto& v : c->alts[i].vars) shadowed = shadowed || v == x;
      if (shadowed) continue;
      cur.push_back(2 + static_cast<int>(i));
      occurrences(c->alts[i].rhs, x, cur, out);
      cur.pop_back();
    }
    return;
  }
  const int n = child_count(e);
  for (int i = 1; i <= n; ++i) {
    cur.push_back(i);
    occurrences(child_at(e, i), x, cur, out);
    cur.pop_back();
  }
}

// Variable chains x1 = x2 = ... inside one letrec starting at binding j:
// returns the set of (chain-end binder name) reachable, including x_j itself.
std::vector<Name> chain_ends(const Letrec& l, int j) {
  std::map<Name, std::vector<int>> aliases;  // name -> bindings whose rhs is that var
  for (std::size_t i = 0; i < l.bindings.size(); ++i)
    if (const auto* v = get_if<Var>(l.bindings[i].rhs))
      aliases[v->name].push_back(static_cast<int>(i));
  std::vector<Name> ends;
  std::set<int> visited;
  std::vector<int> work{j};
  while (!work.empty()) {
    int k = work.back();
    work.pop_back();
    if (!visited.insert(k).second) continue;
    ends.push_back(l.bindings[k].name);
    auto it = aliases.find(l.bindings[k].name);
    if (it != aliases.end())
      for (int next : it->second) work.push_back(next);
  }
  return ends;
}

// Used-binding closure from the body's free variables.
std::set<int> used_closure(const Letrec& l) {
  std::unordered_map<Name, int> idx;
  for (std::size_t i = 0; i < l.bindings.size(); ++i) idx[l.bindings[i].name] = i;
  std::set<int> used;
  std::vector<int> work;
  for (const auto& n : free_vars(l.body)) {
    auto it = idx.find(n);
    if (it != idx.end()) work.push_back(it->second);
  }
  while (!work.empty()) {
    int k = work.back();
    work.pop_back();
    if (!used.insert(k).second) continue;
    for (const auto& n : free_vars(l.bindings[k].rhs)) {
      auto it = idx.find(n);
      if (it != idx.end()) work.push_back(it->second);
    }
  }
  return used;
}

}  // namespace

const std::vector<std::string>& transformation_rules() {
  static const std::vector<std::string> rules = {
      "gc",     "gc2",     "lwas-app", "lwas-constr", "lwas-seq", "lbeta",
      "cp-in",  "cp-e",    "lapp",     "lcase",       "lseq",     "llet-in",
      "llet-e", "seq-c",   "seq-in",   "seq-e",       "case-c",   "case-in",
      "case-e", "gcp",     "bad-seq"};
  return rules;
}

namespace {

// All rewrites of `rule` whose redex is the node at position `at` in `e`.
std::vector<ExprPtr> rewrites_at(const std::string& rule, const ExprPtr& e,
                                 const Position& at) {
  std::vector<ExprPtr> out;
  ExprPtr node = subterm_at(e, at);
  auto emit = [&](ExprPtr red) { out.push_back(replace_at(e, at, std::move(red))); };

  if (rule == "gc") {
    if (const auto* l = get_if<Letrec>(node)) {
      std::set<Name> fv = free_vars(l->body);
      for (const auto& b : l->bindings)
        if (fv.count(b.name)) return out;
      emit(l->body);
    }
    return out;
  }
  if (rule == "gc2") {
    if (const auto* l = get_if<Letrec>(node)) {
      std::set<int> used = used_closure(*l);
      if (used.empty() || used.size() == l->bindings.size()) return out;
      std::vector<Binding> kept;
      for (std::size_t i = 0; i < l->bindings.size(); ++i)
        if (used.count(static_cast<int>(i))) kept.push_back(l->bindings[i]);
      emit(letrec(std::move(kept), l->body));
    }
    return out;
  }
  if (rule == "lwas-app") {
    if (const auto* a = get_if<App>(node))
      if (const auto* l = get_if<Letrec>(a->arg))
        emit(letrec(l->bindings, app(a->fun, l->body)));
    return out;
  }
  if (rule == "lwas-constr") {
    if (const auto* c = get_if<Constr>(node)) {
      for (std::size_t i = 0; i < c->args.size(); ++i)
        if (const auto* l = get_if<Letrec>(c->args[i])) {
          std::vector<ExprPtr> args = c->args;
          args[i] = l->body;
          emit(letrec(l->bindings, constr(c->ctor, std::move(args))));
          break;  // leftmost only
        }
    }
    return out;
  }
  if (rule == "lwas-seq") {
    if (const auto* s = get_if<Seq>(node))
      if (const auto* l = get_if<Letrec>(s->second))
        emit(letrec(l->bindings, seq(s->first, l->body)));
    return out;
  }
  if (rule == "lbeta") {
    if (const auto* a = get_if<App>(node))
      if (const auto* l = get_if<Lam>(a->fun))
        emit(letrec({Binding{l->binder, a->arg}}, l->body));
    return out;
  }
  if (rule == "lapp") {
    if (const auto* a = get_if<App>(node))
      if (const auto* l = get_if<Letrec>(a->fun))
        emit(letrec(l->bindings, app(l->body, a->arg)));
    return out;
  }
  if (rule == "lcase") {
    if (const auto* c = get_if<Case>(node))
      if (const auto* l = get_if<Letrec>(c->scrutinee))
        emit(letrec(l->bindings, case_of(c->type_name, l->body, c->alts)));
    return out;
  }
  if (rule == "lseq") {
    if (const auto* s = get_if<Seq>(node))
      if (const auto* l = get_if<Letrec>(s->first))
        emit(letrec(l->bindings, seq(l->body, s->second)));
    return out;
  }
  if (rule == "llet-in") {
    if (const auto* l = get_if<Letrec>(node))
      if (const auto* inner = get_if<Letrec>(l->body)) {
        std::set<Name> outer_names;
        for (const auto& b : l->bindings) outer_names.insert(b.name);
        for (const auto& b : inner->bindings)
          if (outer_names.count(b.name)) return out;
        std::vector<Binding> bs = l->bindings;
        bs.insert(bs.end(), inner->bindings.begin(), inner->bindings.end());
        emit(letrec(std::move(bs), inner->body));
      }
    return out;
  }
  if (rule == "llet-e") {
    if (const auto* l = get_if<Letrec>(node)) {
      std::set<Name> outer_names;
      for (const auto& b : l->bindings) outer_names.insert(b.name);
      for (std::size_t j = 0; j < l->bindings.size(); ++j) {
        const auto* inner = get_if<Letrec>(l->bindings[j].rhs);
        if (!inner) continue;
        bool collide = false;
        for (const auto& b : inner->bindings) collide = collide || outer_names.count(b.name);
        if (collide) continue;
        std::vector<Binding> bs(l->bindings.begin(), l->bindings.begin() + j);
        bs.insert(bs.end(), inner->bindings.begin(), inner->bindings.end());
        bs.push_back(Binding{l->bindings[j].name, inner->body});
        bs.insert(bs.end(), l->bindings.begin() + j + 1, l->bindings.end());
        emit(letrec(std::move(bs), l->body));
      }
    }
    return out;
  }
  if (rule == "seq-c") {
    if (const auto* s = get_if<Seq>(node))
      if (is_value(s->first)) emit(s->second);
    return out;
  }
  if (rule == "case-c") {
    if (const auto* c = get_if<Case>(node))
      if (const auto* k = get_if<Constr>(c->scrutinee))
        if (const Alt* alt = alt_for(*c, k->ctor)) {
          if (alt->vars.empty()) {
            emit(alt->rhs);
          } else {
            std::vector<Binding> bs;
            for (std::size_t i = 0; i < alt->vars.size(); ++i)
              bs.push_back(Binding{alt->vars[i], k->args[i]});
            emit(letrec(std::move(bs), alt->rhs));
          }
        }
    return out;
  }
  if (rule == "bad-seq") {
    if (const auto* s = get_if<Seq>(node)) emit(s->second);
    return out;
  }
  if (rule == "gcp") {
    if (const auto* l = get_if<Letrec>(node)) {
      const int n = static_cast<int>(l->bindings.size());
      for (int j = 0; j < n; ++j) {
        std::vector<Position> occs;
        Position cur;
        occurrences(l->body, l->bindings[j].name, cur, occs);
        for (const auto& o : occs) {
          Position full{n + 1};
          full.insert(full.end(), o.begin(), o.end());
          emit(replace_at(node, full, l->bindings[j].rhs));
        }
      }
    }
    return out;
  }

  // Chain rules: copy / use of a value binding through a variable chain.
  const bool is_cp = rule == "cp-in" || rule == "cp-e";
  const bool is_seqch = rule == "seq-in" || rule == "seq-e";
  const bool is_casech = rule == "case-in" || rule == "case-e";
  if (!(is_cp || is_seqch || is_casech)) throw BadExpr("unknown rule: " + rule);
  const bool body_variant = rule == "cp-in" || rule == "seq-in" || rule == "case-in";

  const auto* l = get_if<Letrec>(node);
  if (!l) return out;
  const int n = static_cast<int>(l->bindings.size());
  for (int j = 0; j < n; ++j) {
    const ExprPtr& v = l->bindings[j].rhs;
    if (is_cp && !is<Lam>(v)) continue;
    if ((is_seqch || is_casech) && !is<Constr>(v)) continue;
    for (const Name& end : chain_ends(*l, j)) {
      // Occurrence regions: the body for -in rules, binding right-hand sides
      // for -e rules.
      std::vector<std::pair<int, Position>> occs;  // (region slot, local pos)
      if (body_variant) {
        std::vector<Position> local;
        Position cur;
        occurrences(l->body, end, cur, local);
        for (auto& o : local) occs.emplace_back(n + 1, o);
      } else {
        for (int k = 0; k < n; ++k) {
          std::vector<Position> local;
          Position cur;
          occurrences(l->bindings[k].rhs, end, cur, local);
          for (auto& o : local) occs.emplace_back(k + 1, o);
        }
      }
      for (const auto& [region, local] : occs) {
        Position full{region};
        full.insert(full.end(), local.begin(), local.end());
        if (is_cp) {
          emit(replace_at(node, full, v));
          continue;
        }
        if (full.size() < 2) continue;  // chain use rules need a seq/case parent
        Position parent_pos(full.begin(), full.end() - 1);
        if (full.back() != 1) continue;
        ExprPtr parent = subterm_at(node, parent_pos);
        const auto& k = as<Constr>(v);
        if (is_seqch) {
          if (const auto* s = get_if<Seq>(parent))
            emit(replace_at(node, parent_pos, s->second));
          continue;
        }
        const auto* c = get_if<Case>(parent);
        if (!c) continue;
        const Alt* alt = alt_for(*c, k.ctor);
        if (!alt) continue;
        if (alt->vars.empty()) {
          emit(replace_at(node, parent_pos, alt->rhs));
          continue;
        }
        NameSupply fresh;
        std::vector<Binding> pattern_bs;
        std::vector<ExprPtr> yvars;
        std::vector<Name> ys;
        for (std::size_t i = 0; i < k.args.size(); ++i) ys.push_back(fresh.fresh());
        for (std::size_t i = 0; i < ys.size(); ++i) {
          pattern_bs.push_back(Binding{alt->vars[i], var(ys[i])});
          yvars.push_back(var(ys[i]));
        }
        ExprPtr replaced = replace_at(node, parent_pos, letrec(pattern_bs, alt->rhs));
        const auto& topl = as<Letrec>(replaced);
        std::vector<Binding> bs = topl.bindings;
        bs[j].rhs = constr(k.ctor, yvars);
        for (std::size_t i = 0; i < ys.size(); ++i)
          bs.push_back(Binding{ys[i], k.args[i]});
        emit(letrec(std::move(bs), topl.body));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<RuleApplication> find_applications(const std::string& rule,
                                               const ExprPtr& e) {
  std::vector<RuleApplication> out;
  std::vector<Position> ps;
  Position cur;
  all_positions(e, cur, ps);
  for (const auto& p : ps)
    for (auto& r : rewrites_at(rule, e, p))
      out.push_back(RuleApplication{p, canonicalize(r)});
  return out;
}

ExprPtr apply_transformation_lr(const std::string& rule, const ExprPtr& e,
                                const Position& at) {
  auto rs = rewrites_at(rule, e, at);
  if (rs.empty())
    throw BadExpr("rule " + rule + " does not apply at " + position_to_string(at));
  return canonicalize(rs[0]);
}

}  // namespace needlab
