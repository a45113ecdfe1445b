#include "needlab/machine_name.hpp"

namespace needlab {

// ---------------------------------------------------------------------------
// Labeling
// ---------------------------------------------------------------------------

namespace {

// Cheap demand walk: only the terminal matters for stepping.  The full
// label map built by label_name would cost quadratic time on states whose
// demand spine keeps deepening, so the machine uses this walk instead.
struct DemandWalk {
  Position needed;
  ExprPtr terminal;
  ExprPtr parent;  // null when the terminal is the root
};

DemandWalk demand_walk(const ExprPtr& e) {
  DemandWalk w;
  ExprPtr prev;
  ExprPtr cur = e;
  bool in_spine = false;  // set once the walk leaves the binder-group prefix
  for (;;) {
    if (auto* l = get_if<Letrec>(cur)) {
      if (in_spine) break;  // hoisting redex; terminal
      prev = cur;
      w.needed.push_back(static_cast<int>(l->bindings.size()) + 1);
      cur = l->body;
      continue;
    }
    ExprPtr next;
    if (auto* a = get_if<App>(cur)) next = a->fun;
    if (auto* s = get_if<Seq>(cur)) next = s->first;
    if (auto* c = get_if<Case>(cur)) next = c->scrutinee;
    if (!next) break;  // Var, Lam or Constr; terminal
    in_spine = true;
    prev = cur;
    w.needed.push_back(1);
    cur = next;
  }
  w.terminal = cur;
  w.parent = prev;
  return w;
}

}  // namespace

LabelingOutcome label_name(const ExprPtr& e) {
  Labeling lab;
  Position p;
  LabelKind x = LabelKind::T;
  bool in_spine = false;
  ExprPtr cur = e;
  for (;;) {
    lab.labels[p] = x;
    if (auto* l = get_if<Letrec>(cur)) {
      if (in_spine) break;  // hoisting redex; terminal
      p.push_back(static_cast<int>(l->bindings.size()) + 1);
      cur = l->body;
      continue;
    }
    ExprPtr next;
    if (auto* a = get_if<App>(cur)) next = a->fun;
    if (auto* s = get_if<Seq>(cur)) next = s->first;
    if (auto* c = get_if<Case>(cur)) next = c->scrutinee;
    if (!next) break;  // Var, Lam or Constr; terminal
    in_spine = true;
    x = LabelKind::S;
    p.push_back(1);
    cur = next;
  }
  lab.needed = p;
  LabelingOutcome out;
  out.success = std::move(lab);
  return out;
}

// ---------------------------------------------------------------------------
// WHNF
// ---------------------------------------------------------------------------

bool is_name_whnf(const ExprPtr& e, WhnfKind* kind) {
  ExprPtr cur = e;
  while (auto* l = get_if<Letrec>(cur)) cur = l->body;
  if (is<Lam>(cur)) {
    if (kind) *kind = WhnfKind::AWHNF;
    return true;
  }
  if (is<Constr>(cur)) {
    if (kind) *kind = WhnfKind::CWHNF;
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Stepping
// ---------------------------------------------------------------------------

namespace {

// Right-hand side of the innermost binding for `x` visible at `at`.  Only
// binder groups lie on the demand path, so any other binder is out of scope.
ExprPtr scope_lookup(const ExprPtr& root, const Position& at, const Name& x) {
  ExprPtr rhs;
  ExprPtr cur = root;
  for (int step : at) {
    if (auto* l = get_if<Letrec>(cur)) {
      for (const Binding& b : l->bindings)
        if (b.name == x) rhs = b.rhs;
    }
    cur = child_at(cur, step);
  }
  return rhs;
}

}  // namespace

StepResult step_name(const ExprPtr& e) {
  WhnfKind k;
  if (is_name_whnf(e, &k)) return StepResult::whnf_result(k);

  DemandWalk w = demand_walk(e);
  const Position& at = w.needed;
  const ExprPtr& term = w.terminal;

  if (auto* v = get_if<Var>(term)) {
    ExprPtr rhs = scope_lookup(e, at, v->name);
    if (!rhs) return StepResult::stuck("free variable in demand position", at);
    return StepResult::reduced(replace_at(e, at, rhs), "gcp", at);
  }

  // every remaining terminal sits under a demanding parent: the root case
  // is either a WHNF (handled above) or a variable (handled above)
  Position ppos = at;
  ppos.pop_back();
  const ExprPtr& par = w.parent;

  if (auto* l = get_if<Letrec>(term)) {
    if (auto* a = get_if<App>(par))
      return StepResult::reduced(
          replace_at(e, ppos, letrec(l->bindings, app(l->body, a->arg))),
          "lapp", ppos);
    if (auto* s = get_if<Seq>(par))
      return StepResult::reduced(
          replace_at(e, ppos, letrec(l->bindings, seq(l->body, s->second))),
          "lseq", ppos);
    const Case& c = as<Case>(par);
    return StepResult::reduced(
        replace_at(e, ppos,
                   letrec(l->bindings, case_of(c.type_name, l->body, c.alts))),
        "lcase", ppos);
  }

  if (auto* a = get_if<App>(par)) {
    if (auto* f = get_if<Lam>(term))
      return StepResult::reduced(
          replace_at(e, ppos, subst(f->body, {{f->binder, a->arg}})), "beta",
          ppos);
    return StepResult::stuck("constructor applied as function", ppos);
  }

  if (auto* s = get_if<Seq>(par))
    return StepResult::reduced(replace_at(e, ppos, s->second), "seq-c", ppos);

  const Case& c = as<Case>(par);
  if (is<Lam>(term))
    return StepResult::stuck("case scrutinee is an abstraction", ppos);
  const Constr& con = as<Constr>(term);
  for (const Alt& alt : c.alts) {
    if (alt.ctor != con.ctor) continue;
    ExprPtr body = alt.rhs;
    if (!alt.vars.empty()) {
      std::vector<std::pair<Name, ExprPtr>> m;
      for (size_t i = 0; i < alt.vars.size(); ++i)
        m.emplace_back(alt.vars[i], con.args[i]);
      body = subst(alt.rhs, m);
    }
    return StepResult::reduced(replace_at(e, ppos, body), "case", ppos);
  }
  return StepResult::stuck("case type mismatch", ppos);
}

EvalOutcome evaluate_name(const ExprPtr& e, const EvalLimits& limits,
                          Trace* trace) {
  return run_machine(e, step_name, limits, trace);
}

}  // namespace needlab
