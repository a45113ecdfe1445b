#include "needlab/machine_lcc.hpp"

namespace needlab {

bool is_lcc_whnf(const ExprPtr& e, WhnfKind* kind) {
  if (is<Lam>(e)) {
    if (kind) *kind = WhnfKind::AWHNF;
    return true;
  }
  if (is<Constr>(e)) {
    if (kind) *kind = WhnfKind::CWHNF;
    return true;
  }
  return false;
}

namespace {

StepResult step_unchecked(const ExprPtr& e) {
  WhnfKind k;
  if (is_lcc_whnf(e, &k)) return StepResult::whnf_result(k);

  // walk to the demanded subterm
  Position p;
  ExprPtr cur = e;
  for (;;) {
    ExprPtr next;
    if (auto* a = get_if<App>(cur)) next = a->fun;
    if (auto* s = get_if<Seq>(cur)) next = s->first;
    if (auto* c = get_if<Case>(cur)) next = c->scrutinee;
    if (!next) break;
    p.push_back(1);
    cur = next;
  }

  if (is<Var>(cur))
    return StepResult::stuck("free variable in demand position", p);

  // cur is an abstraction or constructor application under a demanding
  // parent (the root case is a WHNF, handled above)
  Position ppos = p;
  ppos.pop_back();
  ExprPtr par = subterm_at(e, ppos);

  if (auto* a = get_if<App>(par)) {
    if (auto* f = get_if<Lam>(cur))
      return StepResult::reduced(
          replace_at(e, ppos, subst(f->body, {{f->binder, a->arg}})), "nbeta",
          ppos);
    return StepResult::stuck("constructor applied as function", ppos);
  }

  if (auto* s = get_if<Seq>(par))
    return StepResult::reduced(replace_at(e, ppos, s->second), "nseq", ppos);

  const Case& c = as<Case>(par);
  if (is<Lam>(cur))
    return StepResult::stuck("case scrutinee is an abstraction", ppos);
  const Constr& con = as<Constr>(cur);
  for (const Alt& alt : c.alts) {
    if (alt.ctor != con.ctor) continue;
    ExprPtr body = alt.rhs;
    if (!alt.vars.empty()) {
      std::vector<std::pair<Name, ExprPtr>> m;
      for (size_t i = 0; i < alt.vars.size(); ++i)
        m.emplace_back(alt.vars[i], con.args[i]);
      body = subst(alt.rhs, m);
    }
    return StepResult::reduced(replace_at(e, ppos, body), "ncase", ppos);
  }
  return StepResult::stuck("case type mismatch", ppos);
}

}  // namespace

StepResult step_lcc(const ExprPtr& e) {
  if (!is_letrec_free(e))
    throw BadExpr("binder groups are not part of this fragment");
  return step_unchecked(e);
}

EvalOutcome evaluate_lcc(const ExprPtr& e, const EvalLimits& limits,
                         Trace* trace) {
  if (!is_letrec_free(e))
    throw BadExpr("binder groups are not part of this fragment");
  // the rules cannot introduce binder groups, so steps skip the recheck
  return run_machine(e, step_unchecked, limits, trace);
}

}  // namespace needlab
