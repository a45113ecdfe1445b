#include "needlab/translate.hpp"

namespace needlab {

ExprPtr build_Y(int n, int i) {
  if (n < 1 || i < 1 || i > n)
    throw BadExpr("fixpoint family index out of range");
  auto f = [](int j) { return "f" + std::to_string(j); };
  auto x = [](int j) { return "x" + std::to_string(j); };
  // \x1...xn. f_j (x1 x1 ... xn) ... (xn x1 ... xn)
  auto block = [&](int j) {
    ExprPtr body = var(f(j));
    for (int a = 1; a <= n; ++a) {
      ExprPtr arg = var(x(a));
      for (int b = 1; b <= n; ++b) arg = app(arg, var(x(b)));
      body = app(body, arg);
    }
    for (int b = n; b >= 1; --b) body = lam(x(b), body);
    return body;
  };
  ExprPtr core = block(i);
  for (int j = 1; j <= n; ++j) core = app(core, block(j));
  for (int j = n; j >= 1; --j) core = lam(f(j), core);
  return core;
}

ExprPtr translate_W(const ExprPtr& e) { return e; }

ExprPtr translate_iota(const ExprPtr& e) {
  if (!is_letrec_free(e))
    throw BadExpr("binder groups cannot be embedded unchanged");
  return e;
}

namespace {

ExprPtr n_rec(const ExprPtr& e, NameSupply& fresh, bool eager) {
  if (is<Var>(e) || is<BotE>(e) || is<Hole>(e)) return e;
  if (auto* a = get_if<App>(e))
    return app(n_rec(a->fun, fresh, eager), n_rec(a->arg, fresh, eager));
  if (auto* l = get_if<Lam>(e))
    return lam(l->binder, n_rec(l->body, fresh, eager));
  if (auto* c = get_if<Constr>(e)) {
    std::vector<ExprPtr> args;
    for (const ExprPtr& s : c->args) args.push_back(n_rec(s, fresh, eager));
    return constr(c->ctor, args);
  }
  if (auto* s = get_if<Seq>(e))
    return seq(n_rec(s->first, fresh, eager), n_rec(s->second, fresh, eager));
  if (auto* c = get_if<Case>(e)) {
    std::vector<Alt> alts;
    for (const Alt& a : c->alts)
      alts.push_back({a.ctor, a.vars, n_rec(a.rhs, fresh, eager)});
    return case_of(c->type_name, n_rec(c->scrutinee, fresh, eager), alts);
  }

  const Letrec& l = as<Letrec>(e);
  const int n = static_cast<int>(l.bindings.size());
  auto x = [&](int j) { return l.bindings[j - 1].name; };

  std::vector<ExprPtr> rhs;  // translated right-hand sides
  for (const Binding& b : l.bindings) rhs.push_back(n_rec(b.rhs, fresh, eager));
  ExprPtr body = n_rec(l.body, fresh, eager);

  // X_j' = \x1...xn. (\x1...xn. rhs_j) (x1 x1 ... xn) ... (xn x1 ... xn)
  auto xprime = [&](int j) {
    ExprPtr fj = rhs[j - 1];
    for (int b = n; b >= 1; --b) fj = lam(x(b), fj);
    ExprPtr blk = fj;
    for (int a = 1; a <= n; ++a) {
      ExprPtr arg = var(x(a));
      for (int b = 1; b <= n; ++b) arg = app(arg, var(x(b)));
      blk = app(blk, arg);
    }
    for (int b = n; b >= 1; --b) blk = lam(x(b), blk);
    return blk;
  };

  if (eager) {
    std::vector<std::pair<Name, ExprPtr>> sigma;
    for (int i = 1; i <= n; ++i) {
      ExprPtr u = xprime(i);
      for (int j = 1; j <= n; ++j) u = app(u, xprime(j));
      sigma.emplace_back(x(i), u);
    }
    return subst(body, sigma);
  }

  std::vector<Name> primed;
  for (int i = 1; i <= n; ++i) primed.push_back(fresh.fresh());
  ExprPtr out = body;
  for (int b = n; b >= 1; --b) out = lam(x(b), out);
  for (int i = 1; i <= n; ++i) {
    ExprPtr u = var(primed[i - 1]);
    for (int j = 1; j <= n; ++j) u = app(u, var(primed[j - 1]));
    out = app(out, u);
  }
  for (int i = n; i >= 1; --i) out = lam(primed[i - 1], out);
  for (int i = 1; i <= n; ++i) out = app(out, xprime(i));
  return out;
}

}  // namespace

ExprPtr translate_N(const ExprPtr& e) {
  NameSupply fresh("_p");
  return n_rec(e, fresh, false);
}

ExprPtr translate_Nprime(const ExprPtr& e) {
  NameSupply fresh("_p");
  return n_rec(e, fresh, true);
}

Context translate_N_context(const Context& c) {
  NameSupply fresh("_p");
  return Context::of(n_rec(c.skeleton, fresh, false));
}

}  // namespace needlab
