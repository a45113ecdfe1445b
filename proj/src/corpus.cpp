#include <random>
#include <set>
#include <string>
#include <vector>

#include "needlab/print.hpp"
#include "needlab/simcheck.hpp"
#include "needlab/syntax.hpp"

namespace needlab {
namespace {

// Random well-formed term builder. Variables bound by lambdas and patterns
// can appear anywhere; variables bound by an enclosing letrec are only
// emitted in lazy positions (constructor/application arguments, seq second
// operand, lambda bodies, alternative bodies, letrec bodies). Recursive
// references in demand positions almost always produce runaway unfolding in
// at least one machine, which would flood the corpus with inconclusive
// entries; lazy recursion instead yields useful cyclic data or plain
// definitive cycles.
struct Gen {
  const SignatureTable& sig;
  std::mt19937_64& rng;
  bool closed_only;
  int fresh = 0;

  std::vector<Name> lam_vars;
  std::vector<Name> rec_vars;
  std::vector<std::pair<Name, int>> ctors;  // flattened (name, arity)
  std::vector<Name> nullary;

  Gen(const SignatureTable& s, std::mt19937_64& r, bool closed)
      : sig(s), rng(r), closed_only(closed) {
    for (const TypeInfo& ti : sig.types())
      for (const ConstrInfo& ci : ti.constructors) {
        ctors.emplace_back(ci.name, ci.arity);
        if (ci.arity == 0) nullary.push_back(ci.name);
      }
  }

  int pick(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }
  bool chance(int pct) { return pick(100) < pct; }
  Name fresh_name() { return "g" + std::to_string(fresh++); }

  std::vector<int> split(int budget, int n) {
    std::vector<int> parts(static_cast<std::size_t>(n), 1);
    for (int i = 0; i < budget - n; ++i)
      parts[static_cast<std::size_t>(pick(n))] += 1;
    return parts;
  }

  ExprPtr leaf(bool lazy) {
    const int c = pick(10);
    if (c < 4 && !lam_vars.empty())
      return var(lam_vars[static_cast<std::size_t>(pick(
          static_cast<int>(lam_vars.size())))]);
    if (c < 6 && lazy && !rec_vars.empty())
      return var(rec_vars[static_cast<std::size_t>(pick(
          static_cast<int>(rec_vars.size())))]);
    if (c == 6 && !closed_only) return var(pick(2) ? "u" : "w");
    if (nullary.empty()) return lam("x", var("x"));
    return constr(nullary[static_cast<std::size_t>(pick(
                      static_cast<int>(nullary.size())))],
                  {});
  }

  ExprPtr gen_lam(int budget) {
    const Name x = fresh_name();
    lam_vars.push_back(x);
    ExprPtr body = gen(budget - 1, true);
    lam_vars.pop_back();
    return lam(x, body);
  }

  // Saturated application of a constructor that fits the budget, preferring
  // a constructor of `want` when given.
  ExprPtr gen_constr(int budget, const TypeInfo* want) {
    std::vector<std::pair<Name, int>> fits;
    if (want) {
      for (const ConstrInfo& ci : want->constructors)
        if (ci.arity + 1 <= budget) fits.emplace_back(ci.name, ci.arity);
    }
    if (fits.empty())
      for (const auto& c : ctors)
        if (c.second + 1 <= budget) fits.push_back(c);
    if (fits.empty()) return leaf(true);
    const auto& [name, arity] = fits[static_cast<std::size_t>(pick(
        static_cast<int>(fits.size())))];
    std::vector<ExprPtr> args;
    if (arity > 0) {
      std::vector<int> parts = split(budget - 1, arity);
      for (int s : parts) args.push_back(gen(s, true));
    }
    return constr(name, std::move(args));
  }

  ExprPtr gen(int budget, bool lazy) {
    if (budget <= 1) return leaf(lazy);
    for (int attempt = 0; attempt < 12; ++attempt) {
      const int w = pick(20);
      if (w < 4 && budget >= 2) return gen_lam(budget);
      if (w < 10 && budget >= 3) {  // application
        ExprPtr fun;
        int fun_size;
        if (budget >= 4 && chance(60)) {
          fun_size = 2 + pick(budget - 3);
          fun = gen_lam(fun_size);
        } else if (!lam_vars.empty()) {
          fun_size = 1;
          fun = var(lam_vars[static_cast<std::size_t>(pick(
              static_cast<int>(lam_vars.size())))]);
        } else {
          continue;
        }
        return app(fun, gen(budget - 1 - fun_size, true));
      }
      if (w < 14) return gen_constr(budget, nullptr);
      if (w < 16 && budget >= 3) {  // seq
        std::vector<int> parts = split(budget - 1, 2);
        ExprPtr first = gen(parts[0], false);
        return seq(first, gen(parts[1], true));
      }
      if (w < 18) {  // case
        const auto& types = sig.types();
        const TypeInfo& ti = types[static_cast<std::size_t>(pick(
            static_cast<int>(types.size())))];
        const int n_alts = static_cast<int>(ti.constructors.size());
        if (budget < 2 + n_alts) continue;
        std::vector<int> parts = split(budget - 1, 1 + n_alts);
        ExprPtr scrut = chance(65) ? gen_constr(parts[0], &ti)
                                   : gen(parts[0], false);
        std::vector<Alt> alts;
        for (int i = 0; i < n_alts; ++i) {
          const ConstrInfo& ci = ti.constructors[static_cast<std::size_t>(i)];
          std::vector<Name> vars;
          for (int j = 0; j < ci.arity; ++j) vars.push_back(fresh_name());
          const std::size_t mark = lam_vars.size();
          lam_vars.insert(lam_vars.end(), vars.begin(), vars.end());
          ExprPtr rhs = gen(parts[static_cast<std::size_t>(1 + i)], true);
          lam_vars.resize(mark);
          alts.push_back(Alt{ci.name, std::move(vars), std::move(rhs)});
        }
        return case_of(ti.name, scrut, std::move(alts));
      }
      if (budget >= 4) {  // letrec
        int m = 1 + (pick(3) == 0 ? 1 : 0);
        if (budget < 2 * m + 2) m = 1;
        std::vector<Name> names;
        for (int i = 0; i < m; ++i) names.push_back(fresh_name());
        const std::size_t mark = rec_vars.size();
        rec_vars.insert(rec_vars.end(), names.begin(), names.end());
        std::vector<int> parts = split(budget - 1, m + 1);
        std::vector<Binding> bs;
        for (int i = 0; i < m; ++i) {
          const int sz = parts[static_cast<std::size_t>(i)];
          ExprPtr rhs;
          if (chance(70)) {  // bias bindings toward values
            rhs = (sz >= 2 && chance(50)) ? gen_lam(sz) : gen_constr(sz, nullptr);
          } else {
            rhs = gen(sz, true);
          }
          bs.push_back(Binding{names[static_cast<std::size_t>(i)], rhs});
        }
        ExprPtr body = gen(parts[static_cast<std::size_t>(m)], true);
        rec_vars.resize(mark);
        return letrec(std::move(bs), body);
      }
    }
    return leaf(lazy);
  }
};

}  // namespace

std::vector<ExprPtr> gen_corpus(const SignatureTable& sig, std::uint64_t seed,
                                int count, int size_bound, bool closed_only) {
  if (size_bound < 3) throw BadExpr("corpus size bound must be at least 3");
  std::mt19937_64 rng(seed);
  std::vector<ExprPtr> out;
  std::set<std::string> seen;
  while (static_cast<int>(out.size()) < count) {
    Gen g(sig, rng, closed_only);
    const int target = 3 + g.pick(size_bound - 2);
    ExprPtr e;
    for (int attempt = 0;; ++attempt) {
      e = g.gen(target, true);
      if (term_size(e) <= size_bound &&
          (seen.insert(print(e)).second || attempt >= 50))
        break;
    }
    validate(e, sig);
    out.push_back(e);
  }
  return out;
}

}  // namespace needlab
