#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "needlab/machine_lr.hpp"
#include "needlab/parse.hpp"
#include "needlab/print.hpp"

using namespace needlab;

namespace {
const SignatureTable& sig() {
  static SignatureTable s = default_signature();
  return s;
}
ExprPtr P(const std::string& s) { return parse_expr(s, sig()); }

std::vector<std::pair<std::string, std::string>> trace_of(const std::string& s,
                                                          EvalOutcome* out = nullptr) {
  Trace tr;
  EvalOutcome r = evaluate_lr(P(s), {}, &tr);
  if (out) *out = r;
  std::vector<std::pair<std::string, std::string>> v;
  for (const auto& t : tr) v.emplace_back(t.rule, position_to_string(t.redex));
  return v;
}
}  // namespace

TEST_CASE("labeling marks the demand path of the canonical example") {
  ExprPtr e = canonicalize(P("letrec x = (y \\u. u), y = \\z. z in x"));
  LabelingOutcome lo = label_lr(e);
  REQUIRE(lo.ok());
  const Labeling& lab = *lo.success;
  CHECK(lab.needed == Position{2});
  CHECK(lab.labels.at(Position{}) == LabelKind::V);
  CHECK(lab.labels.at(Position{3}) == LabelKind::V);     // body occurrence
  CHECK(lab.labels.at(Position{1}) == LabelKind::V);     // demanded application
  CHECK(lab.labels.at(Position{1, 1}) == LabelKind::V);  // use site of y
  CHECK(lab.labels.at(Position{2}) == LabelKind::S);     // the needed abstraction
  CHECK(lab.labels.size() == 5);
  REQUIRE(lab.target().has_value());
  CHECK(*lab.target() == Position{1, 1});
}

TEST_CASE("labeling fails on cyclic variable dependencies") {
  LabelingOutcome a = label_lr(P("letrec x = x in x"));
  CHECK(!a.ok());
  CHECK(a.reason == "variable depends on itself");

  LabelingOutcome b = label_lr(P("letrec x = (x y) in x"));
  CHECK(!b.ok());

  LabelingOutcome c = label_lr(P("letrec x = y, y = x in x"));
  CHECK(!c.ok());
  CHECK(c.reason == "cyclic variable dependencies");

  // not cyclic: the second binding is never needed
  CHECK(label_lr(P("letrec x = \\u. u, y = (y y) in x")).ok());
}

TEST_CASE("WHNF classification") {
  WhnfKind k;
  CHECK(is_lr_whnf(P("\\x. x"), &k));
  CHECK(k == WhnfKind::AWHNF);
  CHECK(is_lr_whnf(P("(Cons True Nil)"), &k));
  CHECK(k == WhnfKind::CWHNF);
  CHECK(is_lr_whnf(P("letrec x = y in \\u. u"), &k));
  CHECK(k == WhnfKind::AWHNF);
  CHECK(is_lr_whnf(P("letrec x = True in x"), &k));  // constructor chain
  CHECK(k == WhnfKind::CWHNF);
  CHECK(is_lr_whnf(P("letrec x = (Cons True Nil), y = x in y"), &k));
  CHECK(k == WhnfKind::CWHNF);
  // abstraction chains still need the copy step
  CHECK(!is_lr_whnf(P("letrec x = \\u. u in x")));
  CHECK(!is_lr_whnf(P("letrec x = \\u. u, y = x in y")));
  CHECK(!is_lr_whnf(P("letrec x = x in x")));
  CHECK(!is_lr_whnf(P("(x y)")));
}

TEST_CASE("golden four-step reduction") {
  EvalOutcome out;
  auto tr = trace_of("letrec x = (y \\u. u), y = \\z. z in x", &out);
  REQUIRE(tr.size() == 4);
  CHECK(tr[0] == std::pair<std::string, std::string>{"cp-e", "1.1"});
  CHECK(tr[1] == std::pair<std::string, std::string>{"lbeta", "1"});
  CHECK(tr[2] == std::pair<std::string, std::string>{"llet-e", "ε"});
  CHECK(tr[3] == std::pair<std::string, std::string>{"cp-in", "4"});
  CHECK(out.kind == EvalOutcome::Kind::Converged);
  CHECK(out.whnf == WhnfKind::AWHNF);
  CHECK(out.steps == 4);
  CHECK(alpha_eq(out.final_expr, P("letrec x = z', z' = \\u. u, y = \\z. z in \\u. u")));
}

TEST_CASE("identity applied to identity") {
  EvalOutcome out;
  auto tr = trace_of("((\\x. x) (\\y. y))", &out);
  REQUIRE(tr.size() == 2);
  CHECK(tr[0].first == "lbeta");
  CHECK(tr[1].first == "cp-in");
  CHECK(out.kind == EvalOutcome::Kind::Converged);
  CHECK(out.whnf == WhnfKind::AWHNF);
  CHECK(alpha_eq(out.final_expr, P("letrec x = \\y. y in \\y. y")));
}

TEST_CASE("abstraction bound in a letrec gets copied out") {
  EvalOutcome out;
  auto tr = trace_of("letrec x = \\u. u in x", &out);
  REQUIRE(tr.size() == 1);
  CHECK(tr[0] == std::pair<std::string, std::string>{"cp-in", "2"});
  CHECK(out.converged());
  CHECK(alpha_eq(out.final_expr, P("letrec x = \\u. u in \\u. u")));
}

TEST_CASE("nested letrec in a binding is flattened on demand") {
  EvalOutcome out;
  auto tr = trace_of("letrec x = (letrec y = \\u. u in y) in x", &out);
  REQUIRE(tr.size() == 2);
  CHECK(tr[0].first == "llet-e");
  CHECK(tr[1].first == "cp-in");
  CHECK(out.converged());
  CHECK(alpha_eq(out.final_expr, P("letrec y = \\u. u, x = y in \\u. u")));
}

TEST_CASE("letrec in the body is flattened on demand") {
  EvalOutcome out;
  auto tr = trace_of("letrec x = \\u. u in (letrec y = x in y)", &out);
  REQUIRE(!tr.empty());
  CHECK(tr[0] == std::pair<std::string, std::string>{"llet-in", "ε"});
  CHECK(out.converged());
}

TEST_CASE("seq rules") {
  EvalOutcome out;

  // direct value: one seq-c step
  auto tr = trace_of("seq (\\x. x) True", &out);
  REQUIRE(tr.size() == 1);
  CHECK(tr[0].first == "seq-c");
  CHECK(out.whnf == WhnfKind::CWHNF);

  // constructor reached through a binding: use-site discharge, body variant
  tr = trace_of("letrec x = (Cons True Nil) in seq x False", &out);
  REQUIRE(tr.size() == 1);
  CHECK(tr[0].first == "seq-in");
  CHECK(out.converged());
  CHECK(alpha_eq(out.final_expr, P("letrec x = (Cons True Nil) in False")));

  // same through a chain inside another binding
  tr = trace_of("letrec x = True, y = x, z = seq y (\\u. u) in (z True)", &out);
  REQUIRE(!tr.empty());
  CHECK(tr[0].first == "seq-e");

  // an abstraction on the left of seq inside a binding is first copied
  tr = trace_of("letrec f = \\u. u in seq f True", &out);
  REQUIRE(tr.size() == 2);
  CHECK(tr[0].first == "cp-in");
  CHECK(tr[1].first == "seq-c");
  CHECK(out.converged());
}

TEST_CASE("case rules") {
  EvalOutcome out;

  // direct constructor scrutinee with arguments: bindings for pattern vars
  auto tr = trace_of("case List (Cons True Nil) of { Nil -> False ; Cons a b -> a }", &out);
  REQUIRE(!tr.empty());
  CHECK(tr[0].first == "case-c");
  CHECK(out.converged());
  CHECK(out.whnf == WhnfKind::CWHNF);
  CHECK(alpha_eq(out.final_expr, P("letrec a = True, b = Nil in a")));

  // nullary constructor: plain replacement
  tr = trace_of("case Bool True of { True -> Nil ; False -> (Cons True Nil) }", &out);
  REQUIRE(tr.size() == 1);
  CHECK(tr[0].first == "case-c");
  CHECK(alpha_eq(out.final_expr, P("Nil")));

  // scrutinee bound in the environment: sharing via fresh argument bindings
  tr = trace_of("letrec x = (Cons True Nil) in case List x of { Nil -> False ; Cons a b -> a }",
                &out);
  REQUIRE(!tr.empty());
  CHECK(tr[0].first == "case-in");
  CHECK(out.converged());
  CHECK(out.whnf == WhnfKind::CWHNF);
  // the scrutinee binding keeps a constructor with shared arguments
  CHECK(alpha_eq(out.final_expr,
                 P("letrec x = (Cons p q), p = True, q = Nil, a = p, b = q in a")));

  // use inside another binding
  tr = trace_of(
      "letrec x = True, y = case Bool x of { True -> \\u. u ; False -> False } in (y y)",
      &out);
  REQUIRE(!tr.empty());
  CHECK(tr[0].first == "case-e");
}

TEST_CASE("stuck states") {
  EvalOutcome out = evaluate_lr(P("letrec x = x in x"));
  CHECK(out.kind == EvalOutcome::Kind::Stuck);
  CHECK(out.steps == 0);

  out = evaluate_lr(P("(True x)"));
  CHECK(out.kind == EvalOutcome::Kind::Stuck);
  CHECK(out.reason == "constructor applied as function");

  out = evaluate_lr(P("case List True of { Nil -> x ; Cons a b -> x }"));
  CHECK(out.kind == EvalOutcome::Kind::Stuck);
  CHECK(out.reason == "case type mismatch");

  out = evaluate_lr(P("case Bool (\\u. u) of { True -> x ; False -> x }"));
  CHECK(out.kind == EvalOutcome::Kind::Stuck);

  out = evaluate_lr(P("(x y)"));
  CHECK(out.kind == EvalOutcome::Kind::Stuck);
  CHECK(out.reason == "free variable in demand position");

  // constructor demanded as a function through a chain
  out = evaluate_lr(P("letrec x = True, y = (x z) in y"));
  CHECK(out.kind == EvalOutcome::Kind::Stuck);
}

TEST_CASE("budget exhaustion") {
  EvalLimits lim;
  lim.max_steps = 50;
  EvalOutcome out = evaluate_lr(omega(), lim);
  CHECK(out.kind == EvalOutcome::Kind::BudgetExhausted);
  CHECK(out.steps == 50);
}

TEST_CASE("garbage collection transformations") {
  ExprPtr e = canonicalize(P("letrec g = True in \\x. x"));
  auto apps = find_applications("gc", e);
  REQUIRE(apps.size() == 1);
  CHECK(apps[0].at == Position{});
  CHECK(alpha_eq(apps[0].result, P("\\x. x")));

  ExprPtr f = canonicalize(P("letrec u = \\a. a, g = True in (u u)"));
  auto apps2 = find_applications("gc2", f);
  REQUIRE(apps2.size() == 1);
  CHECK(alpha_eq(apps2[0].result, P("letrec u = \\a. a in (u u)")));
  CHECK(find_applications("gc", f).empty());

  // no garbage, no application
  CHECK(find_applications("gc2", canonicalize(P("letrec x = \\u. u in x"))).empty());
}

TEST_CASE("letrec hoisting transformations") {
  ExprPtr e = canonicalize(P("(f (letrec a = True in a))"));
  auto apps = find_applications("lwas-app", e);
  REQUIRE(apps.size() == 1);
  CHECK(alpha_eq(apps[0].result, P("letrec a = True in (f a)")));

  ExprPtr c = canonicalize(P("(Cons (letrec a = True in a) Nil)"));
  auto apps2 = find_applications("lwas-constr", c);
  REQUIRE(apps2.size() == 1);
  CHECK(alpha_eq(apps2[0].result, P("letrec a = True in (Cons a Nil)")));

  ExprPtr s = canonicalize(P("seq x (letrec a = True in a)"));
  auto apps3 = find_applications("lwas-seq", s);
  REQUIRE(apps3.size() == 1);
  CHECK(alpha_eq(apps3[0].result, P("letrec a = True in seq x a")));
}

TEST_CASE("unrestricted machine rules as rewrites") {
  ExprPtr e = canonicalize(P("((\\x. x) True)"));
  auto apps = find_applications("lbeta", e);
  REQUIRE(apps.size() == 1);
  CHECK(alpha_eq(apps[0].result, P("letrec x = True in x")));

  ExprPtr cp = canonicalize(P("letrec f = \\u. u in (f f)"));
  auto apps2 = find_applications("cp-in", cp);
  CHECK(apps2.size() == 2);  // two occurrences of f in the body

  ExprPtr sc = canonicalize(P("seq (\\x. x) True"));
  auto apps3 = find_applications("seq-c", sc);
  REQUIRE(apps3.size() == 1);
  CHECK(alpha_eq(apps3[0].result, P("True")));

  // bad-seq fires without evaluating the first argument
  ExprPtr bs = canonicalize(seq(omega(), constr("True", {})));
  auto apps4 = find_applications("bad-seq", bs);
  REQUIRE(apps4.size() == 1);
  CHECK(alpha_eq(apps4[0].result, P("True")));
  CHECK(find_applications("seq-c", bs).empty());  // the sound rule refuses

  ExprPtr gcp = canonicalize(P("letrec x = \\u. u in (x x)"));
  auto apps5 = find_applications("gcp", gcp);
  CHECK(apps5.size() == 2);

  CHECK_THROWS_AS(find_applications("no-such-rule", e), BadExpr);
  CHECK_THROWS_AS(apply_transformation_lr("lbeta", e, {1}), BadExpr);
  CHECK(alpha_eq(apply_transformation_lr("lbeta", e, {}),
                 P("letrec x = True in x")));
}

TEST_CASE("case chain rewrite keeps sharing") {
  ExprPtr e = canonicalize(
      P("letrec x = (Cons True Nil) in case List x of { Nil -> False ; Cons a b -> a }"));
  auto apps = find_applications("case-in", e);
  REQUIRE(apps.size() == 1);
  CHECK(alpha_eq(apps[0].result,
                 P("letrec x = (Cons p q), p = True, q = Nil in (letrec a = p, b = q in a)")));
}
