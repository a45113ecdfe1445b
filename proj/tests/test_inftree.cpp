#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "needlab/inftree.hpp"
#include "needlab/machine_lr.hpp"
#include "needlab/machine_name.hpp"
#include "needlab/parse.hpp"
#include "needlab/print.hpp"

using namespace needlab;

namespace {
const SignatureTable& sig() {
  static SignatureTable s = default_signature();
  return s;
}
ExprPtr P(const std::string& s) { return parse_expr(s, sig()); }

using K = TreeLabel::Kind;

std::optional<TreeLabel> L(const std::string& s, const std::string& pos) {
  return it_label(P(s), parse_position(pos));
}

// "@", "seq", "case_Bool", "Bot", "\\x", constructor or variable names.
std::string Lp(const std::string& s, const std::string& pos) {
  auto l = L(s, pos);
  return l ? print_label(*l) : "<none>";
}

TreeHandle at(TreeHandle h, const Position& p) {
  for (int i : p) h = h.child(i);
  return h;
}
}  // namespace

TEST_CASE("label oracle on the cyclic two-binding example") {
  // x is a black hole, y unfolds to an infinite application spine:
  // ((\z.z) Bot ((\z.z) Bot (...)))
  const std::string s = "letrec x = x, y = ((\\z. z) x y) in y";
  CHECK(Lp(s, "ε") == "@");
  CHECK(Lp(s, "1") == "@");
  CHECK(Lp(s, "1.1") == "\\z");
  CHECK(Lp(s, "1.2") == "Bot");
  CHECK(Lp(s, "2") == "@");
  // the spine repeats under position 2
  CHECK(Lp(s, "2.1") == "@");
  CHECK(Lp(s, "2.1.1") == "\\z");
  CHECK(Lp(s, "2.1.2") == "Bot");
  CHECK(Lp(s, "2.2") == "@");
  // Bot is a leaf: nothing below 1.2
  CHECK_FALSE(L(s, "1.2.1").has_value());
}

TEST_CASE("label oracle on leaves and binders") {
  CHECK(Lp("\\x. x", "ε") == "\\x");
  CHECK(Lp("\\x. x", "1") == "x");
  CHECK_FALSE(L("\\x. x", "2").has_value());
  CHECK_FALSE(L("\\x. x", "1.1").has_value());

  CHECK(Lp("True", "ε") == "True");
  CHECK(Lp("(Cons True Nil)", "ε") == "Cons");
  CHECK(Lp("(Cons True Nil)", "1") == "True");
  CHECK(Lp("(Cons True Nil)", "2") == "Nil");
  CHECK_FALSE(L("(Cons True Nil)", "3").has_value());

  CHECK(Lp("seq True False", "ε") == "seq");
  CHECK(Lp("seq True False", "2") == "False");

  // free variables label themselves
  CHECK(Lp("(y True)", "1") == "y");
}

TEST_CASE("label oracle on case expressions uses alternative nodes") {
  const std::string s =
      "case List (Cons True Nil) of { Nil -> False ; Cons a b -> a }";
  CHECK(Lp(s, "ε") == "case_List");
  CHECK(Lp(s, "1") == "Cons");
  CHECK(Lp(s, "1.1") == "True");
  CHECK(Lp(s, "2") == "(Nil)");
  CHECK(Lp(s, "2.1") == "False");
  CHECK(Lp(s, "3") == "(Cons a b)");
  CHECK(Lp(s, "3.1") == "a");  // pattern variables label themselves
  CHECK_FALSE(L(s, "4").has_value());
  CHECK_FALSE(L(s, "2.2").has_value());

  auto alt = L(s, "3");
  REQUIRE(alt.has_value());
  CHECK(alt->kind == K::AltPat);
  CHECK(alt->name == "Cons");
  CHECK(alt->binders == std::vector<Name>{"a", "b"});
  CHECK(alt->children == 1);
}

TEST_CASE("cyclic chains give Bot at the exhausted position only") {
  CHECK(Lp("letrec x = x in x", "ε") == "Bot");
  CHECK_FALSE(L("letrec x = x in x", "1").has_value());

  // mutual cycle through two bindings
  CHECK(Lp("letrec a = b, b = a in a", "ε") == "Bot");

  // revisiting the same binding with a different remaining suffix is not a
  // cycle: y is passed through twice on the way to position 2
  CHECK(Lp("letrec x = x, y = ((\\z. z) x y) in y", "2") == "@");
}

TEST_CASE("binding groups are transparent at every position") {
  const std::string s = "letrec f = \\u. u in (f True)";
  CHECK(Lp(s, "ε") == "@");
  CHECK(Lp(s, "1") == "\\u");
  CHECK(Lp(s, "1.1") == "u");
  CHECK(Lp(s, "2") == "True");

  // nested groups unfold through both layers
  CHECK(Lp("letrec a = (letrec b = True in b) in a", "ε") == "True");
}

TEST_CASE("handles agree with the label oracle everywhere") {
  const std::vector<std::string> samples = {
      "letrec x = (y \\u. u), y = \\z. z in x",
      "letrec x = x, y = ((\\z. z) x y) in y",
      "case List (Cons True Nil) of { Nil -> False ; Cons a b -> (Cons b a) }",
      "letrec y = ((\\x. y) True) in y",
      "seq (\\x. x) (Cons (y z) Nil)",
      "letrec a = (letrec b = (a b) in b) in (a True)",
  };
  for (const auto& text : samples) {
    CAPTURE(text);
    ExprPtr e = P(text);
    TreePrefix pre = prefix(tree_of(e), 4);
    for (const auto& [pos, label] : pre.labels) {
      CAPTURE(position_to_string(pos));
      auto oracle = it_label(e, pos);
      REQUIRE(oracle.has_value());
      CHECK(*oracle == label);
      // one past the last child does not exist
      Position beyond = pos;
      beyond.push_back(label.children + 1);
      CHECK_FALSE(it_label(e, beyond).has_value());
    }
  }
}

TEST_CASE("prefixes are monotone under the depth bound") {
  const std::vector<std::string> samples = {
      "letrec x = x, y = ((\\z. z) x y) in y",
      "letrec y = ((\\x. y) True) in y",
      "(Cons (seq True False) Nil)",
  };
  for (const auto& text : samples) {
    CAPTURE(text);
    TreeHandle t = tree_of(P(text));
    TreePrefix small = prefix(t, 2);
    TreePrefix big = prefix(t, 3);
    for (const auto& [pos, label] : small.labels) {
      auto it = big.labels.find(pos);
      REQUIRE(it != big.labels.end());
      CHECK(it->second == label);
    }
    for (const auto& [pos, label] : big.labels)
      if ((int)pos.size() <= 2) CHECK(small.labels.at(pos) == label);
  }
}

TEST_CASE("prefix of an atom and prefix printing") {
  TreePrefix p = prefix(tree_of(P("True")), 3);
  CHECK(p.labels.size() == 1);
  CHECK(p.labels.at({}).kind == K::Constr);
  CHECK(print_prefix(p) == "ε: True\n");

  TreePrefix q = prefix(tree_of(P("(\\x. x True)")), 1);
  CHECK(print_prefix(q) == "ε: \\x\n1: @\n");
  CHECK(print_prefix(q, true) == "\\x\n  @\n");
}

TEST_CASE("infinite unfolding of a recursive binding") {
  // y unfolds to ((\x.((\x.(...)) a)) a): @ and \x alternate along child 1
  TreeHandle t = tree_of(P("letrec y = ((\\x. y) a) in y"));
  CHECK(t.head().kind == K::App);
  CHECK(at(t, {1}).head().kind == K::Lam);
  CHECK(at(t, {1, 1}).head().kind == K::App);
  CHECK(at(t, {1, 1, 1}).head().kind == K::Lam);
  CHECK(at(t, {1, 1, 1, 1, 1}).head().kind == K::Lam);
  CHECK(at(t, {2}).head().name == "a");
  CHECK(at(t, {1, 1, 2}).head().name == "a");
}

TEST_CASE("tree equality ignores bound names") {
  CHECK(tree_eq_upto(P("\\x. x"), P("\\y. y"), 6));
  CHECK(tree_eq_upto(P("\\x. \\y. (x y)"), P("\\a. \\b. (a b)"), 6));
  CHECK_FALSE(tree_eq_upto(P("\\x. \\y. (x y)"), P("\\a. \\b. (b a)"), 6));
  // same binder name, different reference
  CHECK_FALSE(tree_eq_upto(P("\\x. \\x. x"), P("\\x. \\y. x"), 6));
  CHECK(tree_eq_upto(P("\\x. \\x. x"), P("\\a. \\b. b"), 6));
  // free variables must match exactly
  CHECK(tree_eq_upto(P("(u v)"), P("(u v)"), 6));
  CHECK_FALSE(tree_eq_upto(P("(u v)"), P("(u w)"), 6));
  // depth 0 compares the heads only
  CHECK(tree_eq_upto(P("\\x. x"), P("\\y. (y y)"), 0));
  CHECK_FALSE(tree_eq_upto(P("\\x. x"), P("\\y. (y y)"), 1));

  // alternative patterns are renamed along matching paths
  CHECK(tree_eq_upto(
      P("case List q of { Nil -> False ; Cons a b -> (Cons b a) }"),
      P("case List q of { Nil -> False ; Cons p r -> (Cons r p) }"), 6));
}

TEST_CASE("unfolded trees are invariant under copy and shift rules") {
  // copy steps in the shared-graph machine
  ExprPtr s = P("letrec x = (y \\u. u), y = \\z. z in x");
  StepResult r1 = step_lr(s);
  REQUIRE(r1.kind == StepResult::Kind::Reduced);
  CHECK(r1.rule == "cp-e");
  CHECK(tree_eq_upto(s, r1.next, 8));

  // shifting a group out of an application in the by-name machine
  ExprPtr h = P("((letrec y = \\u. u in y) True)");
  StepResult r2 = step_name(h);
  REQUIRE(r2.kind == StepResult::Kind::Reduced);
  CHECK(r2.rule == "lapp");
  CHECK(tree_eq_upto(h, r2.next, 8));

  // copying a binding in the by-name machine
  StepResult r3 = step_name(r2.next);
  REQUIRE(r3.kind == StepResult::Kind::Reduced);
  CHECK(r3.rule == "gcp");
  CHECK(tree_eq_upto(r2.next, r3.next, 8));

  // a beta step is not tree-invariant: it contracts the tree
  StepResult r4 = step_name(r3.next);
  REQUIRE(r4.kind == StepResult::Kind::Reduced);
  CHECK(r4.rule == "beta");
  CHECK_FALSE(tree_eq_upto(r3.next, r4.next, 8));
}

TEST_CASE("single steps on trees") {
  SUBCASE("betaTr reaches the substituted body") {
    TreeStepResult r = tree_step(tree_of(P("((\\x. x) True)")));
    REQUIRE(r.kind == TreeStepResult::Kind::Reduced);
    CHECK(r.rule == "betaTr");
    CHECK(r.next->head().kind == K::Constr);
    CHECK(r.next->head().name == "True");
  }
  SUBCASE("answers at the root") {
    CHECK(tree_step(tree_of(P("\\x. x"))).kind ==
          TreeStepResult::Kind::Answer);
    CHECK(tree_step(tree_of(P("(Cons x y)"))).kind ==
          TreeStepResult::Kind::Answer);
  }
  SUBCASE("heads with no rule") {
    // Bot in demand position
    CHECK(tree_step(tree_of(P("letrec x = x in x"))).kind ==
          TreeStepResult::Kind::NoRedexFound);
    CHECK(tree_step(tree_of(P("letrec x = x in (x True)"))).kind ==
          TreeStepResult::Kind::NoRedexFound);
    // free variable in demand position
    CHECK(tree_step(tree_of(P("(y True)"))).kind ==
          TreeStepResult::Kind::NoRedexFound);
    // constructor applied as a function
    CHECK(tree_step(tree_of(P("(True False)"))).kind ==
          TreeStepResult::Kind::NoRedexFound);
    // case on an abstraction
    CHECK(tree_step(tree_of(P(
              "case Bool (\\x. x) of { True -> True ; False -> False }")))
              .kind == TreeStepResult::Kind::NoRedexFound);
  }
  SUBCASE("an endless application spine exceeds the descent bound") {
    TreeStepResult r = tree_step(tree_of(P("letrec x = (x a) in x")), 50);
    CHECK(r.kind == TreeStepResult::Kind::DescentLimit);
  }
  SUBCASE("seqTr discards an evaluated first argument") {
    TreeHandle t = tree_of(P("seq (seq True False) Nil"));
    TreeStepResult r = tree_step(t);
    REQUIRE(r.kind == TreeStepResult::Kind::Reduced);
    CHECK(r.rule == "seqTr");  // the inner seq fires first
    CHECK(r.next->head().kind == K::Seq);
    TreeStepResult r2 = tree_step(*r.next);
    REQUIRE(r2.kind == TreeStepResult::Kind::Reduced);
    CHECK(r2.next->head().name == "Nil");
  }
  SUBCASE("caseTr substitutes the constructor arguments") {
    TreeHandle t = tree_of(P(
        "case List (Cons (seq True False) Nil) of"
        " { Nil -> True ; Cons a b -> a }"));
    TreeStepResult r = tree_step(t);
    REQUIRE(r.kind == TreeStepResult::Kind::Reduced);
    CHECK(r.rule == "caseTr");
    CHECK(r.next->head().kind == K::Seq);  // the bound argument, unevaluated
  }
}

TEST_CASE("a step on the tree matches the tree of the stepped term") {
  const std::vector<std::string> samples = {
      "((\\x. x) True)",
      "((\\x. (x x)) (\\y. y))",
      "seq (\\u. u) (Cons True Nil)",
      "case List (Cons True Nil) of { Nil -> False ; Cons a b -> (Cons b a) }",
      "((\\x. ((x x) True)) (\\y. \\z. z))",
  };
  for (const auto& text : samples) {
    CAPTURE(text);
    ExprPtr e = P(text);
    StepResult m = step_name(e);
    REQUIRE(m.kind == StepResult::Kind::Reduced);
    TreeStepResult t = tree_step(tree_of(e));
    REQUIRE(t.kind == TreeStepResult::Kind::Reduced);
    CHECK(tree_eq_upto(*t.next, tree_of(m.next), 6));
  }
}

TEST_CASE("repeated stepping never reaches an answer on a looping spine") {
  TreeHandle t = tree_of(P("letrec y = ((\\x. y) a) in y"));
  for (int i = 0; i < 20; ++i) {
    TreeStepResult r = tree_step(t);
    REQUIRE(r.kind == TreeStepResult::Kind::Reduced);
    CHECK(r.rule == "betaTr");
    t = *r.next;
  }
  CHECK(t.head().kind == K::App);
}

TEST_CASE("budgeted convergence") {
  SUBCASE("values and small reducts converge") {
    CHECK(tree_converges(P("True")).converged());
    CHECK(tree_converges(P("\\x. x")).converged());
    TreeEvalResult r = tree_converges(P("((\\x. x) True)"));
    CHECK(r.converged());
    CHECK(r.steps == 1);
    CHECK(r.reason == "answer");
    CHECK(r.definitive());
    CHECK(
        tree_converges(P("letrec x = (y \\u. u), y = \\z. z in x")).converged());
  }
  SUBCASE("a cyclic binding is definitively exhausted") {
    TreeEvalResult r = tree_converges(P("letrec x = x in x"));
    CHECK(r.verdict == TreeVerdict::Exhausted);
    CHECK(r.reason == "no-redex");
    CHECK(r.definitive());
  }
  SUBCASE("a self-application loops until the step budget") {
    TreeEvalResult r = tree_converges(omega(), 60);
    CHECK(r.verdict == TreeVerdict::Exhausted);
    CHECK(r.steps == 60);
    CHECK(r.reason == "step-budget");
    CHECK_FALSE(r.definitive());
  }
  SUBCASE("an endless spine is exhausted at the descent bound") {
    TreeEvalResult r = tree_converges(P("letrec x = (x a) in x"), 100, 50);
    CHECK(r.verdict == TreeVerdict::Exhausted);
    CHECK(r.reason == "descent-limit");
    CHECK_FALSE(r.definitive());
  }
}

TEST_CASE("convergence verdicts match both machines when definitive") {
  const std::vector<std::string> samples = {
      "letrec x = (y \\u. u), y = \\z. z in x",
      "((\\x. x) (\\y. y))",
      "(Cons (letrec x = x in x) Nil)",
      "seq (\\x. x) True",
      "case Bool True of { True -> (\\u. u) ; False -> False }",
      "letrec x = x in (seq x True)",
      "letrec f = \\x. (Cons x x) in (f (f Nil))",
      "letrec x = x in x",
  };
  for (const auto& text : samples) {
    CAPTURE(text);
    ExprPtr e = P(text);
    EvalOutcome lr = evaluate_lr(e);
    EvalOutcome nm = evaluate_name(e);
    TreeEvalResult tr = tree_converges(e, 2000);
    REQUIRE(tr.definitive());
    CHECK(lr.converged() == tr.converged());
    CHECK(nm.converged() == tr.converged());
  }
}
