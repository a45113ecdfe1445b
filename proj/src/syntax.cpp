#include "needlab/syntax.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace needlab {

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

static ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

ExprPtr var(Name n) { return make(Expr{Var{std::move(n)}}); }
ExprPtr app(ExprPtr f, ExprPtr a) { return make(Expr{App{std::move(f), std::move(a)}}); }
ExprPtr lam(Name binder, ExprPtr body) { return make(Expr{Lam{std::move(binder), std::move(body)}}); }
ExprPtr letrec(std::vector<Binding> bs, ExprPtr body) {
  return make(Expr{Letrec{std::move(bs), std::move(body)}});
}
ExprPtr constr(Name ctor, std::vector<ExprPtr> args) {
  return make(Expr{Constr{std::move(ctor), std::move(args)}});
}
ExprPtr seq(ExprPtr a, ExprPtr b) { return make(Expr{Seq{std::move(a), std::move(b)}}); }
ExprPtr case_of(Name type_name, ExprPtr scrut, std::vector<Alt> alts) {
  return make(Expr{Case{std::move(type_name), std::move(scrut), std::move(alts)}});
}
ExprPtr bot() {
  static const ExprPtr b = make(Expr{BotE{}});
  return b;
}
ExprPtr hole() {
  static const ExprPtr h = make(Expr{Hole{}});
  return h;
}

ExprPtr omega() {
  ExprPtr inner = lam("x", app(var("x"), var("x")));
  return app(lam("z", app(var("z"), var("z"))), inner);
}

// ---------------------------------------------------------------------------
// Signatures
// ---------------------------------------------------------------------------

SignatureTable::SignatureTable() {
  types_.push_back(TypeInfo{"Bool", {{"True", 0}, {"False", 0}}});
}

void SignatureTable::add_type(TypeInfo info) {
  if (find_type(info.name) != nullptr)
    throw BadExpr("type redeclared: " + info.name);
  if (info.constructors.empty())
    throw BadExpr("type without constructors: " + info.name);
  for (const auto& c : info.constructors) {
    if (c.arity < 0) throw BadExpr("negative arity for " + c.name);
    if (find_ctor(c.name) != nullptr)
      throw BadExpr("constructor redeclared: " + c.name);
  }
  types_.push_back(std::move(info));
}

const TypeInfo* SignatureTable::find_type(const Name& type_name) const {
  for (const auto& t : types_)
    if (t.name == type_name) return &t;
  return nullptr;
}

const TypeInfo* SignatureTable::type_of_ctor(const Name& ctor) const {
  for (const auto& t : types_)
    for (const auto& c : t.constructors)
      if (c.name == ctor) return &t;
  return nullptr;
}

const ConstrInfo* SignatureTable::find_ctor(const Name& ctor) const {
  for (const auto& t : types_)
    for (const auto& c : t.constructors)
      if (c.name == ctor) return &c;
  return nullptr;
}

int SignatureTable::arity(const Name& ctor) const {
  const ConstrInfo* c = find_ctor(ctor);
  if (!c) throw BadExpr("unknown constructor: " + ctor);
  return c->arity;
}

SignatureTable default_signature() {
  SignatureTable sig;
  sig.add_type(TypeInfo{"List", {{"Nil", 0}, {"Cons", 2}}});
  sig.add_type(TypeInfo{"Nat", {{"Zero", 0}, {"Succ", 1}}});
  return sig;
}

// ---------------------------------------------------------------------------
// Positions
// ---------------------------------------------------------------------------

std::string position_to_string(const Position& p) {
  if (p.empty()) return "ε";
  std::ostringstream os;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) os << '.';
    os << p[i];
  }
  return os.str();
}

Position parse_position(const std::string& s) {
  if (s.empty() || s == "ε" || s == "e") return {};
  Position p;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    while (j < s.size() && s[j] != '.') ++j;
    const std::string part = s.substr(i, j - i);
    if (part.empty()) throw BadExpr("malformed position: " + s);
    for (char c : part)
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw BadExpr("malformed position: " + s);
    p.push_back(std::stoi(part));
    i = j + (j < s.size() ? 1 : 0);
    if (j < s.size() && j + 1 == s.size())
      throw BadExpr("malformed position: " + s);
  }
  return p;
}

int child_count(const ExprPtr& e) {
  struct V {
    int operator()(const Var&) const { return 0; }
    int operator()(const App&) const { return 2; }
    int operator()(const Lam&) const { return 1; }
    int operator()(const Letrec& l) const { return static_cast<int>(l.bindings.size()) + 1; }
    int operator()(const Constr& c) const { return static_cast<int>(c.args.size()); }
    int operator()(const Seq&) const { return 2; }
    int operator()(const Case& c) const { return 1 + static_cast<int>(c.alts.size()); }
    int operator()(const BotE&) const { return 0; }
    int operator()(const Hole&) const { return 0; }
  };
  return std::visit(V{}, e->node);
}

ExprPtr child_at(const ExprPtr& e, int i) {
  const int n = child_count(e);
  if (i < 1 || i > n)
    throw BadExpr("child index " + std::to_string(i) + " out of range");
  if (const auto* a = get_if<App>(e)) return i == 1 ? a->fun : a->arg;
  if (const auto* l = get_if<Lam>(e)) return l->body;
  if (const auto* l = get_if<Letrec>(e))
    return i <= static_cast<int>(l->bindings.size()) ? l->bindings[i - 1].rhs : l->body;
  if (const auto* c = get_if<Constr>(e)) return c->args[i - 1];
  if (const auto* s = get_if<Seq>(e)) return i == 1 ? s->first : s->second;
  if (const auto* c = get_if<Case>(e))
    return i == 1 ? c->scrutinee : c->alts[i - 2].rhs;
  throw BadExpr("node has no children");
}

ExprPtr with_child(const ExprPtr& e, int i, ExprPtr c) {
  const int n = child_count(e);
  if (i < 1 || i > n)
    throw BadExpr("child index " + std::to_string(i) + " out of range");
  if (const auto* a = get_if<App>(e))
    return i == 1 ? app(std::move(c), a->arg) : app(a->fun, std::move(c));
  if (const auto* l = get_if<Lam>(e)) return lam(l->binder, std::move(c));
  if (const auto* l = get_if<Letrec>(e)) {
    if (i <= static_cast<int>(l->bindings.size())) {
      auto bs = l->bindings;
      bs[i - 1].rhs = std::move(c);
      return letrec(std::move(bs), l->body);
    }
    return letrec(l->bindings, std::move(c));
  }
  if (const auto* k = get_if<Constr>(e)) {
    auto args = k->args;
    args[i - 1] = std::move(c);
    return constr(k->ctor, std::move(args));
  }
  if (const auto* s = get_if<Seq>(e))
    return i == 1 ? seq(std::move(c), s->second) : seq(s->first, std::move(c));
  if (const auto* k = get_if<Case>(e)) {
    if (i == 1) return case_of(k->type_name, std::move(c), k->alts);
    auto alts = k->alts;
    alts[i - 2].rhs = std::move(c);
    return case_of(k->type_name, k->scrutinee, std::move(alts));
  }
  throw BadExpr("node has no children");
}

ExprPtr subterm_at(const ExprPtr& e, const Position& p) {
  ExprPtr cur = e;
  for (int i : p) cur = child_at(cur, i);
  return cur;
}

ExprPtr replace_at(const ExprPtr& e, const Position& p, ExprPtr replacement) {
  if (p.empty()) return replacement;
  Position rest(p.begin() + 1, p.end());
  return with_child(e, p[0], replace_at(child_at(e, p[0]), rest, std::move(replacement)));
}

// ---------------------------------------------------------------------------
// Contexts
// ---------------------------------------------------------------------------

static void find_holes(const ExprPtr& e, Position& cur, std::vector<Position>& found) {
  if (is<Hole>(e)) {
    found.push_back(cur);
    return;
  }
  const int n = child_count(e);
  for (int i = 1; i <= n; ++i) {
    cur.push_back(i);
    find_holes(child_at(e, i), cur, found);
    cur.pop_back();
  }
}

Context Context::of(ExprPtr skeleton_with_hole) {
  Position cur;
  std::vector<Position> found;
  find_holes(skeleton_with_hole, cur, found);
  if (found.size() != 1)
    throw BadExpr("context must contain exactly one hole, found " +
                  std::to_string(found.size()));
  return Context{std::move(skeleton_with_hole), found[0]};
}

Context Context::identity() { return Context{hole(), {}}; }

ExprPtr fill(const Context& c, ExprPtr e) {
  return replace_at(c.skeleton, c.hole_pos, std::move(e));
}

Context compose(const Context& outer, const Context& inner) {
  Context r;
  r.skeleton = replace_at(outer.skeleton, outer.hole_pos, inner.skeleton);
  r.hole_pos = outer.hole_pos;
  r.hole_pos.insert(r.hole_pos.end(), inner.hole_pos.begin(), inner.hole_pos.end());
  return r;
}

// ---------------------------------------------------------------------------
// Basic operations
// ---------------------------------------------------------------------------

static void free_vars_into(const ExprPtr& e, std::unordered_set<Name>& shadow,
                           std::unordered_set<Name>& out) {
  if (const auto* v = get_if<Var>(e)) {
    if (!shadow.count(v->name)) out.insert(v->name);
    return;
  }
  if (const auto* l = get_if<Lam>(e)) {
    const bool added = shadow.insert(l->binder).second;
    free_vars_into(l->body, shadow, out);
    if (added) shadow.erase(l->binder);
    return;
  }
  if (const auto* l = get_if<Letrec>(e)) {
    std::vector<Name> added;
    for (const auto& b : l->bindings)
      if (shadow.insert(b.name).second) added.push_back(b.name);
    for (const auto& b : l->bindings) free_vars_into(b.rhs, shadow, out);
    free_vars_into(l->body, shadow, out);
    for (const auto& n : added) shadow.erase(n);
    return;
  }
  if (const auto* c = get_if<Case>(e)) {
    free_vars_into(c->scrutinee, shadow, out);
    for (const auto& alt : c->alts) {
      std::vector<Name> added;
      for (const auto& v : alt.vars)
        if (shadow.insert(v).second) added.push_back(v);
      free_vars_into(alt.rhs, shadow, out);
      for (const auto& n : added) shadow.erase(n);
    }
    return;
  }
  const int n = child_count(e);
  for (int i = 1; i <= n; ++i) free_vars_into(child_at(e, i), shadow, out);
}

static std::unordered_set<Name> free_vars_unordered(const ExprPtr& e) {
  std::unordered_set<Name> shadow, out;
  free_vars_into(e, shadow, out);
  return out;
}

std::set<Name> free_vars(const ExprPtr& e) {
  auto u = free_vars_unordered(e);
  return std::set<Name>(u.begin(), u.end());
}

bool is_closed(const ExprPtr& e) { return free_vars_unordered(e).empty(); }

int term_size(const ExprPtr& e) {
  int n = 1;
  const int k = child_count(e);
  for (int i = 1; i <= k; ++i) n += term_size(child_at(e, i));
  return n;
}

bool is_letrec_free(const ExprPtr& e) {
  if (is<Letrec>(e)) return false;
  const int k = child_count(e);
  for (int i = 1; i <= k; ++i)
    if (!is_letrec_free(child_at(e, i))) return false;
  return true;
}

bool is_value(const ExprPtr& e) { return is<Lam>(e) || is<Constr>(e); }

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (a->node.index() != b->node.index()) return false;
  if (const auto* v = get_if<Var>(a)) return v->name == as<Var>(b).name;
  if (const auto* l = get_if<Lam>(a)) {
    const auto& m = as<Lam>(b);
    return l->binder == m.binder && equal(l->body, m.body);
  }
  if (const auto* l = get_if<Letrec>(a)) {
    const auto& m = as<Letrec>(b);
    if (l->bindings.size() != m.bindings.size()) return false;
    for (std::size_t i = 0; i < l->bindings.size(); ++i)
      if (l->bindings[i].name != m.bindings[i].name ||
          !equal(l->bindings[i].rhs, m.bindings[i].rhs))
        return false;
    return equal(l->body, m.body);
  }
  if (const auto* c = get_if<Constr>(a)) {
    const auto& d = as<Constr>(b);
    if (c->ctor != d.ctor || c->args.size() != d.args.size()) return false;
    for (std::size_t i = 0; i < c->args.size(); ++i)
      if (!equal(c->args[i], d.args[i])) return false;
    return true;
  }
  if (const auto* c = get_if<Case>(a)) {
    const auto& d = as<Case>(b);
    if (c->type_name != d.type_name || c->alts.size() != d.alts.size()) return false;
    if (!equal(c->scrutinee, d.scrutinee)) return false;
    for (std::size_t i = 0; i < c->alts.size(); ++i)
      if (c->alts[i].ctor != d.alts[i].ctor || c->alts[i].vars != d.alts[i].vars ||
          !equal(c->alts[i].rhs, d.alts[i].rhs))
        return false;
    return true;
  }
  // App, Seq, BotE, Hole: positional children carry everything.
  const int n = child_count(a);
  if (n != child_count(b)) return false;
  for (int i = 1; i <= n; ++i)
    if (!equal(child_at(a, i), child_at(b, i))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

static void check_name(const Name& n) {
  if (n.empty()) throw BadExpr("empty variable name");
  if (n[0] == '_') throw BadExpr("reserved name (leading underscore): " + n);
}

static void validate_rec(const ExprPtr& e, const SignatureTable& sig) {
  if (is<BotE>(e)) throw BadExpr("bottom is not a source expression");
  if (is<Hole>(e)) throw BadExpr("hole is not a source expression");
  if (const auto* v = get_if<Var>(e)) {
    check_name(v->name);
    return;
  }
  if (const auto* l = get_if<Lam>(e)) check_name(l->binder);
  if (const auto* l = get_if<Letrec>(e)) {
    if (l->bindings.empty()) throw BadExpr("letrec needs at least one binding");
    std::set<Name> seen;
    for (const auto& b : l->bindings) {
      check_name(b.name);
      if (!seen.insert(b.name).second)
        throw BadExpr("duplicate letrec binder: " + b.name);
    }
  }
  if (const auto* c = get_if<Constr>(e)) {
    const ConstrInfo* info = sig.find_ctor(c->ctor);
    if (!info) throw BadExpr("unknown constructor: " + c->ctor);
    if (static_cast<int>(c->args.size()) != info->arity)
      throw BadExpr("constructor " + c->ctor + " expects " +
                    std::to_string(info->arity) + " arguments, got " +
                    std::to_string(c->args.size()));
  }
  if (const auto* c = get_if<Case>(e)) {
    const TypeInfo* t = sig.find_type(c->type_name);
    if (!t) throw BadExpr("unknown type in case: " + c->type_name);
    if (c->alts.size() != t->constructors.size())
      throw BadExpr("case over " + c->type_name + " must have exactly " +
                    std::to_string(t->constructors.size()) + " alternatives");
    for (std::size_t i = 0; i < c->alts.size(); ++i) {
      const auto& alt = c->alts[i];
      const auto& ci = t->constructors[i];
      if (alt.ctor != ci.name)
        throw BadExpr("case alternative " + std::to_string(i + 1) + " must match " +
                      ci.name + " (declaration order), got " + alt.ctor);
      if (static_cast<int>(alt.vars.size()) != ci.arity)
        throw BadExpr("pattern for " + alt.ctor + " needs " +
                      std::to_string(ci.arity) + " variables");
      std::set<Name> seen;
      for (const auto& v : alt.vars) {
        check_name(v);
        if (!seen.insert(v).second)
          throw BadExpr("duplicate pattern variable: " + v);
      }
    }
  }
  const int n = child_count(e);
  for (int i = 1; i <= n; ++i) validate_rec(child_at(e, i), sig);
}

void validate(const ExprPtr& e, const SignatureTable& sig) { validate_rec(e, sig); }

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

namespace {

struct Substituter {
  std::set<Name> payload_fv;  // free vars of all payloads (conservative)

  Name freshen(const Name& base, const std::set<Name>& avoid) {
    Name cand = base;
    do {
      cand += "'";
    } while (avoid.count(cand) || payload_fv.count(cand));
    return cand;
  }

  ExprPtr go(const ExprPtr& e, const std::map<Name, ExprPtr>& m) {
    if (m.empty()) return e;
    if (const auto* v = get_if<Var>(e)) {
      auto it = m.find(v->name);
      return it == m.end() ? e : it->second;
    }
    if (const auto* l = get_if<Lam>(e)) {
      auto m2 = m;
      m2.erase(l->binder);
      Name binder = l->binder;
      ExprPtr body = l->body;
      if (!m2.empty() && payload_fv.count(binder)) {
        std::set<Name> avoid = free_vars(body);
        for (const auto& [k, payload] : m2) avoid.insert(k);
        Name nb = freshen(binder, avoid);
        body = go(body, {{binder, var(nb)}});
        binder = nb;
      }
      return lam(binder, go(body, m2));
    }
    if (const auto* l = get_if<Letrec>(e)) {
      auto m2 = m;
      for (const auto& b : l->bindings) m2.erase(b.name);
      std::vector<Binding> bs = l->bindings;
      ExprPtr body = l->body;
      if (!m2.empty()) {
        std::map<Name, ExprPtr> renames;
        std::set<Name> avoid = free_vars(e);
        for (const auto& [k, payload] : m2) avoid.insert(k);
        for (auto& b : bs)
          if (payload_fv.count(b.name)) {
            Name nb = freshen(b.name, avoid);
            avoid.insert(nb);
            renames.emplace(b.name, var(nb));
            b.name = nb;
          }
        if (!renames.empty()) {
          for (auto& b : bs) b.rhs = go(b.rhs, renames);
          body = go(body, renames);
        }
      }
      if (!m2.empty()) {
        for (auto& b : bs) b.rhs = go(b.rhs, m2);
        body = go(body, m2);
      }
      return letrec(std::move(bs), std::move(body));
    }
    if (const auto* c = get_if<Case>(e)) {
      std::vector<Alt> alts;
      alts.reserve(c->alts.size());
      for (const auto& alt : c->alts) {
        auto m2 = m;
        for (const auto& v : alt.vars) m2.erase(v);
        std::vector<Name> vars = alt.vars;
        ExprPtr rhs = alt.rhs;
        if (!m2.empty()) {
          std::map<Name, ExprPtr> renames;
          std::set<Name> avoid = free_vars(rhs);
          for (const auto& [k, payload] : m2) avoid.insert(k);
          for (auto& v : vars)
            if (payload_fv.count(v)) {
              Name nv = freshen(v, avoid);
              avoid.insert(nv);
              renames.emplace(v, var(nv));
              v = nv;
            }
          if (!renames.empty()) rhs = go(rhs, renames);
        }
        alts.push_back(Alt{alt.ctor, std::move(vars), go(rhs, m2)});
      }
      return case_of(c->type_name, go(c->scrutinee, m), std::move(alts));
    }
    // Var-free leaf or purely positional node.
    const int n = child_count(e);
    if (n == 0) return e;
    ExprPtr out = e;
    for (int i = 1; i <= n; ++i) out = with_child(out, i, go(child_at(out, i), m));
    return out;
  }
};

}  // namespace

ExprPtr subst(const ExprPtr& e, const std::vector<std::pair<Name, ExprPtr>>& s) {
  if (s.empty()) return e;
  Substituter sub;
  std::map<Name, ExprPtr> m;
  for (const auto& [k, payload] : s) {
    if (!m.emplace(k, payload).second)
      throw BadExpr("substitution binds " + k + " twice");
    for (const auto& fv : free_vars(payload)) sub.payload_fv.insert(fv);
  }
  return canonicalize(sub.go(e, m));
}

// ---------------------------------------------------------------------------
// Canonical form
// ---------------------------------------------------------------------------
//
// Binders are renamed to v0, v1, ... in traversal order. Letrec bindings are
// reordered first: bindings reachable from the body keep their breadth-first
// discovery order; the rest ("garbage") are sorted by a name-independent
// structural key, refined by the reference pattern between bindings until the
// partition stabilizes. Ties that survive refinement are order-insensitive up
// to alpha, so input order is kept for them.

namespace {

// Appends the first use (leftmost-outermost) of each target name to `uses`.
void first_uses(const ExprPtr& e, const std::unordered_set<Name>& targets,
                std::unordered_set<Name>& shadow, std::vector<Name>& uses,
                std::unordered_set<Name>& seen) {
  if (const auto* v = get_if<Var>(e)) {
    if (targets.count(v->name) && !shadow.count(v->name) && seen.insert(v->name).second)
      uses.push_back(v->name);
    return;
  }
  if (const auto* l = get_if<Lam>(e)) {
    const bool added = shadow.insert(l->binder).second;
    first_uses(l->body, targets, shadow, uses, seen);
    if (added) shadow.erase(l->binder);
    return;
  }
  if (const auto* l = get_if<Letrec>(e)) {
    std::vector<Name> added;
    for (const auto& b : l->bindings)
      if (shadow.insert(b.name).second) added.push_back(b.name);
    for (const auto& b : l->bindings) first_uses(b.rhs, targets, shadow, uses, seen);
    first_uses(l->body, targets, shadow, uses, seen);
    for (const auto& n : added) shadow.erase(n);
    return;
  }
  if (const auto* c = get_if<Case>(e)) {
    first_uses(c->scrutinee, targets, shadow, uses, seen);
    for (const auto& alt : c->alts) {
      std::vector<Name> added;
      for (const auto& v : alt.vars)
        if (shadow.insert(v).second) added.push_back(v);
      first_uses(alt.rhs, targets, shadow, uses, seen);
      for (const auto& n : added) shadow.erase(n);
    }
    return;
  }
  const int n = child_count(e);
  for (int i = 1; i <= n; ++i) first_uses(child_at(e, i), targets, shadow, uses, seen);
}

void count_uses(const ExprPtr& e, const std::unordered_set<Name>& targets,
                std::unordered_set<Name>& shadow,
                std::unordered_map<Name, int>& counts) {
  if (const auto* v = get_if<Var>(e)) {
    if (targets.count(v->name) && !shadow.count(v->name)) ++counts[v->name];
    return;
  }
  if (const auto* l = get_if<Lam>(e)) {
    const bool added = shadow.insert(l->binder).second;
    count_uses(l->body, targets, shadow, counts);
    if (added) shadow.erase(l->binder);
    return;
  }
  if (const auto* l = get_if<Letrec>(e)) {
    std::vector<Name> added;
    for (const auto& b : l->bindings)
      if (shadow.insert(b.name).second) added.push_back(b.name);
    for (const auto& b : l->bindings) count_uses(b.rhs, targets, shadow, counts);
    count_uses(l->body, targets, shadow, counts);
    for (const auto& n : added) shadow.erase(n);
    return;
  }
  if (const auto* c = get_if<Case>(e)) {
    count_uses(c->scrutinee, targets, shadow, counts);
    for (const auto& alt : c->alts) {
      std::vector<Name> added;
      for (const auto& v : alt.vars)
        if (shadow.insert(v).second) added.push_back(v);
      count_uses(alt.rhs, targets, shadow, counts);
      for (const auto& n : added) shadow.erase(n);
    }
    return;
  }
  const int n = child_count(e);
  for (int i = 1; i <= n; ++i) count_uses(child_at(e, i), targets, shadow, counts);
}

struct Canonicalizer {
  std::unordered_set<Name> avoid;  // free variables of the whole term
  std::uint64_t counter = 0;

  using Env = std::unordered_map<Name, Name>;

  Name fresh() {
    for (;;) {
      Name cand = "v" + std::to_string(counter++);
      if (!avoid.count(cand)) return cand;
    }
  }

  // Structural key for a garbage binding: binder-name independent (local
  // binders get positional tokens, this-letrec binders a fixed marker) and
  // stable under renaming of enclosing binders (mapped via env).
  void skel(const ExprPtr& e, const std::unordered_set<Name>& self, const Env& env,
            std::unordered_map<Name, std::string>& local, int& tok, std::string& out) {
    if (const auto* v = get_if<Var>(e)) {
      auto lit = local.find(v->name);
      if (lit != local.end())
        out += lit->second;
      else if (self.count(v->name))
        out += "&";
      else {
        auto eit = env.find(v->name);
        out += (eit != env.end()) ? eit->second : v->name;
      }
      return;
    }
    if (const auto* l = get_if<Lam>(e)) {
      std::string t = "!" + std::to_string(tok++);
      out += "(\\" + t + ".";
      auto saved = local.count(l->binder) ? std::optional<std::string>(local[l->binder])
                                          : std::nullopt;
      local[l->binder] = t;
      skel(l->body, self, env, local, tok, out);
      if (saved)
        local[l->binder] = *saved;
      else
        local.erase(l->binder);
      out += ")";
      return;
    }
    if (const auto* a = get_if<App>(e)) {
      out += "(";
      skel(a->fun, self, env, local, tok, out);
      out += " ";
      skel(a->arg, self, env, local, tok, out);
      out += ")";
      return;
    }
    if (const auto* s = get_if<Seq>(e)) {
      out += "(seq ";
      skel(s->first, self, env, local, tok, out);
      out += " ";
      skel(s->second, self, env, local, tok, out);
      out += ")";
      return;
    }
    if (const auto* c = get_if<Constr>(e)) {
      out += "(" + c->ctor;
      for (const auto& a : c->args) {
        out += " ";
        skel(a, self, env, local, tok, out);
      }
      out += ")";
      return;
    }
    if (const auto* l = get_if<Letrec>(e)) {
      out += "(letrec ";
      std::vector<std::pair<Name, std::optional<std::string>>> saved;
      for (const auto& b : l->bindings) {
        std::string t = "!" + std::to_string(tok++);
        saved.emplace_back(b.name, local.count(b.name)
                                       ? std::optional<std::string>(local[b.name])
                                       : std::nullopt);
        local[b.name] = t;
      }
      for (const auto& b : l->bindings) {
        out += local[b.name] + "=";
        skel(b.rhs, self, env, local, tok, out);
        out += ",";
      }
      out += "in ";
      skel(l->body, self, env, local, tok, out);
      out += ")";
      for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
        if (it->second)
          local[it->first] = *it->second;
        else
          local.erase(it->first);
      }
      return;
    }
    if (const auto* c = get_if<Case>(e)) {
      out += "(case " + c->type_name + " ";
      skel(c->scrutinee, self, env, local, tok, out);
      out += " of";
      for (const auto& alt : c->alts) {
        out += " " + alt.ctor;
        std::vector<std::pair<Name, std::optional<std::string>>> saved;
        for (const auto& v : alt.vars) {
          std::string t = "!" + std::to_string(tok++);
          saved.emplace_back(v, local.count(v) ? std::optional<std::string>(local[v])
                                               : std::nullopt);
          local[v] = t;
          out += " " + t;
        }
        out += "->";
        skel(alt.rhs, self, env, local, tok, out);
        for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
          if (it->second)
            local[it->first] = *it->second;
          else
            local.erase(it->first);
        }
      }
      out += ")";
      return;
    }
    if (is<BotE>(e)) {
      out += "_|_";
      return;
    }
    out += "[]";
  }

  std::string skel_key(const ExprPtr& e, const std::unordered_set<Name>& self,
                       const Env& env) {
    std::unordered_map<Name, std::string> local;
    int tok = 0;
    std::string out;
    skel(e, self, env, local, tok, out);
    return out;
  }

  std::vector<int> order_bindings(const Letrec& l, const Env& env) {
    const int n = static_cast<int>(l.bindings.size());
    std::unordered_set<Name> targets;
    std::unordered_map<Name, int> index_of;
    for (int i = 0; i < n; ++i) {
      targets.insert(l.bindings[i].name);
      index_of[l.bindings[i].name] = i;
    }

    // Breadth-first discovery from the body through used bindings.
    std::vector<Name> uses;
    std::unordered_set<Name> seen, shadow;
    first_uses(l.body, targets, shadow, uses, seen);
    std::vector<int> discovered;
    for (std::size_t q = 0; q < uses.size(); ++q) {
      discovered.push_back(index_of[uses[q]]);
      first_uses(l.bindings[index_of[uses[q]]].rhs, targets, shadow, uses, seen);
    }

    std::vector<int> garbage;
    for (int i = 0; i < n; ++i)
      if (!seen.count(l.bindings[i].name)) garbage.push_back(i);
    if (garbage.size() > 1) {
      // Initial structural keys, then refine with reference patterns.
      std::map<int, std::string> key0;
      for (int g : garbage) key0[g] = skel_key(l.bindings[g].rhs, targets, env);

      // class id: discovered bindings are fixed singleton classes 0..d-1.
      std::map<int, int> class_of;
      for (std::size_t d = 0; d < discovered.size(); ++d)
        class_of[discovered[d]] = static_cast<int>(d);

      // reference counts between bindings (occurrences of sibling binders)
      std::map<int, std::unordered_map<Name, int>> refs;
      for (int i = 0; i < n; ++i) {
        std::unordered_set<Name> sh;
        count_uses(l.bindings[i].rhs, targets, sh, refs[i]);
      }

      auto group = [&](const std::map<int, std::string>& keys) {
        std::vector<int> order = garbage;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
          return keys.at(a) < keys.at(b);
        });
        int next = static_cast<int>(discovered.size()) - 1;
        for (std::size_t i = 0; i < order.size(); ++i) {
          if (i == 0 || keys.at(order[i]) != keys.at(order[i - 1])) ++next;
          class_of[order[i]] = next;
        }
        return order;
      };

      std::vector<int> order = group(key0);
      for (int round = 0; round < n + 1; ++round) {
        std::map<int, std::string> key;
        for (int g : garbage) {
          std::vector<int> outgoing, incoming;
          for (const auto& [nm, cnt] : refs[g])
            for (int c = 0; c < cnt; ++c) outgoing.push_back(class_of[index_of[nm]]);
          for (int i = 0; i < n; ++i) {
            auto it = refs[i].find(l.bindings[g].name);
            if (it != refs[i].end())
              for (int c = 0; c < it->second; ++c) incoming.push_back(class_of[i]);
          }
          std::sort(outgoing.begin(), outgoing.end());
          std::sort(incoming.begin(), incoming.end());
          std::string k = key0[g] + "|out";
          for (int c : outgoing) k += ":" + std::to_string(c);
          k += "|in";
          for (int c : incoming) k += ":" + std::to_string(c);
          key[g] = k;
        }
        auto prev_class = class_of;
        order = group(key);
        if (class_of == prev_class) break;
      }
      std::vector<int> result = discovered;
      result.insert(result.end(), order.begin(), order.end());
      return result;
    }
    std::vector<int> result = discovered;
    result.insert(result.end(), garbage.begin(), garbage.end());
    return result;
  }

  // Binds names in place and restores the shadowed mapping on scope exit;
  // copying the whole environment per binder is quadratic on machine states
  // whose top binder group keeps growing.
  struct Scope {
    Env& env;
    std::vector<std::pair<Name, std::optional<Name>>> saved;
    explicit Scope(Env& env) : env(env) {}
    Scope(const Scope&) = delete;
    void bind(const Name& from, Name to) {
      auto it = env.find(from);
      if (it != env.end()) {
        saved.emplace_back(from, it->second);
        it->second = std::move(to);
      } else {
        saved.emplace_back(from, std::nullopt);
        env.emplace(from, std::move(to));
      }
    }
    ~Scope() {
      for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
        if (it->second)
          env[it->first] = *it->second;
        else
          env.erase(it->first);
      }
    }
  };

  ExprPtr rename(const ExprPtr& e, Env& env) {
    if (const auto* v = get_if<Var>(e)) {
      auto it = env.find(v->name);
      return it == env.end() ? e : var(it->second);
    }
    if (const auto* l = get_if<Lam>(e)) {
      Scope sc(env);
      Name nb = fresh();
      sc.bind(l->binder, nb);
      return lam(std::move(nb), rename(l->body, env));
    }
    if (const auto* a = get_if<App>(e)) return app(rename(a->fun, env), rename(a->arg, env));
    if (const auto* s = get_if<Seq>(e)) return seq(rename(s->first, env), rename(s->second, env));
    if (const auto* c = get_if<Constr>(e)) {
      std::vector<ExprPtr> args;
      args.reserve(c->args.size());
      for (const auto& x : c->args) args.push_back(rename(x, env));
      return constr(c->ctor, std::move(args));
    }
    if (const auto* l = get_if<Letrec>(e)) {
      const std::vector<int> order = order_bindings(*l, env);
      Scope sc(env);
      for (int i : order) sc.bind(l->bindings[i].name, fresh());
      std::vector<Binding> bs;
      bs.reserve(order.size());
      for (int i : order)
        bs.push_back(Binding{env[l->bindings[i].name], rename(l->bindings[i].rhs, env)});
      return letrec(std::move(bs), rename(l->body, env));
    }
    if (const auto* c = get_if<Case>(e)) {
      std::vector<Alt> alts;
      alts.reserve(c->alts.size());
      ExprPtr scrut = rename(c->scrutinee, env);
      for (const auto& alt : c->alts) {
        Scope sc(env);
        std::vector<Name> vars;
        vars.reserve(alt.vars.size());
        for (const auto& v : alt.vars) {
          Name nv = fresh();
          sc.bind(v, nv);
          vars.push_back(nv);
        }
        alts.push_back(Alt{alt.ctor, std::move(vars), rename(alt.rhs, env)});
      }
      return case_of(c->type_name, std::move(scrut), std::move(alts));
    }
    return e;  // BotE, Hole
  }
};

}  // namespace

ExprPtr canonicalize(const ExprPtr& e) {
  Canonicalizer c;
  c.avoid = free_vars_unordered(e);
  Canonicalizer::Env env;
  return c.rename(e, env);
}

bool alpha_eq(const ExprPtr& a, const ExprPtr& b) {
  return equal(canonicalize(a), canonicalize(b));
}

}  // namespace needlab
