#include "needlab/inftree.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <utility>

namespace needlab {

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

std::string print_label(const TreeLabel& l) {
  switch (l.kind) {
    case TreeLabel::Kind::App:
      return "@";
    case TreeLabel::Kind::CaseT:
      return "case_" + l.name;
    case TreeLabel::Kind::AltPat: {
      std::string out = "(" + l.name;
      for (const Name& v : l.binders) out += " " + v;
      return out + ")";
    }
    case TreeLabel::Kind::Seq:
      return "seq";
    case TreeLabel::Kind::Constr:
      return l.name;
    case TreeLabel::Kind::Lam:
      return "\\" + l.binders.at(0);
    case TreeLabel::Kind::Var:
      return l.name;
    case TreeLabel::Kind::Bot:
      return "Bot";
  }
  return "?";
}

namespace {

TreeLabel bot_label() { return {TreeLabel::Kind::Bot, "", {}, 0}; }

TreeLabel var_label(const Name& n) { return {TreeLabel::Kind::Var, n, {}, 0}; }

// Head label of an expression node that is not a variable or a binding group.
TreeLabel head_label(const ExprPtr& e) {
  if (is<App>(e)) return {TreeLabel::Kind::App, "", {}, 2};
  if (is<Seq>(e)) return {TreeLabel::Kind::Seq, "", {}, 2};
  if (const auto* l = get_if<Lam>(e))
    return {TreeLabel::Kind::Lam, "", {l->binder}, 1};
  if (const auto* c = get_if<Constr>(e))
    return {TreeLabel::Kind::Constr, c->ctor, {}, (int)c->args.size()};
  if (const auto* c = get_if<Case>(e))
    return {TreeLabel::Kind::CaseT, c->type_name, {}, 1 + (int)c->alts.size()};
  if (is<BotE>(e)) return bot_label();
  throw BadExpr("tree node has no head label: hole");
}

TreeLabel alt_label(const Alt& a) {
  return {TreeLabel::Kind::AltPat, a.ctor, a.vars, 1};
}

}  // namespace

// ---------------------------------------------------------------------------
// Positional oracle
// ---------------------------------------------------------------------------
//
// The label at position p is computed by replaying p on the source term with
// a movable marker. Child indices are consumed one at a time; binding groups
// and bound-variable occurrences are traversed without consuming anything:
// the group is transparent, and a bound occurrence jumps to the right-hand
// side of its binding. A jump state (binding, remaining suffix) seen twice
// proves the chase is in a loop that can never produce a head symbol: at an
// exhausted position that is the Bot leaf; below it no position exists.

std::optional<TreeLabel> it_label(const ExprPtr& s, const Position& p) {
  struct Scope {
    ExprPtr node;  // Lam, Letrec, or Case (for one of its alternatives)
    std::vector<Name> binders;
    bool group;  // true for Letrec scopes
  };
  std::vector<Scope> scopes;
  ExprPtr cur = s;
  size_t pi = 0;  // components of p consumed so far
  std::set<std::tuple<const Expr*, int, size_t>> visited;

  for (;;) {
    if (const auto* l = get_if<Letrec>(cur)) {
      std::vector<Name> names;
      names.reserve(l->bindings.size());
      for (const Binding& b : l->bindings) names.push_back(b.name);
      scopes.push_back({cur, std::move(names), true});
      cur = l->body;
      continue;
    }
    if (const auto* v = get_if<Var>(cur)) {
      const Letrec* target = nullptr;
      size_t target_scope = 0;
      int target_idx = -1;
      for (size_t i = scopes.size(); i-- > 0;) {
        auto it = std::find(scopes[i].binders.begin(),
                            scopes[i].binders.end(), v->name);
        if (it == scopes[i].binders.end()) continue;
        if (!scopes[i].group) break;  // lambda- or pattern-bound occurrence
        target = get_if<Letrec>(scopes[i].node);
        target_scope = i;
        target_idx = (int)(it - scopes[i].binders.begin());
        break;
      }
      if (target == nullptr) {  // free or lambda/pattern-bound: a leaf
        if (pi == p.size()) return var_label(v->name);
        return std::nullopt;
      }
      auto key = std::make_tuple((const Expr*)scopes[target_scope].node.get(),
                                 target_idx, pi);
      if (!visited.insert(key).second) {
        if (pi == p.size()) return bot_label();
        return std::nullopt;
      }
      cur = target->bindings[target_idx].rhs;
      scopes.resize(target_scope + 1);
      continue;
    }
    if (pi == p.size()) return head_label(cur);
    int k = p[pi++];
    if (const auto* f = get_if<Lam>(cur)) {
      if (k != 1) return std::nullopt;
      scopes.push_back({cur, {f->binder}, false});
      cur = f->body;
    } else if (const auto* a = get_if<App>(cur)) {
      if (k == 1)
        cur = a->fun;
      else if (k == 2)
        cur = a->arg;
      else
        return std::nullopt;
    } else if (const auto* q = get_if<Seq>(cur)) {
      if (k == 1)
        cur = q->first;
      else if (k == 2)
        cur = q->second;
      else
        return std::nullopt;
    } else if (const auto* c = get_if<Constr>(cur)) {
      if (k < 1 || k > (int)c->args.size()) return std::nullopt;
      cur = c->args[k - 1];
    } else if (const auto* cs = get_if<Case>(cur)) {
      if (k == 1) {
        cur = cs->scrutinee;
      } else if (k >= 2 && k <= 1 + (int)cs->alts.size()) {
        const Alt& alt = cs->alts[k - 2];
        if (pi == p.size()) return alt_label(alt);
        if (p[pi++] != 1) return std::nullopt;
        scopes.push_back({cur, alt.vars, false});
        cur = alt.rhs;
      } else {
        return std::nullopt;
      }
    } else {  // BotE: a leaf; Hole: rejected by head_label
      if (is<Hole>(cur)) throw BadExpr("tree node has no head label: hole");
      return std::nullopt;
    }
  }
}

// ---------------------------------------------------------------------------
// Handles
// ---------------------------------------------------------------------------

namespace detail {

struct SynthNode {
  TreeLabel label;
  std::vector<TreeClosure> kids;
};

struct EnvEntry {
  TreeClosure value;
  bool opaque = false;  // binder with no expansion: occurrences stay as names
};

struct EnvFrame {
  EnvFrame* parent = nullptr;
  std::unordered_map<Name, EnvEntry> map;
};

// Owns every environment frame created for one tree_of family; frames may
// reference themselves (recursive bindings), so they live in a shared arena
// rather than in the handles.
struct TreeCtx {
  std::deque<EnvFrame> arena;

  EnvFrame* make(EnvFrame* parent) {
    arena.emplace_back();
    arena.back().parent = parent;
    return &arena.back();
  }
};

struct ResolvedNode {
  TreeLabel label;
  TreeClosure self;  // the closure the observable node was expanded from
  std::vector<TreeClosure> kids;
};

}  // namespace detail

using detail::EnvEntry;
using detail::EnvFrame;
using detail::SynthNode;
using detail::TreeClosure;
using detail::TreeCtx;

namespace {
TreeClosure closure(ExprPtr e, EnvFrame* env, int alt = -1) {
  TreeClosure c;
  c.expr = std::move(e);
  c.env = env;
  c.alt = alt;
  return c;
}
}  // namespace

TreeHandle::TreeHandle(std::shared_ptr<TreeCtx> ctx, TreeClosure c)
    : ctx_(std::move(ctx)), c_(std::move(c)) {}

// Expands the closure until an observable node appears: binding groups push
// an environment frame, bound occurrences follow their entry. Revisiting a
// closure proves the expansion loops forever, which is the Bot leaf.
void TreeHandle::resolve() const {
  if (resolved_) return;
  TreeClosure c = c_;
  auto done = [&](TreeLabel l, std::vector<TreeClosure> kids) {
    resolved_ = std::make_shared<const detail::ResolvedNode>(
        detail::ResolvedNode{std::move(l), c, std::move(kids)});
  };

  std::set<std::pair<const Expr*, EnvFrame*>> seen;
  for (;;) {
    if (c.synth) {
      done(c.synth->label, c.synth->kids);
      return;
    }
    if (c.alt >= 0) {
      const Alt& alt = as<Case>(c.expr).alts[c.alt];
      EnvFrame* f = ctx_->make(c.env);
      for (const Name& v : alt.vars) f->map[v] = {TreeClosure{}, true};
      done(alt_label(alt), {closure(alt.rhs, f)});
      return;
    }
    if (!seen.insert({c.expr.get(), c.env}).second) {
      done(bot_label(), {});
      return;
    }
    if (const auto* l = get_if<Letrec>(c.expr)) {
      EnvFrame* f = ctx_->make(c.env);
      for (const Binding& b : l->bindings)
        f->map[b.name] = {closure(b.rhs, f), false};
      c = closure(l->body, f);
      continue;
    }
    if (const auto* v = get_if<Var>(c.expr)) {
      const EnvEntry* hit = nullptr;
      for (EnvFrame* f = c.env; f != nullptr; f = f->parent) {
        auto it = f->map.find(v->name);
        if (it != f->map.end()) {
          hit = &it->second;
          break;
        }
      }
      if (hit == nullptr || hit->opaque) {
        done(var_label(v->name), {});
        return;
      }
      c = hit->value;
      continue;
    }
    break;
  }

  TreeLabel l = head_label(c.expr);
  std::vector<TreeClosure> kids;
  if (const auto* a = get_if<App>(c.expr)) {
    kids = {closure(a->fun, c.env), closure(a->arg, c.env)};
  } else if (const auto* q = get_if<Seq>(c.expr)) {
    kids = {closure(q->first, c.env), closure(q->second, c.env)};
  } else if (const auto* f = get_if<Lam>(c.expr)) {
    EnvFrame* g = ctx_->make(c.env);
    g->map[f->binder] = {TreeClosure{}, true};
    kids = {closure(f->body, g)};
  } else if (const auto* cn = get_if<Constr>(c.expr)) {
    for (const ExprPtr& arg : cn->args) kids.push_back(closure(arg, c.env));
  } else if (const auto* cs = get_if<Case>(c.expr)) {
    kids.push_back(closure(cs->scrutinee, c.env));
    for (int i = 0; i < (int)cs->alts.size(); ++i)
      kids.push_back(closure(c.expr, c.env, i));
  }
  done(std::move(l), std::move(kids));
}

const TreeLabel& TreeHandle::head() const {
  resolve();
  return resolved_->label;
}

int TreeHandle::child_count() const { return head().children; }

TreeHandle TreeHandle::child(int i) const {
  resolve();
  if (i < 1 || i > (int)resolved_->kids.size())
    throw BadExpr("tree child index out of range: " + std::to_string(i));
  return TreeHandle(ctx_, resolved_->kids[i - 1]);
}

TreeHandle tree_of(const ExprPtr& s) {
  return TreeHandle(std::make_shared<TreeCtx>(), closure(s, nullptr));
}

// ---------------------------------------------------------------------------
// Prefixes
// ---------------------------------------------------------------------------

namespace {

void collect_prefix(const TreeHandle& h, Position& p, int left,
                    std::map<Position, TreeLabel>& out) {
  const TreeLabel& l = h.head();
  out.emplace(p, l);
  if (left == 0) return;
  for (int i = 1; i <= l.children; ++i) {
    p.push_back(i);
    collect_prefix(h.child(i), p, left - 1, out);
    p.pop_back();
  }
}

}  // namespace

TreePrefix prefix(const TreeHandle& t, int depth) {
  TreePrefix out;
  out.depth = depth;
  Position p;
  collect_prefix(t, p, depth, out.labels);
  return out;
}

std::string print_prefix(const TreePrefix& p, bool indented) {
  std::ostringstream os;
  for (const auto& [pos, label] : p.labels) {
    if (indented) {
      for (size_t i = 0; i < pos.size(); ++i) os << "  ";
      os << print_label(label) << "\n";
    } else {
      os << position_to_string(pos) << ": " << print_label(label) << "\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Prefix equality up to bound names
// ---------------------------------------------------------------------------

namespace {

// Renaming pairs for the binders introduced along the current path; the
// innermost pair mentioning either name decides a variable comparison.
bool eq_rec(const TreeHandle& a, const TreeHandle& b, int left,
            std::vector<std::pair<Name, Name>>& ren) {
  const TreeLabel& la = a.head();
  const TreeLabel& lb = b.head();
  if (la.kind != lb.kind || la.children != lb.children) return false;
  switch (la.kind) {
    case TreeLabel::Kind::Var: {
      for (auto it = ren.rbegin(); it != ren.rend(); ++it) {
        bool hit_a = it->first == la.name;
        bool hit_b = it->second == lb.name;
        if (hit_a || hit_b) return hit_a && hit_b;
      }
      return la.name == lb.name;  // both free
    }
    case TreeLabel::Kind::CaseT:
    case TreeLabel::Kind::Constr:
    case TreeLabel::Kind::AltPat:
      if (la.name != lb.name) return false;
      break;
    default:
      break;
  }
  if (la.binders.size() != lb.binders.size()) return false;
  if (left == 0) return true;
  for (int i = 1; i <= la.children; ++i) {
    size_t mark = ren.size();
    if (i == 1)  // Lam and AltPat binders scope over child 1 only
      for (size_t j = 0; j < la.binders.size(); ++j)
        ren.emplace_back(la.binders[j], lb.binders[j]);
    bool ok = eq_rec(a.child(i), b.child(i), left - 1, ren);
    ren.resize(mark);
    if (!ok) return false;
  }
  return true;
}

}  // namespace

bool tree_eq_upto(const ExprPtr& a, const ExprPtr& b, int depth) {
  return tree_eq_upto(tree_of(a), tree_of(b), depth);
}

bool tree_eq_upto(const TreeHandle& a, const TreeHandle& b, int depth) {
  std::vector<std::pair<Name, Name>> ren;
  return eq_rec(a, b, depth, ren);
}

// ---------------------------------------------------------------------------
// Normal-order reduction
// ---------------------------------------------------------------------------

// Friend of TreeHandle: reads the memoized closures to build contracta and
// rebuilt spines without re-expanding anything.
class TreeStepper {
 public:
  static TreeStepResult step(const TreeHandle& t, int descent_limit) {
    std::vector<TreeHandle> spine;  // strict ancestors of `cur`, root first
    TreeHandle cur = t;
    for (;;) {
      const TreeLabel& l = cur.head();
      if (l.kind == TreeLabel::Kind::Lam ||
          l.kind == TreeLabel::Kind::Constr) {
        if (spine.empty())
          return {TreeStepResult::Kind::Answer, std::nullopt, ""};
        return contract(spine, cur);
      }
      if (l.kind != TreeLabel::Kind::App && l.kind != TreeLabel::Kind::Seq &&
          l.kind != TreeLabel::Kind::CaseT)
        return {TreeStepResult::Kind::NoRedexFound, std::nullopt, ""};
      if ((int)spine.size() >= descent_limit)
        return {TreeStepResult::Kind::DescentLimit, std::nullopt, ""};
      spine.push_back(cur);
      cur = cur.child(1);
    }
  }

 private:
  static const std::vector<TreeClosure>& kids(const TreeHandle& h) {
    h.resolve();
    return h.resolved_->kids;
  }

  static const TreeClosure& self(const TreeHandle& h) {
    h.resolve();
    return h.resolved_->self;
  }

  // `value` (Lam or Constr head) sits in the first child slot of
  // spine.back(); contract the parent node and rebuild the path above it.
  static TreeStepResult contract(const std::vector<TreeHandle>& spine,
                                 const TreeHandle& value) {
    const TreeHandle& parent = spine.back();
    const TreeLabel& pl = parent.head();
    const TreeLabel& vl = value.head();
    auto& ctx = parent.ctx_;
    auto none = [] {
      return TreeStepResult{TreeStepResult::Kind::NoRedexFound, std::nullopt,
                            ""};
    };

    TreeClosure contractum;
    std::string rule;
    if (pl.kind == TreeLabel::Kind::App) {
      if (vl.kind != TreeLabel::Kind::Lam) return none();  // value applied
      // Replace the application by the body, remembering the argument.
      const TreeClosure& lc = self(value);
      const auto& f = as<Lam>(lc.expr);
      EnvFrame* g = ctx->make(lc.env);
      g->map[f.binder] = {kids(parent)[1], false};
      contractum = closure(f.body, g);
      rule = "betaTr";
    } else if (pl.kind == TreeLabel::Kind::Seq) {
      contractum = kids(parent)[1];
      rule = "seqTr";
    } else {  // CaseT
      if (vl.kind != TreeLabel::Kind::Constr) return none();
      int idx = -1;
      const TreeClosure* alt_closure = nullptr;
      const auto& pkids = kids(parent);
      for (size_t i = 1; i < pkids.size(); ++i) {
        const TreeClosure& ac = pkids[i];
        if (as<Case>(ac.expr).alts[ac.alt].ctor == vl.name) {
          idx = ac.alt;
          alt_closure = &ac;
          break;
        }
      }
      if (alt_closure == nullptr) return none();  // scrutinee of another type
      const Alt& alt = as<Case>(alt_closure->expr).alts[idx];
      EnvFrame* g = ctx->make(alt_closure->env);
      const auto& args = kids(value);
      for (size_t i = 0; i < alt.vars.size(); ++i)
        g->map[alt.vars[i]] = {args[i], false};
      contractum = closure(alt.rhs, g);
      rule = "caseTr";
    }

    // Rebuild the ancestors of the contracted node as synthesized nodes.
    TreeClosure nc = contractum;
    for (size_t i = spine.size() - 1; i-- > 0;) {
      auto sn = std::make_shared<SynthNode>();
      sn->label = spine[i].head();
      sn->kids = kids(spine[i]);
      sn->kids[0] = nc;
      nc = TreeClosure{};
      nc.synth = std::move(sn);
    }
    return {TreeStepResult::Kind::Reduced, TreeHandle(ctx, nc), rule};
  }
};

TreeStepResult tree_step(const TreeHandle& t, int descent_limit) {
  return TreeStepper::step(t, descent_limit);
}

TreeEvalResult tree_converges(const ExprPtr& s, int step_budget,
                              int descent_limit) {
  TreeHandle t = tree_of(s);
  TreeEvalResult r;
  for (int i = 0; i < step_budget; ++i) {
    TreeStepResult sr = tree_step(t, descent_limit);
    switch (sr.kind) {
      case TreeStepResult::Kind::Answer:
        return {TreeVerdict::Converged, i, "answer"};
      case TreeStepResult::Kind::NoRedexFound:
        return {TreeVerdict::Exhausted, i, "no-redex"};
      case TreeStepResult::Kind::DescentLimit:
        return {TreeVerdict::Exhausted, i, "descent-limit"};
      case TreeStepResult::Kind::Reduced:
        t = *sr.next;
        break;
    }
  }
  return {TreeVerdict::Exhausted, step_budget, "step-budget"};
}

}  // namespace needlab
