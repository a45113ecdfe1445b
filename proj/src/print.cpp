#include "needlab/print.hpp"

#include <sstream>

namespace needlab {

namespace {

void print_top(const ExprPtr& e, std::ostream& os);

// Atom rendering: anything that is not self-delimiting gets parentheses.
void print_unit(const ExprPtr& e, std::ostream& os) {
  if (const auto* v = get_if<Var>(e)) {
    os << v->name;
    return;
  }
  if (const auto* c = get_if<Constr>(e); c && c->args.empty()) {
    os << c->ctor;
    return;
  }
  if (is<Hole>(e)) {
    os << "[]";
    return;
  }
  if (is<BotE>(e)) {
    os << "_|_";
    return;
  }
  os << '(';
  print_top(e, os);
  os << ')';
}

void print_top(const ExprPtr& e, std::ostream& os) {
  if (const auto* v = get_if<Var>(e)) {
    os << v->name;
    return;
  }
  if (is<App>(e)) {
    // Flatten the application spine: ((f a) b) prints as "f a b".
    std::vector<ExprPtr> spine;
    ExprPtr cur = e;
    while (const auto* ap = get_if<App>(cur)) {
      spine.push_back(ap->arg);
      cur = ap->fun;
    }
    print_unit(cur, os);
    for (auto it = spine.rbegin(); it != spine.rend(); ++it) {
      os << ' ';
      print_unit(*it, os);
    }
    return;
  }
  if (const auto* l = get_if<Lam>(e)) {
    os << '\\' << l->binder << ". ";
    print_top(l->body, os);
    return;
  }
  if (const auto* l = get_if<Letrec>(e)) {
    os << "letrec ";
    for (std::size_t i = 0; i < l->bindings.size(); ++i) {
      if (i) os << ", ";
      os << l->bindings[i].name << " = ";
      if (is<Letrec>(l->bindings[i].rhs))
        print_unit(l->bindings[i].rhs, os);
      else
        print_top(l->bindings[i].rhs, os);
    }
    os << " in ";
    print_top(l->body, os);
    return;
  }
  if (const auto* c = get_if<Constr>(e)) {
    if (c->args.empty()) {
      os << c->ctor;
      return;
    }
    os << c->ctor;
    for (const auto& x : c->args) {
      os << ' ';
      print_unit(x, os);
    }
    return;
  }
  if (const auto* s = get_if<Seq>(e)) {
    os << "seq ";
    print_unit(s->first, os);
    os << ' ';
    print_unit(s->second, os);
    return;
  }
  if (const auto* c = get_if<Case>(e)) {
    os << "case " << c->type_name << ' ';
    print_unit(c->scrutinee, os);
    os << " of { ";
    for (std::size_t i = 0; i < c->alts.size(); ++i) {
      if (i) os << " ; ";
      os << c->alts[i].ctor;
      for (const auto& v : c->alts[i].vars) os << ' ' << v;
      os << " -> ";
      print_top(c->alts[i].rhs, os);
    }
    os << " }";
    return;
  }
  if (is<BotE>(e)) {
    os << "_|_";
    return;
  }
  os << "[]";
}

}  // namespace

std::string print(const ExprPtr& e) {
  std::ostringstream os;
  // Applications and non-nullary constructors are printed parenthesized even
  // at top level so the output is unambiguous when pasted into larger terms.
  if (is<App>(e) || (is<Constr>(e) && !as<Constr>(e).args.empty()))
    print_unit(e, os);
  else
    print_top(e, os);
  return os.str();
}

}  // namespace needlab
