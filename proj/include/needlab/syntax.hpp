#pragma once
// Core term representation shared by all three machines: immutable expression
// trees, positions, contexts, constructor signatures, substitution and the
// canonical form that maintains the distinct-variable convention.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace needlab {

using Name = std::string;

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// ---------------------------------------------------------------------------
// Node kinds
// ---------------------------------------------------------------------------

struct Var {
  Name name;
};

struct App {
  ExprPtr fun;
  ExprPtr arg;
};

struct Lam {
  Name binder;
  ExprPtr body;
};

struct Binding {
  Name name;
  ExprPtr rhs;
};

struct Letrec {
  std::vector<Binding> bindings;  // nonempty; binder names pairwise distinct
  ExprPtr body;
};

struct Constr {
  Name ctor;                  // capitalized constructor name
  std::vector<ExprPtr> args;  // always saturated (size == declared arity)
};

struct Seq {
  ExprPtr first;
  ExprPtr second;
};

struct Alt {
  Name ctor;
  std::vector<Name> vars;  // pattern variables, length == arity of ctor
  ExprPtr rhs;
};

struct Case {
  Name type_name;
  ExprPtr scrutinee;
  std::vector<Alt> alts;  // exactly one per constructor, in signature order
};

// Non-source nodes: BotE appears only in tree prefixes, Hole only in contexts.
struct BotE {};
struct Hole {};

struct Expr {
  std::variant<Var, App, Lam, Letrec, Constr, Seq, Case, BotE, Hole> node;
};

// Constructors ---------------------------------------------------------------

ExprPtr var(Name n);
ExprPtr app(ExprPtr f, ExprPtr a);
ExprPtr lam(Name binder, ExprPtr body);
ExprPtr letrec(std::vector<Binding> bs, ExprPtr body);
ExprPtr constr(Name ctor, std::vector<ExprPtr> args);
ExprPtr seq(ExprPtr a, ExprPtr b);
ExprPtr case_of(Name type_name, ExprPtr scrut, std::vector<Alt> alts);
ExprPtr bot();
ExprPtr hole();

template <class T>
const T* get_if(const ExprPtr& e) {
  return std::get_if<T>(&e->node);
}
template <class T>
bool is(const ExprPtr& e) {
  return std::holds_alternative<T>(e->node);
}
template <class T>
const T& as(const ExprPtr& e) {
  return std::get<T>(e->node);
}

// The canonical diverging term (\z. (z z)) (\x. (x x)).
ExprPtr omega();

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violations of the term well-formedness rules (arity, duplicate binders, ...).
struct BadExpr : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Signatures
// ---------------------------------------------------------------------------

struct ConstrInfo {
  Name name;
  int arity = 0;
};

struct TypeInfo {
  Name name;
  std::vector<ConstrInfo> constructors;
};

// Declared algebraic types. Bool (True/0, False/0) is always present.
class SignatureTable {
 public:
  SignatureTable();  // Bool only

  // Parses lines of the form `data T = C1/a1 | C2/a2 ;`. Throws ParseError on
  // malformed input and BadExpr on redeclarations.
  static SignatureTable parse_signatures(const std::string& text);

  void add_type(TypeInfo info);

  const std::vector<TypeInfo>& types() const { return types_; }
  const TypeInfo* find_type(const Name& type_name) const;
  // Type that declares `ctor`, or nullptr.
  const TypeInfo* type_of_ctor(const Name& ctor) const;
  const ConstrInfo* find_ctor(const Name& ctor) const;
  bool has_ctor(const Name& ctor) const { return find_ctor(ctor) != nullptr; }
  int arity(const Name& ctor) const;  // throws BadExpr if unknown

 private:
  std::vector<TypeInfo> types_;
};

// Signature with List (Nil/0, Cons/2) and Nat (Zero/0, Succ/1) on top of Bool;
// used by the corpus generator and most tests.
SignatureTable default_signature();

// ---------------------------------------------------------------------------
// Positions
// ---------------------------------------------------------------------------
//
// A position is a path of 1-based child indices. Child numbering:
//   App:     1 function, 2 argument
//   Lam:     1 body
//   Seq:     1 first, 2 second
//   Constr:  1..n arguments
//   Letrec:  1..n binding right-hand sides (current order), n+1 body
//   Case:    1 scrutinee, 1+i right-hand side of alternative i

using Position = std::vector<int>;

std::string position_to_string(const Position& p);  // "ε" for the empty path
Position parse_position(const std::string& s);

int child_count(const ExprPtr& e);
ExprPtr child_at(const ExprPtr& e, int i);                  // 1-based
ExprPtr with_child(const ExprPtr& e, int i, ExprPtr c);     // functional update
ExprPtr subterm_at(const ExprPtr& e, const Position& p);    // throws BadExpr
ExprPtr replace_at(const ExprPtr& e, const Position& p, ExprPtr replacement);

// ---------------------------------------------------------------------------
// Contexts
// ---------------------------------------------------------------------------

// A context is an expression containing exactly one Hole.
struct Context {
  ExprPtr skeleton;
  Position hole_pos;

  static Context of(ExprPtr skeleton_with_hole);  // locates the unique hole
  static Context identity();                      // just the hole
};

ExprPtr fill(const Context& c, ExprPtr e);
Context compose(const Context& outer, const Context& inner);  // outer[inner]

// ---------------------------------------------------------------------------
// Basic term operations
// ---------------------------------------------------------------------------

std::set<Name> free_vars(const ExprPtr& e);
bool is_closed(const ExprPtr& e);
int term_size(const ExprPtr& e);  // number of nodes
bool is_letrec_free(const ExprPtr& e);
// Abstraction or constructor application.
bool is_value(const ExprPtr& e);

// Structural equality including binder names (not alpha equivalence).
bool equal(const ExprPtr& a, const ExprPtr& b);

// Simultaneous capture-avoiding substitution; the result is canonicalized.
ExprPtr subst(const ExprPtr& e, const std::vector<std::pair<Name, ExprPtr>>& s);

// Checks the structural invariants for source terms: saturated constructors,
// complete case alternatives in signature order, nonempty letrecs with
// distinct binders, no Bot/Hole, no reserved (underscore-led) names.
void validate(const ExprPtr& e, const SignatureTable& sig);

// ---------------------------------------------------------------------------
// Canonical form
// ---------------------------------------------------------------------------
//
// canonicalize() renames every binder to v0, v1, ... in a deterministic
// traversal order and sorts letrec bindings (bindings used by the body first,
// in discovery order; unused bindings by a structural key). Free variables are
// untouched; indices that would collide with a free name are skipped. Two
// terms are alpha-equivalent iff their canonical forms are structurally equal.

ExprPtr canonicalize(const ExprPtr& e);
bool alpha_eq(const ExprPtr& a, const ExprPtr& b);

// Fresh-name supply for machine steps that must invent binders. The generated
// names use a reserved prefix that the parser rejects, so they can never
// collide with source names; canonicalization renames them away afterwards.
class NameSupply {
 public:
  explicit NameSupply(std::string prefix = "_f") : prefix_(std::move(prefix)) {}
  Name fresh() { return prefix_ + std::to_string(counter_++); }

 private:
  std::string prefix_;
  std::uint64_t counter_ = 0;
};

}  // namespace needlab
