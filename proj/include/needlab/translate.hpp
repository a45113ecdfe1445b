#pragma once
// Translations between the three calculi.  The interesting direction removes
// binder groups by encoding mutual recursion with a family of fixpoint
// combinators; the other directions are identities over shared syntax.

#include "needlab/syntax.hpp"

namespace needlab {

// Member i of the family of n mutually recursive fixpoint combinators.
// The result is closed and binder-group-free; the family satisfies the
// generalized fixpoint law
//   Y_i F_1 ... F_n  ~  F_i (Y_1 F_1 ... F_n) ... (Y_n F_1 ... F_n)
// up to bounded behavioural testing.  Throws BadExpr unless 1 <= i <= n.
ExprPtr build_Y(int n, int i);

// Identity map from the sharing calculus into the by-name calculus; both
// use the same syntax, only the evaluation strategy changes.
ExprPtr translate_W(const ExprPtr& e);

// Identity embedding of binder-group-free expressions into the full
// syntax.  Throws BadExpr when the input contains a binder group.
ExprPtr translate_iota(const ExprPtr& e);

// Remove every binder group: letrec x1=s1,...,xn=sn in t becomes
//   (\x1'...xn'. (\x1...xn. N(t)) U1 ... Un) X1' ... Xn'
// with U_i = (x_i' x1' ... xn'),
//      X_i' = \x1...xn. F_i (x1 x1 ... xn) ... (xn x1 ... xn), and
//      F_i  = \x1...xn. N(s_i),
// where N is this translation applied recursively (inside-out) and the
// primed names are fresh.  All other constructors map homomorphically; a
// hole maps to itself and is never duplicated.
ExprPtr translate_N(const ExprPtr& e);

// Variant of translate_N that applies the outer redexes eagerly as a
// substitution: each group becomes sigma(N'(t)) with
// sigma = {x_i -> (X_i' X1' ... Xn')}.  Same convergence behaviour as
// translate_N, but contexts are not mapped to contexts (bindings used in
// several places duplicate their translation).
ExprPtr translate_Nprime(const ExprPtr& e);

// translate_N over a one-hole context; filling commutes with translation:
// translate_N(fill(c, s)) is alpha-equal to fill(translate_N_context(c),
// translate_N(s)).
Context translate_N_context(const Context& c);

}  // namespace needlab
