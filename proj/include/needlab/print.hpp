#pragma once
// Canonical text form. Printing then parsing is the identity on canonical
// terms; case expressions produced by the if/then/else sugar print desugared.

#include <string>

#include "needlab/syntax.hpp"

namespace needlab {

// Canonical printer. Applications print as parenthesized spines `(f a b)`,
// nullary constructors bare, holes as `[]`, bottom as `_|_`.
std::string print(const ExprPtr& e);

}  // namespace needlab
