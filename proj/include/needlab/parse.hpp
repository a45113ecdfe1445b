#pragma once
// Surface-syntax parser.
//
//   expr  ::= '\' name+ '.' expr
//           | 'letrec' name '=' expr (',' name '=' expr)* 'in' expr
//           | 'seq' atom atom
//           | 'case' TYPE expr 'of' '{' alt (';' alt)* '}'
//           | 'if' expr 'then' expr 'else' expr        (sugar for case Bool)
//           | atom+                                    (application spine)
//   atom  ::= name | CTOR | '(' expr ')'
//   alt   ::= CTOR name* '->' expr
//
// Variables are lowercase identifiers (trailing primes allowed); constructor
// and type names are capitalized. Constructors must appear saturated: a
// non-nullary constructor is only accepted as the head of a parenthesized
// spine `(Cons x xs)` carrying exactly its declared arity. Names beginning
// with an underscore are reserved for generated binders and rejected.

#include <string>

#include "needlab/syntax.hpp"

namespace needlab {

// Parses and validates a single expression. Throws ParseError for syntax
// errors (with line/column) and BadExpr for well-formedness violations.
ExprPtr parse_expr(const std::string& text, const SignatureTable& sig);

}  // namespace needlab
