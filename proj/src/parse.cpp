#include "needlab/parse.hpp"

#include <cctype>
#include <optional>
#include <sstream>
#include <vector>

namespace needlab {

namespace {

enum class Tok {
  LParen, RParen, LBrace, RBrace, Semi, Comma, Arrow, Eq, Dot, Backslash,
  Slash, Bar, Lower, Upper, Int,
  KwLetrec, KwIn, KwSeq, KwCase, KwOf, KwIf, KwThen, KwElse, KwData,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << msg << " at line " << tok_.line << ", column " << tok_.col;
    throw ParseError(os.str());
  }

 private:
  // The prime mark U+2032 is accepted as an apostrophe.
  bool prime_at(std::size_t i) const {
    return i + 2 < src_.size() && static_cast<unsigned char>(src_[i]) == 0xE2 &&
           static_cast<unsigned char>(src_[i + 1]) == 0x80 &&
           static_cast<unsigned char>(src_[i + 2]) == 0xB2;
  }

  void advance() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_ = Token{Tok::End, "", line_, col_};
      return;
    }
    const char c = src_[pos_];
    auto punct = [&](Tok k, int len, const char* text) {
      tok_ = Token{k, text, line_, col_};
      pos_ += len;
      col_ += len;
    };
    switch (c) {
      case '(': punct(Tok::LParen, 1, "("); return;
      case ')': punct(Tok::RParen, 1, ")"); return;
      case '{': punct(Tok::LBrace, 1, "{"); return;
      case '}': punct(Tok::RBrace, 1, "}"); return;
      case ';': punct(Tok::Semi, 1, ";"); return;
      case ',': punct(Tok::Comma, 1, ","); return;
      case '=': punct(Tok::Eq, 1, "="); return;
      case '.': punct(Tok::Dot, 1, "."); return;
      case '\\': punct(Tok::Backslash, 1, "\\"); return;
      case '/': punct(Tok::Slash, 1, "/"); return;
      case '|': punct(Tok::Bar, 1, "|"); return;
      case '-':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
          punct(Tok::Arrow, 2, "->");
          return;
        }
        throw ParseError("stray '-' at line " + std::to_string(line_) +
                         ", column " + std::to_string(col_));
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string text;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        text += src_[pos_++];
        ++col_;
      }
      tok_ = Token{Tok::Int, text, tok_.line, tok_.col};
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      if (c == '_')
        throw ParseError("names may not start with '_' (reserved), line " +
                         std::to_string(line_) + ", column " + std::to_string(col_));
      std::string text;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_')) {
        text += src_[pos_++];
        ++col_;
      }
      // trailing primes: z', z'' and the unicode prime
      while (pos_ < src_.size() && (src_[pos_] == '\'' || prime_at(pos_))) {
        if (src_[pos_] == '\'') {
          ++pos_;
          ++col_;
        } else {
          pos_ += 3;
          ++col_;
        }
        text += '\'';
      }
      Tok kind;
      if (text == "letrec") kind = Tok::KwLetrec;
      else if (text == "in") kind = Tok::KwIn;
      else if (text == "seq") kind = Tok::KwSeq;
      else if (text == "case") kind = Tok::KwCase;
      else if (text == "of") kind = Tok::KwOf;
      else if (text == "if") kind = Tok::KwIf;
      else if (text == "then") kind = Tok::KwThen;
      else if (text == "else") kind = Tok::KwElse;
      else if (text == "data") kind = Tok::KwData;
      else if (std::isupper(static_cast<unsigned char>(text[0]))) kind = Tok::Upper;
      else kind = Tok::Lower;
      tok_ = Token{kind, text, tok_.line, tok_.col};
      return;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "' at line " +
                     std::to_string(line_) + ", column " + std::to_string(col_));
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
 public:
  Parser(Lexer& lex, const SignatureTable& sig) : lex_(lex), sig_(sig) {}

  ExprPtr expr() {
    switch (lex_.peek().kind) {
      case Tok::Backslash: return lambda();
      case Tok::KwLetrec: return letrec_expr();
      case Tok::KwSeq: {
        lex_.take();
        ExprPtr a = atom();
        ExprPtr b = atom();
        return seq(std::move(a), std::move(b));
      }
      case Tok::KwCase: return case_expr();
      case Tok::KwIf: return if_expr();
      default: return chain();
    }
  }

 private:
  Token expect(Tok k, const char* what) {
    if (lex_.peek().kind != k) lex_.fail(std::string("expected ") + what);
    return lex_.take();
  }

  ExprPtr lambda() {
    expect(Tok::Backslash, "'\\'");
    std::vector<Name> binders;
    binders.push_back(expect(Tok::Lower, "binder name").text);
    while (lex_.peek().kind == Tok::Lower || lex_.peek().kind == Tok::Comma) {
      if (lex_.peek().kind == Tok::Comma) lex_.take();
      binders.push_back(expect(Tok::Lower, "binder name").text);
    }
    expect(Tok::Dot, "'.' after lambda binders");
    ExprPtr body = expr();
    for (auto it = binders.rbegin(); it != binders.rend(); ++it)
      body = lam(*it, std::move(body));
    return body;
  }

  ExprPtr letrec_expr() {
    expect(Tok::KwLetrec, "'letrec'");
    std::vector<Binding> bs;
    for (;;) {
      Name n = expect(Tok::Lower, "binder name").text;
      expect(Tok::Eq, "'=' in letrec binding");
      bs.push_back(Binding{std::move(n), expr()});
      if (lex_.peek().kind == Tok::Comma) {
        lex_.take();
        continue;
      }
      break;
    }
    expect(Tok::KwIn, "'in'");
    return letrec(std::move(bs), expr());
  }

  ExprPtr case_expr() {
    expect(Tok::KwCase, "'case'");
    Name type_name = expect(Tok::Upper, "type name").text;
    ExprPtr scrut = expr();
    expect(Tok::KwOf, "'of'");
    expect(Tok::LBrace, "'{'");
    std::vector<Alt> alts;
    for (;;) {
      Name ctor = expect(Tok::Upper, "constructor in alternative").text;
      std::vector<Name> vars;
      while (lex_.peek().kind == Tok::Lower) vars.push_back(lex_.take().text);
      expect(Tok::Arrow, "'->'");
      alts.push_back(Alt{std::move(ctor), std::move(vars), expr()});
      if (lex_.peek().kind == Tok::Semi) {
        lex_.take();
        continue;
      }
      break;
    }
    expect(Tok::RBrace, "'}'");
    // Normalize alternative order to the signature's declaration order.
    const TypeInfo* t = sig_.find_type(type_name);
    if (t) {
      std::vector<Alt> ordered;
      for (const auto& ci : t->constructors) {
        for (auto& alt : alts)
          if (alt.ctor == ci.name) ordered.push_back(alt);
      }
      if (ordered.size() == alts.size()) alts = std::move(ordered);
    }
    return case_of(std::move(type_name), std::move(scrut), std::move(alts));
  }

  ExprPtr if_expr() {
    expect(Tok::KwIf, "'if'");
    ExprPtr c = expr();
    expect(Tok::KwThen, "'then'");
    ExprPtr a = expr();
    expect(Tok::KwElse, "'else'");
    ExprPtr b = expr();
    return case_of("Bool", std::move(c),
                   {Alt{"True", {}, std::move(a)}, Alt{"False", {}, std::move(b)}});
  }

  bool starts_atom(Tok k) const {
    return k == Tok::Lower || k == Tok::Upper || k == Tok::LParen;
  }

  // A unit of an application spine. Bare non-nullary constructor names are
  // only legal as the head of a spine, so they are handled in chain().
  ExprPtr atom() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::Lower: return var(lex_.take().text);
      case Tok::Upper: {
        Token tok = lex_.take();
        const ConstrInfo* ci = sig_.find_ctor(tok.text);
        if (ci && ci->arity != 0)
          throw ParseError("constructor " + tok.text +
                           " must be applied in parentheses (line " +
                           std::to_string(tok.line) + ")");
        return constr(tok.text, {});
      }
      case Tok::LParen: {
        lex_.take();
        ExprPtr e = paren_body();
        expect(Tok::RParen, "')'");
        return e;
      }
      default: lex_.fail("expected an expression");
    }
  }

  // Contents of a parenthesized group: a full expression, with constructor
  // application allowed at its head.
  ExprPtr paren_body() { return expr(); }

  ExprPtr chain() {
    ExprPtr head;
    const Token& t = lex_.peek();
    if (t.kind == Tok::Upper) {
      Token tok = lex_.take();
      const ConstrInfo* ci = sig_.find_ctor(tok.text);
      const int arity = ci ? ci->arity : 0;
      std::vector<ExprPtr> args;
      for (int i = 0; i < arity; ++i) {
        if (!starts_atom(lex_.peek().kind))
          throw ParseError("constructor " + tok.text + " expects " +
                           std::to_string(arity) + " arguments (line " +
                           std::to_string(tok.line) + ")");
        args.push_back(atom());
      }
      head = constr(tok.text, std::move(args));
    } else {
      head = atom();
    }
    while (starts_atom(lex_.peek().kind)) head = app(std::move(head), atom());
    // A lambda (or letrec/seq/case/if) may close an application spine without
    // parentheses: `f x \u. u` applies f x to the whole abstraction.
    switch (lex_.peek().kind) {
      case Tok::Backslash:
      case Tok::KwLetrec:
      case Tok::KwSeq:
      case Tok::KwCase:
      case Tok::KwIf:
        return app(std::move(head), expr());
      default:
        return head;
    }
  }

  Lexer& lex_;
  const SignatureTable& sig_;
};

}  // namespace

ExprPtr parse_expr(const std::string& text, const SignatureTable& sig) {
  Lexer lex(text);
  Parser p(lex, sig);
  ExprPtr e = p.expr();
  if (lex.peek().kind != Tok::End) lex.fail("trailing input after expression");
  validate(e, sig);
  return e;
}

SignatureTable SignatureTable::parse_signatures(const std::string& text) {
  SignatureTable sig;
  Lexer lex(text);
  while (lex.peek().kind != Tok::End) {
    if (lex.peek().kind != Tok::KwData) lex.fail("expected 'data'");
    lex.take();
    if (lex.peek().kind != Tok::Upper) lex.fail("expected type name");
    TypeInfo info;
    info.name = lex.take().text;
    if (lex.peek().kind != Tok::Eq) lex.fail("expected '='");
    lex.take();
    for (;;) {
      if (lex.peek().kind != Tok::Upper) lex.fail("expected constructor name");
      ConstrInfo ci;
      ci.name = lex.take().text;
      if (lex.peek().kind != Tok::Slash) lex.fail("expected '/' before arity");
      lex.take();
      if (lex.peek().kind != Tok::Int) lex.fail("expected arity");
      ci.arity = std::stoi(lex.take().text);
      info.constructors.push_back(std::move(ci));
      if (lex.peek().kind == Tok::Bar) {
        lex.take();
        continue;
      }
      break;
    }
    if (lex.peek().kind != Tok::Semi) lex.fail("expected ';' after declaration");
    lex.take();
    sig.add_type(std::move(info));
  }
  return sig;
}

}  // namespace needlab
