#pragma once

#include <string>
#include <vector>

#include "loop2bulk/ast.hpp"

namespace l2b {

enum class Tok {
  Ident, Int, Double, String,
  // keywords
  For, Do, In, While, If, Else, Var, Input, True, False,
  // punctuation
  LParen, RParen, LBracket, RBracket, LBrace, RBrace, Comma, Semi, Colon, Dot,
  Assign,   // :=
  OpAssign, // += *= &&= ||= ^= ^^=
  Eq,       // =
  EqEq, NotEq, Lt, Le, Gt, Ge,
  Plus, Minus, Star, Slash, Percent, AndAnd, OrOr, Bang, Caret, CaretCaret,
};

struct Token {
  Tok kind;
  std::string text;
  SrcLoc loc;
};

const char* tok_name(Tok t);

// Error codes: LexError, ParseError, ScopeError.
std::vector<Token> tokenize(const std::string& text);
SourceProgram parse_program(const std::string& text);
std::string unparse(const SourceProgram& p);
std::string unparse(const Stmt& s, int indent = 0);
std::string unparse(const Expr& e);
std::string unparse(const Dest& d);

}  // namespace l2b
