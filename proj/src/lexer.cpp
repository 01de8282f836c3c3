#include <cctype>
#include <map>

#include "loop2bulk/frontend.hpp"

namespace l2b {

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Double: return "double";
    case Tok::String: return "string";
    case Tok::For: return "'for'";
    case Tok::Do: return "'do'";
    case Tok::In: return "'in'";
    case Tok::While: return "'while'";
    case Tok::If: return "'if'";
    case Tok::Else: return "'else'";
    case Tok::Var: return "'var'";
    case Tok::Input: return "'input'";
    case Tok::True: return "'true'";
    case Tok::False: return "'false'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::Assign: return "':='";
    case Tok::OpAssign: return "incremental update operator";
    case Tok::Eq: return "'='";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Percent: return "'%'";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Bang: return "'!'";
    case Tok::Caret: return "'^'";
    case Tok::CaretCaret: return "'^^'";
  }
  return "?";
}

std::vector<Token> tokenize(const std::string& text) {
  static const std::map<std::string, Tok> kKeywords = {
      {"for", Tok::For},     {"do", Tok::Do},         {"in", Tok::In},
      {"while", Tok::While}, {"if", Tok::If},         {"else", Tok::Else},
      {"var", Tok::Var},     {"input", Tok::Input},   {"true", Tok::True},
      {"false", Tok::False},
  };
  // Longest match first.
  static const std::vector<std::pair<std::string, Tok>> kPunct = {
      {"&&=", Tok::OpAssign}, {"||=", Tok::OpAssign}, {"^^=", Tok::OpAssign},
      {":=", Tok::Assign},    {"+=", Tok::OpAssign},  {"*=", Tok::OpAssign},
      {"^=", Tok::OpAssign},  {"==", Tok::EqEq},      {"!=", Tok::NotEq},
      {"<=", Tok::Le},        {">=", Tok::Ge},        {"&&", Tok::AndAnd},
      {"||", Tok::OrOr},      {"^^", Tok::CaretCaret}, {"^", Tok::Caret},
      {"<", Tok::Lt},         {">", Tok::Gt},         {"=", Tok::Eq},
      {"!", Tok::Bang},       {"+", Tok::Plus},       {"-", Tok::Minus},
      {"*", Tok::Star},       {"/", Tok::Slash},      {"%", Tok::Percent},
      {"(", Tok::LParen},     {")", Tok::RParen},     {"[", Tok::LBracket},
      {"]", Tok::RBracket},   {"{", Tok::LBrace},     {"}", Tok::RBrace},
      {",", Tok::Comma},      {";", Tok::Semi},       {":", Tok::Colon},
      {".", Tok::Dot},
  };

  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    SrcLoc loc{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      std::string word = text.substr(i, j - i);
      auto kw = kKeywords.find(word);
      out.push_back({kw == kKeywords.end() ? Tok::Ident : kw->second, word, loc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      bool is_double = false;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j + 1 < text.size() && text[j] == '.' &&
          std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        is_double = true;
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          is_double = true;
          j = k;
          while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      out.push_back({is_double ? Tok::Double : Tok::Int, text.substr(i, j - i), loc});
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::string s;
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"') {
        if (text[j] == '\\' && j + 1 < text.size()) {
          char e = text[j + 1];
          s += e == 'n' ? '\n' : e == 't' ? '\t' : e;
          j += 2;
        } else {
          s += text[j++];
        }
      }
      if (j >= text.size()) throw Error("LexError", "unterminated string at " + loc.str());
      out.push_back({Tok::String, s, loc});
      advance(j + 1 - i);
      continue;
    }
    bool matched = false;
    for (const auto& [p, t] : kPunct) {
      if (text.compare(i, p.size(), p) == 0) {
        out.push_back({t, p, loc});
        advance(p.size());
        matched = true;
        break;
      }
    }
    if (!matched)
      throw Error("LexError", std::string("illegal character '") + c + "' at " + loc.str());
  }
  return out;
}

}  // namespace l2b
