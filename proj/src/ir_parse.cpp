#include <cctype>

#include "loop2bulk/comp_ir.hpp"
#include "loop2bulk/ops.hpp"

namespace l2b {

namespace {

struct Tk {
  enum Kind { Ident, Int, Dbl, Str, Punct, End } kind = End;
  std::string text;
  std::size_t pos = 0;
};

std::vector<Tk> lex(const std::string& s) {
  static const char* kPunct[] = {"[[", "]]", "<-?", "<-", "<|", "<=", ">=", "==", "!=", "&&", "||",
                                 "^^", ":=", "(", ")", "{", "}", ",", ".", ":", "|", "+", "-",
                                 "*", "/", "%", "<", ">", "^", "!", "="};
  std::vector<Tk> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Tk t;
    t.pos = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '$')) ++j;
      t.kind = Tk::Ident;
      t.text = s.substr(i, j - i);
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      t.kind = Tk::Int;
      if (j + 1 < s.size() && s[j] == '.' && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
        ++j;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        t.kind = Tk::Dbl;
      }
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
          t.kind = Tk::Dbl;
        }
      }
      t.text = s.substr(i, j - i);
      i = j;
    } else if (c == '"') {
      std::size_t j = i + 1;
      std::string v;
      while (j < s.size() && s[j] != '"') {
        if (s[j] == '\\' && j + 1 < s.size()) ++j;
        v += s[j++];
      }
      if (j >= s.size()) throw Error("ParseError", "unterminated string in IR");
      t.kind = Tk::Str;
      t.text = v;
      i = j + 1;
    } else {
      bool found = false;
      for (const char* p : kPunct) {
        std::string ps(p);
        if (s.compare(i, ps.size(), ps) == 0) {
          t.kind = Tk::Punct;
          t.text = ps;
          i += ps.size();
          found = true;
          break;
        }
      }
      if (!found) throw Error("LexError", std::string("bad character '") + c + "' in IR at " + std::to_string(i));
    }
    out.push_back(std::move(t));
  }
  Tk end;
  end.pos = s.size();
  out.push_back(end);
  return out;
}

int binprec(const std::string& op) {
  if (op == "||") return 1;
  if (op == "^" || op == "^^") return 2;
  if (op == "&&") return 3;
  if (op == "==" || op == "!=") return 4;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 5;
  if (op == "+" || op == "-") return 6;
  if (op == "*" || op == "/" || op == "%") return 7;
  return 0;
}

class IrParser {
 public:
  explicit IrParser(const std::string& s) : toks_(lex(s)) {}

  CE top() {
    CE e = expr();
    if (peek().kind != Tk::End) fail("end of input");
    return e;
  }

 private:
  std::vector<Tk> toks_;
  std::size_t i_ = 0;

  const Tk& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  bool is(const std::string& p, std::size_t k = 0) const {
    const Tk& t = peek(k);
    return (t.kind == Tk::Punct || t.kind == Tk::Ident) && t.text == p;
  }
  bool accept(const std::string& p) {
    if (!is(p)) return false;
    ++i_;
    return true;
  }
  [[noreturn]] void fail(const std::string& want) const {
    throw Error("ParseError", "IR: expected " + want + " at offset " + std::to_string(peek().pos) +
                                  " near '" + peek().text + "'");
  }
  void expect(const std::string& p) {
    if (!accept(p)) fail("'" + p + "'");
  }
  std::string ident() {
    if (peek().kind != Tk::Ident) fail("identifier");
    return toks_[i_++].text;
  }

  CE expr() {
    CE e = binary(1);
    while (accept("<|")) e = ir::merge(e, binary(1));
    return e;
  }

  CE binary(int min) {
    CE lhs = unary();
    for (;;) {
      const Tk& t = peek();
      if (t.kind != Tk::Punct) return lhs;
      int p = binprec(t.text);
      if (p == 0 || p < min) return lhs;
      // `op/` in operand position is a reduction, never a binary operator here.
      std::string op = t.text;
      ++i_;
      CE rhs = binary(p + 1);
      lhs = ir::bin(op, lhs, rhs);
    }
  }

  CE unary() {
    if (accept("-")) {
      CE a = unary();
      if (a->kind == CExpr::Kind::Const && a->value.is_numeric()) return ir::cnst(apply_unop("-", a->value));
      return ir::un("-", a);
    }
    if (accept("!")) return ir::un("!", unary());
    return postfix(primary());
  }

  CE postfix(CE e) {
    for (;;) {
      if (accept(".")) {
        if (peek().kind == Tk::Int) {
          e = ir::proj(e, "_" + toks_[i_++].text);
        } else {
          e = ir::proj(e, ident());
        }
      } else if (is("{") && peek(1).kind == Tk::Ident && is(":=", 2)) {
        ++i_;
        std::string f = ident();
        expect(":=");
        CE v = expr();
        expect("}");
        e = ir::rec_update(e, f, v);
      } else {
        return e;
      }
    }
  }

  bool reducer_here() const {
    const Tk& t = peek();
    if (!is("/", 1)) return false;
    if (t.kind == Tk::Punct)
      return t.text == "+" || t.text == "*" || t.text == "&&" || t.text == "||" || t.text == "^" ||
             t.text == "^^";
    return t.kind == Tk::Ident && find_reducer(t.text) != nullptr;
  }

  std::vector<CE> args() {
    std::vector<CE> out;
    expect("(");
    if (accept(")")) return out;
    do out.push_back(expr());
    while (accept(","));
    expect(")");
    return out;
  }

  CE primary() {
    const Tk& t = peek();
    if (reducer_here()) {
      std::string op = t.text;
      i_ += 2;
      return ir::reduce(op, postfix(primary()));
    }
    switch (t.kind) {
      case Tk::Int: ++i_; return ir::integer(std::stoll(t.text));
      case Tk::Dbl: ++i_; return ir::cnst(Value::real(std::stod(t.text)));
      case Tk::Str: ++i_; return ir::cnst(Value::string(t.text));
      case Tk::Ident: {
        std::string n = t.text;
        ++i_;
        if (n == "true" || n == "false") return ir::boolean(n == "true");
        if (n == "absent") return ir::cnst(Value::absent());
        if (!is("(")) return ir::var(n);
        std::vector<CE> as = args();
        auto need = [&](std::size_t k) {
          if (as.size() != k) fail(n + " with " + std::to_string(k) + " arguments");
        };
        if (n == "range") {
          need(2);
          return ir::range(as[0], as[1]);
        }
        if (n == "inRange") {
          need(3);
          return ir::in_range(as[0], as[1], as[2]);
        }
        if (n == "nonEmpty") {
          need(1);
          return ir::non_empty(as[0]);
        }
        if ((n == "min" || n == "max") && as.size() == 2) return ir::bin(n, as[0], as[1]);
        return ir::call(n, as);
      }
      case Tk::Punct: break;
      case Tk::End: fail("expression");
    }
    if (accept("(")) {
      if (accept(")")) return ir::tuple({});
      std::vector<CE> items{expr()};
      while (accept(",")) items.push_back(expr());
      expect(")");
      return items.size() == 1 ? items[0] : ir::tuple(items);
    }
    if (accept("<")) {
      std::vector<std::string> names;
      std::vector<CE> vals;
      do {
        names.push_back(ident());
        expect("=");
        vals.push_back(binary(6));
      } while (accept(","));
      expect(">");
      return ir::record(names, vals);
    }
    if (accept("{")) {
      std::vector<CE> items;
      if (!accept("}")) {
        do items.push_back(expr());
        while (accept(","));
        expect("}");
      }
      return ir::bag(items);
    }
    if (accept("[[")) {
      CE head = expr();
      expect("|");
      std::vector<Qual> qs;
      if (!accept("]]")) {
        do qs.push_back(qual());
        while (accept(","));
        expect("]]");
      }
      return ir::comp(head, qs);
    }
    fail("expression");
  }

  Pattern pattern() {
    if (accept("(")) {
      std::vector<Pattern> items;
      if (!accept(")")) {
        do items.push_back(pattern());
        while (accept(","));
        expect(")");
      }
      return Pattern::tuple(items);
    }
    return Pattern::var(ident());
  }

  Qual qual() {
    if (accept("let")) {
      Pattern p = pattern();
      expect("=");
      return ir::let(p, expr());
    }
    if (is("group") && is("by", 1)) {
      i_ += 2;
      Pattern p = pattern();
      CE key = accept(":") ? expr() : nullptr;
      return ir::group_by(p, key);
    }
    std::size_t save = i_;
    try {
      Pattern p = pattern();
      if (accept("<-")) return ir::gen(p, expr());
      if (accept("<-?")) return ir::opt_gen(p, expr());
    } catch (const Error&) {
    }
    i_ = save;
    return ir::cond(expr());
  }
};

}  // namespace

CE parse_ir(const std::string& text) { return IrParser(text).top(); }

}  // namespace l2b
