#include <set>

#include "loop2bulk/frontend.hpp"
#include "loop2bulk/ops.hpp"

namespace l2b {

namespace {

TypePtr alias_type(const std::string& name) {
  auto dbl = make_type(Type::Kind::Double);
  auto in = make_type(Type::Kind::Int);
  auto t = std::make_shared<Type>();
  t->kind = Type::Kind::Record;
  t->alias = name;
  if (name == "ArgMin") {
    t->fields = {"index", "distance"};
    t->args = {in, dbl};
  } else {
    t->fields = {"sum", "count"};
    t->args = {make_type(Type::Kind::Tuple, {dbl, dbl}), in};
  }
  return t;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {
    for (const auto& t : toks_)
      if (t.kind == Tok::Ident) idents_.insert(t.text);
  }

  SourceProgram program() {
    while (!at_end()) {
      if (accept(Tok::Semi)) continue;
      if (peek().kind == Tok::Input) {
        prog_.inputs.push_back(input_decl());
      } else {
        prog_.body.push_back(statement());
      }
      if (!at_end() && !accept(Tok::Semi) && peek().kind != Tok::RBrace)
        fail("';'");
    }
    return std::move(prog_);
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  SourceProgram prog_;
  std::set<std::string> idents_;
  std::set<std::string> used_indexes_;
  std::vector<std::pair<std::string, std::string>> scope_;  // loop vars: source -> internal
  int for_depth_ = 0;

  bool at_end() const { return pos_ >= toks_.size(); }
  const Token& peek(std::size_t ahead = 0) const {
    static const Token eof{Tok::Semi, "<eof>", {}};
    return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : eof;
  }
  SrcLoc loc() const {
    if (!at_end()) return toks_[pos_].loc;
    return toks_.empty() ? SrcLoc{1, 1} : toks_.back().loc;
  }
  bool check(Tok t) const { return !at_end() && toks_[pos_].kind == t; }
  bool accept(Tok t) {
    if (!check(t)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& expected) const {
    std::string got = at_end() ? "end of input" : "'" + toks_[pos_].text + "'";
    throw Error("ParseError", "at " + loc().str() + ": expected " + expected + ", got " + got);
  }
  const Token& expect(Tok t) {
    if (!check(t)) fail(tok_name(t));
    return toks_[pos_++];
  }

  std::string fresh(const std::string& base) {
    for (int n = 1;; ++n) {
      std::string cand = base + "_" + std::to_string(n);
      if (!idents_.count(cand) && !used_indexes_.count(cand) && !prog_.types.count(cand)) {
        idents_.insert(cand);
        return cand;
      }
    }
  }

  // ---- types

  TypePtr type() {
    SrcLoc at = loc();
    if (accept(Tok::LParen)) {
      std::vector<TypePtr> items{type()};
      while (accept(Tok::Comma)) items.push_back(type());
      expect(Tok::RParen);
      return items.size() == 1 ? items[0] : make_type(Type::Kind::Tuple, items);
    }
    if (accept(Tok::Lt)) {
      auto t = std::make_shared<Type>();
      t->kind = Type::Kind::Record;
      do {
        t->fields.push_back(expect(Tok::Ident).text);
        expect(Tok::Colon);
        t->args.push_back(type());
      } while (accept(Tok::Comma));
      expect(Tok::Gt);
      return t;
    }
    std::string name = expect(Tok::Ident).text;
    if (name == "Int" || name == "Long") return make_type(Type::Kind::Int);
    if (name == "Double" || name == "Float") return make_type(Type::Kind::Double);
    if (name == "Bool" || name == "Boolean") return make_type(Type::Kind::Bool);
    if (name == "String") return make_type(Type::Kind::String);
    if (name == "ArgMin" || name == "Avg") return alias_type(name);
    Type::Kind k;
    std::size_t arity = 1;
    if (name == "vector") {
      k = Type::Kind::Vector;
    } else if (name == "matrix") {
      k = Type::Kind::Matrix;
    } else if (name == "map") {
      k = Type::Kind::Map;
      arity = 2;
    } else {
      throw Error("ParseError", "at " + at.str() + ": unknown type " + name);
    }
    expect(Tok::LBracket);
    std::vector<TypePtr> args{type()};
    while (accept(Tok::Comma)) args.push_back(type());
    expect(Tok::RBracket);
    if (args.size() != arity)
      throw Error("ParseError", "at " + at.str() + ": wrong number of type arguments for " + name);
    return make_type(k, args);
  }

  void declare(const std::string& name, TypePtr t, SrcLoc at) {
    if (prog_.types.count(name))
      throw Error("ScopeError", "at " + at.str() + ": variable " + name + " declared twice");
    prog_.types[name] = std::move(t);
  }

  InputDecl input_decl() {
    SrcLoc at = loc();
    expect(Tok::Input);
    std::string name = expect(Tok::Ident).text;
    expect(Tok::Colon);
    TypePtr t = type();
    declare(name, t, at);
    return {name, t, at};
  }

  // ---- statements

  StmtPtr statement() {
    SrcLoc at = loc();
    switch (peek().kind) {
      case Tok::Var: {
        ++pos_;
        if (for_depth_ > 0)
          throw Error("ParseError",
                      "at " + at.str() + ": variable declarations cannot appear inside for-loops");
        std::string name = expect(Tok::Ident).text;
        expect(Tok::Colon);
        TypePtr t = type();
        expect(Tok::Eq);
        ExprPtr init = expr();
        declare(name, t, at);
        return s_var(name, t, init, at);
      }
      case Tok::Input:
        throw Error("ParseError", "at " + at.str() + ": input declarations must be top-level");
      case Tok::For: {
        ++pos_;
        std::string src = expect(Tok::Ident).text;
        bool range = accept(Tok::Eq);
        ExprPtr lo, hi;
        if (range) {
          lo = expr();
          expect(Tok::Comma);
          hi = expr();
        } else {
          expect(Tok::In);
          lo = expr();
        }
        expect(Tok::Do);
        std::string name = src;
        if (used_indexes_.count(name) || prog_.types.count(name) || bound(name)) name = fresh(src);
        used_indexes_.insert(name);
        scope_.push_back({src, name});
        ++for_depth_;
        StmtPtr body = statement();
        --for_depth_;
        scope_.pop_back();
        return range ? s_for(name, lo, hi, body, at) : s_forin(name, lo, body, at);
      }
      case Tok::While: {
        ++pos_;
        expect(Tok::LParen);
        ExprPtr c = expr();
        expect(Tok::RParen);
        return s_while(c, statement(), at);
      }
      case Tok::If: {
        ++pos_;
        expect(Tok::LParen);
        ExprPtr c = expr();
        expect(Tok::RParen);
        StmtPtr then = statement();
        StmtPtr els;
        if (check(Tok::Semi) && peek(1).kind == Tok::Else) ++pos_;
        if (accept(Tok::Else)) els = statement();
        return s_if(c, then, els, at);
      }
      case Tok::LBrace: {
        ++pos_;
        std::vector<StmtPtr> stmts;
        while (!check(Tok::RBrace)) {
          if (at_end()) fail("'}'");
          if (accept(Tok::Semi)) continue;
          stmts.push_back(statement());
          if (!check(Tok::RBrace)) expect(Tok::Semi);
        }
        expect(Tok::RBrace);
        return s_block(std::move(stmts), at);
      }
      default: break;
    }
    ExprPtr lhs = postfix();
    if (lhs->kind != Expr::Kind::DestRef)
      throw Error("ParseError", "at " + at.str() + ": expected a destination");
    DestPtr d = lhs->dest;
    check_assignable(*d, at);
    if (accept(Tok::Assign)) {
      ExprPtr rhs = expr();
      std::string op;
      ExprPtr inc;
      if (as_incremental(*d, rhs, op, inc)) return s_incr(d, op, inc, at);
      return s_assign(d, rhs, at);
    }
    if (check(Tok::OpAssign)) {
      std::string t = toks_[pos_++].text;
      return s_incr(d, t.substr(0, t.size() - 1), expr(), at);
    }
    if (check(Tok::Ident) && (peek().text == "min" || peek().text == "max") &&
        peek(1).kind == Tok::Eq) {
      std::string op = peek().text;
      pos_ += 2;
      return s_incr(d, op, expr(), at);
    }
    fail("':=' or an incremental update operator");
  }

  void check_assignable(const Dest& d, SrcLoc at) {
    const std::string& root = d.root();
    for (const auto& [src, name] : scope_)
      if (name == root)
        throw Error("ParseError", "at " + at.str() + ": cannot assign to loop variable " + src);
  }

  // `d := d op e` and `d := min(d, e)` are incremental updates.
  static bool as_incremental(const Dest& d, const ExprPtr& rhs, std::string& op, ExprPtr& inc) {
    auto is_d = [&](const ExprPtr& e) {
      return e->kind == Expr::Kind::DestRef && equal(*e->dest, d);
    };
    if ((rhs->kind == Expr::Kind::BinOp ||
         (rhs->kind == Expr::Kind::Call && (rhs->op == "min" || rhs->op == "max") &&
          rhs->args.size() == 2)) &&
        find_reducer(rhs->op)) {
      if (is_d(rhs->args[0])) {
        op = rhs->op;
        inc = rhs->args[1];
        return true;
      }
      if (is_d(rhs->args[1])) {
        op = rhs->op;
        inc = rhs->args[0];
        return true;
      }
    }
    return false;
  }

  // ---- expressions

  static int prec(Tok t) {
    switch (t) {
      case Tok::OrOr: return 1;
      case Tok::Caret:
      case Tok::CaretCaret: return 2;
      case Tok::AndAnd: return 3;
      case Tok::EqEq:
      case Tok::NotEq: return 4;
      case Tok::Lt:
      case Tok::Le:
      case Tok::Gt:
      case Tok::Ge: return 5;
      case Tok::Plus:
      case Tok::Minus: return 6;
      case Tok::Star:
      case Tok::Slash:
      case Tok::Percent: return 7;
      default: return 0;
    }
  }

  ExprPtr expr(int min_prec = 1) {
    ExprPtr lhs = unary();
    for (;;) {
      if (at_end()) return lhs;
      int p = prec(peek().kind);
      if (p == 0 || p < min_prec) return lhs;
      const Token& op = toks_[pos_++];
      ExprPtr rhs = expr(p + 1);
      auto e = std::const_pointer_cast<Expr>(ebin(op.text, lhs, rhs));
      e->loc = op.loc;
      lhs = e;
    }
  }

  ExprPtr unary() {
    SrcLoc at = loc();
    if (accept(Tok::Minus)) {
      ExprPtr a = unary();
      if (a->kind == Expr::Kind::Const && a->value.kind() == Value::Kind::Int)
        return econst(Value::integer(-a->value.as_int()));
      if (a->kind == Expr::Kind::Const && a->value.kind() == Value::Kind::Double)
        return econst(Value::real(-a->value.as_double()));
      auto e = std::const_pointer_cast<Expr>(eun("-", a));
      e->loc = at;
      return e;
    }
    if (accept(Tok::Bang)) {
      auto e = std::const_pointer_cast<Expr>(eun("!", unary()));
      e->loc = at;
      return e;
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    while (check(Tok::Dot)) {
      SrcLoc at = loc();
      ++pos_;
      std::string name = expect(Tok::Ident).text;
      if (accept(Tok::LParen)) {
        expect(Tok::RParen);
        e = ecall(name, {e});
      } else if (e->kind == Expr::Kind::DestRef) {
        e = eref(dproj(e->dest, name, at));
      } else {
        e = efield(e, name);
      }
    }
    return e;
  }

  bool bound(const std::string& name) const {
    for (const auto& [src, n] : scope_)
      if (src == name) return true;
    return false;
  }

  std::string resolve(const std::string& name, SrcLoc at) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == name) return it->second;
    if (!prog_.types.count(name))
      throw Error("ScopeError", "at " + at.str() + ": undeclared variable " + name);
    return name;
  }

  ExprPtr primary() {
    SrcLoc at = loc();
    if (at_end()) fail("an expression");
    const Token& t = toks_[pos_];
    switch (t.kind) {
      case Tok::Int:
        ++pos_;
        return econst(Value::integer(std::stoll(t.text)));
      case Tok::Double:
        ++pos_;
        return econst(Value::real(std::stod(t.text)));
      case Tok::String:
        ++pos_;
        return econst(Value::string(t.text));
      case Tok::True:
        ++pos_;
        return econst(Value::boolean(true));
      case Tok::False:
        ++pos_;
        return econst(Value::boolean(false));
      case Tok::LParen: {
        ++pos_;
        std::vector<ExprPtr> items{expr()};
        while (accept(Tok::Comma)) items.push_back(expr());
        expect(Tok::RParen);
        return items.size() == 1 ? items[0] : etuple(items);
      }
      case Tok::Lt: {
        ++pos_;
        std::vector<std::string> names;
        std::vector<ExprPtr> vals;
        do {
          names.push_back(expect(Tok::Ident).text);
          expect(Tok::Eq);
          vals.push_back(expr(6));
        } while (accept(Tok::Comma));
        expect(Tok::Gt);
        return erecord(names, vals);
      }
      case Tok::Ident: {
        ++pos_;
        std::string name = t.text;
        if (accept(Tok::LParen)) {
          std::vector<ExprPtr> args;
          if (!check(Tok::RParen)) {
            args.push_back(expr());
            while (accept(Tok::Comma)) args.push_back(expr());
          }
          expect(Tok::RParen);
          if ((name == "vector" || name == "matrix" || name == "map") && args.empty())
            return eempty(name);
          auto e = std::const_pointer_cast<Expr>(ecall(name, args));
          e->loc = at;
          return e;
        }
        std::string internal = resolve(name, at);
        if (accept(Tok::LBracket)) {
          std::vector<ExprPtr> idx{expr()};
          while (accept(Tok::Comma)) idx.push_back(expr());
          expect(Tok::RBracket);
          auto ty = prog_.types.find(internal);
          if (ty == prog_.types.end() || !ty->second->is_collection())
            throw Error("ScopeError", "at " + at.str() + ": " + name + " is not an array");
          if (static_cast<int>(idx.size()) != ty->second->dims())
            throw Error("ParseError", "at " + at.str() + ": " + name + " takes " +
                                          std::to_string(ty->second->dims()) + " index(es)");
          return eref(dindex(internal, idx, at));
        }
        return eref(dvar(internal, at));
      }
      default: fail("an expression");
    }
  }
};

}  // namespace

SourceProgram parse_program(const std::string& text) {
  Parser p(tokenize(text));
  return p.program();
}

}  // namespace l2b
