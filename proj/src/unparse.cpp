#include "loop2bulk/frontend.hpp"

namespace l2b {

namespace {

int prec(const std::string& op) {
  if (op == "||") return 1;
  if (op == "^" || op == "^^") return 2;
  if (op == "&&") return 3;
  if (op == "==" || op == "!=") return 4;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 5;
  if (op == "+" || op == "-") return 6;
  if (op == "*" || op == "/" || op == "%") return 7;
  return 8;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    if (c == '\t') {
      out += "\\t";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string constant(const Value& v) {
  if (v.kind() == Value::Kind::String) return quote(v.as_string());
  return v.str();
}

std::string child(const Expr& e, int min_prec) {
  std::string s = unparse(e);
  bool neg_const = e.kind == Expr::Kind::Const && e.value.is_numeric() && !s.empty() && s[0] == '-';
  if ((e.kind == Expr::Kind::BinOp && prec(e.op) < min_prec) || (neg_const && min_prec > 7))
    return "(" + s + ")";
  return s;
}

std::string pad(int n) { return std::string(static_cast<std::size_t>(n) * 4, ' '); }

}  // namespace

std::string unparse(const Dest& d) {
  switch (d.kind) {
    case Dest::Kind::Var: return d.name;
    case Dest::Kind::Proj: return unparse(*d.base) + "." + d.name;
    case Dest::Kind::Index: {
      std::string s = d.name + "[";
      for (std::size_t i = 0; i < d.indexes.size(); ++i) {
        if (i) s += ",";
        s += unparse(*d.indexes[i]);
      }
      return s + "]";
    }
  }
  return "?";
}

std::string unparse(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::DestRef: return unparse(*e.dest);
    case Expr::Kind::Field: return child(*e.args[0], 9) + "." + e.op;
    case Expr::Kind::BinOp: {
      int p = prec(e.op);
      return child(*e.args[0], p) + " " + e.op + " " + child(*e.args[1], p + 1);
    }
    case Expr::Kind::UnOp: return e.op + child(*e.args[0], 8);
    case Expr::Kind::Tuple: {
      std::string s = "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) s += (i ? "," : "") + unparse(*e.args[i]);
      return s + ")";
    }
    case Expr::Kind::Record: {
      std::string s = "<";
      for (std::size_t i = 0; i < e.args.size(); ++i)
        s += (i ? ", " : "") + e.fields[i] + "=" + child(*e.args[i], 6);
      return s + ">";
    }
    case Expr::Kind::Const: return constant(e.value);
    case Expr::Kind::Call: {
      std::string s = e.op + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) s += (i ? "," : "") + unparse(*e.args[i]);
      return s + ")";
    }
    case Expr::Kind::EmptyColl: return e.op + "()";
  }
  return "?";
}

std::string unparse(const Stmt& s, int indent) {
  switch (s.kind) {
    case Stmt::Kind::IncrUpdate:
      if (s.op == "min" || s.op == "max")
        return unparse(*s.dest) + " " + s.op + "= " + unparse(*s.e1);
      return unparse(*s.dest) + " " + s.op + "= " + unparse(*s.e1);
    case Stmt::Kind::Assign: return unparse(*s.dest) + " := " + unparse(*s.e1);
    case Stmt::Kind::VarDecl:
      return "var " + s.var + ": " + s.type->str() + " = " + unparse(*s.e1);
    case Stmt::Kind::ForRange:
      return "for " + s.var + " = " + unparse(*s.e1) + ", " + unparse(*s.e2) + " do\n" +
             pad(indent + 1) + unparse(*s.body, indent + 1);
    case Stmt::Kind::ForIn:
      return "for " + s.var + " in " + unparse(*s.e1) + " do\n" + pad(indent + 1) +
             unparse(*s.body, indent + 1);
    case Stmt::Kind::While:
      return "while (" + unparse(*s.e1) + ")\n" + pad(indent + 1) + unparse(*s.body, indent + 1);
    case Stmt::Kind::If: {
      std::string out = "if (" + unparse(*s.e1) + ")\n" + pad(indent + 1) +
                        unparse(*s.body, indent + 1);
      if (s.other)
        out += "\n" + pad(indent) + "else\n" + pad(indent + 1) + unparse(*s.other, indent + 1);
      return out;
    }
    case Stmt::Kind::Block: {
      std::string out = "{\n";
      for (const auto& c : s.stmts) out += pad(indent + 1) + unparse(*c, indent + 1) + ";\n";
      return out + pad(indent) + "}";
    }
  }
  return "?";
}

std::string unparse(const SourceProgram& p) {
  std::string out;
  for (const auto& in : p.inputs) out += "input " + in.name + ": " + in.type->str() + ";\n";
  for (const auto& s : p.body) out += unparse(*s, 0) + ";\n";
  return out;
}

}  // namespace l2b
