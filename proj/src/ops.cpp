#include "loop2bulk/ops.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>

namespace l2b {

namespace {

bool both_int(const Value& a, const Value& b) {
  return a.kind() == Value::Kind::Int && b.kind() == Value::Kind::Int;
}

Value arith(char op, const Value& a, const Value& b) {
  if (op == '+' && a.kind() == Value::Kind::String && b.kind() == Value::Kind::String)
    return Value::string(a.as_string() + b.as_string());
  if (op == '+' && a.is_tuple() && b.is_tuple() && a.size() == b.size()) {
    ValueList out;
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(arith('+', a[i], b[i]));
    return Value::tuple(std::move(out));
  }
  if (both_int(a, b)) {
    std::int64_t x = a.as_int(), y = b.as_int();
    switch (op) {
      case '+': return Value::integer(x + y);
      case '-': return Value::integer(x - y);
      case '*': return Value::integer(x * y);
      case '/':
        if (y == 0) throw Error("DivisionByZero", "integer division by zero");
        return Value::integer(x / y);
      case '%':
        if (y == 0) throw Error("DivisionByZero", "integer modulo by zero");
        return Value::integer(x % y);
    }
  }
  double x = a.as_double(), y = b.as_double();
  switch (op) {
    case '+': return Value::real(x + y);
    case '-': return Value::real(x - y);
    case '*': return Value::real(x * y);
    case '/': return Value::real(x / y);
    case '%': return Value::real(std::fmod(x, y));
  }
  throw Error("TypeMismatch", std::string("bad arithmetic operator ") + op);
}

int order(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) {
    if (both_int(a, b)) return a.as_int() < b.as_int() ? -1 : (a.as_int() > b.as_int() ? 1 : 0);
    double x = a.as_double(), y = b.as_double();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  return Value::compare(a, b);
}

Value argmin(const Value& a, const Value& b) {
  double da = a.project("distance").as_double(), db = b.project("distance").as_double();
  if (da < db) return a;
  if (db < da) return b;
  return order(a.project("index"), b.project("index")) <= 0 ? a : b;
}

Value avg_merge(const Value& a, const Value& b) {
  return Value::record({{"sum", arith('+', a.project("sum"), b.project("sum"))},
                        {"count", arith('+', a.project("count"), b.project("count"))}});
}

struct Registry {
  std::shared_mutex mu;
  std::map<std::string, CommOp> ops;
  Registry() {
    auto bin = [](std::string s) {
      return [s](const Value& a, const Value& b) { return apply_binop(s, a, b); };
    };
    ops["+"] = {"+", Value::integer(0), bin("+")};
    ops["*"] = {"*", Value::integer(1), bin("*")};
    ops["min"] = {"min", std::nullopt, bin("min")};
    ops["max"] = {"max", std::nullopt, bin("max")};
    ops["&&"] = {"&&", Value::boolean(true), bin("&&")};
    ops["||"] = {"||", Value::boolean(false), bin("||")};
    ops["^"] = {"^", std::nullopt, bin("^")};
    ops["^^"] = {"^^", std::nullopt, bin("^^")};
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

bool is_binop(const std::string& op) {
  static const char* kOps[] = {"+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">",
                               ">=", "&&", "||", "min", "max", "^", "^^"};
  for (const char* o : kOps)
    if (op == o) return true;
  return find_reducer(op) != nullptr;
}

Value apply_binop(const std::string& op, const Value& a, const Value& b) {
  if (a.is_absent()) return b;
  if (b.is_absent()) return a;
  if (op.size() == 1 && std::string("+-*/%").find(op[0]) != std::string::npos)
    return arith(op[0], a, b);
  if (op == "==") return Value::boolean(loose_equal(a, b));
  if (op == "!=") return Value::boolean(!loose_equal(a, b));
  if (op == "<") return Value::boolean(order(a, b) < 0);
  if (op == "<=") return Value::boolean(order(a, b) <= 0);
  if (op == ">") return Value::boolean(order(a, b) > 0);
  if (op == ">=") return Value::boolean(order(a, b) >= 0);
  if (op == "&&") return Value::boolean(a.as_bool() && b.as_bool());
  if (op == "||") return Value::boolean(a.as_bool() || b.as_bool());
  if (op == "min") return order(a, b) <= 0 ? a : b;
  if (op == "max") return order(a, b) >= 0 ? a : b;
  if (op == "^") return argmin(a, b);
  if (op == "^^") return avg_merge(a, b);
  if (const CommOp* r = find_reducer(op)) return r->impl(a, b);
  throw Error("TypeMismatch", "unknown operator " + op);
}

Value apply_unop(const std::string& op, const Value& a) {
  if (op == "-") {
    if (a.kind() == Value::Kind::Int) return Value::integer(-a.as_int());
    return Value::real(-a.as_double());
  }
  if (op == "!") return Value::boolean(!a.as_bool());
  throw Error("TypeMismatch", "unknown unary operator " + op);
}

bool is_builtin_function(const std::string& name) {
  static const char* kFns[] = {"ArgMin", "Avg", "value", "distance", "min", "max", "sqrt", "abs"};
  for (const char* f : kFns)
    if (name == f) return true;
  return false;
}

Value call_builtin(const std::string& name, const ValueList& args) {
  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw Error("TypeMismatch", name + " expects " + std::to_string(n) + " arguments");
  };
  if (name == "ArgMin") {
    need(2);
    return Value::record({{"index", args[0]}, {"distance", args[1]}});
  }
  if (name == "Avg") {
    need(2);
    return Value::record({{"sum", args[0]}, {"count", args[1]}});
  }
  if (name == "value") {
    need(1);
    const Value& s = args[0].project("sum");
    double c = args[0].project("count").as_double();
    if (s.is_tuple()) {
      ValueList out;
      for (const auto& x : s.items()) out.push_back(Value::real(x.as_double() / c));
      return Value::tuple(std::move(out));
    }
    return Value::real(s.as_double() / c);
  }
  if (name == "distance") {
    need(2);
    if (args[0].is_tuple()) {
      double acc = 0;
      for (std::size_t i = 0; i < args[0].size(); ++i) {
        double d = args[0][i].as_double() - args[1][i].as_double();
        acc += d * d;
      }
      return Value::real(std::sqrt(acc));
    }
    return Value::real(std::fabs(args[0].as_double() - args[1].as_double()));
  }
  if (name == "min" || name == "max") {
    need(2);
    return apply_binop(name, args[0], args[1]);
  }
  if (name == "sqrt") {
    need(1);
    return Value::real(std::sqrt(args[0].as_double()));
  }
  if (name == "abs") {
    need(1);
    if (args[0].kind() == Value::Kind::Int) return Value::integer(std::llabs(args[0].as_int()));
    return Value::real(std::fabs(args[0].as_double()));
  }
  throw Error("UnknownFunction", name);
}

const CommOp* find_reducer(const std::string& name) {
  Registry& r = registry();
  std::shared_lock lock(r.mu);
  auto it = r.ops.find(name);
  return it == r.ops.end() ? nullptr : &it->second;
}

namespace {

bool close(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) {
    double x = a.as_double(), y = b.as_double();
    return std::fabs(x - y) <= std::max(1e-9 * std::max(std::fabs(x), std::fabs(y)), 1e-12);
  }
  if (a.kind() != b.kind()) return false;
  if (a.is_tuple() || a.is_bag()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!close(a[i], b[i])) return false;
    return true;
  }
  if (a.is_record()) {
    if (a.fields().size() != b.fields().size()) return false;
    for (std::size_t i = 0; i < a.fields().size(); ++i)
      if (a.fields()[i].first != b.fields()[i].first || !close(a.fields()[i].second, b.fields()[i].second))
        return false;
    return true;
  }
  return a == b;
}

}  // namespace

bool reducer_laws_hold(const CommOp& op, const ValueList& samples, std::string* why) {
  auto fail = [&](const std::string& law, const ValueList& xs) {
    if (why) {
      *why = law + " fails on";
      for (const auto& x : xs) *why += " " + x.str();
    }
    return false;
  };
  for (const auto& a : samples) {
    if (op.unit && !close(op.impl(*op.unit, a), a)) return fail("unit", {a});
    for (const auto& b : samples) {
      if (!close(op.impl(a, b), op.impl(b, a))) return fail("commutativity", {a, b});
      for (const auto& c : samples)
        if (!close(op.impl(op.impl(a, b), c), op.impl(a, op.impl(b, c)))) return fail("associativity", {a, b, c});
    }
  }
  return true;
}

void register_reducer(CommOp op, const ValueList& samples) {
  std::string why;
  if (!samples.empty() && !reducer_laws_hold(op, samples, &why)) throw Error("NotCommutative", op.name + ": " + why);
  Registry& r = registry();
  std::unique_lock lock(r.mu);
  std::string key = op.name;
  r.ops[key] = std::move(op);
}

std::vector<std::string> reducer_names() {
  Registry& r = registry();
  std::shared_lock lock(r.mu);
  std::vector<std::string> out;
  for (const auto& [k, v] : r.ops) out.push_back(k);
  return out;
}

Value reduce_bag(const CommOp& op, const ValueList& items) {
  if (items.empty()) return op.unit ? *op.unit : Value::absent();
  Value acc = items[0];
  for (std::size_t i = 1; i < items.size(); ++i) acc = op.impl(acc, items[i]);
  return acc;
}

}  // namespace l2b
