#include "loop2bulk/comp_ir.hpp"

#include <atomic>
#include <functional>
#include <map>
#include <unordered_set>

#include "loop2bulk/ops.hpp"

namespace l2b {

Pattern Pattern::var(std::string n) {
  Pattern p;
  p.name = std::move(n);
  return p;
}

Pattern Pattern::tuple(std::vector<Pattern> ps) {
  Pattern p;
  p.kind = Kind::Tuple;
  p.items = std::move(ps);
  return p;
}

void Pattern::vars(std::vector<std::string>& out) const {
  if (kind == Kind::Var) {
    out.push_back(name);
    return;
  }
  for (const auto& p : items) p.vars(out);
}

std::vector<std::string> Pattern::vars() const {
  std::vector<std::string> out;
  vars(out);
  return out;
}

namespace ir {

namespace {
CE make(CExpr::Kind k, std::string name = {}, std::vector<CE> args = {}) {
  auto e = std::make_shared<CExpr>();
  e->kind = k;
  e->name = std::move(name);
  e->args = std::move(args);
  return e;
}
}  // namespace

CE var(std::string n) { return make(CExpr::Kind::Var, std::move(n)); }

CE cnst(Value v) {
  auto e = std::make_shared<CExpr>();
  e->kind = CExpr::Kind::Const;
  e->value = std::move(v);
  return e;
}

CE integer(std::int64_t v) { return cnst(Value::integer(v)); }
CE boolean(bool b) { return cnst(Value::boolean(b)); }
CE tuple(std::vector<CE> items) { return make(CExpr::Kind::Tuple, {}, std::move(items)); }

CE record(std::vector<std::string> names, std::vector<CE> values) {
  auto e = std::make_shared<CExpr>();
  e->kind = CExpr::Kind::Record;
  e->fields = std::move(names);
  e->args = std::move(values);
  return e;
}

CE proj(CE base, std::string field) { return make(CExpr::Kind::Proj, std::move(field), {std::move(base)}); }
CE bin(std::string op, CE a, CE b) { return make(CExpr::Kind::BinOp, std::move(op), {std::move(a), std::move(b)}); }
CE un(std::string op, CE a) { return make(CExpr::Kind::UnOp, std::move(op), {std::move(a)}); }
CE call(std::string fn, std::vector<CE> args) { return make(CExpr::Kind::Call, std::move(fn), std::move(args)); }

CE rec_update(CE base, std::string field, CE v) {
  return make(CExpr::Kind::RecUpdate, std::move(field), {std::move(base), std::move(v)});
}

CE comp(CE head, std::vector<Qual> quals) {
  auto e = std::make_shared<CExpr>();
  e->kind = CExpr::Kind::Comp;
  e->args = {std::move(head)};
  e->quals = std::move(quals);
  return e;
}

CE reduce(std::string op, CE b) { return make(CExpr::Kind::Reduce, std::move(op), {std::move(b)}); }
CE merge(CE x, CE y) { return make(CExpr::Kind::Merge, {}, {std::move(x), std::move(y)}); }
CE range(CE lo, CE hi) { return make(CExpr::Kind::Range, {}, {std::move(lo), std::move(hi)}); }
CE in_range(CE x, CE lo, CE hi) { return make(CExpr::Kind::InRange, {}, {std::move(x), std::move(lo), std::move(hi)}); }
CE bag(std::vector<CE> items) { return make(CExpr::Kind::BagLit, {}, std::move(items)); }
CE non_empty(CE b) { return make(CExpr::Kind::NonEmpty, {}, {std::move(b)}); }

Qual gen(Pattern p, CE domain) { return {Qual::Kind::Gen, std::move(p), std::move(domain)}; }
Qual opt_gen(Pattern p, CE domain) { return {Qual::Kind::OptGen, std::move(p), std::move(domain)}; }
Qual let(Pattern p, CE value) { return {Qual::Kind::Let, std::move(p), std::move(value)}; }
Qual cond(CE pred) { return {Qual::Kind::Cond, Pattern{}, std::move(pred)}; }
Qual group_by(Pattern p, CE key) { return {Qual::Kind::GroupBy, std::move(p), std::move(key)}; }

CE pattern_expr(const Pattern& p) {
  if (p.kind == Pattern::Kind::Var) return var(p.name);
  std::vector<CE> items;
  for (const auto& q : p.items) items.push_back(pattern_expr(q));
  return tuple(std::move(items));
}

}  // namespace ir

namespace {
std::atomic<std::uint64_t> g_fresh{0};
}

std::string fresh_name(const std::string& base) {
  std::string b = base.substr(0, base.find('$'));
  if (b.empty()) b = "x";
  return b + "$" + std::to_string(++g_fresh);
}

void reset_fresh_names() { g_fresh = 0; }

// ---------------------------------------------------------------- printing

namespace {

int prec(const std::string& op) {
  if (op == "||") return 1;
  if (op == "^" || op == "^^") return 2;
  if (op == "&&") return 3;
  if (op == "==" || op == "!=") return 4;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 5;
  if (op == "+" || op == "-") return 6;
  if (op == "*" || op == "/" || op == "%") return 7;
  return 0;  // printed as a call
}

void out_expr(const CExpr& e, std::string& o, int ctx);

void out_list(const std::vector<CE>& xs, std::string& o) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) o += ", ";
    out_expr(*xs[i], o, 0);
  }
}

void out_pattern(const Pattern& p, std::string& o) {
  if (p.kind == Pattern::Kind::Var) {
    o += p.name;
    return;
  }
  o += "(";
  for (std::size_t i = 0; i < p.items.size(); ++i) {
    if (i) o += ",";
    out_pattern(p.items[i], o);
  }
  o += ")";
}

void out_qual(const Qual& q, std::string& o) {
  switch (q.kind) {
    case Qual::Kind::Gen:
      out_pattern(q.pat, o);
      o += " <- ";
      out_expr(*q.expr, o, 0);
      return;
    case Qual::Kind::OptGen:
      out_pattern(q.pat, o);
      o += " <-? ";
      out_expr(*q.expr, o, 0);
      return;
    case Qual::Kind::Let:
      o += "let ";
      out_pattern(q.pat, o);
      o += " = ";
      out_expr(*q.expr, o, 0);
      return;
    case Qual::Kind::Cond: out_expr(*q.expr, o, 0); return;
    case Qual::Kind::GroupBy:
      o += "group by ";
      out_pattern(q.pat, o);
      if (q.expr) {
        o += " : ";
        out_expr(*q.expr, o, 0);
      }
      return;
  }
}

void out_expr(const CExpr& e, std::string& o, int ctx) {
  using K = CExpr::Kind;
  switch (e.kind) {
    case K::Var: o += e.name; return;
    case K::Const:
      if (e.value.is_absent()) {
        o += "absent";
      } else if (e.value.is_numeric() && e.value.as_double() < 0 && ctx > 0) {
        o += "(" + e.value.str() + ")";
      } else {
        o += e.value.str();
      }
      return;
    case K::Tuple:
      o += "(";
      out_list(e.args, o);
      o += ")";
      return;
    case K::Record:
      o += "<";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) o += ", ";
        o += e.fields[i] + "=";
        out_expr(*e.args[i], o, 5);
      }
      o += ">";
      return;
    case K::Proj:
      out_expr(*e.args[0], o, 9);
      o += "." + e.name;
      return;
    case K::BinOp: {
      int p = prec(e.name);
      if (p == 0) {
        o += e.name + "(";
        out_list(e.args, o);
        o += ")";
        return;
      }
      bool paren = p <= ctx;
      if (paren) o += "(";
      out_expr(*e.args[0], o, p - 1);
      o += " " + e.name + " ";
      out_expr(*e.args[1], o, p);
      if (paren) o += ")";
      return;
    }
    case K::UnOp:
      if (ctx >= 8) o += "(";
      o += e.name;
      out_expr(*e.args[0], o, 8);
      if (ctx >= 8) o += ")";
      return;
    case K::Call:
      o += e.name + "(";
      out_list(e.args, o);
      o += ")";
      return;
    case K::RecUpdate:
      out_expr(*e.args[0], o, 9);
      o += "{" + e.name + " := ";
      out_expr(*e.args[1], o, 0);
      o += "}";
      return;
    case K::Comp:
      o += "[[ ";
      out_expr(*e.args[0], o, 0);
      o += " |";
      for (std::size_t i = 0; i < e.quals.size(); ++i) {
        o += i ? ", " : " ";
        out_qual(e.quals[i], o);
      }
      o += " ]]";
      return;
    case K::Reduce:
      o += "(" + e.name + "/";
      out_expr(*e.args[0], o, 9);
      o += ")";
      return;
    case K::Merge:
      if (ctx > 0) o += "(";
      out_expr(*e.args[0], o, 0);
      o += " <| ";
      out_expr(*e.args[1], o, 0);
      if (ctx > 0) o += ")";
      return;
    case K::Range:
      o += "range(";
      out_list(e.args, o);
      o += ")";
      return;
    case K::InRange:
      o += "inRange(";
      out_list(e.args, o);
      o += ")";
      return;
    case K::BagLit:
      o += "{";
      out_list(e.args, o);
      o += "}";
      return;
    case K::NonEmpty:
      o += "nonEmpty(";
      out_list(e.args, o);
      o += ")";
      return;
  }
}

}  // namespace

std::string print(const CExpr& e) {
  std::string o;
  out_expr(e, o, 0);
  return o;
}

std::string print(const Qual& q) {
  std::string o;
  out_qual(q, o);
  return o;
}

std::string print(const Pattern& p) {
  std::string o;
  out_pattern(p, o);
  return o;
}

// ---------------------------------------------------------------- renaming

namespace {

using Renaming = std::map<std::string, std::string>;

class Renamer {
 public:
  explicit Renamer(std::function<std::string(const std::string&)> mk) : mk_(std::move(mk)) {}

  CE expr(const CE& e, const Renaming& r) {
    if (e->kind == CExpr::Kind::Var) {
      auto it = r.find(e->name);
      return it == r.end() ? e : ir::var(it->second);
    }
    auto out = std::make_shared<CExpr>(*e);
    if (e->kind == CExpr::Kind::Comp) {
      Renaming local = r;
      for (auto& q : out->quals) {
        if (q.expr) q.expr = expr(q.expr, local);
        if (q.kind != Qual::Kind::Cond) q.pat = pattern(q.pat, local);
      }
      out->args[0] = expr(e->args[0], local);
      return out;
    }
    for (auto& a : out->args) a = expr(a, r);
    return out;
  }

 private:
  std::function<std::string(const std::string&)> mk_;

  Pattern pattern(const Pattern& p, Renaming& r) {
    if (p.kind == Pattern::Kind::Var) {
      std::string n = mk_(p.name);
      r[p.name] = n;
      return Pattern::var(n);
    }
    std::vector<Pattern> items;
    for (const auto& q : p.items) items.push_back(pattern(q, r));
    return Pattern::tuple(std::move(items));
  }
};

}  // namespace

CE rename_bound(const CE& e) {
  Renamer r([](const std::string& n) { return fresh_name(n); });
  return r.expr(e, {});
}

std::string canonical(const CExpr& e) {
  int counter = 0;
  Renamer r([&counter](const std::string&) { return "_v" + std::to_string(++counter); });
  return print(*r.expr(std::make_shared<CExpr>(e), {}));
}

// ---------------------------------------------------------------- structure

bool equal(const Pattern& a, const Pattern& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Pattern::Kind::Var) return a.name == b.name;
  if (a.items.size() != b.items.size()) return false;
  for (std::size_t i = 0; i < a.items.size(); ++i)
    if (!equal(a.items[i], b.items[i])) return false;
  return true;
}

bool equal(const CExpr& a, const CExpr& b) {
  if (a.kind != b.kind || a.name != b.name || a.fields != b.fields) return false;
  if (a.kind == CExpr::Kind::Const &&
      (a.value.kind() != b.value.kind() || Value::compare(a.value, b.value) != 0))
    return false;
  if (a.args.size() != b.args.size() || a.quals.size() != b.quals.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equal(*a.args[i], *b.args[i])) return false;
  for (std::size_t i = 0; i < a.quals.size(); ++i) {
    const Qual& x = a.quals[i];
    const Qual& y = b.quals[i];
    if (x.kind != y.kind || !!x.expr != !!y.expr) return false;
    if (x.kind != Qual::Kind::Cond && !equal(x.pat, y.pat)) return false;
    if (x.expr && !equal(*x.expr, *y.expr)) return false;
  }
  return true;
}

namespace {

void free_into(const CExpr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  if (e.kind == CExpr::Kind::Var) {
    if (!bound.count(e.name)) out.insert(e.name);
    return;
  }
  if (e.kind == CExpr::Kind::Comp) {
    std::set<std::string> local = bound;
    for (const auto& q : e.quals) {
      if (q.expr) free_into(*q.expr, local, out);
      if (q.kind != Qual::Kind::Cond)
        for (const auto& v : q.pat.vars()) local.insert(v);
    }
    free_into(*e.args[0], local, out);
    return;
  }
  for (const auto& a : e.args) free_into(*a, bound, out);
}

void binders(const CExpr& e, std::set<std::string>& out) {
  for (const auto& q : e.quals) {
    if (q.kind != Qual::Kind::Cond)
      for (const auto& v : q.pat.vars()) out.insert(v);
    if (q.expr) binders(*q.expr, out);
  }
  for (const auto& a : e.args) binders(*a, out);
}

}  // namespace

std::set<std::string> free_vars(const CExpr& e) {
  std::set<std::string> bound, out;
  free_into(e, bound, out);
  return out;
}

bool mentions(const CExpr& e, const std::string& v) { return free_vars(e).count(v) > 0; }

namespace {

CE subst_rec(const CE& e, const std::string& x, const CE& by, const std::set<std::string>& by_free) {
  if (e->kind == CExpr::Kind::Var) return e->name == x ? by : e;
  if (e->kind == CExpr::Kind::Const) return e;
  CE src = e;
  if (e->kind == CExpr::Kind::Comp && !by_free.empty()) {
    std::set<std::string> bs;
    binders(*e, bs);
    for (const auto& v : by_free)
      if (bs.count(v)) {
        src = rename_bound(e);
        break;
      }
  }
  auto out = std::make_shared<CExpr>(*src);
  if (src->kind == CExpr::Kind::Comp) {
    bool shadowed = false;
    for (auto& q : out->quals) {
      if (q.expr && !shadowed) q.expr = subst_rec(q.expr, x, by, by_free);
      if (q.kind != Qual::Kind::Cond)
        for (const auto& v : q.pat.vars())
          if (v == x) shadowed = true;
    }
    if (!shadowed) out->args[0] = subst_rec(src->args[0], x, by, by_free);
    return out;
  }
  for (auto& a : out->args) a = subst_rec(a, x, by, by_free);
  return out;
}

}  // namespace

CE subst(const CE& e, const std::string& var, const CE& by) {
  return subst_rec(e, var, by, free_vars(*by));
}

// ---------------------------------------------------------------- evaluation

bool bind_pattern(const Pattern& p, const Value& v, Scope& scope) {
  if (p.kind == Pattern::Kind::Var) {
    scope.emplace_back(p.name, v);
    return true;
  }
  if (!v.is_tuple() || v.size() != p.items.size()) return false;
  for (std::size_t i = 0; i < p.items.size(); ++i)
    if (!bind_pattern(p.items[i], v[i], scope)) return false;
  return true;
}

Value merge_bags(const Value& x, const Value& y) {
  std::unordered_set<Value, ValueHash> ykeys;
  for (const auto& kv : y.items())
    if (!ykeys.insert(kv[0]).second) throw Error("DuplicateKey", "key " + kv[0].str() + " repeated in merge");
  std::unordered_set<Value, ValueHash> xkeys;
  ValueList out;
  for (const auto& kv : x.items()) {
    if (!xkeys.insert(kv[0]).second) throw Error("DuplicateKey", "key " + kv[0].str() + " repeated in merge");
    if (!ykeys.count(kv[0])) out.push_back(kv);
  }
  for (const auto& kv : y.items()) out.push_back(kv);
  return Value::bag(std::move(out));
}

namespace {

const Value* lookup(const std::string& n, const Scope& scope, const Env& globals) {
  for (auto it = scope.rbegin(); it != scope.rend(); ++it)
    if (it->first == n) return &it->second;
  auto g = globals.find(n);
  return g == globals.end() ? nullptr : &g->second;
}

void bind_absent(const Pattern& p, Scope& scope) {
  for (const auto& v : p.vars()) scope.emplace_back(v, Value::absent());
}

const ValueList& bag_items(const Value& v, const char* what) {
  if (!v.is_bag()) throw Error("TypeMismatch", std::string(what) + " is not a bag: " + v.str());
  return v.items();
}

}  // namespace

std::vector<Scope> eval_quals(const std::vector<Qual>& quals, const Env& globals, std::vector<Scope> rows,
                              std::size_t base) {
  Scope scope = rows.empty() ? Scope{} : rows[0];
  for (const auto& q : quals) {
    std::vector<Scope> next;
    switch (q.kind) {
      case Qual::Kind::Gen:
      case Qual::Kind::OptGen:
        for (auto& row : rows) {
          Value d = eval_ir(*q.expr, globals, row);
          const ValueList& items = bag_items(d, "generator domain");
          if (items.empty() && q.kind == Qual::Kind::OptGen) {
            bind_absent(q.pat, row);
            next.push_back(std::move(row));
            continue;
          }
          for (const auto& x : items) {
            Scope r = row;
            if (!bind_pattern(q.pat, x, r))
              throw Error("TypeMismatch", "pattern " + print(q.pat) + " does not match " + x.str());
            next.push_back(std::move(r));
          }
        }
        break;
      case Qual::Kind::Let:
        for (auto& row : rows) {
          Value v = eval_ir(*q.expr, globals, row);
          if (!bind_pattern(q.pat, v, row))
            throw Error("TypeMismatch", "pattern " + print(q.pat) + " does not match " + v.str());
          next.push_back(std::move(row));
        }
        break;
      case Qual::Kind::Cond:
        for (auto& row : rows) {
          Value v = eval_ir(*q.expr, globals, row);
          if (v.is_absent()) continue;
          if (v.kind() != Value::Kind::Bool)
            throw Error("NonBooleanCond", "condition " + print(*q.expr) + " gave " + v.str());
          if (v.as_bool()) next.push_back(std::move(row));
        }
        break;
      case Qual::Kind::GroupBy: {
        std::vector<std::string> pvars = q.pat.vars();
        std::set<std::string> pset(pvars.begin(), pvars.end());
        std::vector<std::string> lifted;
        if (!rows.empty()) {
          std::set<std::string> seen;
          for (std::size_t i = base; i < rows[0].size(); ++i) {
            const std::string& n = rows[0][i].first;
            if (!pset.count(n) && seen.insert(n).second) lifted.push_back(n);
          }
        }
        CE key = q.expr ? q.expr : ir::pattern_expr(q.pat);
        std::map<Value, std::vector<ValueList>> groups;
        for (auto& row : rows) {
          Value k = eval_ir(*key, globals, row);
          ValueList vals;
          for (const auto& n : lifted) vals.push_back(*lookup(n, row, globals));
          auto& g = groups[k];
          if (g.empty()) g.resize(lifted.size());
          for (std::size_t i = 0; i < lifted.size(); ++i) g[i].push_back(vals[i]);
        }
        for (auto& [k, cols] : groups) {
          Scope r(scope.begin(), scope.begin() + static_cast<long>(base));
          if (!bind_pattern(q.pat, k, r))
            throw Error("TypeMismatch", "group-by pattern " + print(q.pat) + " does not match " + k.str());
          for (std::size_t i = 0; i < lifted.size(); ++i)
            r.emplace_back(lifted[i], Value::bag(std::move(cols[i])));
          next.push_back(std::move(r));
        }
        break;
      }
    }
    rows = std::move(next);
  }
  return rows;
}

namespace {

Value eval_comp(const CExpr& e, const Env& globals, Scope& scope) {
  std::vector<Scope> rows = eval_quals(e.quals, globals, {scope}, scope.size());
  ValueList out;
  out.reserve(rows.size());
  for (auto& row : rows) out.push_back(eval_ir(*e.args[0], globals, row));
  return Value::bag(std::move(out));
}

Value with_field(const Value& base, const std::string& name, const Value& v) {
  if (base.is_record()) {
    FieldList f = base.fields();
    bool found = false;
    for (auto& [n, x] : f)
      if (n == name) {
        x = v;
        found = true;
      }
    if (!found) throw Error("TypeMismatch", "record has no field " + name);
    return Value::record(std::move(f));
  }
  if (base.is_tuple() && name.size() > 1 && name[0] == '_') {
    ValueList items = base.items();
    items.at(std::stoul(name.substr(1)) - 1) = v;
    return Value::tuple(std::move(items));
  }
  throw Error("TypeMismatch", "cannot update field " + name + " of " + base.str());
}

}  // namespace

Value eval_ir(const CExpr& e, const Env& globals, Scope& scope) {
  using K = CExpr::Kind;
  switch (e.kind) {
    case K::Var: {
      const Value* v = lookup(e.name, scope, globals);
      if (!v) throw Error("UnboundVariable", e.name);
      return *v;
    }
    case K::Const: return e.value;
    case K::Tuple:
    case K::Call:
    case K::Record: {
      ValueList vs;
      for (const auto& a : e.args) vs.push_back(eval_ir(*a, globals, scope));
      if (e.kind == K::Tuple) return Value::tuple(std::move(vs));
      if (e.kind == K::Call) return call_builtin(e.name, vs);
      FieldList f;
      for (std::size_t i = 0; i < vs.size(); ++i) f.push_back({e.fields[i], vs[i]});
      return Value::record(std::move(f));
    }
    case K::Proj: {
      Value b = eval_ir(*e.args[0], globals, scope);
      if (b.is_absent()) return b;
      return b.project(e.name);
    }
    case K::BinOp:
      return apply_binop(e.name, eval_ir(*e.args[0], globals, scope), eval_ir(*e.args[1], globals, scope));
    case K::UnOp: return apply_unop(e.name, eval_ir(*e.args[0], globals, scope));
    case K::RecUpdate:
      return with_field(eval_ir(*e.args[0], globals, scope), e.name, eval_ir(*e.args[1], globals, scope));
    case K::Comp: return eval_comp(e, globals, scope);
    case K::Reduce: {
      const CommOp* op = find_reducer(e.name);
      if (!op) throw Error("UnknownReducer", e.name);
      Value b = eval_ir(*e.args[0], globals, scope);
      return reduce_bag(*op, bag_items(b, "reduction argument"));
    }
    case K::Merge: {
      Value x = eval_ir(*e.args[0], globals, scope);
      Value y = eval_ir(*e.args[1], globals, scope);
      bag_items(x, "merge operand");
      bag_items(y, "merge operand");
      return merge_bags(x, y);
    }
    case K::Range: {
      std::int64_t lo = eval_ir(*e.args[0], globals, scope).as_int();
      std::int64_t hi = eval_ir(*e.args[1], globals, scope).as_int();
      ValueList out;
      for (std::int64_t i = lo; i <= hi; ++i) out.push_back(Value::integer(i));
      return Value::bag(std::move(out));
    }
    case K::InRange: {
      Value x = eval_ir(*e.args[0], globals, scope);
      if (x.kind() != Value::Kind::Int) return Value::boolean(false);
      Value lo = eval_ir(*e.args[1], globals, scope);
      Value hi = eval_ir(*e.args[2], globals, scope);
      return Value::boolean(lo.as_int() <= x.as_int() && x.as_int() <= hi.as_int());
    }
    case K::BagLit: {
      ValueList vs;
      for (const auto& a : e.args) vs.push_back(eval_ir(*a, globals, scope));
      return Value::bag(std::move(vs));
    }
    case K::NonEmpty: {
      Value b = eval_ir(*e.args[0], globals, scope);
      return Value::boolean(!bag_items(b, "nonEmpty argument").empty());
    }
  }
  throw Error("TypeMismatch", "bad IR node");
}

Value eval_ir(const CExpr& e, const Env& globals) {
  Scope scope;
  return eval_ir(e, globals, scope);
}

}  // namespace l2b
