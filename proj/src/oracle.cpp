#include "loop2bulk/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <unordered_map>

#include "loop2bulk/frontend.hpp"
#include "loop2bulk/ops.hpp"

namespace l2b {

namespace {

using Opt = std::optional<Value>;

struct Slot {
  bool collection = false;
  bool set = false;
  Value scalar;
  std::map<Value, Value> entries;
};

class Interp {
 public:
  Interp(const SourceProgram& p, const OracleOptions& opt) : prog_(p), opt_(opt) {}

  Env run(const Env& input) {
    for (const auto& in : prog_.inputs) {
      auto it = input.find(in.name);
      if (it == input.end()) throw Error("UnboundVariable", "missing input " + in.name);
      Slot& s = vars_[in.name];
      s.collection = in.type->is_collection();
      if (s.collection) {
        for (const auto& kv : it->second.items()) s.entries[kv[0]] = kv[1];
      } else {
        s.scalar = it->second;
      }
      s.set = true;
    }
    for (const auto& st : prog_.body) exec(*st);
    Env out;
    for (const auto& [name, type] : prog_.types) {
      auto it = vars_.find(name);
      if (it == vars_.end() || !it->second.set) continue;
      if (it->second.collection) {
        ValueList items;
        items.reserve(it->second.entries.size());
        for (const auto& [k, v] : it->second.entries) items.push_back(Value::pair(k, v));
        out[name] = Value::bag(std::move(items));
      } else {
        out[name] = it->second.scalar;
      }
    }
    return out;
  }

 private:
  const SourceProgram& prog_;
  OracleOptions opt_;
  std::unordered_map<std::string, Slot> vars_;

  Opt absent(const Dest& d) {
    if (opt_.strict_reads)
      throw Error("IndexUnset", "read of unset element " + unparse(d) + " at " + d.loc.str());
    return std::nullopt;
  }

  Slot& slot(const std::string& name, SrcLoc at) {
    auto it = vars_.find(name);
    if (it == vars_.end() || !it->second.set)
      throw Error("UnboundVariable", name + " used before assignment at " + at.str());
    return it->second;
  }

  Opt key_of(const Dest& d) {
    if (d.indexes.size() == 1) return eval(*d.indexes[0]);
    ValueList ks;
    for (const auto& e : d.indexes) {
      Opt k = eval(*e);
      if (!k) return std::nullopt;
      ks.push_back(*k);
    }
    return Value::tuple(std::move(ks));
  }

  Opt read(const Dest& d) {
    switch (d.kind) {
      case Dest::Kind::Var: {
        Slot& s = slot(d.name, d.loc);
        if (!s.collection) return s.scalar;
        ValueList items;
        for (const auto& [k, v] : s.entries) items.push_back(Value::pair(k, v));
        return Value::bag(std::move(items));
      }
      case Dest::Kind::Proj: {
        Opt b = read(*d.base);
        if (!b) return b;
        return b->project(d.name);
      }
      case Dest::Kind::Index: {
        Opt k = key_of(d);
        if (!k) return k;
        Slot& s = slot(d.name, d.loc);
        auto it = s.entries.find(*k);
        if (it == s.entries.end()) return absent(d);
        return it->second;
      }
    }
    return std::nullopt;
  }

  // Replaces field `name` of a record or tuple.
  static Value with_field(const Value& base, const std::string& name, const Value& v) {
    if (base.is_record()) {
      FieldList f = base.fields();
      for (auto& [n, x] : f)
        if (n == name) x = v;
      return Value::record(std::move(f));
    }
    ValueList items = base.items();
    std::size_t idx = std::stoul(name.substr(1));
    items.at(idx - 1) = v;
    return Value::tuple(std::move(items));
  }

  void write(const Dest& d, const Value& v) {
    switch (d.kind) {
      case Dest::Kind::Var: {
        Slot& s = vars_[d.name];
        s.scalar = v;
        s.set = true;
        return;
      }
      case Dest::Kind::Proj: {
        Opt b = read(*d.base);
        if (!b) return;
        write(*d.base, with_field(*b, d.name, v));
        return;
      }
      case Dest::Kind::Index: {
        Opt k = key_of(d);
        if (!k) return;
        slot(d.name, d.loc).entries[*k] = v;
        return;
      }
    }
  }

  // Current value of d for an incremental update; nullopt when unset.
  Opt current(const Dest& d, bool& skip) {
    skip = false;
    switch (d.kind) {
      case Dest::Kind::Var: {
        Slot& s = slot(d.name, d.loc);
        return s.scalar;
      }
      case Dest::Kind::Proj: {
        bool sk;
        Opt b = current(*d.base, sk);
        if (sk || !b) {
          skip = true;
          return std::nullopt;
        }
        return b->project(d.name);
      }
      case Dest::Kind::Index: {
        Opt k = key_of(d);
        if (!k) {
          skip = true;
          return std::nullopt;
        }
        Slot& s = slot(d.name, d.loc);
        auto it = s.entries.find(*k);
        if (it == s.entries.end()) return std::nullopt;
        return it->second;
      }
    }
    return std::nullopt;
  }

  Opt eval(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::DestRef: return read(*e.dest);
      case Expr::Kind::Field: {
        Opt b = eval(*e.args[0]);
        if (!b) return b;
        return b->project(e.op);
      }
      case Expr::Kind::BinOp: {
        Opt a = eval(*e.args[0]);
        if (!a) return a;
        Opt b = eval(*e.args[1]);
        if (!b) return b;
        return apply_binop(e.op, *a, *b);
      }
      case Expr::Kind::UnOp: {
        Opt a = eval(*e.args[0]);
        if (!a) return a;
        return apply_unop(e.op, *a);
      }
      case Expr::Kind::Tuple:
      case Expr::Kind::Record:
      case Expr::Kind::Call: {
        ValueList vs;
        for (const auto& a : e.args) {
          Opt v = eval(*a);
          if (!v) return v;
          vs.push_back(*v);
        }
        if (e.kind == Expr::Kind::Tuple) return Value::tuple(std::move(vs));
        if (e.kind == Expr::Kind::Call) return call_builtin(e.op, vs);
        FieldList f;
        for (std::size_t i = 0; i < vs.size(); ++i) f.push_back({e.fields[i], vs[i]});
        return Value::record(std::move(f));
      }
      case Expr::Kind::Const: return e.value;
      case Expr::Kind::EmptyColl: return Value::bag({});
    }
    return std::nullopt;
  }

  bool truth(const Opt& v, const Stmt& s) {
    if (!v) return false;
    if (v->kind() != Value::Kind::Bool)
      throw Error("NonBooleanCond", "condition is not Bool at " + s.loc.str());
    return v->as_bool();
  }

  void exec(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Assign: {
        Opt v = eval(*s.e1);
        if (v) write(*s.dest, *v);
        return;
      }
      case Stmt::Kind::IncrUpdate: {
        Opt v = eval(*s.e1);
        if (!v) return;
        bool skip;
        Opt cur = current(*s.dest, skip);
        if (skip) return;
        const CommOp* op = find_reducer(s.op);
        if (!op) throw Error("UnknownReducer", s.op);
        write(*s.dest, cur ? op->impl(*cur, *v) : *v);
        return;
      }
      case Stmt::Kind::VarDecl: {
        Slot& sl = vars_[s.var];
        sl.collection = s.type->is_collection();
        sl.entries.clear();
        if (s.e1->kind == Expr::Kind::EmptyColl || sl.collection) {
          if (s.e1->kind != Expr::Kind::EmptyColl) {
            Opt v = eval(*s.e1);
            if (v)
              for (const auto& kv : v->items()) sl.entries[kv[0]] = kv[1];
          }
          sl.set = true;
          return;
        }
        Opt v = eval(*s.e1);
        if (!v) throw Error("IndexUnset", "initializer of " + s.var + " has no value");
        sl.scalar = *v;
        sl.set = true;
        return;
      }
      case Stmt::Kind::ForRange: {
        Opt lo = eval(*s.e1), hi = eval(*s.e2);
        if (!lo || !hi) return;
        std::int64_t a = lo->as_int(), b = hi->as_int();
        Slot& idx = vars_[s.var];
        idx.set = true;
        if (opt_.reverse_loops) {
          for (std::int64_t i = b; i >= a; --i) {
            vars_[s.var].scalar = Value::integer(i);
            exec(*s.body);
          }
        } else {
          for (std::int64_t i = a; i <= b; ++i) {
            vars_[s.var].scalar = Value::integer(i);
            exec(*s.body);
          }
        }
        return;
      }
      case Stmt::Kind::ForIn: {
        std::vector<Value> elems;
        if (s.e1->kind == Expr::Kind::DestRef && s.e1->dest->kind == Dest::Kind::Var &&
            slot(s.e1->dest->name, s.loc).collection) {
          for (const auto& [k, v] : slot(s.e1->dest->name, s.loc).entries) elems.push_back(v);
        } else {
          Opt c = eval(*s.e1);
          if (!c) return;
          for (const auto& kv : c->items()) elems.push_back(kv.is_tuple() && kv.size() == 2 ? kv[1] : kv);
        }
        if (opt_.reverse_loops) std::reverse(elems.begin(), elems.end());
        vars_[s.var].set = true;
        for (const auto& v : elems) {
          vars_[s.var].scalar = v;
          exec(*s.body);
        }
        return;
      }
      case Stmt::Kind::While: {
        for (;;) {
          Opt c = eval(*s.e1);
          if (!c) throw Error("IndexUnset", "while condition has no value at " + s.loc.str());
          if (!truth(c, s)) return;
          exec(*s.body);
        }
      }
      case Stmt::Kind::If: {
        Opt c = eval(*s.e1);
        if (!c) {
          if (opt_.strict_reads)
            throw Error("IndexUnset", "if condition has no value at " + s.loc.str());
          return;
        }
        if (truth(c, s))
          exec(*s.body);
        else if (s.other)
          exec(*s.other);
        return;
      }
      case Stmt::Kind::Block:
        for (const auto& c : s.stmts) exec(*c);
        return;
    }
  }
};

bool pair_bag_unique(const Value& b, std::map<Value, Value>& out) {
  for (const auto& x : b.items()) {
    if (!x.is_tuple() || x.size() != 2) return false;
    if (!out.emplace(x[0], x[1]).second) return false;
  }
  return true;
}

void diff_values(const std::string& path, const Value& a, const Value& b, double tol,
                 std::vector<std::string>& diffs);

void diff_bags(const std::string& path, const Value& a, const Value& b, double tol,
               std::vector<std::string>& diffs) {
  std::map<Value, Value> ma, mb;
  if (pair_bag_unique(a, ma) && pair_bag_unique(b, mb)) {
    for (const auto& [k, v] : ma) {
      auto it = mb.find(k);
      if (it == mb.end())
        diffs.push_back(path + "[" + k.str() + "]: " + v.str() + " vs <missing>");
      else
        diff_values(path + "[" + k.str() + "]", v, it->second, tol, diffs);
    }
    for (const auto& [k, v] : mb)
      if (!ma.count(k)) diffs.push_back(path + "[" + k.str() + "]: <missing> vs " + v.str());
    return;
  }
  ValueList x = a.items(), y = b.items();
  if (x.size() != y.size()) {
    diffs.push_back(path + ": bag sizes " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
    return;
  }
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i)
    diff_values(path + "{" + std::to_string(i) + "}", x[i], y[i], tol, diffs);
}

void diff_values(const std::string& path, const Value& a, const Value& b, double tol,
                 std::vector<std::string>& diffs) {
  if (a.is_bag() && b.is_bag()) {
    diff_bags(path, a, b, tol, diffs);
    return;
  }
  if (!values_close(a, b, tol)) diffs.push_back(path + ": " + a.str() + " vs " + b.str());
}

}  // namespace

Env eval_program(const SourceProgram& p, const Env& input, const OracleOptions& opt) {
  Interp in(p, opt);
  return in.run(input);
}

bool values_close(const Value& a, const Value& b, double rel_tol) {
  if (a.is_numeric() && b.is_numeric()) {
    if (a.kind() == Value::Kind::Int && b.kind() == Value::Kind::Int) return a == b;
    double x = a.as_double(), y = b.as_double();
    if (x == y) return true;
    if (std::isnan(x) || std::isnan(y)) return std::isnan(x) && std::isnan(y);
    double scale = std::max(std::fabs(x), std::fabs(y));
    return std::fabs(x - y) <= std::max(rel_tol * scale, 1e-12);
  }
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Value::Kind::Tuple: {
      if (a.size() != b.size()) return false;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (!values_close(a[i], b[i], rel_tol)) return false;
      return true;
    }
    case Value::Kind::Record: {
      const auto& x = a.fields();
      const auto& y = b.fields();
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i].first != y[i].first || !values_close(x[i].second, y[i].second, rel_tol))
          return false;
      return true;
    }
    case Value::Kind::Bag: {
      std::vector<std::string> d;
      diff_bags("", a, b, rel_tol, d);
      return d.empty();
    }
    default: return a == b;
  }
}

std::string CompareReport::str() const {
  if (ok) return "PASS\n";
  std::string out = "FAIL (" + std::to_string(diffs.size()) + " differences)\n";
  std::size_t shown = 0;
  for (const auto& d : diffs) {
    if (++shown > 20) {
      out += "  ...\n";
      break;
    }
    out += "  " + d + "\n";
  }
  return out;
}

CompareReport compare_states(const Env& a, const Env& b, double rel_tol) {
  CompareReport r;
  for (const auto& [name, v] : a) {
    auto it = b.find(name);
    if (it == b.end()) {
      r.diffs.push_back(name + ": present only on the left");
      continue;
    }
    diff_values(name, v, it->second, rel_tol, r.diffs);
  }
  for (const auto& [name, v] : b)
    if (!a.count(name)) r.diffs.push_back(name + ": present only on the right");
  r.ok = r.diffs.empty();
  return r;
}

}  // namespace l2b
