#include "loop2bulk/translator.hpp"

#include "loop2bulk/analysis.hpp"

namespace l2b {

using K = CExpr::Kind;

TargetCode TargetCode::assign(std::string var, CE value, bool unwrap) {
  TargetCode t;
  t.kind = Kind::Assign;
  t.var = std::move(var);
  t.value = std::move(value);
  t.unwrap = unwrap;
  return t;
}

TargetCode TargetCode::loop(CE cond, std::vector<TargetCode> body) {
  TargetCode t;
  t.kind = Kind::While;
  t.value = std::move(cond);
  t.body = std::move(body);
  return t;
}

TargetCode TargetCode::block(std::vector<TargetCode> body) {
  TargetCode t;
  t.kind = Kind::Block;
  t.body = std::move(body);
  return t;
}

std::string print(const Code& code, int indent) {
  std::string pad(static_cast<std::size_t>(indent), ' ');
  std::string out;
  for (const auto& t : code) {
    switch (t.kind) {
      case TargetCode::Kind::Assign: out += pad + t.var + " := " + print(*t.value) + ";\n"; break;
      case TargetCode::Kind::While:
        out += pad + "while (" + print(*t.value) + ") {\n" + print(t.body, indent + 2) + pad + "}\n";
        break;
      case TargetCode::Kind::Block: out += pad + "{\n" + print(t.body, indent + 2) + pad + "}\n"; break;
    }
  }
  return out;
}

namespace {

Pattern fresh_var(const std::string& base) { return Pattern::var(fresh_name(base)); }

CE pvar(const Pattern& p) { return ir::var(p.name); }

// Array element pattern and the conditions tying its key to `key` values.
void element_gen(const std::string& array, std::size_t dims, const std::vector<CE>& key,
                 std::vector<Qual>& qs, Pattern& value) {
  value = fresh_var("v");
  std::vector<Pattern> ks;
  for (std::size_t i = 0; i < dims; ++i) ks.push_back(fresh_var("i"));
  Pattern kp = dims == 1 ? ks[0] : Pattern::tuple(ks);
  qs.push_back(ir::gen(Pattern::tuple({kp, value}), ir::var(array)));
  for (std::size_t i = 0; i < dims; ++i) qs.push_back(ir::cond(ir::bin("==", pvar(ks[i]), key[i])));
}

bool simple_stmt(const Stmt& s) {
  return s.kind == Stmt::Kind::Assign || s.kind == Stmt::Kind::IncrUpdate;
}

}  // namespace

Translator::Translator(const SourceProgram& p) : prog_(p) {}

bool Translator::is_collection(const std::string& v) const { return prog_.is_collection(v); }

CE Translator::trans_expr(const Expr& e) {
  auto lift = [&](const std::vector<ExprPtr>& args, auto&& build) {
    std::vector<Qual> qs;
    std::vector<CE> vs;
    for (const auto& a : args) {
      Pattern p = fresh_var("x");
      qs.push_back(ir::gen(p, trans_expr(*a)));
      vs.push_back(pvar(p));
    }
    return ir::comp(build(vs), std::move(qs));
  };
  switch (e.kind) {
    case Expr::Kind::DestRef: {
      const Dest& d = *e.dest;
      switch (d.kind) {
        case Dest::Kind::Var: return ir::bag({ir::var(d.name)});
        case Dest::Kind::Proj: {
          Pattern p = fresh_var("x");
          auto base = std::make_shared<Expr>();
          base->kind = Expr::Kind::DestRef;
          base->dest = d.base;
          return ir::comp(ir::proj(pvar(p), d.name), {ir::gen(p, trans_expr(*base))});
        }
        case Dest::Kind::Index: {
          std::vector<Qual> qs;
          std::vector<CE> key;
          for (const auto& ix : d.indexes) {
            Pattern p = fresh_var("k");
            qs.push_back(ir::gen(p, trans_expr(*ix)));
            key.push_back(pvar(p));
          }
          Pattern v;
          element_gen(d.name, d.indexes.size(), key, qs, v);
          return ir::comp(pvar(v), std::move(qs));
        }
      }
      break;
    }
    case Expr::Kind::Field:
      return lift(e.args, [&](const std::vector<CE>& v) { return ir::proj(v[0], e.op); });
    case Expr::Kind::BinOp:
      return lift(e.args, [&](const std::vector<CE>& v) { return ir::bin(e.op, v[0], v[1]); });
    case Expr::Kind::UnOp:
      return lift(e.args, [&](const std::vector<CE>& v) { return ir::un(e.op, v[0]); });
    case Expr::Kind::Tuple:
      return lift(e.args, [&](const std::vector<CE>& v) { return ir::tuple(v); });
    case Expr::Kind::Record:
      return lift(e.args, [&](const std::vector<CE>& v) { return ir::record(e.fields, v); });
    case Expr::Kind::Call:
      return lift(e.args, [&](const std::vector<CE>& v) {
        if ((e.op == "min" || e.op == "max") && v.size() == 2) return ir::bin(e.op, v[0], v[1]);
        return ir::call(e.op, v);
      });
    case Expr::Kind::Const: return ir::bag({ir::cnst(e.value)});
    case Expr::Kind::EmptyColl: return ir::bag({ir::bag({})});
  }
  throw Error("UnsupportedStatement", "unknown expression");
}

Pattern Translator::key_pattern(const Dest& d) {
  switch (d.kind) {
    case Dest::Kind::Var: return fresh_var("k");
    case Dest::Kind::Proj: return key_pattern(*d.base);
    case Dest::Kind::Index: {
      if (d.indexes.size() == 1) return fresh_var("k");
      std::vector<Pattern> ks;
      for (std::size_t i = 0; i < d.indexes.size(); ++i) ks.push_back(fresh_var("k"));
      return Pattern::tuple(ks);
    }
  }
  return fresh_var("k");
}

CE Translator::dest_key(const Dest& d) {
  switch (d.kind) {
    case Dest::Kind::Var: return ir::bag({ir::tuple({})});
    case Dest::Kind::Proj: return dest_key(*d.base);
    case Dest::Kind::Index: {
      if (d.indexes.size() == 1) return trans_expr(*d.indexes[0]);
      std::vector<Qual> qs;
      std::vector<CE> key;
      for (const auto& ix : d.indexes) {
        Pattern p = fresh_var("k");
        qs.push_back(ir::gen(p, trans_expr(*ix)));
        key.push_back(pvar(p));
      }
      return ir::comp(ir::tuple(key), std::move(qs));
    }
  }
  return nullptr;
}

CE Translator::dest_from_key(const Dest& d, const Pattern& key) {
  switch (d.kind) {
    case Dest::Kind::Var: return ir::bag({ir::var(d.name)});
    case Dest::Kind::Proj: {
      Pattern p = fresh_var("x");
      return ir::comp(ir::proj(pvar(p), d.name), {ir::gen(p, dest_from_key(*d.base, key))});
    }
    case Dest::Kind::Index: {
      std::vector<CE> ks;
      if (key.kind == Pattern::Kind::Var) {
        ks.push_back(ir::var(key.name));
      } else {
        for (const auto& k : key.items) ks.push_back(ir::pattern_expr(k));
      }
      std::vector<Qual> qs;
      Pattern v;
      element_gen(d.name, d.indexes.size(), ks, qs, v);
      return ir::comp(pvar(v), std::move(qs));
    }
  }
  return nullptr;
}

Code Translator::make_update(const Dest& d, const CE& x) {
  switch (d.kind) {
    case Dest::Kind::Var: {
      Pattern k = fresh_var("k"), v = fresh_var("v");
      return {TargetCode::assign(d.name, ir::comp(pvar(v), {ir::gen(Pattern::tuple({k, v}), x)}), true)};
    }
    case Dest::Kind::Index: return {TargetCode::assign(d.name, ir::merge(ir::var(d.name), x))};
    case Dest::Kind::Proj: {
      Pattern k = key_pattern(d), v = fresh_var("v"), w = fresh_var("w");
      CE rebuilt = ir::comp(ir::tuple({ir::pattern_expr(k), ir::rec_update(pvar(w), d.name, pvar(v))}),
                            {ir::gen(Pattern::tuple({k, v}), x), ir::gen(w, dest_from_key(*d.base, k))});
      return make_update(*d.base, rebuilt);
    }
  }
  return {};
}

Code Translator::sequential_for(const Stmt& s) {
  if (s.kind == Stmt::Kind::ForIn)
    throw Error("UnsupportedStatement", "for-in loop containing a while-loop at " + s.loc.str());
  std::string hi = fresh_name("hi");
  Pattern a = fresh_var("a"), b = fresh_var("b");
  Code body = trans_stmt(*s.body, {});
  body.push_back(TargetCode::assign(s.var, ir::bag({ir::bin("+", ir::var(s.var), ir::integer(1))}), true));
  return {TargetCode::assign(s.var, trans_expr(*s.e1), true), TargetCode::assign(hi, trans_expr(*s.e2), true),
          TargetCode::loop(ir::bag({ir::bin("<=", ir::var(s.var), ir::var(hi))}), std::move(body))};
}

// Branches run once at most; both guards are computed before either branch.
Code Translator::guarded_if(const Stmt& s) {
  std::string t = fresh_name("then"), f = fresh_name("else");
  Pattern p = fresh_var("p"), q = fresh_var("p");
  Code out{TargetCode::assign(t, ir::bag({ir::boolean(false)}), true),
           TargetCode::assign(f, ir::bag({ir::boolean(false)}), true),
           TargetCode::assign(t, ir::comp(pvar(p), {ir::gen(p, trans_expr(*s.e1))}), true)};
  if (s.other) out.push_back(TargetCode::assign(f, ir::comp(ir::un("!", pvar(q)), {ir::gen(q, trans_expr(*s.e1))}), true));
  auto branch = [&](const std::string& g, const Stmt& b) {
    Code body{TargetCode::assign(g, ir::bag({ir::boolean(false)}), true)};
    for (auto& c : trans_stmt(b, {})) body.push_back(std::move(c));
    out.push_back(TargetCode::loop(ir::bag({ir::var(g)}), std::move(body)));
  };
  branch(t, *s.body);
  if (s.other) branch(f, *s.other);
  return out;
}

Code Translator::trans_stmt(const Stmt& s, const std::vector<Qual>& quals) {
  switch (s.kind) {
    case Stmt::Kind::IncrUpdate: {
      const Dest& d = *s.dest;
      Pattern v = fresh_var("v"), k = key_pattern(d), w = fresh_var("w");
      std::vector<Qual> qs = quals;
      qs.push_back(ir::gen(v, trans_expr(*s.e1)));
      qs.push_back(ir::gen(k, dest_key(d)));
      qs.push_back(ir::group_by(k));
      qs.push_back(ir::opt_gen(w, dest_from_key(d, k)));
      CE head = ir::tuple({ir::pattern_expr(k), ir::bin(s.op, pvar(w), ir::reduce(s.op, pvar(v)))});
      return make_update(d, ir::comp(head, std::move(qs)));
    }
    case Stmt::Kind::Assign: {
      const Dest& d = *s.dest;
      Pattern v = fresh_var("v"), k = key_pattern(d);
      std::vector<Qual> qs = quals;
      qs.push_back(ir::gen(v, trans_expr(*s.e1)));
      qs.push_back(ir::gen(k, dest_key(d)));
      return make_update(d, ir::comp(ir::tuple({ir::pattern_expr(k), pvar(v)}), std::move(qs)));
    }
    case Stmt::Kind::VarDecl:
      if (s.e1->kind == Expr::Kind::EmptyColl) return {TargetCode::assign(s.var, ir::bag({}))};
      return {TargetCode::assign(s.var, trans_expr(*s.e1), true)};
    case Stmt::Kind::ForRange: {
      if (contains_while(*s.body)) return sequential_for(s);
      Pattern lo = fresh_var("lo"), hi = fresh_var("hi");
      std::vector<Qual> qs = quals;
      qs.push_back(ir::gen(lo, trans_expr(*s.e1)));
      qs.push_back(ir::gen(hi, trans_expr(*s.e2)));
      qs.push_back(ir::gen(Pattern::var(s.var), ir::range(pvar(lo), pvar(hi))));
      return trans_stmt(*s.body, qs);
    }
    case Stmt::Kind::ForIn: {
      if (contains_while(*s.body)) return sequential_for(s);
      Pattern c = fresh_var("c");
      std::vector<Qual> qs = quals;
      qs.push_back(ir::gen(c, trans_expr(*s.e1)));
      qs.push_back(ir::gen(Pattern::tuple({fresh_var("i"), Pattern::var(s.var)}), pvar(c)));
      return trans_stmt(*s.body, qs);
    }
    case Stmt::Kind::While: {
      if (!quals.empty())
        throw Error("UnsupportedStatement", "while-loop inside a parallel loop at " + s.loc.str());
      return {TargetCode::loop(trans_expr(*s.e1), trans_stmt(*s.body, {}))};
    }
    case Stmt::Kind::If: {
      bool single = simple_stmt(*s.body) && (!s.other || simple_stmt(*s.other));
      if (quals.empty() && (!single || contains_while(s))) return guarded_if(s);
      if (contains_while(s))
        throw Error("UnsupportedStatement", "while-loop inside a parallel loop at " + s.loc.str());
      Pattern p = fresh_var("p");
      std::vector<Qual> qt = quals;
      qt.push_back(ir::gen(p, trans_expr(*s.e1)));
      qt.push_back(ir::cond(pvar(p)));
      Code out = trans_stmt(*s.body, qt);
      if (s.other) {
        Pattern q = fresh_var("p");
        std::vector<Qual> qe = quals;
        qe.push_back(ir::gen(q, trans_expr(*s.e1)));
        qe.push_back(ir::cond(ir::un("!", pvar(q))));
        for (auto& c : trans_stmt(*s.other, qe)) out.push_back(std::move(c));
      }
      return out;
    }
    case Stmt::Kind::Block: {
      Code out;
      for (const auto& c : s.stmts)
        for (auto& t : trans_stmt(*c, quals)) out.push_back(std::move(t));
      return out;
    }
  }
  throw Error("UnsupportedStatement", "unknown statement at " + s.loc.str());
}

std::set<std::string> array_vars(const SourceProgram& p) {
  std::set<std::string> out;
  for (const auto& [name, type] : p.types)
    if (type->is_collection()) out.insert(name);
  return out;
}

namespace {

void optimize_code(Code& code, const std::set<std::string>& arrays) {
  for (auto& t : code) {
    if (t.value) t.value = optimize(t.value, arrays);
    optimize_code(t.body, arrays);
  }
}

}  // namespace

Code translate_program(const SourceProgram& p, const TranslateOptions& opt) {
  Diagnostics diag = check_program(p);
  if (!diag.accepted) throw Error("NotAffine", diag.str());
  SourceProgram q = distribute_program(p);
  Translator tr(q);
  Code out;
  for (const auto& s : q.body)
    for (auto& t : tr.trans_stmt(*s, {})) out.push_back(std::move(t));
  if (opt.optimize) optimize_code(out, array_vars(q));
  return out;
}

}  // namespace l2b
