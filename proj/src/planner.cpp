#include "loop2bulk/planner.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "loop2bulk/ops.hpp"

namespace l2b {

using K = CExpr::Kind;
using Quals = std::vector<Qual>;
using Kind = PlanNode::Kind;

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Singleton: return "SINGLETON";
    case Kind::Source: return "SOURCE";
    case Kind::RangeSrc: return "RANGE";
    case Kind::FlatMap: return "FLATMAP";
    case Kind::Join: return "JOIN";
    case Kind::CoGroup: return "COGROUP";
    case Kind::GroupBy: return "GROUPBY";
    case Kind::ReduceByKey: return "REDUCEBYKEY";
    case Kind::Map: return "MAP";
    case Kind::Merge: return "MERGE";
    case Kind::Eval: return "VALUE";
    case Kind::Bind: return "BIND";
  }
  return "?";
}

namespace {

using Node = std::shared_ptr<PlanNode>;

Node node(Kind k) {
  auto n = std::make_shared<PlanNode>();
  n->kind = k;
  return n;
}

std::set<std::string> binders(const Quals& qs) {
  std::set<std::string> out;
  for (const auto& q : qs)
    if (q.kind != Qual::Kind::Cond)
      for (const auto& v : q.pat.vars()) out.insert(v);
  return out;
}

// Free variables of e that are comprehension variables of `scope`.
std::set<std::string> local_vars(const CExpr& e, const std::set<std::string>& scope) {
  std::set<std::string> out;
  for (const auto& v : free_vars(e))
    if (scope.count(v)) out.insert(v);
  return out;
}

bool subset(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::all_of(a.begin(), a.end(), [&](const std::string& x) { return b.count(x) > 0; });
}

bool is_eq(const Qual& q) { return q.kind == Qual::Kind::Cond && q.expr->kind == K::BinOp && q.expr->name == "=="; }

// Replaces `op/v` by the variable holding the per-key fold.
CE replace_reductions(const CE& e, const std::map<std::pair<std::string, std::string>, std::string>& aggs) {
  if (e->kind == K::Reduce && e->args[0]->kind == K::Var) {
    auto it = aggs.find({e->name, e->args[0]->name});
    if (it != aggs.end()) return ir::var(it->second);
  }
  auto out = std::make_shared<CExpr>(*e);
  bool changed = false;
  for (auto& a : out->args) {
    CE n = replace_reductions(a, aggs);
    changed = changed || n != a;
    a = n;
  }
  for (auto& q : out->quals)
    if (q.expr) {
      CE n = replace_reductions(q.expr, aggs);
      changed = changed || n != q.expr;
      q.expr = n;
    }
  return changed ? CE(out) : e;
}

// Collects `op/v` uses of the lifted variables; false when one is used any other way.
bool reductions_only(const CExpr& e, const std::set<std::string>& lifted,
                     std::set<std::pair<std::string, std::string>>& uses) {
  if (e.kind == K::Reduce && e.args[0]->kind == K::Var && lifted.count(e.args[0]->name)) {
    if (!find_reducer(e.name)) return false;
    uses.insert({e.name, e.args[0]->name});
    return true;
  }
  if (e.kind == K::Var) return !lifted.count(e.name);
  if (e.kind == K::Comp)
    for (const auto& v : binders(e.quals))
      if (lifted.count(v)) return false;
  for (const auto& a : e.args)
    if (!reductions_only(*a, lifted, uses)) return false;
  for (const auto& q : e.quals)
    if (q.expr && !reductions_only(*q.expr, lifted, uses)) return false;
  return true;
}

class Lowerer {
 public:
  explicit Lowerer(const PlanOptions& opt) : opt_(opt) {}

  PlanPtr value(const CE& e) {
    std::vector<std::pair<std::string, PlanPtr>> binds;
    PlanPtr body;
    if (e->kind == K::Comp) {
      body = comp(*e, binds);
    } else if (e->kind == K::Merge) {
      auto m = node(Kind::Merge);
      m->inputs = {value(e->args[0]), value(e->args[1])};
      body = m;
    } else {
      auto n = node(Kind::Eval);
      n->expr = hoist(e, {}, binds);
      body = n;
    }
    for (auto it = binds.rbegin(); it != binds.rend(); ++it) {
      auto b = node(Kind::Bind);
      b->name = it->first;
      b->inputs = {it->second, body};
      body = b;
    }
    return body;
  }

 private:
  PlanOptions opt_;

  // Comprehensions that use no variable of `scope` are computed once, ahead.
  CE hoist(const CE& e, const std::set<std::string>& scope,
           std::vector<std::pair<std::string, PlanPtr>>& binds) {
    if ((e->kind == K::Comp || e->kind == K::Merge) && local_vars(*e, scope).empty()) {
      std::string n = fresh_name("bag");
      binds.push_back({n, value(e)});
      return ir::var(n);
    }
    if (e->kind == K::Comp) return e;
    auto out = std::make_shared<CExpr>(*e);
    for (auto& a : out->args) a = hoist(a, scope, binds);
    return out;
  }

  static Node flush(Node cur, Quals& pending, std::vector<std::string>& schema) {
    if (pending.empty()) return cur;
    auto f = node(Kind::FlatMap);
    f->inputs = {cur};
    f->quals = pending;
    for (const auto& q : pending)
      if (q.kind != Qual::Kind::Cond)
        for (const auto& v : q.pat.vars()) schema.push_back(v);
    f->schema = schema;
    pending.clear();
    return f;
  }

  // Joins `right` to `cur` on equalities found among quals[from, end).
  Node join(Node cur, Node right, const std::set<std::string>& left_vars, const std::set<std::string>& right_vars,
            const std::set<std::string>& scope, Quals& qs, std::size_t from, std::vector<bool>& used) {
    std::vector<CE> lk, rk;
    Quals local;
    for (std::size_t k = from; k < qs.size() && qs[k].kind != Qual::Kind::GroupBy; ++k) {
      const Qual& q = qs[k];
      if (q.kind != Qual::Kind::Cond || used[k]) continue;
      std::set<std::string> all = local_vars(*q.expr, scope);
      if (!all.empty() && subset(all, right_vars)) {
        local.push_back(q);
        used[k] = true;
        continue;
      }
      if (!is_eq(q) || !cur) continue;
      const CE& a = q.expr->args[0];
      const CE& b = q.expr->args[1];
      std::set<std::string> sa = local_vars(*a, scope), sb = local_vars(*b, scope);
      if (sa.empty() || sb.empty()) continue;
      if (subset(sa, left_vars) && subset(sb, right_vars)) {
        lk.push_back(a);
        rk.push_back(b);
        used[k] = true;
      } else if (subset(sb, left_vars) && subset(sa, right_vars)) {
        lk.push_back(b);
        rk.push_back(a);
        used[k] = true;
      }
    }
    if (!local.empty()) {
      auto f = node(Kind::FlatMap);
      f->inputs = {right};
      f->quals = local;
      f->schema = right->schema;
      right = f;
    }
    if (!cur) return right;
    auto j = node(Kind::Join);
    j->inputs = {cur, right};
    j->lkeys = lk;
    j->rkeys = rk;
    j->schema = cur->schema;
    j->schema.insert(j->schema.end(), right->schema.begin(), right->schema.end());
    if (lk.empty()) j->note = "cross join on unit key";
    return j;
  }

  // `[[ e | p <- V, conds ]]` with conditions tying p to the outer row.
  Node lookup(Node cur, const Qual& q, const std::set<std::string>& outer, const std::set<std::string>& scope) {
    const CExpr& l = *q.expr;
    if (l.kind != K::Comp || l.quals.empty()) return nullptr;
    const Qual& g = l.quals[0];
    std::set<std::string> inner = binders(l.quals);
    if (g.kind != Qual::Kind::Gen || g.expr->kind != K::Var || scope.count(g.expr->name) ||
        inner.count(g.expr->name))
      return nullptr;
    std::set<std::string> all = scope;
    all.insert(inner.begin(), inner.end());
    std::vector<CE> lk, rk;
    Quals local;
    for (std::size_t k = 1; k < l.quals.size(); ++k) {
      const Qual& c = l.quals[k];
      if (c.kind != Qual::Kind::Cond) return nullptr;
      std::set<std::string> sv = local_vars(*c.expr, all);
      if (subset(sv, inner)) {
        local.push_back(c);
        continue;
      }
      if (!is_eq(c)) return nullptr;
      std::set<std::string> sa = local_vars(*c.expr->args[0], all), sb = local_vars(*c.expr->args[1], all);
      if (!sa.empty() && subset(sa, outer) && subset(sb, inner) && !sb.empty()) {
        lk.push_back(c.expr->args[0]);
        rk.push_back(c.expr->args[1]);
      } else if (!sb.empty() && subset(sb, outer) && subset(sa, inner) && !sa.empty()) {
        lk.push_back(c.expr->args[1]);
        rk.push_back(c.expr->args[0]);
      } else {
        return nullptr;
      }
    }
    if (lk.empty() || !subset(local_vars(*l.args[0], all), inner)) return nullptr;
    Node right = node(Kind::Source);
    right->name = g.expr->name;
    right->pat = g.pat;
    right->schema = g.pat.vars();
    if (!local.empty()) {
      auto f = node(Kind::FlatMap);
      f->inputs = {right};
      f->quals = local;
      f->schema = right->schema;
      right = f;
    }
    auto cg = node(Kind::CoGroup);
    cg->inputs = {cur, right};
    cg->lkeys = lk;
    cg->rkeys = rk;
    cg->pat = q.pat;
    cg->expr = l.args[0];
    cg->schema = cur->schema;
    for (const auto& v : q.pat.vars()) cg->schema.push_back(v);
    return cg;
  }

  PlanPtr comp(const CExpr& c, std::vector<std::pair<std::string, PlanPtr>>& binds) {
    std::set<std::string> scope = binders(c.quals);
    Quals qs = c.quals;
    for (auto& q : qs)
      if (q.expr) q.expr = hoist(q.expr, scope, binds);
    CE head = hoist(c.args[0], scope, binds);

    Node cur;  // null: the single empty row
    std::vector<std::string> schema;
    Quals pending;
    std::vector<bool> used(qs.size(), false);
    auto start = [&]() -> Node {
      if (!cur) cur = node(Kind::Singleton);
      return cur;
    };
    for (std::size_t i = 0; i < qs.size(); ++i) {
      if (used[i]) continue;
      Qual q = qs[i];
      std::set<std::string> have(schema.begin(), schema.end());
      for (const auto& p : pending)
        if (p.kind != Qual::Kind::Cond)
          for (const auto& v : p.pat.vars()) have.insert(v);
      bool first = !cur && pending.empty();
      if (q.kind == Qual::Kind::Gen && (first || opt_.detect_joins)) {
        Node src;
        if (q.expr->kind == K::Var && !scope.count(q.expr->name)) {
          src = node(Kind::Source);
          src->name = q.expr->name;
          src->pat = q.pat;
        } else if (q.expr->kind == K::Range && q.pat.kind == Pattern::Kind::Var &&
                   local_vars(*q.expr, scope).empty()) {
          src = node(Kind::RangeSrc);
          src->pat = q.pat;
          src->expr = q.expr->args[0];
          src->expr2 = q.expr->args[1];
        }
        if (src) {
          src->schema = q.pat.vars();
          std::set<std::string> rv(src->schema.begin(), src->schema.end());
          bool clash = std::any_of(rv.begin(), rv.end(), [&](const std::string& v) { return have.count(v) > 0; });
          if (!clash) {
            if (cur || !pending.empty()) cur = flush(start(), pending, schema);
            cur = join(cur, src, have, rv, scope, qs, i + 1, used);
            schema = cur->schema;
            continue;
          }
        }
      }
      if (q.kind == Qual::Kind::OptGen && opt_.detect_joins && !first) {
        Node base = flush(start(), pending, schema);
        if (Node cg = lookup(base, q, have, scope)) {
          cur = cg;
          schema = cg->schema;
          continue;
        }
        cur = base;
      }
      if (q.kind == Qual::Kind::GroupBy) {
        cur = flush(start(), pending, schema);
        std::vector<std::string> pv = q.pat.vars();
        std::set<std::string> lifted;
        std::vector<std::string> lifted_order;
        for (const auto& v : schema)
          if (std::find(pv.begin(), pv.end(), v) == pv.end() && lifted.insert(v).second) lifted_order.push_back(v);
        CE key = q.expr ? q.expr : ir::pattern_expr(q.pat);
        std::set<std::pair<std::string, std::string>> uses;
        bool reducible = opt_.detect_joins;
        for (std::size_t k = i + 1; k < qs.size() && reducible; ++k) {
          if (qs[k].expr && !reductions_only(*qs[k].expr, lifted, uses)) reducible = false;
          if (qs[k].kind != Qual::Kind::Cond)
            for (const auto& v : qs[k].pat.vars())
              if (lifted.count(v)) reducible = false;
        }
        if (reducible && !reductions_only(*head, lifted, uses)) reducible = false;
        if (reducible) {
          auto r = node(Kind::ReduceByKey);
          r->inputs = {cur};
          r->pat = q.pat;
          r->expr = key;
          std::map<std::pair<std::string, std::string>, std::string> names;
          for (const auto& [op, v] : uses) {
            std::string n = fresh_name("agg");
            names[{op, v}] = n;
            r->agg_ops.push_back(op);
            r->agg_args.push_back(ir::var(v));
            r->agg_names.push_back(n);
          }
          for (std::size_t k = i + 1; k < qs.size(); ++k)
            if (qs[k].expr) qs[k].expr = replace_reductions(qs[k].expr, names);
          head = replace_reductions(head, names);
          schema = pv;
          schema.insert(schema.end(), r->agg_names.begin(), r->agg_names.end());
          r->schema = schema;
          cur = r;
        } else {
          auto g = node(Kind::GroupBy);
          g->inputs = {cur};
          g->pat = q.pat;
          g->expr = key;
          g->lifted = lifted_order;
          schema = pv;
          schema.insert(schema.end(), lifted_order.begin(), lifted_order.end());
          g->schema = schema;
          cur = g;
        }
        continue;
      }
      pending.push_back(q);
    }
    cur = flush(start(), pending, schema);
    auto m = node(Kind::Map);
    m->inputs = {cur};
    m->expr = head;
    return m;
  }
};

std::string keys_str(const std::vector<CE>& ks) {
  if (ks.size() == 1) return print(*ks[0]);
  std::string s = "(";
  for (std::size_t i = 0; i < ks.size(); ++i) s += (i ? ", " : "") + print(*ks[i]);
  return s + ")";
}

std::string label(const PlanNode& p) {
  std::string s = kind_name(p.kind);
  switch (p.kind) {
    case Kind::Singleton: break;
    case Kind::Source: s += " " + p.name + " as " + print(p.pat); break;
    case Kind::RangeSrc: s += " " + print(p.pat) + " <- range(" + print(*p.expr) + ", " + print(*p.expr2) + ")"; break;
    case Kind::FlatMap: {
      s += " [";
      for (std::size_t i = 0; i < p.quals.size(); ++i) s += (i ? ", " : "") + print(p.quals[i]);
      s += "]";
      break;
    }
    case Kind::Join: s += "(key=" + keys_str(p.lkeys) + " = " + keys_str(p.rkeys) + ")"; break;
    case Kind::CoGroup:
      s += "(key=" + keys_str(p.lkeys) + " = " + keys_str(p.rkeys) + ") " + print(p.pat) + " <-? " + print(*p.expr);
      break;
    case Kind::GroupBy: {
      s += "(key=" + print(*p.expr) + ") " + print(p.pat) + " lifting [";
      for (std::size_t i = 0; i < p.lifted.size(); ++i) s += (i ? ", " : "") + p.lifted[i];
      s += "]";
      break;
    }
    case Kind::ReduceByKey: {
      s += "(key=" + print(*p.expr) + ") " + print(p.pat) + " [";
      for (std::size_t i = 0; i < p.agg_ops.size(); ++i)
        s += (i ? ", " : "") + p.agg_names[i] + " = " + p.agg_ops[i] + "/" + print(*p.agg_args[i]);
      s += "]";
      break;
    }
    case Kind::Map: s += " " + print(*p.expr); break;
    case Kind::Merge: break;
    case Kind::Eval: s += " " + print(*p.expr); break;
    case Kind::Bind: s += " " + p.name; break;
  }
  if (!p.note.empty()) s += "  # " + p.note;
  return s;
}

void print_rec(const PlanNode& p, const std::string& prefix, std::string& out) {
  out += label(p) + "\n";
  for (std::size_t i = 0; i < p.inputs.size(); ++i) {
    bool last = i + 1 == p.inputs.size();
    out += prefix + (last ? "└─ " : "├─ ");
    print_rec(*p.inputs[i], prefix + (last ? "   " : "│  "), out);
  }
}

}  // namespace

PlanPtr plan_expr(const CE& e, const PlanOptions& opt) { return Lowerer(opt).value(e); }

std::string print(const PlanNode& p) {
  std::string out;
  print_rec(p, "", out);
  return out;
}

std::map<std::string, int> count_nodes(const PlanNode& p) {
  std::map<std::string, int> out;
  std::function<void(const PlanNode&)> go = [&](const PlanNode& n) {
    ++out[kind_name(n.kind)];
    for (const auto& i : n.inputs) go(*i);
  };
  go(p);
  return out;
}

std::vector<std::string> plan_warnings(const PlanNode& p) {
  std::vector<std::string> out;
  std::function<void(const PlanNode&)> go = [&](const PlanNode& n) {
    if (!n.note.empty()) out.push_back(label(n));
    for (const auto& i : n.inputs) go(*i);
  };
  go(p);
  return out;
}

}  // namespace l2b
