#include <algorithm>
#include <functional>
#include <map>

#include "loop2bulk/comp_ir.hpp"
#include "loop2bulk/ops.hpp"

namespace l2b {

namespace {

using K = CExpr::Kind;
using Quals = std::vector<Qual>;

bool binds(const Qual& q, const std::string& x) {
  if (q.kind == Qual::Kind::Cond) return false;
  for (const auto& v : q.pat.vars())
    if (v == x) return true;
  return false;
}

std::vector<std::string> binders_of(const Qual& q) {
  return q.kind == Qual::Kind::Cond ? std::vector<std::string>{} : q.pat.vars();
}

bool is_simple(const CExpr& e) {
  return e.kind == K::Var || e.kind == K::Const || (e.kind == K::Tuple && e.args.empty());
}

Pattern rename_pattern(const Pattern& p, const std::string& from, const std::string& to) {
  if (p.kind == Pattern::Kind::Var) return Pattern::var(p.name == from ? to : p.name);
  std::vector<Pattern> items;
  for (const auto& i : p.items) items.push_back(rename_pattern(i, from, to));
  return Pattern::tuple(std::move(items));
}

// No nested bags: worth recomputing rather than binding.
bool cheap(const CExpr& e) {
  switch (e.kind) {
    case K::Comp:
    case K::Reduce:
    case K::Merge:
    case K::Range:
    case K::BagLit:
    case K::NonEmpty: return false;
    default: break;
  }
  for (const auto& a : e.args)
    if (!cheap(*a)) return false;
  return true;
}

bool has_groupby(const Quals& qs) {
  for (const auto& q : qs)
    if (q.kind == Qual::Kind::GroupBy) return true;
  return false;
}

// Free use of x in qs[from..] or the head, stopping at a rebinding.
bool used_after(const Quals& qs, std::size_t from, const CExpr& head, const std::string& x) {
  for (std::size_t k = from; k < qs.size(); ++k) {
    if (qs[k].expr && mentions(*qs[k].expr, x)) return true;
    if (binds(qs[k], x)) return qs[k].kind == Qual::Kind::GroupBy && !qs[k].expr;
  }
  return mentions(head, x);
}

std::size_t next_groupby(const Quals& qs, std::size_t from) {
  for (std::size_t k = from; k < qs.size(); ++k)
    if (qs[k].kind == Qual::Kind::GroupBy) return k;
  return qs.size();
}

std::size_t segment_start(const Quals& qs, std::size_t idx) {
  for (std::size_t k = idx; k > 0; --k)
    if (qs[k - 1].kind == Qual::Kind::GroupBy) return k;
  return 0;
}

std::set<std::string> bound_in(const Quals& qs, std::size_t from, std::size_t to) {
  std::set<std::string> out;
  for (std::size_t k = from; k < to && k < qs.size(); ++k)
    for (const auto& v : binders_of(qs[k])) out.insert(v);
  return out;
}

CE with_quals(const CExpr& c, Quals qs, CE head = nullptr) {
  return ir::comp(head ? head : c.args[0], std::move(qs));
}

// Applies f to every comprehension, innermost first.
CE map_comps(const CE& e, const std::function<CE(const CE&)>& f) {
  auto out = std::make_shared<CExpr>(*e);
  for (auto& a : out->args) a = map_comps(a, f);
  for (auto& q : out->quals)
    if (q.expr) q.expr = map_comps(q.expr, f);
  if (out->kind == K::Comp) return f(out);
  return out;
}

// ---------------------------------------------------------------- normalize

CE simplify_node(const CE& e) {
  switch (e->kind) {
    case K::Reduce: {
      const CE& b = e->args[0];
      if (b->kind == K::BagLit && b->args.size() == 1) return b->args[0];
      if (b->kind == K::BagLit && b->args.empty()) {
        const CommOp* op = find_reducer(e->name);
        if (op && op->unit) return ir::cnst(*op->unit);
      }
      return e;
    }
    case K::Merge:
      if (e->args[1]->kind == K::BagLit && e->args[1]->args.empty()) return e->args[0];
      return e;
    case K::Proj: {
      const CE& b = e->args[0];
      if (b->kind == K::Record)
        for (std::size_t i = 0; i < b->fields.size(); ++i)
          if (b->fields[i] == e->name) return b->args[i];
      if (b->kind == K::Tuple && e->name.size() > 1 && e->name[0] == '_') {
        std::size_t i = std::stoul(e->name.substr(1));
        if (i >= 1 && i <= b->args.size()) return b->args[i - 1];
      }
      return e;
    }
    default: return e;
  }
}

// One rewrite step on a comprehension; nullptr when nothing applies.
CE comp_step(const CExpr& c) {
  const Quals& qs = c.quals;
  const CE& head = c.args[0];
  for (std::size_t idx = 0; idx < qs.size(); ++idx) {
    const Qual& q = qs[idx];
    auto replace = [&](Quals with) {
      Quals out(qs.begin(), qs.begin() + static_cast<long>(idx));
      out.insert(out.end(), with.begin(), with.end());
      out.insert(out.end(), qs.begin() + static_cast<long>(idx) + 1, qs.end());
      return with_quals(c, std::move(out));
    };
    switch (q.kind) {
      case Qual::Kind::Gen:
      case Qual::Kind::OptGen: {
        const CE& d = q.expr;
        if (d->kind == K::BagLit && d->args.empty()) {
          if (q.kind == Qual::Kind::Gen) return ir::bag({});
          Quals lets;
          for (const auto& v : q.pat.vars()) lets.push_back(ir::let(Pattern::var(v), ir::cnst(Value::absent())));
          return replace(std::move(lets));
        }
        if (d->kind == K::BagLit && d->args.size() == 1) return replace({ir::let(q.pat, d->args[0])});
        if (q.kind == Qual::Kind::Gen && d->kind == K::Comp && (idx == 0 || !has_groupby(d->quals))) {
          CE inner = rename_bound(d);
          Quals with = inner->quals;
          with.push_back(ir::let(q.pat, inner->args[0]));
          return replace(std::move(with));
        }
        break;
      }
      case Qual::Kind::Let: {
        const CE& v = q.expr;
        if (q.pat.kind == Pattern::Kind::Tuple && v->kind == K::Tuple && v->args.size() == q.pat.items.size()) {
          Quals lets;
          for (std::size_t i = 0; i < v->args.size(); ++i) lets.push_back(ir::let(q.pat.items[i], v->args[i]));
          return replace(std::move(lets));
        }
        if (q.pat.kind == Pattern::Kind::Tuple && q.pat.items.empty()) return replace({});
        if (q.pat.kind != Pattern::Kind::Var) break;
        const std::string& x = q.pat.name;
        if (!used_after(qs, idx + 1, *head, x)) return replace({});
        if (v->kind == K::Var && v->name == x) return replace({});
        if (!is_simple(*v)) {
          std::size_t g = next_groupby(qs, idx + 1);
          if (!cheap(*v)) {
            // A value used only by the head moves into it.
            if (g < qs.size() || used_after(qs, idx + 1, *ir::boolean(true), x)) break;
            Quals out = qs;
            out.erase(out.begin() + static_cast<long>(idx));
            return with_quals(c, std::move(out), subst(head, x, v));
          }
          // Cheap arithmetic is recomputed at each use up to the next group-by.
          if (g < qs.size() && (binds(qs[g], x) || used_after(qs, g + 1, *head, x))) break;
          std::size_t last = std::min(g, qs.size() - 1);
          std::set<std::string> fv = free_vars(*v);
          bool clash = false;
          for (std::size_t k = idx + 1; k <= last; ++k)
            for (const auto& b : binders_of(qs[k]))
              if (qs[k].kind != Qual::Kind::GroupBy && (b == x || fv.count(b))) clash = true;
          if (clash) break;
          Quals out(qs.begin(), qs.begin() + static_cast<long>(idx));
          for (std::size_t k = idx + 1; k < qs.size(); ++k) {
            Qual nq = qs[k];
            if (k <= last && nq.expr) nq.expr = subst(nq.expr, x, v);
            out.push_back(nq);
          }
          return with_quals(c, std::move(out), g == qs.size() ? subst(head, x, v) : head);
        }
        std::size_t g = next_groupby(qs, idx + 1);
        if (v->kind == K::Var && g < qs.size()) {
          // A renaming of a variable bound in this segment lifts the same way.
          const std::string& y = v->name;
          bool local = false, rebound = false;
          for (std::size_t k = segment_start(qs, idx); k < idx; ++k)
            if (binds(qs[k], y)) local = true;
          for (std::size_t k = idx + 1; k < qs.size(); ++k)
            if (binds(qs[k], x) || binds(qs[k], y)) rebound = true;
          if (local && !rebound) {
            Quals out(qs.begin(), qs.begin() + static_cast<long>(idx));
            for (std::size_t k = idx + 1; k < qs.size(); ++k) {
              Qual nq = qs[k];
              if (nq.expr) nq.expr = subst(nq.expr, x, v);
              out.push_back(nq);
            }
            return with_quals(c, std::move(out), subst(head, x, v));
          }
        }
        std::size_t last = std::min(g, qs.size() - 1);
        // Names bound up to the group-by must not capture v.
        std::string y = v->kind == K::Var ? v->name : "";
        bool clash = false;
        for (std::size_t k = idx + 1; k <= last; ++k)
          if (qs[k].kind != Qual::Kind::GroupBy && (binds(qs[k], x) || (!y.empty() && binds(qs[k], y))))
            clash = true;
        if (clash) break;
        bool changed = false;
        Quals out = qs;
        for (std::size_t k = idx + 1; k <= last; ++k) {
          if (!out[k].expr || !mentions(*out[k].expr, x)) continue;
          out[k].expr = subst(out[k].expr, x, v);
          changed = true;
        }
        CE new_head = head;
        if (g == qs.size() && mentions(*head, x)) {
          new_head = subst(head, x, v);
          changed = true;
        }
        if (!used_after(out, idx + 1, *new_head, x)) {
          out.erase(out.begin() + static_cast<long>(idx));
          return with_quals(c, std::move(out), new_head);
        }
        if (changed) return with_quals(c, std::move(out), new_head);
        break;
      }
      case Qual::Kind::Cond: {
        const CE& p = q.expr;
        if (p->kind == K::Const && p->value.kind() == Value::Kind::Bool) {
          if (p->value.as_bool()) return replace({});
          return ir::bag({});
        }
        if (p->kind == K::BinOp && p->name == "==") {
          const CE& a = p->args[0];
          const CE& b = p->args[1];
          if (a->kind == K::Tuple && b->kind == K::Tuple && a->args.size() == b->args.size()) {
            Quals cs;
            for (std::size_t i = 0; i < a->args.size(); ++i)
              cs.push_back(ir::cond(ir::bin("==", a->args[i], b->args[i])));
            return replace(std::move(cs));
          }
          if (a->kind == K::Var && b->kind == K::Var && a->name == b->name) return replace({});
        }
        break;
      }
      case Qual::Kind::GroupBy: {
        std::size_t seg = segment_start(qs, idx);
        // let k = x, ..., group by (.., k, ..)  ==>  group by (.., x, ..) when x is not needed lifted.
        if (!q.expr) {
          std::vector<std::string> pv = q.pat.vars();
          for (const auto& k : pv) {
            for (std::size_t j = idx; j > seg; --j) {
              const Qual& l = qs[j - 1];
              if (binds(l, k)) {
                if (l.kind != Qual::Kind::Let || l.pat.kind != Pattern::Kind::Var || l.expr->kind != K::Var) break;
                const std::string& x = l.expr->name;
                if (std::find(pv.begin(), pv.end(), x) != pv.end() || used_after(qs, idx + 1, *head, x)) break;
                std::set<std::string> local = bound_in(qs, seg, j - 1);
                if (!local.count(x)) break;
                bool rebound = false;
                for (std::size_t m = j; m < idx; ++m)
                  if (binds(qs[m], x)) rebound = true;
                if (rebound) break;
                Quals out = qs;
                out[idx] = ir::group_by(rename_pattern(q.pat, k, x));
                CE new_head = head;
                bool shadow = false;
                for (std::size_t m = idx + 1; m < out.size() && !shadow; ++m) {
                  if (out[m].expr) out[m].expr = subst(out[m].expr, k, ir::var(x));
                  if (binds(out[m], k)) shadow = true;
                }
                if (!shadow) new_head = subst(head, k, ir::var(x));
                return with_quals(c, std::move(out), new_head);
              }
            }
          }
        }
        if (q.expr && equal(*q.expr, *ir::pattern_expr(q.pat))) return replace({ir::group_by(q.pat)});
        if (!q.expr && q.pat.kind == Pattern::Kind::Var) {
          const std::string& k = q.pat.name;
          for (std::size_t j = idx; j > seg; --j) {
            const Qual& l = qs[j - 1];
            if (l.kind == Qual::Kind::Let && l.pat.kind == Pattern::Kind::Var && l.pat.name == k) {
              bool used = false;
              for (std::size_t m = j; m < idx; ++m)
                if (qs[m].expr && mentions(*qs[m].expr, k)) used = true;
              if (used) break;
              Quals out = qs;
              out[idx] = ir::group_by(q.pat, l.expr);
              out.erase(out.begin() + static_cast<long>(j) - 1);
              return with_quals(c, std::move(out));
            }
            if (binds(l, k)) break;
          }
        }
        if (q.expr && q.pat.kind == Pattern::Kind::Var) {
          std::vector<CE> comps;
          if (q.expr->kind == K::Var) {
            comps = {q.expr};
          } else if (q.expr->kind == K::Tuple && !q.expr->args.empty()) {
            comps = q.expr->args;
          }
          std::set<std::string> local = bound_in(qs, 0, idx);
          std::set<std::string> names;
          bool ok = !comps.empty();
          for (const auto& x : comps) {
            if (x->kind != K::Var || !local.count(x->name) || !names.insert(x->name).second ||
                used_after(qs, idx + 1, *head, x->name) || x->name == q.pat.name) {
              ok = false;
              break;
            }
          }
          if (ok) {
            Pattern np;
            if (q.expr->kind == K::Var) {
              np = Pattern::var(q.expr->name);
            } else {
              std::vector<Pattern> ps;
              for (const auto& x : comps) ps.push_back(Pattern::var(x->name));
              np = Pattern::tuple(std::move(ps));
            }
            Quals out = qs;
            out[idx] = ir::group_by(np);
            CE new_head = head;
            bool shadow = false;
            for (std::size_t m = idx + 1; m < out.size() && !shadow; ++m) {
              if (out[m].expr) out[m].expr = subst(out[m].expr, q.pat.name, q.expr);
              if (binds(out[m], q.pat.name)) shadow = true;
            }
            if (!shadow) new_head = subst(head, q.pat.name, q.expr);
            return with_quals(c, std::move(out), new_head);
          }
        }
        break;
      }
    }
  }
  return nullptr;
}

CE norm(const CE& e) {
  auto out = std::make_shared<CExpr>(*e);
  for (auto& a : out->args) a = norm(a);
  for (auto& q : out->quals)
    if (q.expr) q.expr = norm(q.expr);
  if (out->kind != K::Comp) return simplify_node(out);
  if (out->quals.empty()) return ir::bag({out->args[0]});
  CE next = comp_step(*out);
  return next ? norm(next) : CE(out);
}

// ---------------------------------------------------------------- affine keys

struct Lin {
  std::map<std::string, std::int64_t> coef;
  std::int64_t c = 0;
  std::vector<std::pair<std::int64_t, CE>> other;  // sign, opaque term
};

std::optional<Lin> linear(const CE& e) {
  Lin l;
  switch (e->kind) {
    case K::Var: l.coef[e->name] = 1; return l;
    case K::Const:
      if (e->value.kind() != Value::Kind::Int) break;
      l.c = e->value.as_int();
      return l;
    case K::UnOp:
      if (e->name == "-") {
        auto a = linear(e->args[0]);
        if (!a) return a;
        for (auto& [v, k] : a->coef) k = -k;
        a->c = -a->c;
        for (auto& o : a->other) o.first = -o.first;
        return a;
      }
      break;
    case K::BinOp:
      if (e->name == "+" || e->name == "-") {
        auto a = linear(e->args[0]);
        auto b = linear(e->args[1]);
        if (!a || !b) break;
        std::int64_t s = e->name == "+" ? 1 : -1;
        for (const auto& [v, k] : b->coef) a->coef[v] += s * k;
        a->c += s * b->c;
        for (const auto& o : b->other) a->other.push_back({s * o.first, o.second});
        return a;
      }
      if (e->name == "*") {
        for (int side = 0; side < 2; ++side) {
          const CE& k = e->args[side];
          if (k->kind != K::Const || k->value.kind() != Value::Kind::Int) continue;
          auto a = linear(e->args[1 - side]);
          if (!a || !a->other.empty()) break;
          std::int64_t f = k->value.as_int();
          for (auto& [v, x] : a->coef) x *= f;
          a->c *= f;
          return a;
        }
      }
      break;
    default: break;
  }
  l.other.push_back({1, e});
  return l;
}

CE add_term(CE acc, std::int64_t sign, CE term) {
  if (!acc) return sign > 0 ? term : ir::un("-", term);
  return ir::bin(sign > 0 ? "+" : "-", acc, term);
}

CE scaled_var(std::int64_t k, const std::string& v) {
  std::int64_t a = k < 0 ? -k : k;
  return a == 1 ? ir::var(v) : ir::bin("*", ir::integer(a), ir::var(v));
}

// ---------------------------------------------------------------- range elimination

CE range_step(const CE& cp) {
  const CExpr& c = *cp;
  const Quals& qs = c.quals;
  for (std::size_t r = 0; r < qs.size(); ++r) {
    const Qual& rq = qs[r];
    if (rq.kind != Qual::Kind::Gen || rq.pat.kind != Pattern::Kind::Var || rq.expr->kind != K::Range) continue;
    const std::string& i = rq.pat.name;
    std::size_t end = next_groupby(qs, r + 1);
    for (std::size_t g = r + 1; g < end; ++g) {
      const Qual& gq = qs[g];
      if (gq.kind != Qual::Kind::Gen || gq.expr->kind != K::Var || gq.pat.kind != Pattern::Kind::Tuple ||
          gq.pat.items.size() != 2)
        continue;
      std::vector<std::string> keyvars = gq.pat.items[0].vars();
      for (std::size_t ci = g + 1; ci < end; ++ci) {
        const Qual& cq = qs[ci];
        if (cq.kind != Qual::Kind::Cond || cq.expr->kind != K::BinOp || cq.expr->name != "==") continue;
        std::optional<AffineInverse> inv;
        for (int side = 0; side < 2 && !inv; ++side) {
          const CE& a = cq.expr->args[side];
          const CE& b = cq.expr->args[1 - side];
          if (a->kind != K::Var || std::find(keyvars.begin(), keyvars.end(), a->name) == keyvars.end()) continue;
          inv = invert_affine_index(a->name, *b, i);
        }
        if (!inv) continue;
        // Qualifiers between the range and the condition that depend on i move after it.
        std::set<std::string> moved_vars{i};
        std::vector<bool> moved(qs.size(), false);
        for (std::size_t k = r + 1; k < ci; ++k) {
          bool dep = false;
          if (qs[k].expr)
            for (const auto& v : free_vars(*qs[k].expr))
              if (moved_vars.count(v)) dep = true;
          if (!dep) continue;
          moved[k] = true;
          for (const auto& v : binders_of(qs[k])) moved_vars.insert(v);
        }
        if (moved[g]) continue;
        bool blocked = false;
        for (const auto& v : free_vars(*inv->value))
          if (v != i && moved_vars.count(v)) blocked = true;
        if (blocked) continue;
        Quals out(qs.begin(), qs.begin() + static_cast<long>(r));
        for (std::size_t k = r + 1; k < ci; ++k)
          if (!moved[k]) out.push_back(qs[k]);
        out.push_back(ir::let(Pattern::var(i), inv->value));
        out.push_back(ir::cond(ir::in_range(ir::var(i), rq.expr->args[0], rq.expr->args[1])));
        for (std::size_t k = r + 1; k < ci; ++k)
          if (moved[k]) out.push_back(qs[k]);
        out.insert(out.end(), qs.begin() + static_cast<long>(ci) + 1, qs.end());
        return with_quals(c, std::move(out));
      }
    }
  }
  return nullptr;
}

// ---------------------------------------------------------------- self joins

CE subst_names(const Pattern& p, const std::vector<std::string>& from, const std::vector<std::string>& to) {
  CE e = ir::pattern_expr(p);
  std::map<std::string, std::string> m;
  for (std::size_t i = 0; i < from.size(); ++i) m[from[i]] = to[i];
  std::function<CE(const CE&)> go = [&](const CE& x) -> CE {
    if (x->kind == K::Var) return ir::var(m.count(x->name) ? m[x->name] : x->name);
    std::vector<CE> items;
    for (const auto& a : x->args) items.push_back(go(a));
    return ir::tuple(items);
  };
  return go(e);
}


// (k2,v2) <- V, k2 = k1 where (k1,v1) <- V is already bound and V is key-unique:
// the second traversal can only meet the first element again.
CE self_join_step(const CE& cp, const std::set<std::string>& arrays) {
  const CExpr& c = *cp;
  const Quals& qs = c.quals;
  auto array_gen = [&](const Qual& q) {
    return q.kind == Qual::Kind::Gen && q.expr->kind == K::Var && arrays.count(q.expr->name) &&
           q.pat.kind == Pattern::Kind::Tuple && q.pat.items.size() == 2;
  };
  for (std::size_t g2 = 0; g2 < qs.size(); ++g2) {
    if (!array_gen(qs[g2])) continue;
    std::size_t seg = segment_start(qs, g2), end = next_groupby(qs, g2 + 1);
    for (std::size_t g1 = seg; g1 < g2; ++g1) {
      if (!array_gen(qs[g1]) || qs[g1].expr->name != qs[g2].expr->name) continue;
      std::vector<std::string> k1 = qs[g1].pat.items[0].vars(), k2 = qs[g2].pat.items[0].vars();
      if (k1.size() != k2.size() || !equal(*ir::pattern_expr(qs[g1].pat.items[0]),
                                           *subst_names(qs[g2].pat.items[0], k2, k1)))
        continue;
      std::vector<std::size_t> conds;
      for (std::size_t j = 0; j < k2.size(); ++j) {
        bool found = false;
        for (std::size_t ci = g2 + 1; ci < end && !found; ++ci) {
          const Qual& q = qs[ci];
          if (q.kind != Qual::Kind::Cond || q.expr->kind != K::BinOp || q.expr->name != "==") continue;
          const CE& a = q.expr->args[0];
          const CE& b = q.expr->args[1];
          if (a->kind != K::Var || b->kind != K::Var) continue;
          if ((a->name == k2[j] && b->name == k1[j]) || (a->name == k1[j] && b->name == k2[j])) {
            conds.push_back(ci);
            found = true;
          }
        }
        if (!found) break;
      }
      if (conds.size() != k2.size()) continue;
      Quals out;
      for (std::size_t k = 0; k < qs.size(); ++k) {
        if (std::find(conds.begin(), conds.end(), k) != conds.end()) continue;
        if (k == g2) {
          out.push_back(ir::let(qs[g2].pat.items[0], ir::pattern_expr(qs[g1].pat.items[0])));
          out.push_back(ir::let(qs[g2].pat.items[1], ir::pattern_expr(qs[g1].pat.items[1])));
          continue;
        }
        out.push_back(qs[k]);
      }
      return with_quals(c, std::move(out));
    }
  }
  return nullptr;
}

// ---------------------------------------------------------------- group-by rules

std::size_t first_groupby(const CExpr& c) { return next_groupby(c.quals, 0); }

CE groupby_key(const Qual& g) { return g.expr ? g.expr : ir::pattern_expr(g.pat); }

bool constant_key(const CExpr& c, std::size_t gi) {
  std::set<std::string> b1 = bound_in(c.quals, 0, gi);
  for (const auto& v : free_vars(*groupby_key(c.quals[gi])))
    if (b1.count(v)) return false;
  return true;
}

std::vector<std::string> lifted_vars(const CExpr& c, std::size_t gi) {
  std::vector<std::string> pv = c.quals[gi].pat.vars();
  std::set<std::string> pset(pv.begin(), pv.end());
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t k = 0; k < gi; ++k)
    for (const auto& v : binders_of(c.quals[k]))
      if (!pset.count(v) && seen.insert(v).second) out.push_back(v);
  return out;
}

// Substitutes var -> by in qs[from..] and head; stops at a rebinding.
void subst_tail(Quals& qs, std::size_t from, CE& head, const std::string& var, const CE& by) {
  for (std::size_t k = from; k < qs.size(); ++k) {
    if (qs[k].expr) qs[k].expr = subst(qs[k].expr, var, by);
    if (binds(qs[k], var)) return;
  }
  head = subst(head, var, by);
}

[[noreturn]] void not_applicable(const std::string& why) { throw Error("NotApplicable", why); }

}  // namespace

CE normalize(const CE& e) { return norm(e); }

std::optional<AffineInverse> invert_affine_index(const std::string& key, const CExpr& e, const std::string& index) {
  auto l = linear(std::make_shared<CExpr>(e));
  if (!l) return std::nullopt;
  auto it = l->coef.find(index);
  if (it == l->coef.end() || (it->second != 1 && it->second != -1)) return std::nullopt;
  for (const auto& o : l->other)
    if (mentions(*o.second, index)) return std::nullopt;
  std::int64_t s = it->second;
  // index = s * (key - rest)
  CE acc = s > 0 ? ir::var(key) : nullptr;
  for (const auto& [v, k] : l->coef) {
    if (v == index || k == 0) continue;
    acc = add_term(acc, -s * k > 0 ? 1 : -1, scaled_var(k, v));
  }
  for (const auto& [sign, term] : l->other) acc = add_term(acc, -s * sign, term);
  if (s < 0) acc = add_term(acc, -1, ir::var(key));
  std::int64_t c = -s * l->c;
  if (c != 0) {
    if (!acc) {
      acc = ir::integer(c);
    } else {
      acc = ir::bin(c > 0 ? "+" : "-", acc, ir::integer(c > 0 ? c : -c));
    }
  }
  if (!acc) acc = ir::integer(0);
  return AffineInverse{index, acc};
}

CE eliminate_range_iteration(const CE& e) {
  return map_comps(e, [](const CE& c) {
    CE cur = c;
    for (int guard = 0; guard < 1000; ++guard) {
      CE next = range_step(cur);
      if (!next) break;
      cur = next;
    }
    return cur;
  });
}

CE eliminate_self_joins(const CE& e, const std::set<std::string>& arrays) {
  return map_comps(e, [&](const CE& c) {
    CE cur = c;
    for (int guard = 0; guard < 1000; ++guard) {
      CE next = self_join_step(cur, arrays);
      if (!next) break;
      cur = next;
    }
    return cur;
  });
}

CE eliminate_constant_key_groupby(const CE& cp) {
  if (cp->kind != K::Comp) not_applicable("not a comprehension");
  const CExpr& c = *cp;
  std::size_t gi = first_groupby(c);
  if (gi == c.quals.size()) not_applicable("no group-by");
  if (!constant_key(c, gi)) not_applicable("group-by key is not constant");
  const Qual& g = c.quals[gi];
  Quals q1(c.quals.begin(), c.quals.begin() + static_cast<long>(gi));
  Quals rest(c.quals.begin() + static_cast<long>(gi) + 1, c.quals.end());
  CE head = c.args[0];
  std::vector<std::string> lifted;
  for (const auto& v : lifted_vars(c, gi))
    if (used_after(rest, 0, *head, v)) lifted.push_back(v);
  bool lets_only = std::all_of(q1.begin(), q1.end(), [](const Qual& q) { return q.kind == Qual::Kind::Let; });
  Quals out;
  if (lets_only) {
    out = q1;
    out.push_back(ir::let(g.pat, groupby_key(g)));
    for (const auto& v : lifted) subst_tail(rest, 0, head, v, ir::bag({ir::var(v)}));
  } else {
    out.push_back(ir::let(g.pat, groupby_key(g)));
    std::vector<std::string> names;
    for (const auto& v : lifted) {
      std::string n = fresh_name(v);
      out.push_back(ir::let(Pattern::var(n), rename_bound(ir::comp(ir::var(v), q1))));
      names.push_back(n);
      subst_tail(rest, 0, head, v, ir::var(n));
    }
    // Without a binding before the group-by there is no group at all.
    if (names.empty()) {
      std::string n = fresh_name("g");
      out.push_back(ir::let(Pattern::var(n), rename_bound(ir::comp(ir::tuple({}), q1))));
      names.push_back(n);
    }
    out.push_back(ir::cond(ir::non_empty(ir::var(names[0]))));
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return ir::comp(head, std::move(out));
}

bool infer_unique_key(const CExpr& c, std::size_t gi, const std::set<std::string>& arrays) {
  if (c.kind != K::Comp || gi >= c.quals.size() || c.quals[gi].kind != Qual::Kind::GroupBy) return false;
  if (constant_key(c, gi)) return false;
  std::map<std::string, std::string> parent;
  std::function<std::string(const std::string&)> find = [&](const std::string& x) -> std::string {
    auto it = parent.find(x);
    if (it == parent.end() || it->second == x) return x;
    return it->second = find(it->second);
  };
  auto unite = [&](const std::string& a, const std::string& b) { parent[find(a)] = find(b); };
  std::vector<std::string> index_vars;
  for (std::size_t k = 0; k < gi; ++k) {
    const Qual& q = c.quals[k];
    switch (q.kind) {
      case Qual::Kind::Gen:
        if (q.expr->kind == K::Range && q.pat.kind == Pattern::Kind::Var) {
          index_vars.push_back(q.pat.name);
        } else if (q.expr->kind == K::Var && arrays.count(q.expr->name) && q.pat.kind == Pattern::Kind::Tuple &&
                   q.pat.items.size() == 2) {
          for (const auto& v : q.pat.items[0].vars()) index_vars.push_back(v);
        } else {
          return false;
        }
        break;
      case Qual::Kind::OptGen:
      case Qual::Kind::GroupBy: return false;
      case Qual::Kind::Let:
        if (q.pat.kind == Pattern::Kind::Var && q.expr->kind == K::Var) unite(q.pat.name, q.expr->name);
        break;
      case Qual::Kind::Cond:
        if (q.expr->kind == K::BinOp && q.expr->name == "==" && q.expr->args[0]->kind == K::Var &&
            q.expr->args[1]->kind == K::Var)
          unite(q.expr->args[0]->name, q.expr->args[1]->name);
        break;
    }
  }
  CE key = groupby_key(c.quals[gi]);
  std::vector<CE> comps = key->kind == K::Tuple ? key->args : std::vector<CE>{key};
  std::set<std::string> covered;
  for (const auto& x : comps) {
    auto l = linear(x);
    if (!l || !l->other.empty()) continue;
    std::vector<std::string> vs;
    for (const auto& [v, k] : l->coef)
      if (k != 0) vs.push_back(v);
    if (vs.size() == 1 && (l->coef[vs[0]] == 1 || l->coef[vs[0]] == -1)) covered.insert(find(vs[0]));
  }
  for (const auto& v : index_vars)
    if (!covered.count(find(v))) return false;
  return true;
}

CE eliminate_unique_key_groupby(const CE& cp, const std::set<std::string>& arrays) {
  if (cp->kind != K::Comp) not_applicable("not a comprehension");
  const CExpr& c = *cp;
  std::size_t gi = first_groupby(c);
  if (gi == c.quals.size()) not_applicable("no group-by");
  if (!infer_unique_key(c, gi, arrays)) not_applicable("group-by key is not provably unique");
  const Qual& g = c.quals[gi];
  Quals out(c.quals.begin(), c.quals.begin() + static_cast<long>(gi));
  Quals rest(c.quals.begin() + static_cast<long>(gi) + 1, c.quals.end());
  CE head = c.args[0];
  for (const auto& v : lifted_vars(c, gi)) subst_tail(rest, 0, head, v, ir::bag({ir::var(v)}));
  if (g.expr) out.push_back(ir::let(g.pat, g.expr));
  out.insert(out.end(), rest.begin(), rest.end());
  return normalize(ir::comp(head, std::move(out)));
}

CE optimize(const CE& e, const std::set<std::string>& arrays) {
  CE cur = normalize(e);
  std::string last = canonical(*cur);
  for (int round = 0; round < 10; ++round) {
    CE next = normalize(eliminate_range_iteration(cur));
    next = normalize(eliminate_self_joins(next, arrays));
    next = map_comps(next, [&](const CE& c) {
      try {
        return eliminate_constant_key_groupby(c);
      } catch (const Error&) {
      }
      try {
        return eliminate_unique_key_groupby(c, arrays);
      } catch (const Error&) {
      }
      return c;
    });
    next = normalize(next);
    std::string now = canonical(*next);
    cur = next;
    if (now == last) break;
    last = now;
  }
  return cur;
}

}  // namespace l2b
