#include "loop2bulk/analysis.hpp"

#include <algorithm>

#include "loop2bulk/frontend.hpp"

namespace l2b {

namespace {

class Collector {
 public:
  AccessSets sets;

  explicit Collector(const std::vector<std::string>& outer) : context_(outer) {
    for (const auto& i : outer) indexes_.insert(i);
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Assign:
        index_reads(*s.dest, s);
        expr(*s.e1, s);
        add(sets.writers, s.dest, s);
        return;
      case Stmt::Kind::IncrUpdate:
        index_reads(*s.dest, s);
        expr(*s.e1, s);
        add(sets.aggregators, s.dest, s);
        return;
      case Stmt::Kind::VarDecl:
        expr(*s.e1, s);
        add(sets.writers, dvar(s.var, s.loc), s);
        return;
      case Stmt::Kind::ForRange:
      case Stmt::Kind::ForIn:
        expr(*s.e1, s);
        if (s.e2) expr(*s.e2, s);
        context_.push_back(s.var);
        indexes_.insert(s.var);
        child(s, 0, *s.body);
        context_.pop_back();
        return;
      case Stmt::Kind::While:
      case Stmt::Kind::If:
        expr(*s.e1, s);
        child(s, 0, *s.body);
        if (s.other) child(s, 1, *s.other);
        return;
      case Stmt::Kind::Block:
        for (std::size_t i = 0; i < s.stmts.size(); ++i) child(s, static_cast<int>(i), *s.stmts[i]);
        return;
    }
  }

 private:
  std::vector<std::string> context_;
  std::set<std::string> indexes_;
  std::vector<std::pair<const Stmt*, int>> path_;

  void child(const Stmt& parent, int slot, const Stmt& c) {
    path_.push_back({&parent, slot});
    stmt(c);
    path_.pop_back();
  }

  void add(std::vector<DestOccurrence>& into, DestPtr d, const Stmt& s) {
    if (d->kind == Dest::Kind::Var && indexes_.count(d->name)) return;
    DestOccurrence o;
    o.loc = d->loc.line ? d->loc : s.loc;
    o.dest = std::move(d);
    o.context = context_;
    o.stmt = &s;
    o.path = path_;
    into.push_back(std::move(o));
  }

  void index_reads(const Dest& d, const Stmt& s) {
    if (d.kind == Dest::Kind::Proj) index_reads(*d.base, s);
    for (const auto& e : d.indexes) expr(*e, s);
  }

  void expr(const Expr& e, const Stmt& s) {
    if (e.kind == Expr::Kind::DestRef) {
      index_reads(*e.dest, s);
      add(sets.readers, e.dest, s);
      return;
    }
    for (const auto& a : e.args) expr(*a, s);
  }
};

void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (e.kind == Expr::Kind::DestRef) {
    const Dest* d = e.dest.get();
    while (d->kind == Dest::Kind::Proj) d = d->base.get();
    if (d->kind == Dest::Kind::Var) out.insert(d->name);
    for (const auto& i : d->indexes) collect_vars(*i, out);
    return;
  }
  for (const auto& a : e.args) collect_vars(*a, out);
}

// Field path above the Var/Index base, and the base itself.
const Dest& base_of(const Dest& d, std::vector<std::string>& path) {
  if (d.kind == Dest::Kind::Proj) {
    const Dest& b = base_of(*d.base, path);
    path.push_back(d.name);
    return b;
  }
  return d;
}

bool prefix_compatible(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t n = std::min(a.size(), b.size());
  return std::equal(a.begin(), a.begin() + static_cast<long>(n), b.begin());
}

// Conflict test for rule R2: overlap, extended so that
// a read of a projection conflicts with a write of its base and vice versa.
bool conflicts(const Dest& d1, const Dest& d2) {
  if (overlap(d1, d2)) return true;
  std::vector<std::string> p1, p2;
  const Dest& b1 = base_of(d1, p1);
  const Dest& b2 = base_of(d2, p2);
  return b1.name == b2.name && prefix_compatible(p1, p2);
}

// d1 = d2 where the deeper destination is cut to the depth of d1.
bool same_location(const Dest& d1, const Dest& d2) {
  std::vector<std::string> p1, p2;
  base_of(d1, p1);
  base_of(d2, p2);
  if (p2.size() < p1.size()) return false;
  const Dest* cut = &d2;
  for (std::size_t k = p2.size(); k > p1.size(); --k) cut = cut->base.get();
  return equal(d1, *cut);
}

bool precedes(const DestOccurrence& a, const DestOccurrence& b) {
  std::size_t n = std::min(a.path.size(), b.path.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (a.path[k] == b.path[k]) continue;
    if (a.path[k].first != b.path[k].first) return false;
    return a.path[k].first->kind == Stmt::Kind::Block && a.path[k].second < b.path[k].second;
  }
  return false;
}

std::string set_str(const std::set<std::string>& s) {
  std::string out = "{";
  for (const auto& x : s) out += (out.size() > 1 ? "," : "") + x;
  return out + "}";
}

}  // namespace

AccessSets access_sets(const Stmt& s, const std::vector<std::string>& outer_indexes) {
  Collector c(outer_indexes);
  c.stmt(s);
  return std::move(c.sets);
}

bool overlap(const Dest& d1, const Dest& d2) {
  if (d1.kind == Dest::Kind::Var && d2.kind == Dest::Kind::Var) return d1.name == d2.name;
  if (d1.kind == Dest::Kind::Proj && d2.kind == Dest::Kind::Proj)
    return d1.name == d2.name && overlap(*d1.base, *d2.base);
  if (d1.kind == Dest::Kind::Index && d2.kind == Dest::Kind::Index) return d1.name == d2.name;
  return false;
}

std::optional<AffineExpr> affine_form(const Expr& e, const std::set<std::string>& indexes) {
  switch (e.kind) {
    case Expr::Kind::Const:
      if (e.value.kind() != Value::Kind::Int) return std::nullopt;
      return AffineExpr{e.value.as_int(), {}};
    case Expr::Kind::DestRef:
      if (e.dest->kind == Dest::Kind::Var && indexes.count(e.dest->name))
        return AffineExpr{0, {{e.dest->name, 1}}};
      return std::nullopt;
    case Expr::Kind::UnOp: {
      if (e.op != "-") return std::nullopt;
      auto a = affine_form(*e.args[0], indexes);
      if (!a) return a;
      a->c0 = -a->c0;
      for (auto& [k, c] : a->terms) c = -c;
      return a;
    }
    case Expr::Kind::BinOp: {
      auto a = affine_form(*e.args[0], indexes);
      auto b = affine_form(*e.args[1], indexes);
      if (!a || !b) return std::nullopt;
      if (e.op == "+" || e.op == "-") {
        std::int64_t sign = e.op == "+" ? 1 : -1;
        a->c0 += sign * b->c0;
        for (const auto& [k, c] : b->terms) {
          a->terms[k] += sign * c;
          if (a->terms[k] == 0) a->terms.erase(k);
        }
        return a;
      }
      if (e.op == "*") {
        if (!a->terms.empty() && !b->terms.empty()) return std::nullopt;
        if (a->terms.empty()) std::swap(a, b);
        std::int64_t f = b->c0;
        a->c0 *= f;
        for (auto it = a->terms.begin(); it != a->terms.end();) {
          it->second *= f;
          it = it->second == 0 ? a->terms.erase(it) : std::next(it);
        }
        return a;
      }
      return std::nullopt;
    }
    default: return std::nullopt;
  }
}

bool is_affine_dest(const Dest& d, const std::vector<std::string>& context) {
  switch (d.kind) {
    case Dest::Kind::Var: return context.empty();
    case Dest::Kind::Proj: return is_affine_dest(*d.base, context);
    case Dest::Kind::Index: {
      std::set<std::string> ctx(context.begin(), context.end());
      std::set<std::string> used;
      for (const auto& e : d.indexes) {
        auto a = affine_form(*e, ctx);
        if (!a) return false;
        for (const auto& [k, c] : a->terms) used.insert(k);
      }
      return used == ctx;
    }
  }
  return false;
}

std::set<std::string> dest_indexes(const Dest& d, const std::set<std::string>& known) {
  std::set<std::string> vars;
  const Dest* b = &d;
  while (b->kind == Dest::Kind::Proj) b = b->base.get();
  for (const auto& e : b->indexes) collect_vars(*e, vars);
  std::set<std::string> out;
  for (const auto& v : vars)
    if (known.count(v)) out.insert(v);
  return out;
}

std::string Diagnostics::str() const {
  std::string out;
  for (const auto& v : violations) {
    std::string at = v.locations.empty() ? "?" : v.locations[0].str();
    out += "RULE " + v.rule + " at " + at + ": " + v.message + "\n";
  }
  return out;
}

bool Diagnostics::cites(const std::string& rule) const {
  for (const auto& v : violations)
    if (v.rule == rule) return true;
  return false;
}

Diagnostics check_parallelizable(const Stmt& loop) {
  Diagnostics diag;
  AccessSets sets = access_sets(loop);
  auto report = [&](std::string rule, std::string msg, std::vector<SrcLoc> locs) {
    for (const auto& v : diag.violations)
      if (v.rule == rule && v.message == msg) return;
    diag.violations.push_back({std::move(rule), std::move(msg), std::move(locs)});
  };

  for (const auto& w : sets.writers) {
    if (!is_affine_dest(*w.dest, w.context)) {
      std::set<std::string> ctx(w.context.begin(), w.context.end());
      report("R1",
             "destination " + unparse(*w.dest) + " of a non-incremental update is not affine in " +
                 set_str(ctx),
             {w.loc});
    }
  }

  auto check_pair = [&](const DestOccurrence& d1, bool aggregator, const DestOccurrence& d2) {
    if (!conflicts(*d1.dest, *d2.dest)) return;
    bool same = same_location(*d1.dest, *d2.dest);
    std::string what = unparse(*d1.dest) + " (" + (aggregator ? "incremented" : "written") +
                       " at " + d1.loc.str() + ") and " + unparse(*d2.dest) + " (read at " +
                       d2.loc.str() + ")";
    if (!aggregator) {
      if (same && (precedes(d1, d2) || d1.stmt == d2.stmt)) return;
      report(same ? "R2a" : "R2", "dependence between " + what, {d2.loc, d1.loc});
      return;
    }
    std::set<std::string> c1(d1.context.begin(), d1.context.end());
    std::set<std::string> c2(d2.context.begin(), d2.context.end());
    std::set<std::string> inter;
    std::set_intersection(c1.begin(), c1.end(), c2.begin(), c2.end(),
                          std::inserter(inter, inter.begin()));
    std::set<std::string> known = c1;
    known.insert(c2.begin(), c2.end());
    if (same && precedes(d1, d2) && is_affine_dest(*d2.dest, d2.context) &&
        inter == dest_indexes(*d1.dest, known))
      return;
    report(same ? "R2b" : "R2", "dependence between " + what, {d2.loc, d1.loc});
  };

  for (const auto& r : sets.readers) {
    for (const auto& w : sets.writers) check_pair(w, false, r);
    for (const auto& a : sets.aggregators) check_pair(a, true, r);
  }
  std::stable_sort(diag.violations.begin(), diag.violations.end(),
                   [](const Violation& a, const Violation& b) {
                     const SrcLoc& x = a.locations[0];
                     const SrcLoc& y = b.locations[0];
                     return x.line != y.line ? x.line < y.line : x.col < y.col;
                   });
  diag.accepted = diag.violations.empty();
  return diag;
}

bool contains_while(const Stmt& s) {
  if (s.kind == Stmt::Kind::While) return true;
  if (s.body && contains_while(*s.body)) return true;
  if (s.other && contains_while(*s.other)) return true;
  for (const auto& c : s.stmts)
    if (contains_while(*c)) return true;
  return false;
}

namespace {

void check_walk(const Stmt& s, Diagnostics& out) {
  switch (s.kind) {
    case Stmt::Kind::ForRange:
    case Stmt::Kind::ForIn:
      if (contains_while(s)) {
        check_walk(*s.body, out);
        return;
      }
      {
        Diagnostics d = check_parallelizable(s);
        for (auto& v : d.violations) out.violations.push_back(std::move(v));
      }
      return;
    case Stmt::Kind::While:
    case Stmt::Kind::If:
      check_walk(*s.body, out);
      if (s.other) check_walk(*s.other, out);
      return;
    case Stmt::Kind::Block:
      for (const auto& c : s.stmts) check_walk(*c, out);
      return;
    default: return;
  }
}

StmtPtr with_body(const Stmt& loop, StmtPtr body) {
  auto s = std::make_shared<Stmt>(loop);
  s->body = std::move(body);
  return s;
}

StmtPtr distribute_parallel(const StmtPtr& s) {
  if (s->kind != Stmt::Kind::ForRange && s->kind != Stmt::Kind::ForIn) {
    if (s->kind != Stmt::Kind::Block) return s;
    std::vector<StmtPtr> parts;
    for (const auto& c : s->stmts) parts.push_back(distribute_parallel(c));
    return s_block(std::move(parts), s->loc);
  }
  StmtPtr body = distribute_parallel(s->body);
  if (body->kind != Stmt::Kind::Block) return with_body(*s, body);
  std::vector<StmtPtr> flat;
  for (const auto& c : body->stmts) {
    if (c->kind == Stmt::Kind::Block)
      flat.insert(flat.end(), c->stmts.begin(), c->stmts.end());
    else
      flat.push_back(c);
  }
  if (flat.size() == 1) return with_body(*s, flat[0]);
  std::vector<StmtPtr> loops;
  for (const auto& c : flat) loops.push_back(with_body(*s, c));
  return s_block(std::move(loops), s->loc);
}

}  // namespace

Diagnostics check_program(const SourceProgram& p) {
  Diagnostics d;
  for (const auto& s : p.body) check_walk(*s, d);
  d.accepted = d.violations.empty();
  return d;
}

StmtPtr distribute_loops(const StmtPtr& s) {
  switch (s->kind) {
    case Stmt::Kind::ForRange:
    case Stmt::Kind::ForIn: {
      if (contains_while(*s)) return s;
      Diagnostics d = check_parallelizable(*s);
      if (!d.accepted) throw Error("NotAffine", d.str());
      return distribute_parallel(s);
    }
    case Stmt::Kind::If: {
      auto c = std::make_shared<Stmt>(*s);
      c->body = distribute_loops(s->body);
      if (s->other) c->other = distribute_loops(s->other);
      return c;
    }
    case Stmt::Kind::Block: {
      std::vector<StmtPtr> parts;
      for (const auto& c : s->stmts) parts.push_back(distribute_loops(c));
      return s_block(std::move(parts), s->loc);
    }
    default: return s;
  }
}

SourceProgram distribute_program(const SourceProgram& p) {
  SourceProgram out = p;
  for (auto& s : out.body) s = distribute_loops(s);
  return out;
}

}  // namespace l2b
