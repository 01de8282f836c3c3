#include "loop2bulk/ast.hpp"

namespace l2b {

std::string Type::str() const {
  auto join = [&](const char* open, const char* close) {
    std::string s = open;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) s += ",";
      if (kind == Kind::Record) s += fields[i] + ":";
      s += args[i]->str();
    }
    return s + close;
  };
  if (!alias.empty()) return alias;
  switch (kind) {
    case Kind::Int: return "Int";
    case Kind::Double: return "Double";
    case Kind::Bool: return "Bool";
    case Kind::String: return "String";
    case Kind::Tuple: return join("(", ")");
    case Kind::Record: return join("<", ">");
    case Kind::Vector: return join("vector[", "]");
    case Kind::Matrix: return join("matrix[", "]");
    case Kind::Map: return join("map[", "]");
  }
  return "?";
}

TypePtr make_type(Type::Kind k, std::vector<TypePtr> args) {
  auto t = std::make_shared<Type>();
  t->kind = k;
  t->args = std::move(args);
  return t;
}

DestPtr dvar(std::string name, SrcLoc loc) {
  auto d = std::make_shared<Dest>();
  d->kind = Dest::Kind::Var;
  d->name = std::move(name);
  d->loc = loc;
  return d;
}

DestPtr dproj(DestPtr base, std::string field, SrcLoc loc) {
  auto d = std::make_shared<Dest>();
  d->kind = Dest::Kind::Proj;
  d->base = std::move(base);
  d->name = std::move(field);
  d->loc = loc;
  return d;
}

DestPtr dindex(std::string array, std::vector<ExprPtr> idx, SrcLoc loc) {
  auto d = std::make_shared<Dest>();
  d->kind = Dest::Kind::Index;
  d->name = std::move(array);
  d->indexes = std::move(idx);
  d->loc = loc;
  return d;
}

namespace {
std::shared_ptr<Expr> mk(Expr::Kind k) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  return e;
}
}  // namespace

ExprPtr eref(DestPtr d) {
  auto e = mk(Expr::Kind::DestRef);
  e->loc = d->loc;
  e->dest = std::move(d);
  return e;
}

ExprPtr evar(std::string name) { return eref(dvar(std::move(name))); }

ExprPtr efield(ExprPtr base, std::string field) {
  auto e = mk(Expr::Kind::Field);
  e->op = std::move(field);
  e->args = {std::move(base)};
  return e;
}

ExprPtr ebin(std::string op, ExprPtr a, ExprPtr b) {
  auto e = mk(Expr::Kind::BinOp);
  e->op = std::move(op);
  e->args = {std::move(a), std::move(b)};
  return e;
}

ExprPtr eun(std::string op, ExprPtr a) {
  auto e = mk(Expr::Kind::UnOp);
  e->op = std::move(op);
  e->args = {std::move(a)};
  return e;
}

ExprPtr etuple(std::vector<ExprPtr> items) {
  auto e = mk(Expr::Kind::Tuple);
  e->args = std::move(items);
  return e;
}

ExprPtr erecord(std::vector<std::string> names, std::vector<ExprPtr> values) {
  auto e = mk(Expr::Kind::Record);
  e->fields = std::move(names);
  e->args = std::move(values);
  return e;
}

ExprPtr econst(Value v) {
  auto e = mk(Expr::Kind::Const);
  e->value = std::move(v);
  return e;
}

ExprPtr eint(std::int64_t v) { return econst(Value::integer(v)); }

ExprPtr ecall(std::string name, std::vector<ExprPtr> args) {
  auto e = mk(Expr::Kind::Call);
  e->op = std::move(name);
  e->args = std::move(args);
  return e;
}

ExprPtr eempty(std::string ctor) {
  auto e = mk(Expr::Kind::EmptyColl);
  e->op = std::move(ctor);
  return e;
}

namespace {
std::shared_ptr<Stmt> mks(Stmt::Kind k, SrcLoc loc) {
  auto s = std::make_shared<Stmt>();
  s->kind = k;
  s->loc = loc;
  return s;
}
}  // namespace

StmtPtr s_incr(DestPtr d, std::string op, ExprPtr e, SrcLoc loc) {
  auto s = mks(Stmt::Kind::IncrUpdate, loc);
  s->dest = std::move(d);
  s->op = std::move(op);
  s->e1 = std::move(e);
  return s;
}

StmtPtr s_assign(DestPtr d, ExprPtr e, SrcLoc loc) {
  auto s = mks(Stmt::Kind::Assign, loc);
  s->dest = std::move(d);
  s->e1 = std::move(e);
  return s;
}

StmtPtr s_var(std::string name, TypePtr t, ExprPtr init, SrcLoc loc) {
  auto s = mks(Stmt::Kind::VarDecl, loc);
  s->var = std::move(name);
  s->type = std::move(t);
  s->e1 = std::move(init);
  return s;
}

StmtPtr s_for(std::string idx, ExprPtr lo, ExprPtr hi, StmtPtr body, SrcLoc loc) {
  auto s = mks(Stmt::Kind::ForRange, loc);
  s->var = std::move(idx);
  s->e1 = std::move(lo);
  s->e2 = std::move(hi);
  s->body = std::move(body);
  return s;
}

StmtPtr s_forin(std::string v, ExprPtr coll, StmtPtr body, SrcLoc loc) {
  auto s = mks(Stmt::Kind::ForIn, loc);
  s->var = std::move(v);
  s->e1 = std::move(coll);
  s->body = std::move(body);
  return s;
}

StmtPtr s_while(ExprPtr cond, StmtPtr body, SrcLoc loc) {
  auto s = mks(Stmt::Kind::While, loc);
  s->e1 = std::move(cond);
  s->body = std::move(body);
  return s;
}

StmtPtr s_if(ExprPtr cond, StmtPtr then, StmtPtr els, SrcLoc loc) {
  auto s = mks(Stmt::Kind::If, loc);
  s->e1 = std::move(cond);
  s->body = std::move(then);
  s->other = std::move(els);
  return s;
}

StmtPtr s_block(std::vector<StmtPtr> stmts, SrcLoc loc) {
  auto s = mks(Stmt::Kind::Block, loc);
  s->stmts = std::move(stmts);
  return s;
}

std::vector<StmtPtr> SourceProgram::declarations() const {
  std::vector<StmtPtr> out;
  std::vector<StmtPtr> todo(body.rbegin(), body.rend());
  while (!todo.empty()) {
    StmtPtr s = todo.back();
    todo.pop_back();
    if (!s) continue;
    if (s->kind == Stmt::Kind::VarDecl) out.push_back(s);
    for (auto it = s->stmts.rbegin(); it != s->stmts.rend(); ++it) todo.push_back(*it);
    if (s->other) todo.push_back(s->other);
    if (s->body) todo.push_back(s->body);
  }
  return out;
}

bool SourceProgram::is_collection(const std::string& var) const {
  auto it = types.find(var);
  return it != types.end() && it->second->is_collection();
}

namespace {

template <class T>
bool eq_ptr(const std::shared_ptr<const T>& a, const std::shared_ptr<const T>& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

template <class T>
bool eq_list(const std::vector<std::shared_ptr<const T>>& a,
             const std::vector<std::shared_ptr<const T>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!eq_ptr(a[i], b[i])) return false;
  return true;
}

bool eq_type(const TypePtr& a, const TypePtr& b) {
  if (!a || !b) return !a && !b;
  return a->str() == b->str();
}

}  // namespace

bool equal(const Dest& a, const Dest& b) {
  return a.kind == b.kind && a.name == b.name && eq_ptr(a.base, b.base) &&
         eq_list(a.indexes, b.indexes);
}

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.op != b.op || a.fields != b.fields) return false;
  if (a.kind == Expr::Kind::Const &&
      (a.value.kind() != b.value.kind() || a.value != b.value))
    return false;
  return eq_ptr(a.dest, b.dest) && eq_list(a.args, b.args);
}

bool equal(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.op == b.op && a.var == b.var && eq_type(a.type, b.type) &&
         eq_ptr(a.dest, b.dest) && eq_ptr(a.e1, b.e1) && eq_ptr(a.e2, b.e2) &&
         eq_ptr(a.body, b.body) && eq_ptr(a.other, b.other) && eq_list(a.stmts, b.stmts);
}

bool equal(const SourceProgram& a, const SourceProgram& b) {
  if (a.inputs.size() != b.inputs.size()) return false;
  for (std::size_t i = 0; i < a.inputs.size(); ++i)
    if (a.inputs[i].name != b.inputs[i].name || !eq_type(a.inputs[i].type, b.inputs[i].type))
      return false;
  return eq_list(a.body, b.body);
}

}  // namespace l2b
