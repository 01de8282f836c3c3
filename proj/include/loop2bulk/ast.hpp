#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "loop2bulk/value.hpp"

namespace l2b {

struct SrcLoc {
  int line = 0;
  int col = 0;
  std::string str() const { return std::to_string(line) + ":" + std::to_string(col); }
};

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  enum class Kind { Int, Double, Bool, String, Tuple, Record, Vector, Matrix, Map };
  Kind kind = Kind::Int;
  std::vector<TypePtr> args;        // tuple items, record field types, element/key types
  std::vector<std::string> fields;  // record field names
  std::string alias;                // ArgMin / Avg when declared by name

  bool is_collection() const {
    return kind == Kind::Vector || kind == Kind::Matrix || kind == Kind::Map;
  }
  // Number of index expressions an access takes.
  int dims() const { return kind == Kind::Matrix ? 2 : (is_collection() ? 1 : 0); }
  const TypePtr& element() const { return args.back(); }
  std::string str() const;
};

TypePtr make_type(Type::Kind k, std::vector<TypePtr> args = {});

struct Expr;
struct Dest;
using ExprPtr = std::shared_ptr<const Expr>;
using DestPtr = std::shared_ptr<const Dest>;

struct Dest {
  enum class Kind { Var, Proj, Index };
  Kind kind = Kind::Var;
  std::string name;  // variable, field, or array name
  DestPtr base;      // Proj
  std::vector<ExprPtr> indexes;
  SrcLoc loc;

  // Name of the variable at the root of the destination.
  const std::string& root() const { return kind == Kind::Proj ? base->root() : name; }
};

struct Expr {
  enum class Kind { DestRef, Field, BinOp, UnOp, Tuple, Record, Const, Call, EmptyColl };
  Kind kind = Kind::Const;
  DestPtr dest;                 // DestRef
  std::string op;               // BinOp/UnOp symbol, Field name, Call name, EmptyColl ctor
  std::vector<ExprPtr> args;    // operands, tuple items, call args, record values, Field base
  std::vector<std::string> fields;
  Value value;                  // Const
  SrcLoc loc;
};

DestPtr dvar(std::string name, SrcLoc loc = {});
DestPtr dproj(DestPtr base, std::string field, SrcLoc loc = {});
DestPtr dindex(std::string array, std::vector<ExprPtr> idx, SrcLoc loc = {});

ExprPtr eref(DestPtr d);
ExprPtr evar(std::string name);
ExprPtr efield(ExprPtr base, std::string field);
ExprPtr ebin(std::string op, ExprPtr a, ExprPtr b);
ExprPtr eun(std::string op, ExprPtr a);
ExprPtr etuple(std::vector<ExprPtr> items);
ExprPtr erecord(std::vector<std::string> names, std::vector<ExprPtr> values);
ExprPtr econst(Value v);
ExprPtr eint(std::int64_t v);
ExprPtr ecall(std::string name, std::vector<ExprPtr> args);
ExprPtr eempty(std::string ctor);

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
  enum class Kind { IncrUpdate, Assign, VarDecl, ForRange, ForIn, While, If, Block };
  Kind kind = Kind::Block;
  DestPtr dest;                 // IncrUpdate, Assign
  std::string op;               // IncrUpdate reducer name
  std::string var;              // VarDecl name, loop index, traversal variable
  TypePtr type;                 // VarDecl
  ExprPtr e1, e2;               // rhs/init/cond/lo/coll ; hi
  StmtPtr body, other;          // loop/then body ; else branch
  std::vector<StmtPtr> stmts;   // Block
  SrcLoc loc;
};

StmtPtr s_incr(DestPtr d, std::string op, ExprPtr e, SrcLoc loc = {});
StmtPtr s_assign(DestPtr d, ExprPtr e, SrcLoc loc = {});
StmtPtr s_var(std::string name, TypePtr t, ExprPtr init, SrcLoc loc = {});
StmtPtr s_for(std::string idx, ExprPtr lo, ExprPtr hi, StmtPtr body, SrcLoc loc = {});
StmtPtr s_forin(std::string v, ExprPtr coll, StmtPtr body, SrcLoc loc = {});
StmtPtr s_while(ExprPtr cond, StmtPtr body, SrcLoc loc = {});
StmtPtr s_if(ExprPtr cond, StmtPtr then, StmtPtr els = nullptr, SrcLoc loc = {});
StmtPtr s_block(std::vector<StmtPtr> stmts, SrcLoc loc = {});

struct InputDecl {
  std::string name;
  TypePtr type;
  SrcLoc loc;
};

struct SourceProgram {
  std::vector<InputDecl> inputs;
  std::vector<StmtPtr> body;
  std::map<std::string, TypePtr> types;  // every declared variable (inputs and vars)

  std::vector<StmtPtr> declarations() const;  // VarDecl statements, in order
  bool is_collection(const std::string& var) const;
};

// Structural equality, ignoring source locations.
bool equal(const Expr& a, const Expr& b);
bool equal(const Dest& a, const Dest& b);
bool equal(const Stmt& a, const Stmt& b);
bool equal(const SourceProgram& a, const SourceProgram& b);

}  // namespace l2b
