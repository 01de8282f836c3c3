#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loop2bulk/state.hpp"
#include "loop2bulk/value.hpp"

namespace l2b {

struct Pattern {
  enum class Kind { Var, Tuple };
  Kind kind = Kind::Var;
  std::string name;
  std::vector<Pattern> items;

  static Pattern var(std::string n);
  static Pattern tuple(std::vector<Pattern> ps);
  void vars(std::vector<std::string>& out) const;
  std::vector<std::string> vars() const;
};

struct CExpr;
using CE = std::shared_ptr<const CExpr>;

struct Qual {
  // OptGen `p <-? e` binds every variable of p to Absent when e is empty.
  enum class Kind { Gen, OptGen, Let, Cond, GroupBy };
  Kind kind = Kind::Cond;
  Pattern pat;
  CE expr;  // domain, let value, predicate, or group-by key (null: key is the pattern)
};

struct CExpr {
  enum class Kind {
    Var, Const, Tuple, Record, Proj, BinOp, UnOp, Call, RecUpdate,
    Comp, Reduce, Merge, Range, InRange, BagLit, NonEmpty
  };
  Kind kind = Kind::Const;
  std::string name;              // Var, Proj field, operator, Call/Reduce name, RecUpdate field
  Value value;                   // Const
  std::vector<CE> args;          // operands; Comp head is args[0]
  std::vector<std::string> fields;  // Record
  std::vector<Qual> quals;       // Comp
};

namespace ir {
CE var(std::string n);
CE cnst(Value v);
CE integer(std::int64_t v);
CE boolean(bool b);
CE tuple(std::vector<CE> items);
CE record(std::vector<std::string> names, std::vector<CE> values);
CE proj(CE base, std::string field);
CE bin(std::string op, CE a, CE b);
CE un(std::string op, CE a);
CE call(std::string fn, std::vector<CE> args);
CE rec_update(CE base, std::string field, CE v);
CE comp(CE head, std::vector<Qual> quals);
CE reduce(std::string op, CE bag);
CE merge(CE x, CE y);
CE range(CE lo, CE hi);
CE in_range(CE x, CE lo, CE hi);
CE bag(std::vector<CE> items);
CE non_empty(CE bag);

Qual gen(Pattern p, CE domain);
Qual opt_gen(Pattern p, CE domain);
Qual let(Pattern p, CE value);
Qual cond(CE pred);
Qual group_by(Pattern p, CE key = nullptr);

// Pattern read back as an expression: x -> x, (a,b) -> (a,b).
CE pattern_expr(const Pattern& p);
}  // namespace ir

// Fresh variable names of the form `base$N`; `$` never occurs in source names.
std::string fresh_name(const std::string& base);
void reset_fresh_names();

std::string print(const CExpr& e);
std::string print(const Qual& q);
std::string print(const Pattern& p);
// Printing with bound variables renamed in binding order, so that two terms
// equal up to renaming print identically.
std::string canonical(const CExpr& e);
CE parse_ir(const std::string& text);

bool equal(const CExpr& a, const CExpr& b);
bool equal(const Pattern& a, const Pattern& b);

std::set<std::string> free_vars(const CExpr& e);
bool mentions(const CExpr& e, const std::string& var);
// Capture-avoiding only in the sense that substitution stops at rebinding;
// callers keep bound names unique.
CE subst(const CE& e, const std::string& var, const CE& by);
CE rename_bound(const CE& e);  // fresh names for every binder in e

// Naive direct evaluator. Variables resolve in the comprehension scope first,
// then in `globals`.
Value eval_ir(const CExpr& e, const Env& globals = {});
using Scope = std::vector<std::pair<std::string, Value>>;
Value eval_ir(const CExpr& e, const Env& globals, Scope& scope);
bool bind_pattern(const Pattern& p, const Value& v, Scope& scope);
// Runs qualifiers over a set of rows; a group-by lifts the variables bound
// at positions >= base.
std::vector<Scope> eval_quals(const std::vector<Qual>& quals, const Env& globals, std::vector<Scope> rows,
                              std::size_t base);
// X <| Y: pairs of X whose key is not in Y, then all of Y. DuplicateKey when
// either side repeats a key.
Value merge_bags(const Value& x, const Value& y);

// Rewrites. `arrays` names the key-unique key/value collections.
CE normalize(const CE& e);
CE eliminate_range_iteration(const CE& e);
CE eliminate_constant_key_groupby(const CE& c);  // throws NotApplicable
bool infer_unique_key(const CExpr& c, std::size_t groupby_index, const std::set<std::string>& arrays);
CE eliminate_unique_key_groupby(const CE& c, const std::set<std::string>& arrays);  // throws NotApplicable
CE eliminate_self_joins(const CE& e, const std::set<std::string>& arrays);
CE optimize(const CE& e, const std::set<std::string>& arrays);

struct AffineInverse {
  std::string index;  // the loop index being solved for
  CE value;           // expression for it in terms of the array key variable
};
// Solves `key = e` for the single loop index `index` when e = ±index + rest
// (rest free of index, affine in other variables). Unit coefficients only.
std::optional<AffineInverse> invert_affine_index(const std::string& key, const CExpr& e,
                                                 const std::string& index);

}  // namespace l2b
