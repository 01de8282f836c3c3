#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "loop2bulk/comp_ir.hpp"

namespace l2b {

struct PlanNode;
using PlanPtr = std::shared_ptr<const PlanNode>;

// Row streams carry comprehension variable bindings; value streams carry the
// elements of a bag.
struct PlanNode {
  enum class Kind {
    Singleton,    // one empty row
    Source,       // rows: elements of global `name` matched against `pat`
    RangeSrc,     // rows: `pat` bound to lo..hi
    FlatMap,      // rows: `quals` run on each input row
    Join,         // rows: inputs[0] x inputs[1] on lkeys == rkeys
    CoGroup,      // rows: left-outer lookup; `pat` bound to `expr` of each match, or Absent
    GroupBy,      // rows: `pat` bound to the key, `lifted` bound to bags
    ReduceByKey,  // rows: `pat` bound to the key, `agg_names` to per-key folds
    Map,          // values: `expr` per input row
    Merge,        // values: inputs[0] <| inputs[1]
    Eval,         // values: closed expression `expr`
    Bind,         // values: inputs[1] with global `name` set to the value of inputs[0]
  };
  Kind kind = Kind::Singleton;
  std::vector<PlanPtr> inputs;
  std::string name;
  Pattern pat;
  std::vector<Qual> quals;
  CE expr;                          // Map head, Eval expr, CoGroup value, GroupBy key, RangeSrc lo
  CE expr2;                         // RangeSrc hi
  std::vector<CE> lkeys, rkeys;     // Join / CoGroup
  std::vector<std::string> lifted;  // GroupBy
  std::vector<std::string> agg_ops, agg_names;
  std::vector<CE> agg_args;         // ReduceByKey
  std::vector<std::string> schema;  // variables of each row (row streams)
  std::string note;                 // plan-quality warning

  bool is_rows() const { return kind != Kind::Map && kind != Kind::Merge && kind != Kind::Eval && kind != Kind::Bind; }
};

const char* kind_name(PlanNode::Kind k);

struct PlanOptions {
  // Equi-joins, lookups and reduceByKey. Off: generators after the first
  // run as nested loops and group-bys materialize groups.
  bool detect_joins = true;
};

// Lowers a target-code value to a plan. Free variables not bound by a
// comprehension are globals of the environment.
PlanPtr plan_expr(const CE& e, const PlanOptions& opt = {});

// Indented tree, one node per line.
std::string print(const PlanNode& p);
// Number of nodes of each kind, keyed by kind_name.
std::map<std::string, int> count_nodes(const PlanNode& p);
std::vector<std::string> plan_warnings(const PlanNode& p);

}  // namespace l2b
