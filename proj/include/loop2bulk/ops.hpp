#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "loop2bulk/value.hpp"

namespace l2b {

// Binary operators shared by the source language, the IR and the runtime.
// An Absent operand yields the other operand, so `w ⊕ x` with a missing
// destination value reduces to `x`.
Value apply_binop(const std::string& op, const Value& a, const Value& b);
Value apply_unop(const std::string& op, const Value& a);
bool is_binop(const std::string& op);

bool is_builtin_function(const std::string& name);
Value call_builtin(const std::string& name, const ValueList& args);

// A commutative, associative reducer usable in `d ⊕= e` and in `⊕/bag`.
struct CommOp {
  std::string name;
  std::optional<Value> unit;
  std::function<Value(const Value&, const Value&)> impl;
};

// Builtins: + * min max && || ^ (argmin) ^^ (avg).
const CommOp* find_reducer(const std::string& name);
// Checks commutativity, associativity and the unit on all pairs/triples of
// `samples` (loose numeric equality up to 1e-9 relative). On failure `why`
// names the broken law.
bool reducer_laws_hold(const CommOp& op, const ValueList& samples, std::string* why = nullptr);
// Registers a user reducer. Replaces an existing entry with the same name.
// With samples, throws NotCommutative when reducer_laws_hold fails.
void register_reducer(CommOp op, const ValueList& samples = {});
std::vector<std::string> reducer_names();

// Fold of a bag; empty bag gives the unit, or Absent when there is none.
Value reduce_bag(const CommOp& op, const ValueList& items);

}  // namespace l2b
