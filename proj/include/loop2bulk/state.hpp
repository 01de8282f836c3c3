#pragma once

#include <map>
#include <string>
#include <vector>

#include "loop2bulk/ast.hpp"
#include "loop2bulk/value.hpp"

namespace l2b {

// Variable name -> value. Scalars hold plain values; arrays hold a bag of
// (key, value) pairs where the key is an Int (vector), an (Int,Int) tuple
// (matrix) or any value (map).
using Env = std::map<std::string, Value>;

// Parses one value of type `t` from consecutive TSV columns starting at `pos`.
Value parse_columns(const Type& t, const std::vector<std::string>& cols, std::size_t& pos);
// Number of TSV columns a value of type `t` occupies.
std::size_t column_count(const Type& t);
void format_columns(const Type& t, const Value& v, std::vector<std::string>& out);

// Reads `<dir>/<name>.tsv` for every collection input and `<dir>/scalars.tsv`
// ("name<TAB>value") for scalar inputs.
Env load_inputs(const SourceProgram& p, const std::string& dir);
void write_inputs(const SourceProgram& p, const Env& env, const std::string& dir);

// Sorted "name<TAB>key<TAB>value" lines (scalars: "name<TAB>value").
std::string serialize_env(const Env& env);
// Sorted "key<TAB>value" lines for one variable.
std::string serialize_value(const Value& v, bool collection);

// Sorts a bag of (key, value) pairs by key.
Value sorted_bag(const Value& bag);

}  // namespace l2b
