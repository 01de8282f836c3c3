#pragma once

#include <string>
#include <vector>

#include "loop2bulk/ast.hpp"
#include "loop2bulk/state.hpp"

namespace l2b {

struct OracleOptions {
  // Raise IndexUnset on a read of an absent array key instead of skipping
  // the statement that performs it.
  bool strict_reads = false;
  // Run every for-loop iteration space backwards (while-loops unchanged).
  bool reverse_loops = false;
};

// Sequential reference interpreter. Ranges are inclusive; for-in visits
// entries in key order. Incremental updates on absent keys start from the
// new value. The result holds every declared variable.
Env eval_program(const SourceProgram& p, const Env& input, const OracleOptions& opt = {});

struct CompareReport {
  bool ok = true;
  std::vector<std::string> diffs;  // one line per mismatch
  std::string str() const;
};

// Numbers compare with |a-b| <= max(rel_tol*max(|a|,|b|), 1e-12); Int and
// Double compare numerically. Bags compare as multisets; key-value bags
// with unique keys compare per key.
bool values_close(const Value& a, const Value& b, double rel_tol);
CompareReport compare_states(const Env& a, const Env& b, double rel_tol = 1e-9);

}  // namespace l2b
