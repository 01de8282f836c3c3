#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loop2bulk/ast.hpp"

namespace l2b {

struct DestOccurrence {
  DestPtr dest;
  std::vector<std::string> context;  // enclosing loop indexes, outermost first
  SrcLoc loc;
  const Stmt* stmt = nullptr;        // statement the occurrence belongs to
  std::vector<std::pair<const Stmt*, int>> path;  // (ancestor, child slot) from the root
};

struct AccessSets {
  std::vector<DestOccurrence> readers, writers, aggregators;
};

// Readers, writers and aggregators of s. Loop indexes bound inside s and the
// names in `outer_indexes` are not destinations.
AccessSets access_sets(const Stmt& s, const std::vector<std::string>& outer_indexes = {});

bool overlap(const Dest& d1, const Dest& d2);

struct AffineExpr {
  std::int64_t c0 = 0;
  std::map<std::string, std::int64_t> terms;  // index -> nonzero coefficient
  bool operator==(const AffineExpr& o) const { return c0 == o.c0 && terms == o.terms; }
};

std::optional<AffineExpr> affine_form(const Expr& e, const std::set<std::string>& indexes);
bool is_affine_dest(const Dest& d, const std::vector<std::string>& context);
// Loop indexes from `known` used anywhere in d's index expressions.
std::set<std::string> dest_indexes(const Dest& d, const std::set<std::string>& known);

struct Violation {
  std::string rule;  // R1, R2, R2a, R2b
  std::string message;
  std::vector<SrcLoc> locations;
};

struct Diagnostics {
  bool accepted = true;
  std::vector<Violation> violations;
  std::string str() const;  // "RULE <id> at <line:col>: <message>" lines
  bool cites(const std::string& rule) const;
};

Diagnostics check_parallelizable(const Stmt& loop);
// Checks every parallel for-loop of the program (for-loops that contain a
// while-loop are sequential and only their nested loops are checked).
Diagnostics check_program(const SourceProgram& p);

bool contains_while(const Stmt& s);

// Loop distribution (Theorem 1). Throws NotAffine on a rejected loop.
StmtPtr distribute_loops(const StmtPtr& s);
SourceProgram distribute_program(const SourceProgram& p);

}  // namespace l2b
