#pragma once

#include <set>
#include <string>
#include <vector>

#include "loop2bulk/ast.hpp"
#include "loop2bulk/comp_ir.hpp"

namespace l2b {

struct TargetCode {
  enum class Kind { Assign, While, Block };
  Kind kind = Kind::Block;
  std::string var;   // Assign
  CE value;          // Assign value; While condition (a singleton bag)
  // Assign: the value is a bag holding the new variable value (scalars and
  // whole-collection replacement) rather than the collection itself.
  bool unwrap = false;
  std::vector<TargetCode> body;  // While, Block

  static TargetCode assign(std::string var, CE value, bool unwrap = false);
  static TargetCode loop(CE cond, std::vector<TargetCode> body);
  static TargetCode block(std::vector<TargetCode> body);
};

using Code = std::vector<TargetCode>;

std::string print(const Code& code, int indent = 0);

class Translator {
 public:
  explicit Translator(const SourceProgram& p);

  CE trans_expr(const Expr& e);
  // Key of the destination, as a bag of key values.
  CE dest_key(const Dest& d);
  // Current value of d at the key bound to the variables of `key`.
  CE dest_from_key(const Dest& d, const Pattern& key);
  // Pattern that binds a key of d: () for variables, one variable per index.
  Pattern key_pattern(const Dest& d);
  Code make_update(const Dest& d, const CE& x);
  Code trans_stmt(const Stmt& s, const std::vector<Qual>& quals);

 private:
  const SourceProgram& prog_;
  bool is_collection(const std::string& v) const;
  Code sequential_for(const Stmt& s);
  Code guarded_if(const Stmt& s);
};

// Names of the key-unique collections of the program.
std::set<std::string> array_vars(const SourceProgram& p);

struct TranslateOptions {
  bool optimize = true;
};

// Checks (NotAffine with diagnostics on rejection), distributes loops,
// translates and optimizes.
Code translate_program(const SourceProgram& p, const TranslateOptions& opt = {});

}  // namespace l2b
