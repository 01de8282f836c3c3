#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "loop2bulk/ast.hpp"
#include "loop2bulk/ops.hpp"
#include "loop2bulk/planner.hpp"
#include "loop2bulk/state.hpp"
#include "loop2bulk/translator.hpp"

namespace l2b {

struct EngineConfig {
  int workers = 4;
  int partitions = 4;
  std::uint64_t seed = 0;  // data placement only; results do not depend on it
};

// Partitioned in-process bag engine. Stages run partition-parallel on a
// fixed worker pool; LOOP2BULK_WORKERS overrides cfg.workers. One caller at
// a time per engine.
class Engine {
 public:
  explicit Engine(EngineConfig cfg = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const EngineConfig& config() const;

  Value execute_plan(const PlanNode& p, const Env& env);
  // Scalars take the single element of a singleton bag; an empty bag leaves
  // the variable unchanged.
  Env execute_target(const Code& code, Env env);

  // Bag primitives.
  Value merge(const Value& x, const Value& y);
  Value group_by(const Value& pairs);
  Value reduce_by_key(const CommOp& op, const Value& pairs);
  Value join(const Value& x, const Value& y);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Value execute_plan(const PlanNode& p, const Env& env, const EngineConfig& cfg = {});
Env execute_target(const Code& code, const Env& env, const EngineConfig& cfg = {});

// Translate, execute, and keep only the declared variables.
Env run_program(const SourceProgram& p, const Env& inputs, const EngineConfig& cfg = {});

}  // namespace l2b
