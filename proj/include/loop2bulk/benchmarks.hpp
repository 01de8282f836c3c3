#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loop2bulk/ast.hpp"
#include "loop2bulk/state.hpp"

namespace l2b {

// size: element count for flat datasets, matrix dimension for matrix
// programs, vertex count for pagerank, point count for kmeans. 0 picks the
// small default.
struct BenchmarkSpec {
  std::string name;
  std::int64_t size = 0;
  std::uint64_t seed = 1;
  std::int64_t num_steps = 1;
  double tolerance = 1e-9;
};

const std::vector<std::string>& benchmark_names();
bool is_benchmark(const std::string& name);
std::int64_t small_size(const std::string& name);

// LOOP2BULK_CORPUS if set, else the source tree's corpus/ directory.
std::string corpus_dir();
std::string read_file(const std::string& path);
std::string benchmark_path(const std::string& name);
SourceProgram load_benchmark(const std::string& name);

// Deterministic per spec.
Env generate_inputs(const BenchmarkSpec& spec);

// Shuffles the element order of every bag input.
Env permute_inputs(const Env& env, std::uint64_t seed);

}  // namespace l2b
