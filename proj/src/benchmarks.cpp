#include "loop2bulk/benchmarks.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "loop2bulk/frontend.hpp"

#ifndef L2B_CORPUS_DIR
#define L2B_CORPUS_DIR "corpus"
#endif

namespace l2b {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

std::int64_t pick(Rng& g, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(g);
}

Value ix(std::int64_t i) { return Value::integer(i); }
Value ix2(std::int64_t i, std::int64_t j) { return Value::tuple({ix(i), ix(j)}); }

// Random 4-letter strings; `distinct` of them form the vocabulary.
std::vector<std::string> vocabulary(Rng& g, std::size_t distinct) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < distinct) {
    std::string s(4, 'a');
    for (auto& c : s) c = static_cast<char>('a' + pick(g, 0, 25));
    if (seen.insert(s).second) out.push_back(s);
  }
  return out;
}

Value vector_of(const ValueList& xs) {
  ValueList kv;
  kv.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) kv.push_back(Value::pair(ix(static_cast<std::int64_t>(i)), xs[i]));
  return Value::bag(std::move(kv));
}

Value dense_matrix(Rng& g, std::int64_t rows, std::int64_t cols, double lo, double hi) {
  ValueList kv;
  for (std::int64_t i = 0; i < rows; ++i)
    for (std::int64_t j = 0; j < cols; ++j) kv.push_back(Value::pair(ix2(i, j), Value::real(uniform(g, lo, hi))));
  std::shuffle(kv.begin(), kv.end(), g);
  return Value::bag(std::move(kv));
}

ValueList strings(Rng& g, std::int64_t n, std::size_t distinct) {
  auto vocab = vocabulary(g, distinct);
  ValueList xs;
  for (std::int64_t i = 0; i < n; ++i)
    xs.push_back(Value::string(vocab[static_cast<std::size_t>(pick(g, 0, static_cast<std::int64_t>(distinct) - 1))]));
  return xs;
}

// Preferential attachment: half of the targets follow in-degree.
Value power_law_graph(Rng& g, std::int64_t n) {
  std::set<std::pair<std::int64_t, std::int64_t>> edges;
  std::vector<std::int64_t> targets;
  const std::size_t want = static_cast<std::size_t>(std::min(10 * n, n * (n - 1)));
  std::size_t attempts = 0;
  while (edges.size() < want && attempts++ < want * 50) {
    std::int64_t s = pick(g, 1, n);
    std::int64_t t = (targets.empty() || pick(g, 0, 1) == 0)
                         ? pick(g, 1, n)
                         : targets[static_cast<std::size_t>(pick(g, 0, static_cast<std::int64_t>(targets.size()) - 1))];
    if (s == t || !edges.insert({s, t}).second) continue;
    targets.push_back(t);
  }
  ValueList kv;
  for (const auto& [s, t] : edges) kv.push_back(Value::pair(ix2(s, t), Value::boolean(true)));
  return Value::bag(std::move(kv));
}

Value point(double x, double y) { return Value::tuple({Value::real(x), Value::real(y)}); }

}  // namespace

const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names = {
      "conditional-sum", "equal",         "string-match",    "word-count",
      "histogram",       "linear-regression", "group-by",    "matrix-add",
      "matrix-multiply", "pagerank",      "kmeans",          "matrix-factorization"};
  return names;
}

bool is_benchmark(const std::string& name) {
  const auto& n = benchmark_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

std::int64_t small_size(const std::string& name) {
  if (name == "matrix-add") return 24;
  if (name == "matrix-multiply") return 12;
  if (name == "pagerank") return 40;
  if (name == "kmeans") return 400;
  if (name == "matrix-factorization") return 16;
  return 1000;
}

std::string corpus_dir() {
  if (const char* env = std::getenv("LOOP2BULK_CORPUS")) return env;
  return L2B_CORPUS_DIR;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IOError", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string benchmark_path(const std::string& name) {
  return (std::filesystem::path(corpus_dir()) / (name + ".dbl")).string();
}

SourceProgram load_benchmark(const std::string& name) {
  if (!is_benchmark(name)) throw Error("UnknownBenchmark", name);
  return parse_program(read_file(benchmark_path(name)));
}

Env generate_inputs(const BenchmarkSpec& spec) {
  if (!is_benchmark(spec.name)) throw Error("UnknownBenchmark", spec.name);
  const std::int64_t n = spec.size > 0 ? spec.size : small_size(spec.name);
  Rng g(spec.seed * 0x9E3779B97F4A7C15ULL + std::hash<std::string>{}(spec.name));
  Env env;
  const std::string& b = spec.name;

  if (b == "conditional-sum") {
    ValueList xs;
    for (std::int64_t i = 0; i < n; ++i) xs.push_back(Value::real(uniform(g, 0.0, 200.0)));
    env["V"] = vector_of(xs);
  } else if (b == "equal") {
    // Odd seeds plant one differing string.
    std::string s = vocabulary(g, 1)[0];
    ValueList xs(static_cast<std::size_t>(n), Value::string(s));
    if (spec.seed % 2 == 1 && n > 0) xs[static_cast<std::size_t>(pick(g, 0, n - 1))] = Value::string(s + "x");
    env["V"] = vector_of(xs);
    env["x"] = Value::string(s);
  } else if (b == "string-match") {
    ValueList xs = strings(g, n, 1000);
    if (spec.seed % 2 == 0 && n > 0) xs[static_cast<std::size_t>(pick(g, 0, n - 1))] = Value::string("key2");
    env["words"] = vector_of(xs);
    env["key1"] = Value::string("key1");
    env["key2"] = Value::string("key2");
    env["key3"] = Value::string("key3");
  } else if (b == "word-count") {
    env["words"] = vector_of(strings(g, n, static_cast<std::size_t>(std::clamp<std::int64_t>(n / 10, 1, 1000))));
  } else if (b == "histogram") {
    ValueList xs;
    for (std::int64_t i = 0; i < n; ++i)
      xs.push_back(Value::record({{"red", ix(pick(g, 0, 255))}, {"green", ix(pick(g, 0, 255))}, {"blue", ix(pick(g, 0, 255))}}));
    env["P"] = vector_of(xs);
  } else if (b == "linear-regression") {
    ValueList xs;
    for (std::int64_t i = 0; i < n; ++i) {
      double x = uniform(g, 0.0, 1000.0), dx = uniform(g, 0.0, 10.0);
      xs.push_back(point(x + dx, x - dx));
    }
    env["P"] = vector_of(xs);
    env["n"] = Value::real(static_cast<double>(n));
  } else if (b == "group-by") {
    ValueList xs;
    const std::int64_t keys = std::max<std::int64_t>(1, n / 10);
    for (std::int64_t i = 0; i < n; ++i)
      xs.push_back(Value::record({{"K", ix(pick(g, 0, keys - 1))}, {"A", Value::real(uniform(g, 0.0, 10.0))}}));
    env["V"] = vector_of(xs);
  } else if (b == "matrix-add" || b == "matrix-multiply") {
    env["M"] = dense_matrix(g, n, n, 0.0, 10.0);
    env["N"] = dense_matrix(g, n, n, 0.0, 10.0);
    env["n"] = ix(n);
    env["mm"] = ix(n);
  } else if (b == "pagerank") {
    env["E"] = power_law_graph(g, n);
    env["vertices"] = ix(n);
    env["num_steps"] = ix(spec.num_steps);
  } else if (b == "kmeans") {
    ValueList pts, cs;
    for (std::int64_t k = 0; k < n; ++k) {
      std::int64_t i = pick(g, 0, 9), j = pick(g, 0, 9);
      pts.push_back(point(i * 2 + 1 + uniform(g, 0.0, 1.0), j * 2 + 1 + uniform(g, 0.0, 1.0)));
    }
    for (std::int64_t i = 0; i < 10; ++i)
      for (std::int64_t j = 0; j < 10; ++j) cs.push_back(point(i * 2 + 1.2, j * 2 + 1.2));
    env["P"] = vector_of(pts);
    env["C"] = vector_of(cs);
    env["N"] = ix(n);
    env["K"] = ix(100);
    env["num_steps"] = ix(spec.num_steps);
  } else if (b == "matrix-factorization") {
    const std::int64_t l = 2;
    ValueList r;
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < n; ++j)
        if (uniform(g, 0.0, 1.0) < 0.1) r.push_back(Value::pair(ix2(i, j), Value::real(static_cast<double>(pick(g, 1, 5)))));
    std::shuffle(r.begin(), r.end(), g);
    env["R"] = Value::bag(std::move(r));
    env["P"] = dense_matrix(g, n, l, 0.0, 1.0);
    env["Q"] = dense_matrix(g, l, n, 0.0, 1.0);
    env["n"] = ix(n);
    env["m"] = ix(n);
    env["l"] = ix(l);
    env["a"] = Value::real(0.002);
    env["b"] = Value::real(0.02);
    env["num_steps"] = ix(spec.num_steps);
  }
  return env;
}

Env permute_inputs(const Env& env, std::uint64_t seed) {
  Rng g(seed);
  Env out;
  for (const auto& [k, v] : env) {
    if (!v.is_bag()) {
      out[k] = v;
      continue;
    }
    ValueList xs = v.items();
    std::shuffle(xs.begin(), xs.end(), g);
    out[k] = Value::bag(std::move(xs));
  }
  return out;
}

}  // namespace l2b
