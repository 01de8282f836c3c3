#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "loop2bulk/benchmarks.hpp"
#include "loop2bulk/frontend.hpp"
#include "loop2bulk/state.hpp"
#include "loop2bulk/value.hpp"

#ifndef L2B_TEST_PROGRAMS
#define L2B_TEST_PROGRAMS "tests/programs"
#endif

namespace l2b::test {

inline std::string program_path(const std::string& name) {
  return std::string(L2B_TEST_PROGRAMS) + "/" + name + ".dbl";
}

inline SourceProgram fixture(const std::string& name) { return parse_program(read_file(program_path(name))); }

inline Value vec(std::vector<Value> xs) {
  ValueList kv;
  for (std::size_t i = 0; i < xs.size(); ++i) kv.push_back(Value::pair(Value::integer(static_cast<std::int64_t>(i)), xs[i]));
  return Value::bag(std::move(kv));
}

inline Value ints(std::initializer_list<std::pair<std::int64_t, std::int64_t>> kv) {
  ValueList out;
  for (auto [k, v] : kv) out.push_back(Value::pair(Value::integer(k), Value::integer(v)));
  return Value::bag(std::move(out));
}

inline Value dense(const std::vector<std::vector<double>>& m) {
  ValueList out;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j)
      out.push_back(Value::pair(Value::tuple({Value::integer(static_cast<std::int64_t>(i)),
                                              Value::integer(static_cast<std::int64_t>(j))}),
                                Value::real(m[i][j])));
  return Value::bag(std::move(out));
}

// Small-value generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : g_(seed) {}
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(g_);
  }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(g_); }
  template <class T>
  const T& one_of(const std::vector<T>& xs) { return xs[static_cast<std::size_t>(range(0, static_cast<std::int64_t>(xs.size()) - 1))]; }
  std::mt19937_64& engine() { return g_; }

  // Key-unique int vector with keys in [0, maxkey].
  Value sparse_vector(std::int64_t maxkey, double density = 0.7) {
    ValueList kv;
    for (std::int64_t k = 0; k <= maxkey; ++k)
      if (coin(density)) kv.push_back(Value::pair(Value::integer(k), Value::integer(range(-5, 9))));
    return Value::bag(std::move(kv));
  }
  Value sparse_matrix(std::int64_t rows, std::int64_t cols, double density = 0.7) {
    ValueList kv;
    for (std::int64_t i = 0; i < rows; ++i)
      for (std::int64_t j = 0; j < cols; ++j)
        if (coin(density))
          kv.push_back(Value::pair(Value::tuple({Value::integer(i), Value::integer(j)}), Value::integer(range(-5, 9))));
    return Value::bag(std::move(kv));
  }
  // Bag of (key, value) pairs with repeated keys.
  Value pairs(std::int64_t n, std::int64_t keys) {
    ValueList kv;
    for (std::int64_t i = 0; i < n; ++i) kv.push_back(Value::pair(Value::integer(range(0, keys)), Value::integer(range(-9, 9))));
    return Value::bag(std::move(kv));
  }

 private:
  std::mt19937_64 g_;
};

// Random value of a declared type. Vectors have keys 0..7, matrices are
// 6x6 at 60% density.
inline Value random_value(const Type& t, Gen& g) {
  switch (t.kind) {
    case Type::Kind::Int: return Value::integer(g.range(0, 6));
    case Type::Kind::Double: return Value::real(g.real(-5, 5));
    case Type::Kind::Bool: return Value::boolean(g.coin());
    case Type::Kind::String: return Value::string(g.one_of<std::string>({"a", "b", "c"}));
    case Type::Kind::Tuple: {
      ValueList xs;
      for (const auto& a : t.args) xs.push_back(random_value(*a, g));
      return Value::tuple(std::move(xs));
    }
    case Type::Kind::Record: {
      FieldList fs;
      for (std::size_t i = 0; i < t.fields.size(); ++i) fs.emplace_back(t.fields[i], random_value(*t.args[i], g));
      return Value::record(std::move(fs));
    }
    case Type::Kind::Matrix: {
      ValueList kv;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          if (g.coin(0.6)) kv.push_back(Value::pair(Value::tuple({Value::integer(i), Value::integer(j)}), random_value(*t.element(), g)));
      return Value::bag(std::move(kv));
    }
    default: {
      ValueList kv;
      for (int i = 0; i < 8; ++i) kv.push_back(Value::pair(Value::integer(i), random_value(*t.element(), g)));
      return Value::bag(std::move(kv));
    }
  }
}

inline Env random_inputs(const SourceProgram& p, Gen& g) {
  Env in;
  for (const auto& d : p.inputs) in[d.name] = random_value(*d.type, g);
  return in;
}

}  // namespace l2b::test
