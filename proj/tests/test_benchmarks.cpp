#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "loop2bulk/benchmarks.hpp"
#include "loop2bulk/oracle.hpp"
#include "loop2bulk/ops.hpp"
#include "support.hpp"

using namespace l2b;

namespace {

BenchmarkSpec spec(const std::string& name, std::int64_t size, std::uint64_t seed = 1) {
  BenchmarkSpec s;
  s.name = name;
  s.size = size;
  s.seed = seed;
  return s;
}

std::set<Value> keys(const Value& bag) {
  std::set<Value> out;
  for (const auto& kv : bag.items()) out.insert(kv[0]);
  return out;
}

ValueList numbers() {
  return {Value::integer(0), Value::integer(-3), Value::integer(7), Value::real(2.5), Value::real(-0.25)};
}

}  // namespace

TEST(Corpus, AllProgramsLoad) {
  EXPECT_EQ(benchmark_names().size(), 12u);
  for (const auto& n : benchmark_names()) {
    EXPECT_TRUE(is_benchmark(n));
    EXPECT_NO_THROW(load_benchmark(n)) << n;
  }
  EXPECT_FALSE(is_benchmark("nope"));
  try {
    load_benchmark("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "UnknownBenchmark");
  }
}

TEST(Generate, Deterministic) {
  for (const auto& n : benchmark_names()) {
    SCOPED_TRACE(n);
    auto s = spec(n, small_size(n) / 4 + 3, 5);
    auto r = compare_states(generate_inputs(s), generate_inputs(s), 0);
    EXPECT_TRUE(r.ok) << r.str();
  }
}

TEST(Generate, SeedsDiffer) {
  auto a = generate_inputs(spec("word-count", 200, 1));
  auto b = generate_inputs(spec("word-count", 200, 2));
  EXPECT_FALSE(compare_states(a, b, 0).ok);
}

TEST(Generate, InputsCoverDeclarations) {
  for (const auto& n : benchmark_names()) {
    SCOPED_TRACE(n);
    SourceProgram p = load_benchmark(n);
    Env in = generate_inputs(spec(n, 8));
    for (const auto& d : p.inputs) EXPECT_TRUE(in.count(d.name)) << d.name;
  }
}

TEST(Generate, VectorsAreDenseFromZero) {
  Env in = generate_inputs(spec("conditional-sum", 50));
  std::set<Value> k = keys(in.at("V"));
  ASSERT_EQ(k.size(), 50u);
  EXPECT_EQ(*k.begin(), Value::integer(0));
  EXPECT_EQ(*k.rbegin(), Value::integer(49));
}

TEST(Generate, KMeansLayout) {
  Env in = generate_inputs(spec("kmeans", 300));
  EXPECT_EQ(in.at("K"), Value::integer(100));
  EXPECT_EQ(in.at("P").size(), 300u);
  for (const auto& kv : in.at("P").items()) {
    double x = kv[1][0].as_double(), y = kv[1][1].as_double();
    // inside a unit square with odd lower corner in [1, 19]
    double fx = std::floor(x), fy = std::floor(y);
    EXPECT_GE(fx, 1);
    EXPECT_LE(fx, 19);
    EXPECT_EQ(static_cast<std::int64_t>(fx) % 2, 1) << x;
    EXPECT_EQ(static_cast<std::int64_t>(fy) % 2, 1) << y;
  }
  std::set<std::pair<double, double>> cs;
  for (const auto& kv : in.at("C").items()) cs.insert({kv[1][0].as_double(), kv[1][1].as_double()});
  ASSERT_EQ(cs.size(), 100u);
  EXPECT_TRUE(cs.count({1.2, 1.2}));
  EXPECT_TRUE(cs.count({19.2, 19.2}));
}

TEST(Generate, FactorizationRatings) {
  const std::int64_t n = 60;
  Env in = generate_inputs(spec("matrix-factorization", n));
  const Value& r = in.at("R");
  double density = static_cast<double>(r.size()) / (n * n);
  EXPECT_GT(density, 0.07);
  EXPECT_LT(density, 0.13);
  for (const auto& kv : r.items()) {
    EXPECT_GE(kv[1].as_double(), 1);
    EXPECT_LE(kv[1].as_double(), 5);
  }
  EXPECT_EQ(keys(r).size(), r.size());
  EXPECT_EQ(in.at("P").size(), static_cast<std::size_t>(n * 2));
  EXPECT_EQ(in.at("Q").size(), static_cast<std::size_t>(2 * n));
}

TEST(Generate, PagerankEdges) {
  const std::int64_t n = 100;
  Env in = generate_inputs(spec("pagerank", n));
  const Value& e = in.at("E");
  EXPECT_EQ(keys(e).size(), e.size());
  EXPECT_GT(e.size(), static_cast<std::size_t>(5 * n));
  EXPECT_LE(e.size(), static_cast<std::size_t>(10 * n));
  // vertices are numbered 1..n, no self loops
  for (const auto& kv : e.items()) {
    std::int64_t s = kv[0][0].as_int(), t = kv[0][1].as_int();
    EXPECT_TRUE(s >= 1 && s <= n && t >= 1 && t <= n) << kv.str();
    EXPECT_NE(s, t);
  }
}

TEST(Generate, EqualPlantsMismatchOnOddSeeds) {
  auto count_other = [](const Env& in) {
    std::size_t c = 0;
    for (const auto& kv : in.at("V").items()) c += kv[1] != in.at("x");
    return c;
  };
  EXPECT_EQ(count_other(generate_inputs(spec("equal", 100, 1))), 1u);
  EXPECT_EQ(count_other(generate_inputs(spec("equal", 100, 2))), 0u);
}

TEST(Generate, PermutePreservesBags) {
  Env in = generate_inputs(spec("group-by", 200));
  Env p = permute_inputs(in, 3);
  EXPECT_TRUE(compare_states(in, p, 0).ok);
}

TEST(Reducers, BuiltinsObeyLaws) {
  for (const char* op : {"+", "*", "min", "max"}) {
    SCOPED_TRACE(op);
    std::string why;
    EXPECT_TRUE(reducer_laws_hold(*find_reducer(op), numbers(), &why)) << why;
  }
  ValueList bools{Value::boolean(true), Value::boolean(false)};
  for (const char* op : {"&&", "||"}) EXPECT_TRUE(reducer_laws_hold(*find_reducer(op), bools)) << op;
}

TEST(Reducers, NonCommutativeRejected) {
  CommOp minus{"minus_test", Value::integer(0), [](const Value& a, const Value& b) { return apply_binop("-", a, b); }};
  std::string why;
  EXPECT_FALSE(reducer_laws_hold(minus, numbers(), &why));
  EXPECT_FALSE(why.empty());
  try {
    register_reducer(minus, numbers());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "NotCommutative");
  }
  EXPECT_EQ(find_reducer("minus_test"), nullptr);
}

TEST(Reducers, LawfulUserReducerRegisters) {
  CommOp gcd{"gcd_test", Value::integer(0), [](const Value& a, const Value& b) {
               std::int64_t x = std::llabs(a.as_int()), y = std::llabs(b.as_int());
               while (y) x = std::exchange(y, x % y);
               return Value::integer(x);
             }};
  ValueList xs{Value::integer(0), Value::integer(12), Value::integer(18), Value::integer(7)};
  register_reducer(gcd, xs);
  ASSERT_NE(find_reducer("gcd_test"), nullptr);
  EXPECT_EQ(reduce_bag(*find_reducer("gcd_test"), {Value::integer(12), Value::integer(18)}), Value::integer(6));
}
