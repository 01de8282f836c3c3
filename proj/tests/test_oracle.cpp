#include <gtest/gtest.h>

#include "loop2bulk/benchmarks.hpp"
#include "loop2bulk/comp_ir.hpp"
#include "loop2bulk/oracle.hpp"
#include "loop2bulk/runtime.hpp"
#include "support.hpp"

using namespace l2b;

namespace {

using Dense = std::vector<std::vector<double>>;

Dense product(const Dense& a, const Dense& b) {
  std::size_t n = a.size(), m = b[0].size(), k = b.size();
  Dense c(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t x = 0; x < k; ++x) c[i][j] += a[i][x] * b[x][j];
  return c;
}

Value rec(std::int64_t k, std::int64_t v) { return Value::record({{"K", Value::integer(k)}, {"V", Value::integer(v)}}); }

BenchmarkSpec small(const std::string& name, std::uint64_t seed) {
  BenchmarkSpec s;
  s.name = name;
  s.size = small_size(name) / 4 + 4;
  s.seed = seed;
  s.num_steps = 2;
  return s;
}

}  // namespace

TEST(Oracle, IntroGroupBy) {
  Env in{{"A", Value::bag({Value::pair(Value::integer(3), rec(3, 10)), Value::pair(Value::integer(8), rec(5, 25)),
                           Value::pair(Value::integer(5), rec(3, 13))})}};
  Env out = eval_program(test::fixture("intro-groupby"), in);
  EXPECT_TRUE(values_close(out.at("C"), test::ints({{3, 23}, {5, 25}}), 0)) << out.at("C").str();
}

TEST(Oracle, EmptyRange) {
  auto p = parse_program("var s: Int = 7;\nfor i = 5, 4 do s += i;");
  EXPECT_EQ(eval_program(p, {}).at("s"), Value::integer(7));
}

TEST(Oracle, AbsentReadSkipsStatement) {
  Env out = eval_program(test::fixture("copy-loop"), {{"W", test::ints({{2, 5}, {40, 1}})}});
  EXPECT_TRUE(values_close(out.at("V"), test::ints({{2, 5}}), 0)) << out.at("V").str();
}

TEST(Oracle, StrictReadsRaise) {
  OracleOptions o;
  o.strict_reads = true;
  try {
    eval_program(test::fixture("copy-loop"), {{"W", test::ints({{2, 5}})}}, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "IndexUnset");
  }
}

TEST(Oracle, MatrixProductMatchesDenseRoutine) {
  test::Gen g(5);
  for (int t = 0; t < 10; ++t) {
    std::size_t d = static_cast<std::size_t>(g.range(1, 6));
    Dense a(d, std::vector<double>(d)), b(d, std::vector<double>(d));
    for (auto* m : {&a, &b})
      for (auto& row : *m)
        for (auto& x : row) x = g.real(-3, 3);
    Env in{{"M", test::dense(a)}, {"N", test::dense(b)}, {"d", Value::integer(static_cast<std::int64_t>(d))}};
    Env out = eval_program(test::fixture("matmul-core"), in);
    EXPECT_TRUE(values_close(out.at("R"), test::dense(product(a, b)), 1e-9));
  }
}

TEST(Compare, ToleranceIsRelative) {
  Env a{{"x", Value::real(1.0)}}, b{{"x", Value::real(1.0 + 1e-12)}}, c{{"x", Value::real(1.001)}};
  EXPECT_TRUE(compare_states(a, b).ok);
  EXPECT_FALSE(compare_states(a, c).ok);
  EXPECT_TRUE(compare_states({{"x", Value::integer(2)}}, {{"x", Value::real(2.0)}}).ok);
}

TEST(Compare, BagDifferences) {
  Env a{{"V", test::ints({{1, 2}, {2, 3}})}};
  Env b{{"V", test::ints({{2, 3}, {1, 2}})}};
  Env c{{"V", test::ints({{1, 2}, {2, 4}})}};
  Env d{{"V", test::ints({{1, 2}})}};
  EXPECT_TRUE(compare_states(a, b).ok);
  CompareReport r = compare_states(a, c);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.diffs.empty());
  EXPECT_FALSE(compare_states(a, d).ok);
  EXPECT_FALSE(compare_states(a, {}).ok);
}

TEST(Oracle, TotalOnCorpus) {
  for (const auto& name : benchmark_names()) {
    SCOPED_TRACE(name);
    SourceProgram p = load_benchmark(name);
    EXPECT_NO_THROW(eval_program(p, generate_inputs(small(name, 1))));
  }
}

// Parallel for-loops must not depend on iteration order.
TEST(Oracle, ReversedLoopsAgreeOnCorpus) {
  OracleOptions rev;
  rev.reverse_loops = true;
  for (const auto& name : benchmark_names()) {
    SCOPED_TRACE(name);
    SourceProgram p = load_benchmark(name);
    Env in = generate_inputs(small(name, 2));
    auto r = compare_states(eval_program(p, in), eval_program(p, in, rev));
    EXPECT_TRUE(r.ok) << r.str();
  }
}

// A wrong translation must be caught by the differential check. The
// reducer of the translated update is swapped for max.
TEST(Oracle, DetectsBrokenTranslation) {
  auto p = test::fixture("indirect-incr");
  Code code = translate_program(p);
  int patched = 0;
  for (auto& t : code) {
    if (t.kind != TargetCode::Kind::Assign || t.var != "W") continue;
    std::string s = print(*t.value);
    auto at = s.find("+/");
    if (at == std::string::npos) continue;
    t.value = parse_ir(s.replace(at, 2, "max/"));
    ++patched;
  }
  ASSERT_EQ(patched, 1);
  test::Gen g(9);
  bool caught = false;
  for (int t = 0; t < 20 && !caught; ++t) {
    Env in{{"V", g.sparse_vector(10)}};
    ValueList ks;
    for (std::int64_t i = 1; i <= 10; ++i) ks.push_back(Value::pair(Value::integer(i), Value::integer(i % 3)));
    in["K"] = Value::bag(std::move(ks));
    Env good = eval_program(p, in);
    Env bad = execute_target(code, in);
    caught = !compare_states({{"W", good.at("W")}}, {{"W", bad.at("W")}}).ok;
  }
  EXPECT_TRUE(caught);
}

TEST(Oracle, DetectsPerturbedResult) {
  SourceProgram p = load_benchmark("word-count");
  Env in = generate_inputs(small("word-count", 1));
  Env ref = eval_program(p, in);
  Env out = run_program(p, in);
  ASSERT_TRUE(compare_states(ref, out).ok);
  ValueList items = out.at("C").items();
  ASSERT_FALSE(items.empty());
  items[0] = Value::pair(items[0][0], Value::integer(items[0][1].as_int() + 1));
  out["C"] = Value::bag(items);
  EXPECT_FALSE(compare_states(ref, out).ok);
}
