#include <gtest/gtest.h>

#include "loop2bulk/comp_ir.hpp"
#include "loop2bulk/oracle.hpp"
#include "support.hpp"

using namespace l2b;

namespace {

const std::set<std::string> kArrays = {"W", "V", "M", "N", "K", "R"};

bool has_groupby(const CExpr& e) {
  if (e.kind == CExpr::Kind::Comp)
    for (const auto& q : e.quals)
      if (q.kind == Qual::Kind::GroupBy) return true;
  for (const auto& a : e.args)
    if (a && has_groupby(*a)) return true;
  for (const auto& q : e.quals)
    if (q.expr && has_groupby(*q.expr)) return true;
  return false;
}

bool nested_generator(const CExpr& e) {
  if (e.kind == CExpr::Kind::Comp)
    for (const auto& q : e.quals)
      if (q.kind == Qual::Kind::Gen && q.expr->kind == CExpr::Kind::Comp) return true;
  for (const auto& a : e.args)
    if (a && nested_generator(*a)) return true;
  return false;
}

bool same_bag(const Value& a, const Value& b) { return values_close(a, b, 1e-9); }

std::string canon(const std::string& ir) { return canonical(*parse_ir(ir)); }

Env intro_env() {
  Env env;
  env["A"] = Value::bag({Value::tuple({Value::integer(3), Value::integer(3), Value::integer(10)}),
                         Value::tuple({Value::integer(8), Value::integer(5), Value::integer(25)}),
                         Value::tuple({Value::integer(5), Value::integer(3), Value::integer(13)})});
  return env;
}

}  // namespace

TEST(Eval, GroupByLiftsVariables) {
  Value c = eval_ir(*parse_ir("[[ (k, +/v) | (i,k,v) <- A, group by k ]]"), intro_env());
  EXPECT_TRUE(same_bag(c, test::ints({{3, 23}, {5, 25}}))) << c.str();
}

TEST(Eval, KeylessGroupByUsesPattern) {
  Value c = eval_ir(*parse_ir("[[ (k, +/i) | (i,k,v) <- A, group by k ]]"), intro_env());
  EXPECT_TRUE(same_bag(c, test::ints({{3, 8}, {5, 8}}))) << c.str();
}

TEST(Eval, OptionalGeneratorBindsAbsent) {
  Env env;
  env["V"] = test::ints({{1, 5}});
  Value c = eval_ir(*parse_ir("[[ (i, w + 1) | i <- range(1, 2), w <-? [[ u | (j,u) <- V, j == i ]] ]]"), env);
  EXPECT_TRUE(same_bag(c, test::ints({{1, 6}, {2, 1}}))) << c.str();
}

TEST(Eval, RangeInclusive) {
  Value c = eval_ir(*parse_ir("[[ i | i <- range(3, 5) ]]"));
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(eval_ir(*parse_ir("[[ i | i <- range(1, 0) ]]")).size(), 0u);
}

TEST(Merge, RightBiased) {
  Value x = test::ints({{3, 10}, {1, 20}});
  Value y = test::ints({{1, 30}, {4, 40}});
  EXPECT_TRUE(same_bag(merge_bags(x, y), test::ints({{3, 10}, {1, 30}, {4, 40}})));
  EXPECT_TRUE(same_bag(merge_bags(x, Value::bag({})), x));
  EXPECT_TRUE(same_bag(merge_bags(Value::bag({}), y), y));
}

TEST(Merge, DuplicateKeyRejected) {
  Value x = test::ints({{1, 1}, {1, 2}});
  try {
    merge_bags(x, Value::bag({}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "DuplicateKey");
  }
  EXPECT_THROW(merge_bags(Value::bag({}), x), Error);
}

TEST(Print, RoundTripsThroughParser) {
  for (const char* s : {"[[ (k, +/v) | (i,k,v) <- A, group by k ]]",
                        "[[ ((i, j), w + (+/v)) | ((i,k),m) <- M, let v = m * 2, group by (i,j) : (i, k), w <-? [[ u | ((a,b),u) <- R, a == i ]] ]]",
                        "V <| [[ (i, v) | (i,v) <- W, inRange(i, 1, 10) ]]", "{1, 2}", "[[ x | x <- range(0, n - 1), nonEmpty(W) ]]"}) {
    CE e = parse_ir(s);
    EXPECT_EQ(print(*parse_ir(print(*e))), print(*e)) << s;
  }
}

TEST(Normalize, UnnestsMatrixOperands) {
  CE e = parse_ir(
      "[[ a * b | a <- [[ m | ((I,J),m) <- M, I == i, J == k ]], b <- [[ n | ((I2,J2),n) <- N, I2 == k, J2 == j ]] ]]");
  CE out = normalize(e);
  EXPECT_FALSE(nested_generator(*out));
  EXPECT_EQ(canonical(*out),
            canon("[[ m * n | ((I,J),m) <- M, I == i, J == k, ((I2,J2),n) <- N, I2 == k, J2 == j ]]"));
}

TEST(Normalize, SingletonGenerator) {
  EXPECT_EQ(canonical(*normalize(parse_ir("[[ x | x <- {5} ]]"))), "{5}");
}

TEST(Normalize, Idempotent) {
  for (const char* s : {"[[ a * b | a <- [[ m | ((I,J),m) <- M, I == i ]], b <- {3} ]]",
                        "[[ (k, +/v) | (i,k,v) <- A, let z = k + 1, group by k ]]",
                        "[[ x | x <- [[ y + 1 | y <- range(1, 4) ]], x > 2 ]]"}) {
    CE once = normalize(parse_ir(s));
    EXPECT_EQ(canonical(*normalize(once)), canonical(*once)) << s;
  }
}

TEST(Normalize, PreservesValue) {
  test::Gen g(3);
  Env env;
  env["M"] = g.sparse_matrix(3, 3);
  env["N"] = g.sparse_matrix(3, 3);
  env["i"] = Value::integer(1);
  env["j"] = Value::integer(2);
  env["k"] = Value::integer(0);
  CE e = parse_ir(
      "[[ a * b | a <- [[ m | ((I,J),m) <- M, I == i, J == k ]], b <- [[ n | ((I2,J2),n) <- N, I2 == k, J2 == j ]] ]]");
  EXPECT_TRUE(same_bag(eval_ir(*e, env), eval_ir(*normalize(e), env)));
}

TEST(ConstantKey, RemovesGroupBy) {
  CE e = parse_ir("[[ n + (+/v) | (i,v) <- W, inRange(i, 1, 10), group by k : () ]]");
  CE out = eliminate_constant_key_groupby(e);
  EXPECT_FALSE(has_groupby(*out));
  test::Gen g(1);
  for (int t = 0; t < 20; ++t) {
    Env env;
    env["W"] = g.sparse_vector(12, 0.5);
    env["n"] = Value::integer(g.range(0, 9));
    EXPECT_TRUE(same_bag(eval_ir(*e, env), eval_ir(*out, env))) << print(*out);
  }
}

TEST(ConstantKey, SingleCellIncrement) {
  CE e = parse_ir(
      "M <| [[ (k, w + (+/v)) | let v = 1, group by k : (1, 2), w <-? [[ u | ((a,b),u) <- M, a == 1, b == 2 ]] ]]");
  CE out = optimize(e, kArrays);
  EXPECT_FALSE(has_groupby(*out)) << print(*out);
  Env env;
  env["M"] = Value::bag({Value::pair(Value::tuple({Value::integer(1), Value::integer(2)}), Value::integer(4))});
  Value r = eval_ir(*out, env);
  EXPECT_TRUE(same_bag(r, Value::bag({Value::pair(Value::tuple({Value::integer(1), Value::integer(2)}), Value::integer(5))})));
}

TEST(ConstantKey, NonConstantKeyNotApplicable) {
  CE e = parse_ir("[[ (i, +/v) | (i,v) <- W, group by i ]]");
  try {
    eliminate_constant_key_groupby(e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), "NotApplicable");
  }
}

TEST(UniqueKey, ArrayIndexIsUnique) {
  CE e = parse_ir("[[ (i, +/v) | (i,v) <- W, inRange(i, 1, 10), group by i ]]");
  EXPECT_TRUE(infer_unique_key(*e, 2, kArrays));
}

TEST(UniqueKey, MatrixProductKeyNotUnique) {
  CE e = parse_ir(
      "[[ ((i, j), +/v) | ((i,k),m) <- M, ((k2,j),n) <- N, k2 == k, let v = m * n, group by (i,j) ]]");
  EXPECT_FALSE(infer_unique_key(*e, 4, kArrays));
}

TEST(UniqueKey, ConstantKeyNotUnique) {
  CE e = parse_ir("[[ +/v | (i,v) <- W, group by k : () ]]");
  EXPECT_FALSE(infer_unique_key(*e, 1, kArrays));
}

TEST(UniqueKey, BagSourceNotUnique) {
  CE e = parse_ir("[[ (i, +/v) | (i,v) <- B, group by i ]]");
  EXPECT_FALSE(infer_unique_key(*e, 1, kArrays));
}

TEST(UniqueKey, RemovesGroupBy) {
  CE e = parse_ir(
      "V <| [[ (i, w + (+/v)) | (i,v) <- W, inRange(i, 1, 10), group by i, w <-? [[ u | (j,u) <- V, j == i ]] ]]");
  CE out = eliminate_unique_key_groupby(e->args[1], kArrays);
  EXPECT_EQ(canonical(*out),
            canon("[[ (i, w + v) | (i,v) <- W, inRange(i, 1, 10), w <-? [[ u | (j,u) <- V, j == i ]] ]]"));
}

TEST(UniqueKey, MatrixProductUnchanged) {
  CE e = parse_ir(
      "[[ ((i, j), +/v) | ((i,k),m) <- M, ((k2,j),n) <- N, k2 == k, let v = m * n, group by (i,j) ]]");
  EXPECT_THROW(eliminate_unique_key_groupby(e, kArrays), Error);
}

TEST(UniqueKey, NoGroupByNotApplicable) {
  EXPECT_THROW(eliminate_unique_key_groupby(parse_ir("[[ (i, v) | (i,v) <- W ]]"), kArrays), Error);
}

// The two rules never both apply.
TEST(UniqueKey, DisjointFromConstantKey) {
  for (const char* s : {"[[ +/v | (i,v) <- W, group by k : () ]]", "[[ (i, +/v) | (i,v) <- W, group by i ]]",
                        "[[ (k, +/v) | (i,k,v) <- A, group by k ]]"}) {
    CE e = parse_ir(s);
    bool r14 = true, r15 = true;
    try {
      eliminate_constant_key_groupby(e);
    } catch (const Error&) {
      r14 = false;
    }
    try {
      eliminate_unique_key_groupby(e, kArrays);
    } catch (const Error&) {
      r15 = false;
    }
    EXPECT_FALSE(r14 && r15) << s;
  }
}

TEST(Inverse, ShiftedIndex) {
  auto inv = invert_affine_index("k", *parse_ir("i - 1"), "i");
  ASSERT_TRUE(inv);
  EXPECT_EQ(inv->index, "i");
  Env env;
  env["k"] = Value::integer(7);
  EXPECT_EQ(eval_ir(*inv->value, env), Value::integer(8));
}

TEST(Inverse, Identity) {
  auto inv = invert_affine_index("k", *parse_ir("i"), "i");
  ASSERT_TRUE(inv);
  EXPECT_EQ(print(*inv->value), "k");
}

TEST(Inverse, NonUnitCoefficient) { EXPECT_FALSE(invert_affine_index("k", *parse_ir("2 * i"), "i")); }

TEST(RangeElimination, CopyLoop) {
  CE e = parse_ir("[[ (i, w) | i <- range(1, 10), (j,w) <- W, j == i ]]");
  CE out = normalize(eliminate_range_iteration(e));
  EXPECT_EQ(canonical(*out), canon("[[ (i, w) | (i,w) <- W, inRange(i, 1, 10) ]]"));
}

TEST(RangeElimination, NoArrayKeepsRange) {
  CE e = parse_ir("[[ (i, 0) | i <- range(1, N) ]]");
  EXPECT_EQ(canonical(*eliminate_range_iteration(e)), canonical(*e));
}

TEST(RangeElimination, ShiftedKey) {
  CE e = parse_ir("[[ (i, w) | i <- range(1, 5), (j,w) <- W, j == i - 1 ]]");
  CE out = normalize(eliminate_range_iteration(e));
  for (const auto& q : out->quals) EXPECT_FALSE(q.kind == Qual::Kind::Gen && q.expr->kind == CExpr::Kind::Range) << print(*out);
  test::Gen g(8);
  for (int t = 0; t < 20; ++t) {
    Env env;
    env["W"] = g.sparse_vector(8);
    EXPECT_TRUE(same_bag(eval_ir(*e, env), eval_ir(*out, env)));
  }
}

TEST(RangeElimination, EmptyRange) {
  CE e = parse_ir("[[ (i, w) | i <- range(5, 1), (j,w) <- W, j == i ]]");
  Env env;
  env["W"] = test::ints({{1, 1}, {3, 3}, {5, 5}});
  EXPECT_EQ(eval_ir(*normalize(eliminate_range_iteration(e)), env).size(), 0u);
  EXPECT_EQ(eval_ir(*e, env).size(), 0u);
}

TEST(SelfJoin, SameArraySameKeyCollapses) {
  CE e = parse_ir("[[ (i, v + u) | (i,v) <- W, (j,u) <- W, j == i ]]");
  CE out = normalize(eliminate_self_joins(e, kArrays));
  int gens = 0;
  for (const auto& q : out->quals) gens += q.kind == Qual::Kind::Gen;
  EXPECT_EQ(gens, 1) << print(*out);
  Env env;
  env["W"] = test::ints({{1, 2}, {2, 5}});
  EXPECT_TRUE(same_bag(eval_ir(*e, env), eval_ir(*out, env)));
}

TEST(Optimize, MatrixProductShape) {
  CE e = parse_ir(
      "R <| [[ ((i, j), w + (+/v)) | i <- range(0, d - 1), j <- range(0, d - 1), k <- range(0, d - 1), "
      "((a,b),m) <- M, a == i, b == k, ((c,e),n) <- N, c == k, e == j, let v = m * n, group by (i,j), "
      "w <-? [[ u | ((x,y),u) <- R, x == i, y == j ]] ]]");
  CE out = optimize(e, kArrays);
  EXPECT_EQ(canonical(*out),
            canon("R <| [[ ((i, j), w + (+/v)) | ((i,k),m) <- M, inRange(i, 0, d - 1), inRange(k, 0, d - 1), "
                  "((k2,j),n) <- N, k2 == k, inRange(j, 0, d - 1), let v = m * n, group by (i,j), "
                  "w <-? [[ u | ((x,y),u) <- R, x == i, y == j ]] ]]"));
}
