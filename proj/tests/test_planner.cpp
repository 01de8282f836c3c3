#include <gtest/gtest.h>

#include "loop2bulk/comp_ir.hpp"
#include "loop2bulk/oracle.hpp"
#include "loop2bulk/planner.hpp"
#include "loop2bulk/runtime.hpp"
#include "loop2bulk/translator.hpp"
#include "support.hpp"

using namespace l2b;

namespace {

CE ir_of(const std::string& s) { return parse_ir(s); }

int count(const PlanNode& p, const std::string& kind) {
  auto m = count_nodes(p);
  auto it = m.find(kind);
  return it == m.end() ? 0 : it->second;
}

CE final_value(const std::string& fixture, const std::string& var) {
  Code c = translate_program(test::fixture(fixture));
  CE out;
  for (const auto& t : c)
    if (t.kind == TargetCode::Kind::Assign && t.var == var) out = t.value;
  return out;
}

void expect_same_bag(const Value& a, const Value& b) { EXPECT_TRUE(values_close(a, b, 1e-9)) << a.str() << "\n" << b.str(); }

}  // namespace

TEST(Plan, MatrixProductShape) {
  PlanPtr p = plan_expr(final_value("matmul-core", "R"));
  EXPECT_EQ(count(*p, "JOIN"), 1) << print(*p);
  EXPECT_EQ(count(*p, "REDUCEBYKEY"), 1) << print(*p);
  EXPECT_EQ(count(*p, "GROUPBY"), 0) << print(*p);
  EXPECT_EQ(count(*p, "MERGE"), 1) << print(*p);
  EXPECT_TRUE(plan_warnings(*p).empty());
}

TEST(Plan, MatrixProductWithoutJoinDetection) {
  PlanPtr p = plan_expr(final_value("matmul-core", "R"), {false});
  EXPECT_EQ(count(*p, "JOIN"), 0) << print(*p);
  EXPECT_EQ(count(*p, "REDUCEBYKEY"), 0) << print(*p);
  EXPECT_EQ(count(*p, "GROUPBY"), 1) << print(*p);
}

TEST(Plan, SingleSourceHasNoJoin) {
  PlanPtr p = plan_expr(ir_of("[[ (i, v + 1) | (i,v) <- W, v > 2 ]]"));
  EXPECT_EQ(count(*p, "JOIN"), 0);
  EXPECT_EQ(count(*p, "SOURCE"), 1);
  EXPECT_EQ(count(*p, "MAP"), 1);
}

TEST(Plan, MergeNode) {
  PlanPtr p = plan_expr(ir_of("V <| [[ (i, v) | (i,v) <- W ]]"));
  EXPECT_EQ(p->kind, PlanNode::Kind::Merge) << print(*p);
}

TEST(Plan, OptionalLookupBecomesCoGroup) {
  PlanPtr p = plan_expr(final_value("incr-loop", "V"));
  EXPECT_EQ(count(*p, "COGROUP"), 1) << print(*p);
  EXPECT_EQ(count(*p, "JOIN"), 0) << print(*p);
}

TEST(Plan, LiftedUseKeepsGroupBy) {
  // the lifted bag is used as a whole, so it cannot become a fold
  PlanPtr p = plan_expr(ir_of("[[ (k, v) | (k,v) <- W, group by k ]]"));
  EXPECT_EQ(count(*p, "GROUPBY"), 1) << print(*p);
  EXPECT_EQ(count(*p, "REDUCEBYKEY"), 0);
}

TEST(Plan, ReductionsOnlyBecomeReduceByKey) {
  PlanPtr p = plan_expr(ir_of("[[ (k, (+/v, max/v)) | (k,v) <- W, group by k ]]"));
  EXPECT_EQ(count(*p, "REDUCEBYKEY"), 1) << print(*p);
  EXPECT_EQ(count(*p, "GROUPBY"), 0);
}

TEST(Plan, CrossJoinWarning) {
  PlanPtr p = plan_expr(ir_of("[[ (a, b) | (i,a) <- V, (j,b) <- W ]]"));
  auto w = plan_warnings(*p);
  ASSERT_EQ(w.size(), 1u) << print(*p);
  EXPECT_NE(w[0].find("cross join"), std::string::npos);
}

TEST(Plan, PrintIsTree) {
  std::string s = print(*plan_expr(final_value("matmul-core", "R")));
  EXPECT_NE(s.find("JOIN(key="), std::string::npos) << s;
  EXPECT_NE(s.find("\n  "), std::string::npos) << s;
}

TEST(Plan, RangeSource) {
  PlanPtr p = plan_expr(ir_of("[[ i * i | i <- range(1, 4) ]]"));
  EXPECT_EQ(count(*p, "RANGE"), 1) << print(*p);
  expect_same_bag(execute_plan(*p, {}), eval_ir(*ir_of("{1, 4, 9, 16}"), {}));
}

// Plan results must match the reference evaluation of the same value.
TEST(Plan, AgreesWithReferenceEvaluation) {
  const std::vector<std::string> exprs = {
      "[[ (i, v + w) | (i,v) <- V, (j,w) <- W, j == i ]]",
      "[[ (k, +/v) | (i,v) <- V, (j,k) <- W, j == i, group by k ]]",
      "[[ (i, v) | (i,v) <- V, w <-? [[ u | (j,u) <- W, j == i ]], v > 0 ]]",
      "V <| [[ (i, w + v) | (i,v) <- W, w <-? [[ u | (j,u) <- V, j == i ]] ]]",
      "[[ (a, b) | (i,a) <- V, (j,b) <- W, i + 1 == j ]]",
      "[[ (k, (+/v, min/v, max/v)) | (k,v) <- V, group by k : k % 3 ]]",
      "[[ (i, v) | (i,v) <- V, inRange(i, 2, 5) ]]",
      "[[ +/[[ w | (j,w) <- W, j <= i ]] | (i,v) <- V ]]",
  };
  test::Gen g(11);
  for (const auto& s : exprs) {
    SCOPED_TRACE(s);
    CE e = ir_of(s);
    for (int t = 0; t < 20; ++t) {
      Env env{{"V", g.sparse_vector(8)}, {"W", g.sparse_vector(8)}};
      Value ref = eval_ir(*e, env);
      for (bool joins : {true, false}) {
        PlanPtr p = plan_expr(e, {joins});
        for (int parts : {1, 3}) expect_same_bag(execute_plan(*p, env, {2, parts, 0}), ref);
      }
    }
  }
}
