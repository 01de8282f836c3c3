#include <gtest/gtest.h>

#include <set>

#include "loop2bulk/benchmarks.hpp"
#include "loop2bulk/frontend.hpp"
#include "support.hpp"

using namespace l2b;

namespace {

std::vector<Tok> kinds(const std::string& text) {
  std::vector<Tok> out;
  for (const auto& t : tokenize(text)) out.push_back(t.kind);
  return out;
}

void collect_indexes(const Stmt& s, std::vector<std::string>& out) {
  switch (s.kind) {
    case Stmt::Kind::ForRange:
    case Stmt::Kind::ForIn:
      out.push_back(s.var);
      collect_indexes(*s.body, out);
      break;
    case Stmt::Kind::While:
      collect_indexes(*s.body, out);
      break;
    case Stmt::Kind::If:
      collect_indexes(*s.body, out);
      if (s.other) collect_indexes(*s.other, out);
      break;
    case Stmt::Kind::Block:
      for (const auto& x : s.stmts) collect_indexes(*x, out);
      break;
    default:
      break;
  }
}

bool same(const SourceProgram& a, const SourceProgram& b) {
  if (a.body.size() != b.body.size() || a.inputs.size() != b.inputs.size()) return false;
  for (std::size_t i = 0; i < a.body.size(); ++i)
    if (!equal(*a.body[i], *b.body[i])) return false;
  for (std::size_t i = 0; i < a.inputs.size(); ++i)
    if (a.inputs[i].name != b.inputs[i].name || a.inputs[i].type->str() != b.inputs[i].type->str()) return false;
  return true;
}

std::vector<std::string> all_programs() {
  std::vector<std::string> out;
  for (const auto& n : benchmark_names()) out.push_back(benchmark_path(n));
  for (const char* f : {"stencil", "stencil-copy", "keyed-count", "incr-then-read", "incr-then-read-inner",
                        "scalar-temp", "vector-temp", "factorization-scalar", "factorization-fixed",
                        "intro-groupby", "copy-loop", "sum-loop", "incr-loop", "matmul-core", "cell-incr"})
    out.push_back(test::program_path(f));
  return out;
}

}  // namespace

TEST(Tokenize, ForHeader) {
  EXPECT_EQ(kinds("for i = 0, 9 do"),
            (std::vector<Tok>{Tok::For, Tok::Ident, Tok::Eq, Tok::Int, Tok::Comma, Tok::Int, Tok::Do}));
}

TEST(Tokenize, Empty) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, IncrementOperator) {
  auto toks = tokenize("C[A[i].K] += A[i].V");
  bool found = false;
  for (const auto& t : toks)
    if (t.kind == Tok::OpAssign && t.text == "+=") found = true;
  EXPECT_TRUE(found);
}

TEST(Tokenize, CommentsDropped) {
  EXPECT_EQ(kinds("x # trailing := stuff\n:= 1"), (std::vector<Tok>{Tok::Ident, Tok::Assign, Tok::Int}));
}

TEST(Tokenize, IllegalCharacterHasPosition) {
  try {
    tokenize("x := 1;\n  y @ 2");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "LexError");
    EXPECT_NE(std::string(e.what()).find("2:5"), std::string::npos) << e.what();
  }
}

TEST(Parse, IntroGroupBy) {
  auto p = parse_program(
      "input A: vector[<K: Int, V: Int>];\n"
      "var C: vector[Int] = vector();\n"
      "for i = 0, 9 do C[A[i].K] += A[i].V;");
  ASSERT_EQ(p.body.size(), 2u);
  const Stmt& loop = *p.body[1];
  ASSERT_EQ(loop.kind, Stmt::Kind::ForRange);
  EXPECT_EQ(loop.var, "i");
  EXPECT_EQ(unparse(*loop.e1), "0");
  EXPECT_EQ(unparse(*loop.e2), "9");
  const Stmt& upd = *loop.body;
  ASSERT_EQ(upd.kind, Stmt::Kind::IncrUpdate);
  EXPECT_EQ(upd.op, "+");
  EXPECT_EQ(upd.dest->kind, Dest::Kind::Index);
  EXPECT_EQ(upd.dest->name, "C");
  EXPECT_EQ(unparse(*upd.dest), "C[A[i].K]");
  EXPECT_EQ(unparse(*upd.e1), "A[i].V");
}

TEST(Parse, MatrixMultiplyNesting) {
  auto p = load_benchmark("matrix-multiply");
  const Stmt* s = p.body.back().get();
  for (int depth = 0; depth < 2; ++depth) {
    ASSERT_EQ(s->kind, Stmt::Kind::ForRange);
    s = s->body.get();
  }
  ASSERT_EQ(s->kind, Stmt::Kind::Block);
  ASSERT_EQ(s->stmts.size(), 2u);
  EXPECT_EQ(s->stmts[0]->kind, Stmt::Kind::Assign);
  ASSERT_EQ(s->stmts[1]->kind, Stmt::Kind::ForRange);
  EXPECT_EQ(s->stmts[1]->body->kind, Stmt::Kind::IncrUpdate);
  EXPECT_EQ(unparse(*s->stmts[1]->body), "R[i,j] += M[i,k] * N[k,j]");
}

TEST(Parse, SingleDeclaration) {
  auto p = parse_program("var x: Double = 0.0;");
  ASSERT_EQ(p.body.size(), 1u);
  EXPECT_EQ(p.body[0]->kind, Stmt::Kind::VarDecl);
  EXPECT_EQ(p.types.at("x")->kind, Type::Kind::Double);
}

TEST(Parse, UndeclaredVariable) {
  try {
    parse_program("x := 1;");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "ScopeError");
  }
}

TEST(Parse, ExpectedTokenDiagnostic) {
  try {
    parse_program("var x: Int = 0;\nfor i = 0 9 do x += 1;");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "ParseError");
    EXPECT_NE(std::string(e.what()).find("2:"), std::string::npos) << e.what();
  }
}

TEST(Parse, DeclarationInsideForRejected) {
  EXPECT_THROW(parse_program("for i = 0, 1 do { var x: Int = 0; };"), Error);
}

TEST(Parse, ArityChecked) {
  EXPECT_THROW(parse_program("var M: matrix[Int] = matrix();\nM[1] := 2;"), Error);
}

TEST(Parse, DuplicateIndexesRenamed) {
  auto p = parse_program(
      "var V: vector[Int] = vector();\n"
      "for i = 0, 3 do V[i] := 1;\n"
      "for i = 0, 3 do for j = 0, 1 do V[i] += j;");
  std::vector<std::string> idx;
  for (const auto& s : p.body) collect_indexes(*s, idx);
  EXPECT_EQ(idx.size(), 3u);
  EXPECT_EQ(std::set<std::string>(idx.begin(), idx.end()).size(), idx.size());
}

TEST(Unparse, BlockUsesSeparators) {
  auto p = parse_program("var x: Int = 0;\nvar y: Int = 0;\nfor i = 0, 1 do { x += i; y += i };");
  std::string s = unparse(p);
  EXPECT_NE(s.find("x += i;"), std::string::npos) << s;
  EXPECT_NE(s.find("y += i;"), std::string::npos) << s;
}

TEST(Unparse, EmptyProgram) { EXPECT_EQ(unparse(parse_program("")), ""); }

TEST(Unparse, RoundTripAllPrograms) {
  for (const auto& path : all_programs()) {
    SCOPED_TRACE(path);
    SourceProgram p = parse_program(read_file(path));
    SourceProgram q = parse_program(unparse(p));
    EXPECT_TRUE(same(p, q)) << unparse(p);
    EXPECT_EQ(unparse(p), unparse(q));
  }
}

TEST(Parse, IndexesUniqueInCorpus) {
  for (const auto& path : all_programs()) {
    SCOPED_TRACE(path);
    SourceProgram p = parse_program(read_file(path));
    std::vector<std::string> idx;
    for (const auto& s : p.body) collect_indexes(*s, idx);
    EXPECT_EQ(std::set<std::string>(idx.begin(), idx.end()).size(), idx.size());
  }
}

// Every destination must be rooted at a declared variable.
TEST(Parse, DestinationsDeclared) {
  std::function<void(const Stmt&, const SourceProgram&)> walk = [&](const Stmt& s, const SourceProgram& p) {
    if (s.dest) EXPECT_TRUE(p.types.count(s.dest->root())) << s.dest->root();
    for (const auto* c : {s.body.get(), s.other.get()})
      if (c) walk(*c, p);
    for (const auto& c : s.stmts) walk(*c, p);
  };
  for (const auto& path : all_programs()) {
    SourceProgram p = parse_program(read_file(path));
    for (const auto& s : p.body) walk(*s, p);
  }
}
