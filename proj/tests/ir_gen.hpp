#pragma once

#include <set>
#include <string>
#include <vector>

#include "loop2bulk/state.hpp"
#include "support.hpp"

namespace l2b::test {

inline const std::set<std::string> kGenArrays = {"W", "V"};

// Random comprehensions over W, V (key-unique int vectors), B (pairs with
// repeated keys) and the scalar n.
class IrGen {
 public:
  explicit IrGen(std::uint64_t seed) : g(seed) {}

  Gen g;

  Env env() {
    return {{"W", g.sparse_vector(12, 0.6)}, {"V", g.sparse_vector(12, 0.6)}, {"B", g.pairs(g.range(0, 12), 5)},
            {"n", Value::integer(g.range(-3, 3))}};
  }

  std::string fresh(const std::string& base) { return base + std::to_string(next_++); }
  std::string num() { return std::to_string(g.range(0, 4)); }
  std::string source() { return g.one_of<std::string>({"W", "V", "B"}); }
  std::string array() { return g.one_of<std::string>({"W", "V"}); }
  std::string reducer() { return g.one_of<std::string>({"+", "max", "min"}); }

  std::string arith(const std::vector<std::string>& vs) {
    const std::string& a = g.one_of(vs);
    switch (g.range(0, 4)) {
      case 0: return a;
      case 1: return a + " + " + num();
      case 2: return a + " * " + num();
      case 3: return a + " - " + g.one_of(vs);
      default: return "(" + a + " + " + g.one_of(vs) + ") * 2";
    }
  }

  std::string cond(const std::vector<std::string>& keys, const std::vector<std::string>& vals) {
    switch (g.range(0, 3)) {
      case 0: return arith(vals) + " > " + num();
      case 1: return g.one_of(keys) + " % 2 == 0";
      case 2: return "inRange(" + g.one_of(keys) + ", " + num() + ", " + std::to_string(g.range(3, 12)) + ")";
      default: return g.one_of(vals) + " != " + num();
    }
  }

  std::string inner() {
    std::string j = fresh("j"), w = fresh("w");
    std::string s = "[[ (" + j + ", " + arith({w}) + ") | (" + j + "," + w + ") <- " + source();
    if (g.coin()) s += ", " + cond({j}, {w});
    return s + " ]]";
  }

  // Qualifiers before any group-by. keys/vals collect the bound variables.
  std::vector<std::string> body(std::vector<std::string>& keys, std::vector<std::string>& vals, bool nested,
                                const std::string& first_source = "") {
    std::vector<std::string> q;
    std::string i = fresh("i"), v = fresh("v");
    std::string dom = !first_source.empty() ? first_source : (nested && g.coin(0.3) ? inner() : source());
    q.push_back("(" + i + "," + v + ") <- " + dom);
    keys.push_back(i);
    vals.push_back(v);
    for (std::int64_t k = g.range(0, 3); k > 0; --k) {
      switch (g.range(0, 5)) {
        case 0: q.push_back(cond(keys, vals)); break;
        case 1: {
          std::string a = fresh("a");
          q.push_back("let " + a + " = " + arith(vals));
          vals.push_back(a);
          break;
        }
        case 2: {
          std::string j = fresh("j"), u = fresh("u");
          std::string off = g.one_of<std::string>({"", " + 1", " - 1"});
          q.push_back("(" + j + "," + u + ") <- " + source());
          q.push_back(j + " == " + g.one_of(keys) + off);
          keys.push_back(j);
          vals.push_back(u);
          break;
        }
        case 3: {
          std::string x = fresh("x");
          q.push_back(x + " <- {" + arith(vals) + "}");
          vals.push_back(x);
          break;
        }
        case 4: {
          std::string s = fresh("s"), j = fresh("j"), u = fresh("u");
          q.push_back("let " + s + " = +/[[ " + u + " | (" + j + "," + u + ") <- " + array() + ", " + j + " <= " +
                      g.one_of(keys) + " ]]");
          vals.push_back(s);
          break;
        }
        default: q.push_back(cond(keys, vals)); break;
      }
    }
    return q;
  }

  static std::string join(const std::vector<std::string>& q) {
    std::string s;
    for (const auto& x : q) s += (s.empty() ? "" : ", ") + x;
    return s;
  }

  // General comprehension, optionally ending in a group-by.
  std::string comp() {
    std::vector<std::string> keys, vals;
    auto q = body(keys, vals, true);
    if (g.coin(0.4)) {
      std::string v = g.one_of(vals);
      if (g.coin()) {
        std::string k = g.one_of(keys);
        q.push_back("group by " + k);
        return "[[ (" + k + ", " + reducer() + "/" + v + ") | " + join(q) + " ]]";
      }
      std::string k = fresh("k");
      q.push_back("group by " + k + " : " + g.one_of(keys) + " % 3");
      return "[[ (" + k + ", (+/" + v + ", " + reducer() + "/" + v + ")) | " + join(q) + " ]]";
    }
    return "[[ (" + g.one_of(keys) + ", " + arith(vals) + ") | " + join(q) + " ]]";
  }

  std::string constant_key() {
    std::vector<std::string> keys, vals;
    auto q = body(keys, vals, false);
    std::string k = fresh("k"), v = g.one_of(vals);
    q.push_back("group by " + k + " : " + g.one_of<std::string>({"()", "(1, 2)", "3"}));
    switch (g.range(0, 2)) {
      case 0: return "[[ n + (" + reducer() + "/" + v + ") | " + join(q) + " ]]";
      case 1: return "[[ (" + k + ", +/" + v + ") | " + join(q) + " ]]";
      default: return "[[ (" + reducer() + "/" + v + ", +/" + g.one_of(vals) + ") | " + join(q) + " ]]";
    }
  }

  // Group-by on the key of the first generator, with an optional lookup of
  // the destination after it.
  std::string unique_key() {
    std::vector<std::string> keys, vals;
    std::string src = g.coin(0.8) ? array() : "B";
    auto q = body(keys, vals, false, src);
    std::string i = keys[0], v = g.one_of(vals);
    q.push_back("group by " + i);
    if (g.coin()) {
      std::string w = fresh("w"), j = fresh("j"), u = fresh("u");
      q.push_back(w + " <-? [[ " + u + " | (" + j + "," + u + ") <- " + array() + ", " + j + " == " + i + " ]]");
      return "[[ (" + i + ", " + w + " + (" + reducer() + "/" + v + ")) | " + join(q) + " ]]";
    }
    return "[[ (" + i + ", " + reducer() + "/" + v + ") | " + join(q) + " ]]";
  }

  std::string range_iteration() {
    std::string i = fresh("i"), j = fresh("j"), w = fresh("w");
    std::string lo = std::to_string(g.range(-2, 6)), hi = g.coin(0.8) ? std::to_string(g.range(-1, 14)) : "n + 5";
    std::string off = g.one_of<std::string>({"", " + 1", " - 1", " + 2"});
    std::vector<std::string> q = {i + " <- range(" + lo + ", " + hi + ")", "(" + j + "," + w + ") <- " + array(),
                                  g.coin() ? j + " == " + i + off : i + off + " == " + j};
    if (g.coin()) q.push_back(cond({i, j}, {w}));
    if (g.coin()) {
      std::string u = fresh("u"), m = fresh("m");
      q.push_back("(" + m + "," + u + ") <- " + source());
      q.push_back(m + " == " + i);
      return "[[ (" + i + ", " + w + " * " + u + ") | " + join(q) + " ]]";
    }
    return "[[ (" + i + ", " + arith({w, i}) + ") | " + join(q) + " ]]";
  }

  std::string self_join() {
    std::string a = array(), i = fresh("i"), v = fresh("v"), j = fresh("j"), u = fresh("u");
    std::vector<std::string> q = {"(" + i + "," + v + ") <- " + a};
    if (g.coin()) q.push_back(cond({i}, {v}));
    q.push_back("(" + j + "," + u + ") <- " + (g.coin(0.8) ? a : "B"));
    q.push_back(g.coin() ? j + " == " + i : i + " == " + j);
    return "[[ (" + i + ", " + arith({v, u}) + ") | " + join(q) + " ]]";
  }

 private:
  int next_ = 0;
};

}  // namespace l2b::test
