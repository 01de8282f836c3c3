#include "loop2bulk/runtime.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace l2b {

namespace {

using Row = Scope;
template <class T>
using Parts = std::vector<std::vector<T>>;

class ThreadPool {
 public:
  explicit ThreadPool(int n) {
    for (int i = 1; i < n; ++i) threads_.emplace_back([this] { loop(); });
  }

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  // Runs fn(0..n-1) across the pool and the calling thread.
  void run(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (threads_.empty() || n <= 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    auto b = std::make_shared<Batch>();
    b->fn = &fn;
    b->total = n;
    {
      std::lock_guard<std::mutex> lk(mu_);
      batch_ = b;
    }
    cv_.notify_all();
    work(*b);
    std::unique_lock<std::mutex> lk(b->mu);
    b->done_cv.wait(lk, [&] { return b->done == b->total; });
    {
      std::lock_guard<std::mutex> g(mu_);
      batch_.reset();
    }
    if (b->error) std::rethrow_exception(b->error);
  }

 private:
  struct Batch {
    const std::function<void(std::size_t)>* fn = nullptr;
    std::size_t total = 0;
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::condition_variable done_cv;
    std::size_t done = 0;
    std::exception_ptr error;
  };

  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::shared_ptr<Batch> batch_;
  bool stop_ = false;

  static void work(Batch& b) {
    for (;;) {
      std::size_t i = b.next.fetch_add(1);
      if (i >= b.total) return;
      try {
        (*b.fn)(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(b.mu);
        if (!b.error) b.error = std::current_exception();
      }
      std::lock_guard<std::mutex> lk(b.mu);
      if (++b.done == b.total) b.done_cv.notify_all();
    }
  }

  void loop() {
    std::shared_ptr<Batch> last;
    for (;;) {
      std::shared_ptr<Batch> b;
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [&] { return stop_ || (batch_ && batch_ != last); });
        if (stop_) return;
        b = batch_;
      }
      last = b;
      work(*b);
    }
  }
};

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

Value key_of(const std::vector<CE>& ks, const Env& env, Row& row) {
  if (ks.size() == 1) return eval_ir(*ks[0], env, row);
  ValueList vs;
  for (const auto& k : ks) vs.push_back(eval_ir(*k, env, row));
  return Value::tuple(std::move(vs));
}

void bind_or_throw(const Pattern& p, const Value& v, Row& row) {
  if (!bind_pattern(p, v, row))
    throw Error("TypeMismatch", "pattern " + print(p) + " does not match " + v.str());
}

const Value* find_var(const Row& row, const std::string& n) {
  for (auto it = row.rbegin(); it != row.rend(); ++it)
    if (it->first == n) return &it->second;
  return nullptr;
}

const ValueList& pairs_of(const Value& v, const char* what) {
  if (!v.is_bag()) throw Error("TypeMismatch", std::string(what) + " is not a bag: " + v.str());
  for (const auto& x : v.items())
    if (!x.is_tuple() || x.size() != 2) throw Error("TypeMismatch", std::string(what) + " element is not a pair");
  return v.items();
}

}  // namespace

struct Engine::Impl {
  EngineConfig cfg;
  ThreadPool pool;

  explicit Impl(EngineConfig c) : cfg(c), pool(c.workers) {}

  std::size_t parts() const { return static_cast<std::size_t>(cfg.partitions); }

  std::size_t slot(const Value& k) const { return mix(k.hash() ^ cfg.seed) % parts(); }

  template <class T, class F>
  Parts<T> shuffle(Parts<T>&& in, F key) {
    std::size_t n = parts();
    std::vector<Parts<T>> out(in.size(), Parts<T>(n));
    pool.run(in.size(), [&](std::size_t p) {
      for (auto& x : in[p]) out[p][slot(key(x))].push_back(std::move(x));
    });
    Parts<T> res(n);
    pool.run(n, [&](std::size_t d) {
      for (auto& src : out)
        for (auto& x : src[d]) res[d].push_back(std::move(x));
    });
    return res;
  }

  Parts<Value> scatter(const ValueList& items) {
    Parts<Value> out(parts());
    for (const auto& x : items) out[slot(x)].push_back(x);
    return out;
  }

  static Value gather(Parts<Value>&& ps) {
    ValueList out;
    for (auto& p : ps)
      for (auto& v : p) out.push_back(std::move(v));
    return Value::bag(std::move(out));
  }

  Parts<Row> rows(const PlanNode& p, const Env& env) {
    using K = PlanNode::Kind;
    switch (p.kind) {
      case K::Singleton: {
        Parts<Row> out(parts());
        out[0].push_back({});
        return out;
      }
      case K::Source: {
        auto it = env.find(p.name);
        if (it == env.end()) throw Error("UnboundVariable", p.name);
        if (!it->second.is_bag()) throw Error("TypeMismatch", "generator domain " + p.name + " is not a bag");
        Parts<Value> vs = scatter(it->second.items());
        Parts<Row> out(parts());
        pool.run(parts(), [&](std::size_t i) {
          for (const auto& v : vs[i]) {
            Row r;
            bind_or_throw(p.pat, v, r);
            out[i].push_back(std::move(r));
          }
        });
        return out;
      }
      case K::RangeSrc: {
        std::int64_t lo = eval_ir(*p.expr, env).as_int(), hi = eval_ir(*p.expr2, env).as_int();
        Parts<Row> out(parts());
        if (hi < lo) return out;
        std::uint64_t n = static_cast<std::uint64_t>(hi - lo) + 1, per = (n + parts() - 1) / parts();
        pool.run(parts(), [&](std::size_t i) {
          for (std::uint64_t j = i * per; j < std::min<std::uint64_t>(n, (i + 1) * per); ++j) {
            Row r;
            bind_or_throw(p.pat, Value::integer(lo + static_cast<std::int64_t>(j)), r);
            out[i].push_back(std::move(r));
          }
        });
        return out;
      }
      case K::FlatMap: {
        Parts<Row> in = rows(*p.inputs[0], env);
        Parts<Row> out(in.size());
        pool.run(in.size(), [&](std::size_t i) {
          for (auto& r : in[i]) {
            std::size_t base = r.size();
            for (auto& o : eval_quals(p.quals, env, {std::move(r)}, base)) out[i].push_back(std::move(o));
          }
        });
        return out;
      }
      case K::Join:
      case K::CoGroup: {
        bool outer = p.kind == K::CoGroup;
        Parts<Row> left = rows(*p.inputs[0], env), right = rows(*p.inputs[1], env);
        using Keyed = std::pair<Value, Row>;
        auto keyed = [&](Parts<Row>& in, const std::vector<CE>& ks) {
          Parts<Keyed> out(in.size());
          pool.run(in.size(), [&](std::size_t i) {
            for (auto& r : in[i]) {
              Value k = key_of(ks, env, r);
              if (outer && &ks == &p.rkeys) {
                Value v = eval_ir(*p.expr, env, r);
                out[i].push_back({std::move(k), Row{{"", std::move(v)}}});
              } else {
                out[i].push_back({std::move(k), std::move(r)});
              }
            }
          });
          return shuffle(std::move(out), [](const Keyed& x) -> const Value& { return x.first; });
        };
        Parts<Keyed> l = keyed(left, p.lkeys), r = keyed(right, p.rkeys);
        Parts<Row> out(parts());
        pool.run(parts(), [&](std::size_t i) {
          std::unordered_map<Value, std::vector<std::size_t>, ValueHash> index;
          for (std::size_t j = 0; j < r[i].size(); ++j) index[r[i][j].first].push_back(j);
          for (auto& [k, row] : l[i]) {
            auto it = index.find(k);
            if (it == index.end()) {
              if (outer) {
                Row o = row;
                for (const auto& v : p.pat.vars()) o.emplace_back(v, Value::absent());
                out[i].push_back(std::move(o));
              }
              continue;
            }
            for (std::size_t j : it->second) {
              Row o = row;
              if (outer) {
                bind_or_throw(p.pat, r[i][j].second[0].second, o);
              } else {
                o.insert(o.end(), r[i][j].second.begin(), r[i][j].second.end());
              }
              out[i].push_back(std::move(o));
            }
          }
        });
        return out;
      }
      case K::GroupBy: {
        Parts<Row> in = rows(*p.inputs[0], env);
        using Keyed = std::pair<Value, ValueList>;
        Parts<Keyed> kv(in.size());
        pool.run(in.size(), [&](std::size_t i) {
          for (auto& r : in[i]) {
            Value k = eval_ir(*p.expr, env, r);
            ValueList vals;
            for (const auto& n : p.lifted) {
              const Value* v = find_var(r, n);
              if (!v) throw Error("UnboundVariable", n);
              vals.push_back(*v);
            }
            kv[i].push_back({std::move(k), std::move(vals)});
          }
        });
        kv = shuffle(std::move(kv), [](const Keyed& x) -> const Value& { return x.first; });
        Parts<Row> out(parts());
        pool.run(parts(), [&](std::size_t i) {
          std::map<Value, std::vector<ValueList>> groups;
          for (auto& [k, vals] : kv[i]) {
            auto& g = groups[k];
            if (g.empty()) g.resize(vals.size());
            for (std::size_t j = 0; j < vals.size(); ++j) g[j].push_back(std::move(vals[j]));
          }
          for (auto& [k, cols] : groups) {
            Row r;
            bind_or_throw(p.pat, k, r);
            for (std::size_t j = 0; j < p.lifted.size(); ++j)
              r.emplace_back(p.lifted[j], Value::bag(std::move(cols[j])));
            out[i].push_back(std::move(r));
          }
        });
        return out;
      }
      case K::ReduceByKey: {
        std::vector<const CommOp*> ops;
        for (const auto& o : p.agg_ops) {
          const CommOp* op = find_reducer(o);
          if (!op) throw Error("UnknownReducer", o);
          ops.push_back(op);
        }
        Parts<Row> in = rows(*p.inputs[0], env);
        using Keyed = std::pair<Value, ValueList>;
        auto combine = [&](std::vector<Keyed>& part) {
          std::unordered_map<Value, std::size_t, ValueHash> at;
          std::vector<Keyed> acc;
          for (auto& [k, vals] : part) {
            auto it = at.find(k);
            if (it == at.end()) {
              at.emplace(k, acc.size());
              acc.push_back({std::move(k), std::move(vals)});
              continue;
            }
            ValueList& a = acc[it->second].second;
            for (std::size_t j = 0; j < a.size(); ++j) a[j] = ops[j]->impl(a[j], vals[j]);
          }
          part = std::move(acc);
        };
        Parts<Keyed> kv(in.size());
        pool.run(in.size(), [&](std::size_t i) {
          for (auto& r : in[i]) {
            Value k = eval_ir(*p.expr, env, r);
            ValueList vals;
            for (const auto& a : p.agg_args) vals.push_back(eval_ir(*a, env, r));
            kv[i].push_back({std::move(k), std::move(vals)});
          }
          combine(kv[i]);
        });
        kv = shuffle(std::move(kv), [](const Keyed& x) -> const Value& { return x.first; });
        Parts<Row> out(parts());
        pool.run(parts(), [&](std::size_t i) {
          combine(kv[i]);
          for (auto& [k, vals] : kv[i]) {
            Row r;
            bind_or_throw(p.pat, k, r);
            for (std::size_t j = 0; j < vals.size(); ++j) r.emplace_back(p.agg_names[j], std::move(vals[j]));
            out[i].push_back(std::move(r));
          }
        });
        return out;
      }
      default: break;
    }
    throw Error("TypeMismatch", std::string("plan node ") + kind_name(p.kind) + " does not produce rows");
  }

  Value merge(const Value& x, const Value& y) {
    const ValueList& xs = pairs_of(x, "merge operand");
    const ValueList& ys = pairs_of(y, "merge operand");
    using Tagged = std::pair<Value, bool>;  // element, from the right side
    Parts<Tagged> in(parts());
    for (const auto& v : xs) in[slot(v[0])].push_back({v, false});
    for (const auto& v : ys) in[slot(v[0])].push_back({v, true});
    Parts<Value> out(parts());
    pool.run(parts(), [&](std::size_t i) {
      std::unordered_map<Value, int, ValueHash> left_seen, right_seen;
      for (const auto& [v, right] : in[i]) {
        auto& seen = right ? right_seen : left_seen;
        if (++seen[v[0]] > 1) throw Error("DuplicateKey", "key " + v[0].str() + " repeated in merge operand");
      }
      for (const auto& [v, right] : in[i])
        if (right || !right_seen.count(v[0])) out[i].push_back(v);
    });
    return gather(std::move(out));
  }

  Value value(const PlanNode& p, const Env& env) {
    using K = PlanNode::Kind;
    switch (p.kind) {
      case K::Map: {
        Parts<Row> in = rows(*p.inputs[0], env);
        Parts<Value> out(in.size());
        pool.run(in.size(), [&](std::size_t i) {
          for (auto& r : in[i]) out[i].push_back(eval_ir(*p.expr, env, r));
        });
        return gather(std::move(out));
      }
      case K::Merge: return merge(value(*p.inputs[0], env), value(*p.inputs[1], env));
      case K::Eval: return eval_ir(*p.expr, env);
      case K::Bind: {
        Value v = value(*p.inputs[0], env);
        Env inner = env;
        inner[p.name] = std::move(v);
        return value(*p.inputs[1], inner);
      }
      default: {
        Parts<Row> rs = rows(p, env);
        Parts<Value> out(rs.size());
        for (std::size_t i = 0; i < rs.size(); ++i)
          for (auto& r : rs[i]) {
            ValueList items;
            for (auto& [n, v] : r) items.push_back(v);
            out[i].push_back(Value::tuple(std::move(items)));
          }
        return gather(std::move(out));
      }
    }
  }
};

namespace {

EngineConfig effective(EngineConfig c) {
  if (const char* w = std::getenv("LOOP2BULK_WORKERS")) {
    int n = std::atoi(w);
    if (n > 0) c.workers = n;
  }
  if (c.workers < 1) c.workers = 1;
  if (c.partitions < 1) c.partitions = 1;
  return c;
}

}  // namespace

Engine::Engine(EngineConfig cfg) : impl_(std::make_unique<Impl>(effective(cfg))) {}
Engine::~Engine() = default;

const EngineConfig& Engine::config() const { return impl_->cfg; }

Value Engine::execute_plan(const PlanNode& p, const Env& env) { return impl_->value(p, env); }

Env Engine::execute_target(const Code& code, Env env) {
  std::map<const CExpr*, PlanPtr> plans;
  auto eval = [&](const CE& e) {
    auto it = plans.find(e.get());
    if (it == plans.end()) it = plans.emplace(e.get(), plan_expr(e)).first;
    return impl_->value(*it->second, env);
  };
  std::function<void(const Code&)> run = [&](const Code& c) {
    for (const auto& t : c) {
      switch (t.kind) {
        case TargetCode::Kind::Assign: {
          Value v = eval(t.value);
          if (!t.unwrap) {
            env[t.var] = std::move(v);
            break;
          }
          if (!v.is_bag()) throw Error("TypeMismatch", "value of " + t.var + " is not a bag");
          if (v.size() > 1)
            throw Error("NonSingletonScalar", t.var + " assigned a bag of " + std::to_string(v.size()) + " values");
          if (v.size() == 1) env[t.var] = v[0];
          break;
        }
        case TargetCode::Kind::While:
          for (;;) {
            Value c = eval(t.value);
            if (!c.is_bag() || c.size() != 1)
              throw Error("IndexUnset", "while condition has no single value");
            if (c[0].kind() != Value::Kind::Bool) throw Error("NonBooleanCond", "while condition " + c[0].str());
            if (!c[0].as_bool()) break;
            run(t.body);
          }
          break;
        case TargetCode::Kind::Block: run(t.body); break;
      }
    }
  };
  run(code);
  return env;
}

Value Engine::merge(const Value& x, const Value& y) { return impl_->merge(x, y); }

Value Engine::group_by(const Value& pairs) {
  pairs_of(pairs, "group-by input");
  CE e = parse_ir("[[ (k, v) | (k, x) <- X, let v = x, group by k ]]");
  return impl_->value(*plan_expr(e, {false}), {{"X", pairs}});
}

Value Engine::reduce_by_key(const CommOp& op, const Value& pairs) {
  pairs_of(pairs, "reduceByKey input");
  if (!find_reducer(op.name)) register_reducer(op);
  CE e = ir::comp(ir::tuple({ir::var("k"), ir::reduce(op.name, ir::var("v"))}),
                  {ir::gen(Pattern::tuple({Pattern::var("k"), Pattern::var("x")}), ir::var("X")),
                   ir::let(Pattern::var("v"), ir::var("x")), ir::group_by(Pattern::var("k"))});
  return impl_->value(*plan_expr(e), {{"X", pairs}});
}

Value Engine::join(const Value& x, const Value& y) {
  pairs_of(x, "join operand");
  pairs_of(y, "join operand");
  CE e = parse_ir("[[ (k, (a, b)) | (k, a) <- X, (j, b) <- Y, k == j ]]");
  return impl_->value(*plan_expr(e), {{"X", x}, {"Y", y}});
}

Value execute_plan(const PlanNode& p, const Env& env, const EngineConfig& cfg) {
  return Engine(cfg).execute_plan(p, env);
}

Env execute_target(const Code& code, const Env& env, const EngineConfig& cfg) {
  return Engine(cfg).execute_target(code, env);
}

Env run_program(const SourceProgram& p, const Env& inputs, const EngineConfig& cfg) {
  Code code = translate_program(p);
  Env out = execute_target(code, inputs, cfg);
  Env declared;
  for (const auto& [name, type] : p.types) {
    auto it = out.find(name);
    if (it != out.end()) declared[name] = it->second;
  }
  return declared;
}

}  // namespace l2b
