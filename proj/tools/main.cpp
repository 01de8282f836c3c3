// loop2bulk command-line driver.
#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "loop2bulk/analysis.hpp"
#include "loop2bulk/benchmarks.hpp"
#include "loop2bulk/frontend.hpp"
#include "loop2bulk/oracle.hpp"
#include "loop2bulk/planner.hpp"
#include "loop2bulk/runtime.hpp"
#include "loop2bulk/translator.hpp"

using namespace l2b;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct Options {
  std::string target;  // .dbl file or benchmark name
  std::string data;
  std::string out;
  int partitions = 4;
  int workers = 4;
  std::uint64_t seed = 1;
  std::int64_t size = 0;
  std::int64_t steps = 1;
  double tolerance = 1e-9;
  bool show_ir = false;
  bool show_plan = false;
  bool all = false;
  bool small = false;
  int seeds = 1;
  std::vector<std::string> names;
};

// A benchmark name resolves to its corpus file; anything else is a path.
SourceProgram load(const Options& o) {
  if (is_benchmark(o.target) && !std::filesystem::exists(o.target)) return load_benchmark(o.target);
  return parse_program(read_file(o.target));
}

Env inputs_for(const Options& o, const SourceProgram& p) {
  if (!o.data.empty()) return load_inputs(p, o.data);
  if (is_benchmark(o.target)) return generate_inputs({o.target, o.size, o.seed, o.steps, o.tolerance});
  if (p.inputs.empty()) return {};
  throw Error("InputError", "--data DIR required for " + o.target);
}

EngineConfig engine(const Options& o) {
  EngineConfig c;
  c.partitions = o.partitions;
  c.workers = o.workers;
  c.seed = o.seed;
  return c;
}

void emit(const Options& o, const std::string& text, const std::string& file) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(o.out);
  std::ofstream(std::filesystem::path(o.out) / file) << text;
}

void print_plans(const Code& code) {
  for (const auto& t : code) {
    if (t.kind == TargetCode::Kind::Assign) {
      auto plan = plan_expr(t.value);
      std::cout << "-- " << t.var << (t.unwrap ? " (scalar)" : "") << "\n" << print(*plan);
      for (const auto& w : plan_warnings(*plan)) std::cout << "warning: " << w << "\n";
    } else {
      if (t.kind == TargetCode::Kind::While) std::cout << "-- while condition\n" << print(*plan_expr(t.value));
      print_plans(t.body);
    }
  }
}

int cmd_check(const Options& o) {
  SourceProgram p = load(o);
  if (p.body.empty() && p.inputs.empty()) std::cerr << "warning: empty program\n";
  Diagnostics d = check_program(p);
  if (d.accepted) {
    std::cout << "accepted\n";
    return kOk;
  }
  std::cout << "rejected\n" << d.str();
  return kFail;
}

int cmd_translate(const Options& o) {
  SourceProgram p = load(o);
  if (o.show_ir) {
    TranslateOptions raw;
    raw.optimize = false;
    std::cout << "# before optimization\n" << print(translate_program(p, raw)) << "# after optimization\n";
  }
  Code code = translate_program(p);
  std::cout << print(code);
  if (o.show_plan) print_plans(code);
  return kOk;
}

int cmd_run(const Options& o, bool sequential) {
  SourceProgram p = load(o);
  Env in = inputs_for(o, p);
  Env out = sequential ? eval_program(p, in) : run_program(p, in, engine(o));
  emit(o, serialize_env(out), sequential ? "result-seq.tsv" : "result.tsv");
  return kOk;
}

int cmd_compare(const Options& o) {
  SourceProgram p = load(o);
  Env in = inputs_for(o, p);
  Env par = run_program(p, in, engine(o));
  Env seq = eval_program(p, in);
  CompareReport r = compare_states(par, seq, o.tolerance);
  std::cout << r.str();
  return r.ok ? kOk : kFail;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_bench(const Options& o) {
  std::vector<std::string> names = o.names;
  if (o.all || names.empty()) names = benchmark_names();
  bool ok = true;
  std::cout << "benchmark,seed,size,translate_ms,par_ms,seq_ms,result\n";
  for (const auto& name : names) {
    if (!is_benchmark(name)) throw Error("UnknownBenchmark", name);
    SourceProgram p = load_benchmark(name);
    std::int64_t size = o.small || o.size == 0 ? small_size(name) : o.size;
    for (int s = 0; s < o.seeds; ++s) {
      std::uint64_t seed = o.seed + static_cast<std::uint64_t>(s);
      Env in = generate_inputs({name, size, seed, o.steps, o.tolerance});
      auto t0 = std::chrono::steady_clock::now();
      Code code = translate_program(p);
      double t_tr = ms_since(t0);
      t0 = std::chrono::steady_clock::now();
      Env par = run_program(p, in, engine(o));
      double t_par = ms_since(t0);
      t0 = std::chrono::steady_clock::now();
      Env seq = eval_program(p, in);
      double t_seq = ms_since(t0);
      CompareReport r = compare_states(par, seq, o.tolerance);
      ok = ok && r.ok;
      std::cout << name << ',' << seed << ',' << size << ',' << t_tr << ',' << t_par << ',' << t_seq << ','
                << (r.ok ? "pass" : "FAIL") << "\n";
      if (!r.ok) std::cerr << name << " seed " << seed << ":\n" << r.str();
    }
  }
  return ok ? kOk : kFail;
}

int cmd_gen_data(const Options& o) {
  if (!is_benchmark(o.target)) throw Error("UnknownBenchmark", o.target);
  if (o.out.empty()) throw Error("Usage", "gen-data needs --out DIR");
  SourceProgram p = load_benchmark(o.target);
  write_inputs(p, generate_inputs({o.target, o.size, o.seed, o.steps, o.tolerance}), o.out);
  std::cout << "wrote " << o.out << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loop2bulk: compile loop programs to bulk comprehensions and run them"};
  app.require_subcommand(1);
  Options o;

  auto engine_flags = [&](CLI::App* c) {
    c->add_option("--partitions", o.partitions, "partition count")->check(CLI::PositiveNumber);
    c->add_option("--workers", o.workers, "worker threads (LOOP2BULK_WORKERS overrides)")->check(CLI::PositiveNumber);
  };
  auto data_flags = [&](CLI::App* c) {
    c->add_option("--data", o.data, "input directory (TSV files)");
    c->add_option("--seed", o.seed, "generator seed");
    c->add_option("--size", o.size, "generator size (0 = small default)");
    c->add_option("--steps", o.steps, "num_steps for iterative benchmarks");
  };

  auto* check = app.add_subcommand("check", "check the parallelizability restrictions");
  check->add_option("file", o.target, "program file or benchmark name")->required();

  auto* translate = app.add_subcommand("translate", "print the target code");
  translate->add_option("file", o.target)->required();
  translate->add_flag("--show-ir", o.show_ir, "also print the unoptimized comprehensions");
  translate->add_flag("--show-plan", o.show_plan, "print the dataflow plan of each assignment");

  auto* run = app.add_subcommand("run", "execute on the partitioned engine");
  run->add_option("file", o.target)->required();
  run->add_option("--out", o.out, "write result.tsv into DIR");
  engine_flags(run);
  data_flags(run);

  auto* run_seq = app.add_subcommand("run-seq", "execute with the sequential interpreter");
  run_seq->add_option("file", o.target)->required();
  run_seq->add_option("--out", o.out, "write result-seq.tsv into DIR");
  data_flags(run_seq);

  auto* compare = app.add_subcommand("compare", "run both executors and compare");
  compare->add_option("file", o.target)->required();
  compare->add_option("--tolerance", o.tolerance, "relative tolerance for doubles");
  engine_flags(compare);
  data_flags(compare);

  auto* bench = app.add_subcommand("bench", "differential runs with timings (CSV)");
  bench->add_option("names", o.names, "benchmark names");
  bench->add_flag("--all", o.all, "all twelve benchmarks");
  bench->add_flag("--small", o.small, "small sizes");
  bench->add_option("--seeds", o.seeds, "seeds per benchmark")->check(CLI::PositiveNumber);
  bench->add_option("--tolerance", o.tolerance);
  engine_flags(bench);
  data_flags(bench);

  auto* gen = app.add_subcommand("gen-data", "write generated benchmark inputs");
  gen->add_option("name", o.target)->required();
  gen->add_option("--out", o.out, "output directory")->required();
  data_flags(gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*check) return cmd_check(o);
    if (*translate) return cmd_translate(o);
    if (*run) return cmd_run(o, false);
    if (*run_seq) return cmd_run(o, true);
    if (*compare) return cmd_compare(o);
    if (*bench) return cmd_bench(o);
    if (*gen) return cmd_gen_data(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const std::string& c = e.code();
    bool usage = c == "LexError" || c == "ParseError" || c == "ScopeError" || c == "IOError" || c == "Usage" ||
                 c == "UnknownBenchmark" || c == "InputError";
    return usage ? kUsage : kFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
