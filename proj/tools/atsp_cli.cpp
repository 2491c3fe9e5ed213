// Command-line front end. Exit codes: 0 ok, 1 solve error, 2 parse error,
// 3 internal check failure (a dump is written and its path printed).

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "atsp/errors.hpp"
#include "atsp/heldkarp.hpp"
#include "atsp/io.hpp"
#include "atsp/laminar_ops.hpp"
#include "atsp/pipeline.hpp"

namespace {

using atsp::Rational;
using nlohmann::json;

struct Common {
  std::string input;
  std::string format = "auto";
  std::string epsilon = "1/4";
  std::string delta = "78/100";
  std::string trace;
  std::string dump_dir;
  bool human = false;
};

// Set once the input is known so a failure dump can include it.
std::optional<json> g_dump_input;

atsp::SolverConfig make_config(const Common& c) {
  atsp::SolverConfig cfg;
  cfg.epsilon = atsp::parse_rational(c.epsilon);
  cfg.delta = atsp::parse_rational(c.delta);
  try {
    cfg.validate();
  } catch (const atsp::SolveError& e) {
    throw atsp::ParseError(e.what());
  }
  return cfg;
}

atsp::InputGraph load(const Common& c) {
  atsp::InputGraph in = c.input == "-" ? atsp::read_input(std::cin, atsp::parse_format(c.format))
                                       : atsp::read_input_file(c.input, atsp::parse_format(c.format));
  g_dump_input = atsp::input_to_json(in);
  return in;
}

void add_decimal(json& j, const std::string& key, bool human) {
  if (human) j[key + "_decimal"] = atsp::to_double(atsp::parse_rational(j[key].get<std::string>()));
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

// Runs body(i) for i in [0, count) on up to `threads` workers; the first
// exception (by index) is rethrown after all workers finish.
template <class F>
void parallel_for(int count, int threads, F body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::max(1, threads); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int cmd_solve(const Common& c) {
  atsp::SolverConfig cfg = make_config(c);
  const atsp::InputGraph in = load(c);
  std::ofstream trace;
  if (!c.trace.empty()) {
    trace.open(c.trace);
    if (!trace) throw atsp::ParseError("cannot open trace file '" + c.trace + "'");
    cfg.trace = [&trace](const json& ev) { trace << ev.dump() << '\n'; };
  }
  json j = atsp::report_to_json(atsp::approx_atsp(in.g, in.w, cfg));
  for (const char* k : {"weight", "hk_value", "ratio", "bound"}) add_decimal(j, k, c.human);
  emit(j);
  return 0;
}

int cmd_hk(const Common& c) {
  const atsp::InputGraph in = load(c);
  const atsp::HeldKarpSolution hk = atsp::solve_held_karp(in.g, in.w);
  json x = json::array();
  for (const atsp::Edge& e : in.g.edges()) {
    if (sgn(hk.x[e.id]) > 0) x.push_back({{"edge", e.id}, {"tail", e.tail}, {"head", e.head}, {"x", atsp::to_string(hk.x[e.id])}});
  }
  json j = {{"value", atsp::to_string(hk.value)}, {"x", x}, {"rounds", hk.rounds}, {"pivots", hk.pivots},
            {"cuts", hk.cuts.size()}};
  add_decimal(j, "value", c.human);
  emit(j);
  return 0;
}

int cmd_dual(const Common& c) {
  const atsp::InputGraph in = load(c);
  const atsp::HeldKarpSolution hk = atsp::solve_held_karp(in.g, in.w);
  const atsp::DualSolution d = atsp::extract_laminar_dual(in.g, in.w, hk);
  json alpha = json::array();
  for (const Rational& a : d.alpha) alpha.push_back(atsp::to_string(a));
  json fam = json::array();
  for (std::size_t k = 0; k < d.family.size(); ++k) {
    fam.push_back({{"vertices", d.family[k]}, {"y", atsp::to_string(d.y[k])}});
  }
  json j = {{"value", atsp::to_string(hk.value)}, {"alpha", alpha}, {"laminar", fam},
            {"uncross_steps", d.uncross_steps}};
  add_decimal(j, "value", c.human);
  emit(j);
  return 0;
}

int cmd_backbone(const Common& c) {
  const atsp::SolverConfig cfg = make_config(c);
  const atsp::InputGraph in = load(c);
  atsp::Instance inst;
  if (in.instance) {
    inst = *in.instance;
  } else {
    const atsp::HeldKarpSolution hk = atsp::solve_held_karp(in.g, in.w);
    inst = atsp::build_instance(in.g, in.w, hk, atsp::extract_laminar_dual(in.g, in.w, hk));
  }
  std::vector<int> reducible;
  for (int id = 0; id < inst.laminar().size(); ++id) {
    if (atsp::is_reducible(inst, inst.laminar().set(id).vertices, cfg.delta)) reducible.push_back(id);
  }
  json j = {{"value", atsp::to_string(atsp::total_value(inst))}, {"reducible_sets", reducible}};
  if (reducible.empty()) {
    const atsp::QuasiBackbone qb = atsp::quasi_backbone(inst, cfg);
    // Edge ids refer to the input graph unless the input was an instance.
    json edges = json::array();
    for (const auto& [e, k] : qb.backbone.edges.counts()) {
      const int id = in.instance ? e : *inst.graph().edge(e).preimage;
      edges.push_back({id, k});
    }
    j["backbone"] = {{"edges", edges},
                     {"vertices", qb.backbone.vertices},
                     {"cost", atsp::to_string(atsp::cost(inst, qb.backbone.edges))},
                     {"bound", atsp::to_string((cfg.nu() + 3) * atsp::total_value(inst))},
                     {"rerouted_sets", qb.rerouted}};
  }
  emit(j);
  return 0;
}

struct SweepOptions {
  int min_n = 3;
  int max_n = 8;
  int seeds = 50;
  std::uint64_t seed = 0;
  std::string kind = "random";
  int threads = 1;
};

int cmd_oracle_compare(const Common& c, const SweepOptions& s) {
  const atsp::SolverConfig cfg = make_config(c);
  if (s.min_n < 2 || s.max_n < s.min_n || s.max_n > 10) throw atsp::ParseError("need 2 <= min-n <= max-n <= 10");
  std::vector<json> rows(s.seeds);
  std::vector<char> ok(s.seeds, 0);
  parallel_for(s.seeds, s.threads, [&](int i) {
    const std::uint64_t seed = s.seed + i;
    const int n = s.min_n + i % (s.max_n - s.min_n + 1);
    const atsp::InputGraph in = atsp::generate(s.kind, n, seed);
    const atsp::SolveReport r = atsp::approx_atsp(in.g, in.w, cfg);
    const Rational opt = atsp::brute_force_atsp(in.g, in.w).weight;
    ok[i] = opt >= r.hk_value && r.weight >= opt && r.weight <= cfg.ratio() * r.hk_value;
    rows[i] = {{"n", n},
               {"seed", seed},
               {"opt", atsp::to_string(opt)},
               {"hk", atsp::to_string(r.hk_value)},
               {"alg", atsp::to_string(r.weight)},
               {"ratio", atsp::to_string(r.ratio)},
               {"ok", static_cast<bool>(ok[i])}};
  });
  const bool all_ok = std::all_of(ok.begin(), ok.end(), [](char b) { return b; });
  if (c.human) {
    std::cout << std::setw(4) << "n" << std::setw(8) << "seed" << std::setw(10) << "OPT" << std::setw(10) << "HK"
              << std::setw(10) << "ALG" << std::setw(10) << "ALG/HK" << '\n';
    for (const json& r : rows) {
      std::cout << std::setw(4) << r["n"].get<int>() << std::setw(8) << r["seed"].get<std::uint64_t>()
                << std::setw(10) << r["opt"].get<std::string>() << std::setw(10) << r["hk"].get<std::string>()
                << std::setw(10) << r["alg"].get<std::string>() << std::setw(10) << std::fixed << std::setprecision(3)
                << atsp::to_double(atsp::parse_rational(r["ratio"].get<std::string>())) << '\n';
    }
    std::cout << (all_ok ? "all rows ok" : "SOME ROWS FAILED") << ", bound " << atsp::to_string(cfg.ratio()) << '\n';
  } else {
    emit({{"rows", rows}, {"bound", atsp::to_string(cfg.ratio())}, {"all_ok", all_ok}});
  }
  return all_ok ? 0 : 1;
}

int cmd_bench(const Common& c, const SweepOptions& s, int n) {
  const atsp::SolverConfig cfg = make_config(c);
  std::vector<json> runs(s.seeds);
  std::vector<double> secs(s.seeds);
  parallel_for(s.seeds, s.threads, [&](int i) {
    const std::uint64_t seed = s.seed + i;
    const atsp::InputGraph in = atsp::generate(s.kind, n, seed);
    const auto t0 = std::chrono::steady_clock::now();
    const atsp::SolveReport r = atsp::approx_atsp(in.g, in.w, cfg);
    secs[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    runs[i] = {{"n", n},
               {"seed", seed},
               {"seconds", secs[i]},
               {"weight", atsp::to_string(r.weight)},
               {"hk", atsp::to_string(r.hk_value)},
               {"ratio", atsp::to_string(r.ratio)},
               {"lp_pivots", r.stats.lp_pivots}};
  });
  double total = 0, worst = 0;
  for (double t : secs) {
    total += t;
    worst = std::max(worst, t);
  }
  emit({{"runs", runs}, {"mean_seconds", s.seeds ? total / s.seeds : 0.0}, {"max_seconds", worst}});
  return 0;
}

int cmd_generate(const Common& c, const SweepOptions& s, int n) {
  const atsp::InputGraph in = atsp::generate(s.kind, n, s.seed);
  if (c.format == "tsplib") {
    std::cout << atsp::write_tsplib(in.g, in.w, s.kind + "-" + std::to_string(n) + "-" + std::to_string(s.seed));
  } else {
    emit(atsp::input_to_json(in));
  }
  return 0;
}

std::string write_dump(const Common& c, const std::string& what, const std::string& command) {
  namespace fs = std::filesystem;
  const fs::path dir = c.dump_dir.empty() ? fs::temp_directory_path() : fs::path(c.dump_dir);
  const fs::path path = dir / ("atsp-dump-" + std::to_string(::getpid()) + ".json");
  json j = {{"error", what}, {"command", command}, {"epsilon", c.epsilon}, {"delta", c.delta}};
  if (g_dump_input) j["input"] = *g_dump_input;
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  return path.string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate asymmetric TSP with a constant-factor guarantee over Held-Karp"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  SweepOptions s;
  int n = 30;

  auto input_opts = [&](CLI::App* sub) {
    sub->add_option("input", c.input, "instance file (TSPLIB FULL_MATRIX or JSON), - for stdin")->required();
    sub->add_option("--format", c.format, "tsplib | json | auto")->capture_default_str();
  };
  auto solver_opts = [&](CLI::App* sub) {
    sub->add_option("--epsilon", c.epsilon, "epsilon as p/q")->capture_default_str();
    sub->add_option("--delta", c.delta, "delta as p/q, in (1/2, 1)")->capture_default_str();
  };
  auto sweep_opts = [&](CLI::App* sub) {
    sub->add_option("--seeds", s.seeds, "number of seeds")->capture_default_str();
    sub->add_option("--seed", s.seed, "first seed")->capture_default_str();
    sub->add_option("--kind", s.kind, "generator kind")->capture_default_str();
    sub->add_option("--threads", s.threads, "worker threads")->capture_default_str();
  };
  app.add_option("--dump-dir", c.dump_dir, "directory for failure dumps (default: system temp)");
  app.add_flag("--human", c.human, "add decimal approximations / print tables");

  CLI::App* solve = app.add_subcommand("solve", "approximate tour and report");
  input_opts(solve);
  solver_opts(solve);
  solve->add_option("--trace", c.trace, "write merge-engine events as JSON lines");
  CLI::App* hk = app.add_subcommand("hk", "Held-Karp value and optimal x");
  input_opts(hk);
  CLI::App* dual = app.add_subcommand("dual", "laminar optimal dual");
  input_opts(dual);
  CLI::App* backbone = app.add_subcommand("backbone", "quasi-backbone of an irreducible instance");
  input_opts(backbone);
  solver_opts(backbone);
  CLI::App* compare = app.add_subcommand("oracle-compare", "compare against the exact optimum over seeds");
  solver_opts(compare);
  sweep_opts(compare);
  compare->add_option("--min-n", s.min_n)->capture_default_str();
  compare->add_option("--max-n", s.max_n)->capture_default_str();
  CLI::App* bench = app.add_subcommand("bench", "time end-to-end solves");
  solver_opts(bench);
  sweep_opts(bench);
  bench->add_option("--n", n)->capture_default_str();
  CLI::App* gen = app.add_subcommand("generate", "write a generated instance");
  gen->add_option("--kind", s.kind, "random | sparse | node-weighted | two-weight | gadget name")->capture_default_str();
  gen->add_option("--n", n)->capture_default_str();
  gen->add_option("--seed", s.seed)->capture_default_str();
  gen->add_option("--format", c.format, "json | tsplib")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::ostringstream command;
  for (int i = 0; i < argc; ++i) command << (i ? " " : "") << argv[i];
  try {
    if (*solve) return cmd_solve(c);
    if (*hk) return cmd_hk(c);
    if (*dual) return cmd_dual(c);
    if (*backbone) return cmd_backbone(c);
    if (*compare) return cmd_oracle_compare(c, s);
    if (*bench) return cmd_bench(c, s, n);
    if (*gen) {
      if (c.format == "auto") c.format = "json";
      return cmd_generate(c, s, n);
    }
  } catch (const atsp::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const atsp::InvariantViolation& e) {
    const std::string path = write_dump(c, e.what(), command.str());
    std::cerr << "internal error: " << e.what() << "\ndump written to " << path << '\n';
    return 3;
  } catch (const atsp::SolveError& e) {
    std::cerr << "solve error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
