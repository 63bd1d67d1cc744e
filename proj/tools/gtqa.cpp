// Command-line front end: instance generation, annealing runs, measurement
// sampling, oracle verification, loop analysis and solver benchmarks.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gtqa/baselines.hpp"
#include "gtqa/errors.hpp"
#include "gtqa/io.hpp"
#include "gtqa/oracle.hpp"
#include "gtqa/sampling.hpp"

using namespace gtqa;
using nlohmann::json;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Numerical:
    case ErrorKind::Degenerate:
    case ErrorKind::Generation:
      return 3;
    case ErrorKind::Capacity:
      return 4;
    default:
      return 2;
  }
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string timestamp_metadata() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return json{{"timestamp", buf}}.dump();
}

int default_threads() {
  if (const char* env = std::getenv("GTQA_THREADS")) {
    int value = std::atoi(env);
    if (value > 0) return value;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs jobs 0..count-1 on a small worker pool; results land by index.
void parallel_for(int count, int threads, const std::function<void(int)>& job) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct AnnealFlags {
  double total_time = 20.0;
  double dt = 0.2;
  int chi = 4;
  double bp_eps = 1e-8;
  int bp_max_iters = 100;
  double bp_damping = 0.0;
  double r_max = 1e-3;
  double rcond = 1e-12;
  std::uint64_t seed = 0;
  std::string schedule;  // "t:s,t:s,..." tabulated mixing schedule

  void attach(CLI::App* cmd) {
    cmd->add_option("--T", total_time, "Total annealing time");
    cmd->add_option("--dt", dt, "Trotter step (default 0.2)");
    cmd->add_option("--chi", chi, "Maximal bond dimension");
    cmd->add_option("--bp-eps", bp_eps, "BP convergence threshold");
    cmd->add_option("--bp-max-iters", bp_max_iters, "Maximal BP sweeps");
    cmd->add_option("--damping", bp_damping, "BP damping factor in [0,1)");
    cmd->add_option("--r-max", r_max, "Residual threshold triggering a regauge");
    cmd->add_option("--rcond", rcond, "Pseudo-inverse cutoff");
    cmd->add_option("--seed", seed, "Random seed");
    cmd->add_option("--schedule", schedule,
                    "Tabulated schedule 't:s,t:s,...' (default: linear 1 - t/T)");
  }

  AnnealConfig config() const {
    AnnealConfig c;
    c.total_time = total_time;
    c.dt = dt;
    c.chi = chi;
    c.bp_eps = bp_eps;
    c.bp_max_iters = bp_max_iters;
    c.bp_damping = bp_damping;
    c.r_max = r_max;
    c.rcond = rcond;
    c.seed = seed;
    if (!schedule.empty()) {
      std::stringstream ss(schedule);
      std::string entry;
      while (std::getline(ss, entry, ',')) {
        const auto colon = entry.find(':');
        if (colon == std::string::npos)
          throw Error(ErrorKind::Parameter, "schedule entries must look like t:s");
        c.schedule_times.push_back(std::stod(entry.substr(0, colon)));
        c.schedule_values.push_back(std::stod(entry.substr(colon + 1)));
      }
    }
    return c;
  }
};

void print_layer_diagnostics(const RunReport& report) {
  for (size_t k = 0; k < report.layer_diagnostics.size(); ++k) {
    const LayerDiagnostics& d = report.layer_diagnostics[k];
    std::cerr << "layer " << (k + 1) << ": R=" << d.residual_before
              << (d.regauged ? " regauged" : "") << " bp_iters=" << d.bp_iterations
              << " bp_dist=" << d.bp_distance << (d.bp_converged ? "" : " (not converged)")
              << " max_trunc_err=" << d.max_truncation_error << '\n';
  }
}

int cmd_gen(int n, int d, const std::string& kind, std::uint64_t seed, const std::string& out) {
  ConnectivityGraph graph = random_regular(n, d, seed);
  ProblemInstance instance;
  if (kind == "qubo")
    instance = random_qubo(graph, mix(seed, 1));
  else if (kind == "maxcut")
    instance = maxcut_instance(graph);
  else
    throw Error(ErrorKind::Parameter, "kind must be qubo or maxcut");
  save_instance(out, instance);
  std::cout << "wrote " << out << " (n=" << n << ", edges=" << graph.edge_count() << ", kind="
            << kind << ")\n";
  return 0;
}

int cmd_run(const std::string& instance_path, const AnnealFlags& flags,
            const std::string& out_prefix, const std::string& save_state_path,
            const std::string& checkpoint_path, int checkpoint_every,
            const std::string& resume_path, bool verbose) {
  ProblemInstance instance;
  AnnealConfig config;
  VidalState state{};
  RunReport report;

  CheckpointSink sink;
  ProblemInstance* instance_ptr = &instance;
  AnnealConfig* config_ptr = &config;
  if (!checkpoint_path.empty()) {
    sink = [&, instance_ptr, config_ptr](const RunCheckpoint& cp) {
      Snapshot snapshot{*instance_ptr, *config_ptr, cp};
      save_snapshot(checkpoint_path, snapshot);
    };
  }

  if (!resume_path.empty()) {
    Snapshot snapshot = load_snapshot(resume_path);
    instance = snapshot.instance;
    config = snapshot.config;
    config.checkpoint_every = checkpoint_every;
    std::tie(state, report) = resume_gtqa(instance, config, snapshot.checkpoint, sink);
  } else {
    instance = load_instance(instance_path);
    config = flags.config();
    config.checkpoint_every = checkpoint_every;
    std::tie(state, report) = run_gtqa(instance, config, sink);
  }

  save_report(out_prefix + ".report.json", report, instance, config, timestamp_metadata());
  write_z_csv(out_prefix + ".z.csv", report);
  write_trace_csv(out_prefix + ".trace.csv", report);
  if (!save_state_path.empty()) {
    RunCheckpoint final_cp;
    final_cp.next_layer = report.layers + 1;
    final_cp.fidelity = report.final_fidelity;
    final_cp.state = state;
    final_cp.partial = report;
    save_snapshot(save_state_path, Snapshot{instance, config, final_cp});
  }
  if (verbose) print_layer_diagnostics(report);
  std::cout << "layers=" << report.layers << " objective=" << report.objective_value
            << " estimated_fidelity=" << report.final_fidelity << '\n';
  if (instance.kind == ProblemKind::MaxCut)
    std::cout << "cut_value=" << cut_value(instance, report.bitstring) << '\n';
  return 0;
}

int cmd_sample(const std::string& state_path, int count, std::uint64_t seed,
               const std::string& order_spec, int tail, const std::string& out, bool verbose) {
  Snapshot snapshot = load_snapshot(state_path);
  const VidalState& state = snapshot.checkpoint.state;
  const int n = state.graph.vertex_count();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  bool shuffle_each = false;
  if (order_spec == "asc" || order_spec.empty()) {
  } else if (order_spec == "random") {
    shuffle_each = true;
  } else {
    order.clear();
    std::stringstream ss(order_spec);
    std::string item;
    while (std::getline(ss, item, ',')) order.push_back(std::stoi(item));
  }

  SampleOptions options;
  options.bp = {snapshot.config.bp_eps, snapshot.config.bp_max_iters, snapshot.config.bp_damping,
                false};
  options.rcond = snapshot.config.rcond;
  options.tail_brute_force = tail;
  options.instance = &snapshot.instance;

  std::ofstream out_stream(out, std::ios::trunc);
  if (!out_stream) throw Error(ErrorKind::Io, "cannot open '" + out + "'");
  std::mt19937_64 rng(seed);
  double best = 0;
  bool have_best = false;
  for (int i = 0; i < count; ++i) {
    std::vector<int> this_order = order;
    if (shuffle_each) std::shuffle(this_order.begin(), this_order.end(), rng);
    SampleTrace trace = sample_bitstring(state, this_order, rng, options);
    const double value = objective(snapshot.instance, trace.bitstring);
    out_stream << sample_to_jsonl(trace, value) << '\n';
    if (!have_best || value > best) {
      best = value;
      have_best = true;
    }
    if (verbose)
      std::cerr << "sample " << i << ": objective=" << value
                << " log_p=" << trace.log_probability << '\n';
  }
  std::cout << "samples=" << count << " best_objective=" << best;
  if (snapshot.instance.kind == ProblemKind::MaxCut)
    std::cout << " best_cut=" << (snapshot.instance.graph.edge_count() + best) / 2;
  std::cout << '\n';
  return 0;
}

json verify_one(const ProblemInstance& instance, const AnnealConfig& base_config) {
  AnnealConfig config = base_config;
  config.record_rdms = true;
  auto [state, report] = run_gtqa(instance, config);

  std::vector<std::vector<Eigen::Matrix2cd>> exact_rdms;
  std::vector<double> exact_entropies;
  DenseState final_state = DenseState::plus_state(instance.graph.vertex_count());
  exact_evolve(instance, config, [&](int layer, const DenseState& psi) {
    std::vector<Eigen::Matrix2cd> row(instance.graph.vertex_count());
    for (int a = 0; a < instance.graph.vertex_count(); ++a) row[a] = exact_rdm(psi, a);
    exact_rdms.push_back(std::move(row));
    exact_entropies.push_back(exact_entropy(psi, report.bipartition));
    if (layer == report.layers) final_state = psi;
  });

  const double epsilon =
      trace_distance_error(exact_rdms, report.rdm_trajectory, config.dt, config.total_time);
  const double entropy_error = entropy_rel_error(exact_entropies, report.entropy_trace);
  const double exact_fidelity = fidelity_vs_exact(final_state, state);

  json result{{"n", instance.graph.vertex_count()},
              {"layers", report.layers},
              {"epsilon", epsilon},
              {"entropy_rel_error", entropy_error},
              {"estimated_fidelity", report.final_fidelity},
              {"exact_fidelity", exact_fidelity},
              {"objective", report.objective_value}};
  if (instance.graph.vertex_count() <= 30) {
    OptimumResult best = brute_force_optimum(instance);
    result["optimum"] = best.value;
    result["optimum_gap"] = best.value - report.objective_value;
    result["optimum_degeneracy"] = best.degeneracy;
  }
  return result;
}

json quantiles(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * (values.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - lo) * (values[hi] - values[lo]);
  };
  return json{{"min", values.front()}, {"q25", at(0.25)},   {"median", at(0.5)},
              {"q75", at(0.75)},       {"max", values.back()}};
}

int cmd_verify(const std::string& instance_path, int n, int d, int seeds,
               std::uint64_t seed_base, const AnnealFlags& flags, const std::string& out,
               int threads) {
  json result;
  if (!instance_path.empty()) {
    ProblemInstance instance = load_instance(instance_path);
    result = verify_one(instance, flags.config());
  } else {
    if (n <= 0 || d <= 0 || seeds <= 0)
      throw Error(ErrorKind::Parameter, "batch verification needs --n, --d and --seeds");
    std::vector<json> records(seeds);
    parallel_for(seeds, threads, [&](int i) {
      ConnectivityGraph graph = random_regular(n, d, mix(seed_base, 2 * i));
      ProblemInstance instance = random_qubo(graph, mix(seed_base, 2 * i + 1));
      records[i] = verify_one(instance, flags.config());
    });
    std::vector<double> eps, entropy_err;
    json per_seed = json::array();
    for (const json& r : records) {
      eps.push_back(r["epsilon"].get<double>());
      entropy_err.push_back(r["entropy_rel_error"].get<double>());
      per_seed.push_back(r);
    }
    result = json{{"runs", per_seed},
                  {"epsilon_quantiles", quantiles(eps)},
                  {"entropy_rel_error_quantiles", quantiles(entropy_err)}};
  }
  result["format"] = "gtqa.verification";
  result["format_version"] = 1;
  write_text_file(out, result.dump(2) + "\n");
  if (result.contains("epsilon"))
    std::cout << "epsilon=" << result["epsilon"] << " entropy_rel_error="
              << result["entropy_rel_error"] << '\n';
  else
    std::cout << "median epsilon=" << result["epsilon_quantiles"]["median"]
              << " median entropy_rel_error="
              << result["entropy_rel_error_quantiles"]["median"] << '\n';
  std::cout << "wrote " << out << '\n';
  return 0;
}

int cmd_loops(const std::string& graph_path, bool heavy_hex, int n, int d, std::uint64_t seed,
              const std::string& out, const std::string& hist_out) {
  ConnectivityGraph graph;
  if (heavy_hex)
    graph = heavy_hex_lattice();
  else if (!graph_path.empty())
    graph = load_graph(graph_path);
  else if (n > 0 && d > 0)
    graph = random_regular(n, d, seed);
  else
    throw Error(ErrorKind::Parameter, "need --graph, --heavy-hex or --n/--d");

  auto loops = shortest_loop_lengths(graph);
  write_loops_csv(out, graph, loops);

  std::map<int, int> histogram;
  int acyclic = 0;
  for (const auto& l : loops) {
    if (l)
      ++histogram[*l];
    else
      ++acyclic;
  }
  if (!hist_out.empty()) {
    std::ostringstream hist;
    hist << "loop_length,count\n";
    for (auto [len, count] : histogram) hist << len << ',' << count << '\n';
    write_text_file(hist_out, hist.str());
  }
  if (histogram.empty())
    std::cout << "no loops (tree)\n";
  else
    std::cout << "min_loop=" << histogram.begin()->first << " edges_without_loops=" << acyclic
              << '\n';
  std::cout << "wrote " << out << '\n';
  return 0;
}

int cmd_bench(const std::string& instance_path, const std::string& solvers,
              const AnnealFlags& flags, const SaConfig& sa_config, const std::string& out,
              const std::string& format) {
  ProblemInstance instance = load_instance(instance_path);
  struct Row {
    std::string solver;
    double objective;
    long cut = -1;
  };
  std::vector<Row> rows;
  std::stringstream ss(solvers);
  std::string solver;
  while (std::getline(ss, solver, ',')) {
    if (solver == "gtqa") {
      auto [state, report] = run_gtqa(instance, flags.config());
      rows.push_back({"gtqa", report.objective_value,
                      instance.kind == ProblemKind::MaxCut
                          ? cut_value(instance, report.bitstring)
                          : -1});
    } else if (solver == "sa") {
      SaResult result = simulated_annealing(instance, sa_config);
      rows.push_back({"sa", result.value,
                      instance.kind == ProblemKind::MaxCut
                          ? cut_value(instance, result.bitstring)
                          : -1});
    } else if (solver == "brute") {
      OptimumResult best = brute_force_optimum(instance);
      rows.push_back({"brute", best.value,
                      instance.kind == ProblemKind::MaxCut
                          ? cut_value(instance, best.bitstring)
                          : -1});
    } else {
      throw Error(ErrorKind::Parameter, "unknown solver '" + solver + "'");
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.objective > b.objective; });

  std::ostringstream table;
  const bool maxcut = instance.kind == ProblemKind::MaxCut;
  if (format == "md") {
    table << "| solver | objective |" << (maxcut ? " cut |" : "") << '\n';
    table << "|---|---|" << (maxcut ? "---|" : "") << '\n';
    for (const Row& r : rows) {
      table << "| " << r.solver << " | " << r.objective << " |";
      if (maxcut) table << ' ' << r.cut << " |";
      table << '\n';
    }
  } else {
    table << "solver,objective" << (maxcut ? ",cut" : "") << '\n';
    for (const Row& r : rows) {
      table << r.solver << ',' << r.objective;
      if (maxcut) table << ',' << r.cut;
      table << '\n';
    }
  }
  write_text_file(out, table.str());
  std::cout << table.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph tensor-network quantum annealer"};
  app.require_subcommand(1);
  int threads = default_threads();

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a random problem instance");
  int gen_n = 0, gen_d = 3;
  std::string gen_kind = "qubo", gen_out = "instance.json";
  std::uint64_t gen_seed = 0;
  gen->add_option("--n", gen_n, "Vertex count")->required();
  gen->add_option("--d", gen_d, "Degree (default 3)");
  gen->add_option("--kind", gen_kind, "qubo or maxcut");
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--out", gen_out, "Output instance path");

  // run
  auto* run = app.add_subcommand("run", "Run the annealer on an instance");
  AnnealFlags run_flags;
  run_flags.attach(run);
  std::string run_instance, run_prefix = "run", run_save_state, run_checkpoint, run_resume;
  int run_checkpoint_every = 100;
  bool run_verbose = false;
  run->add_option("--instance", run_instance, "Instance JSON path");
  run->add_option("--out-prefix", run_prefix, "Prefix for report/CSV outputs");
  run->add_option("--save-state", run_save_state, "Write the final state snapshot here");
  run->add_option("--checkpoint", run_checkpoint, "Checkpoint snapshot path");
  run->add_option("--checkpoint-every", run_checkpoint_every, "Checkpoint interval in layers");
  run->add_option("--resume", run_resume, "Resume from a checkpoint snapshot");
  run->add_flag("-v,--verbose", run_verbose, "Per-layer diagnostics on stderr");

  // sample
  auto* sample = app.add_subcommand("sample", "Sample measurement outcomes from a snapshot");
  std::string sample_state, sample_out = "samples.jsonl", sample_order = "asc";
  int sample_count = 100, sample_tail = 0;
  std::uint64_t sample_seed = 0;
  bool sample_verbose = false;
  sample->add_option("--state", sample_state, "State snapshot path")->required();
  sample->add_option("--count", sample_count, "Number of samples");
  sample->add_option("--seed", sample_seed, "Random seed");
  sample->add_option("--order", sample_order, "asc, random, or a comma list of vertices");
  sample->add_option("--tail-brute-force", sample_tail,
                     "Optimize the last k bits exactly instead of sampling");
  sample->add_option("--out", sample_out, "Output JSONL path");
  sample->add_flag("-v,--verbose", sample_verbose, "Per-sample progress on stderr");

  // verify
  auto* verify = app.add_subcommand("verify", "Compare against the exact oracle");
  AnnealFlags verify_flags;
  verify_flags.attach(verify);
  std::string verify_instance, verify_out = "verification.json";
  int verify_n = 0, verify_d = 3, verify_seeds = 0;
  std::uint64_t verify_seed_base = 0;
  verify->add_option("--instance", verify_instance, "Instance JSON path (single mode)");
  verify->add_option("--n", verify_n, "Vertex count (batch mode)");
  verify->add_option("--d", verify_d, "Degree (batch mode)");
  verify->add_option("--seeds", verify_seeds, "Number of random instances (batch mode)");
  verify->add_option("--seed-base", verify_seed_base, "Base seed (batch mode)");
  verify->add_option("--out", verify_out, "Verification report path");
  verify->add_option("--threads", threads, "Worker threads (default: GTQA_THREADS or all cores)");

  // loops
  auto* loops = app.add_subcommand("loops", "Shortest-loop analysis of a graph");
  std::string loops_graph, loops_out = "loops.csv", loops_hist;
  bool loops_heavy_hex = false;
  int loops_n = 0, loops_d = 3;
  std::uint64_t loops_seed = 0;
  loops->add_option("--graph", loops_graph, "Graph JSON path");
  loops->add_flag("--heavy-hex", loops_heavy_hex, "Use the 127-vertex heavy-hex lattice");
  loops->add_option("--n", loops_n, "Vertex count for a random regular graph");
  loops->add_option("--d", loops_d, "Degree for a random regular graph");
  loops->add_option("--seed", loops_seed, "Seed for a random regular graph");
  loops->add_option("--out", loops_out, "Per-edge CSV path");
  loops->add_option("--hist", loops_hist, "Histogram CSV path");

  // bench
  auto* bench = app.add_subcommand("bench", "Compare solvers on one instance");
  AnnealFlags bench_flags;
  bench_flags.attach(bench);
  SaConfig sa_config;
  std::string bench_instance, bench_solvers = "gtqa,sa", bench_out = "bench.md",
              bench_format = "md";
  bench->add_option("--instance", bench_instance, "Instance JSON path")->required();
  bench->add_option("--solvers", bench_solvers, "Comma list: gtqa,sa,brute");
  bench->add_option("--sa-sweeps", sa_config.sweeps, "SA sweeps per restart");
  bench->add_option("--sa-restarts", sa_config.restarts, "SA restarts");
  bench->add_option("--sa-beta-start", sa_config.beta_start, "SA initial inverse temperature");
  bench->add_option("--sa-beta-end", sa_config.beta_end, "SA final inverse temperature");
  bench->add_option("--sa-seed", sa_config.seed, "SA seed");
  bench->add_option("--out", bench_out, "Output table path");
  bench->add_option("--format", bench_format, "md or csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed())
      return cmd_gen(gen_n, gen_d, gen_kind, gen_seed, gen_out);
    if (run->parsed()) {
      if (run_resume.empty() && run_instance.empty())
        throw Error(ErrorKind::Parameter, "run needs --instance or --resume");
      return cmd_run(run_instance, run_flags, run_prefix, run_save_state, run_checkpoint,
                     run_checkpoint_every, run_resume, run_verbose);
    }
    if (sample->parsed())
      return cmd_sample(sample_state, sample_count, sample_seed, sample_order, sample_tail,
                        sample_out, sample_verbose);
    if (verify->parsed())
      return cmd_verify(verify_instance, verify_n, verify_d, verify_seeds, verify_seed_base,
                        verify_flags, verify_out, threads);
    if (loops->parsed())
      return cmd_loops(loops_graph, loops_heavy_hex, loops_n, loops_d, loops_seed, loops_out,
                       loops_hist);
    if (bench->parsed())
      return cmd_bench(bench_instance, bench_solvers, bench_flags, sa_config, bench_out,
                       bench_format);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
