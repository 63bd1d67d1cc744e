#include "gtqa/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gtqa/errors.hpp"

namespace gtqa {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

void check_format(const json& j, const std::string& expected) {
  if (j.contains("format") && j["format"].get<std::string>() != expected)
    throw Error(ErrorKind::Io, "expected format '" + expected + "'");
  if (j.contains("format_version") && j["format_version"].get<int>() > kFormatVersion)
    throw Error(ErrorKind::Io, "file format version is newer than this reader");
}

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::Io, "malformed JSON");
  return j;
}

json complex_to_json(const cdouble& v) { return json::array({v.real(), v.imag()}); }

cdouble complex_from_json(const json& j) {
  return cdouble(j.at(0).get<double>(), j.at(1).get<double>());
}

json tensor_to_json(const DenseTensor& t) {
  json axes = json::array();
  for (const Axis& ax : t.axes()) axes.push_back(json::array({ax.label, ax.dim}));
  json data = json::array();
  for (const cdouble& v : t.data()) data.push_back(complex_to_json(v));
  return json{{"axes", axes}, {"data", data}};
}

DenseTensor tensor_from_json(const json& j) {
  std::vector<Axis> axes;
  for (const auto& ax : j.at("axes"))
    axes.push_back({ax.at(0).get<std::string>(), ax.at(1).get<int>()});
  std::vector<cdouble> data;
  data.reserve(j.at("data").size());
  for (const auto& v : j.at("data")) data.push_back(complex_from_json(v));
  return DenseTensor(std::move(axes), std::move(data));
}

json graph_to_json_obj(const ConnectivityGraph& g) {
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back(json::array({e.a, e.b}));
  return json{{"format", "gtqa.graph"},
              {"format_version", kFormatVersion},
              {"n", g.vertex_count()},
              {"edges", edges}};
}

ConnectivityGraph graph_from_json_obj(const json& j) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return ConnectivityGraph(j.at("n").get<int>(), edges);
}

json config_to_json_obj(const AnnealConfig& config) {
  json j{{"total_time", config.total_time}, {"dt", config.dt},
         {"chi", config.chi},               {"bp_eps", config.bp_eps},
         {"bp_max_iters", config.bp_max_iters}, {"bp_damping", config.bp_damping},
         {"r_max", config.r_max},           {"rcond", config.rcond},
         {"seed", config.seed},             {"checkpoint_every", config.checkpoint_every}};
  if (!config.schedule_times.empty()) {
    j["schedule_times"] = config.schedule_times;
    j["schedule_values"] = config.schedule_values;
  }
  return j;
}

AnnealConfig config_from_json_obj(const json& j) {
  AnnealConfig config;
  config.total_time = j.at("total_time").get<double>();
  config.dt = j.at("dt").get<double>();
  config.chi = j.at("chi").get<int>();
  config.bp_eps = j.value("bp_eps", config.bp_eps);
  config.bp_max_iters = j.value("bp_max_iters", config.bp_max_iters);
  config.bp_damping = j.value("bp_damping", config.bp_damping);
  config.r_max = j.value("r_max", config.r_max);
  config.rcond = j.value("rcond", config.rcond);
  config.seed = j.value("seed", config.seed);
  config.checkpoint_every = j.value("checkpoint_every", config.checkpoint_every);
  if (j.contains("schedule_times")) {
    config.schedule_times = j["schedule_times"].get<std::vector<double>>();
    config.schedule_values = j["schedule_values"].get<std::vector<double>>();
  }
  return config;
}

json state_to_json_obj(const VidalState& state) {
  json gammas = json::array();
  for (const DenseTensor& t : state.gammas) gammas.push_back(tensor_to_json(t));
  json lambdas = json::array();
  for (const Eigen::VectorXd& l : state.lambdas)
    lambdas.push_back(std::vector<double>(l.data(), l.data() + l.size()));
  return json{{"graph", graph_to_json_obj(state.graph)},
              {"gammas", gammas},
              {"lambdas", lambdas}};
}

VidalState state_from_json_obj(const json& j) {
  VidalState state;
  state.graph = graph_from_json_obj(j.at("graph"));
  for (const auto& t : j.at("gammas")) state.gammas.push_back(tensor_from_json(t));
  for (const auto& l : j.at("lambdas")) {
    std::vector<double> vals = l.get<std::vector<double>>();
    state.lambdas.push_back(Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size()));
  }
  if (static_cast<int>(state.gammas.size()) != state.graph.vertex_count() ||
      static_cast<int>(state.lambdas.size()) != state.graph.edge_count())
    throw Error(ErrorKind::Io, "snapshot state does not match its graph");
  return state;
}

json matrix2_to_json(const Eigen::Matrix2cd& m) {
  json out = json::array();
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) out.push_back(complex_to_json(m(i, k)));
  return out;
}

Eigen::Matrix2cd matrix2_from_json(const json& j) {
  Eigen::Matrix2cd m;
  m(0, 0) = complex_from_json(j.at(0));
  m(0, 1) = complex_from_json(j.at(1));
  m(1, 0) = complex_from_json(j.at(2));
  m(1, 1) = complex_from_json(j.at(3));
  return m;
}

json report_to_json_obj(const RunReport& report) {
  json diagnostics = json::array();
  for (const LayerDiagnostics& d : report.layer_diagnostics)
    diagnostics.push_back(json{{"residual_before", d.residual_before},
                               {"regauged", d.regauged},
                               {"bp_iterations", d.bp_iterations},
                               {"bp_distance", d.bp_distance},
                               {"bp_converged", d.bp_converged},
                               {"max_truncation_error", d.max_truncation_error}});
  json j{{"layers", report.layers},
         {"bitstring", report.bitstring},
         {"objective", report.objective_value},
         {"final_fidelity", report.final_fidelity},
         {"entropy_trace", report.entropy_trace},
         {"infidelity_trace", report.infidelity_trace},
         {"z_trajectory", report.z_trajectory},
         {"layer_diagnostics", diagnostics},
         {"bipartition_a", report.bipartition.part_a}};
  if (!report.rdm_trajectory.empty()) {
    json rdms = json::array();
    for (const auto& row : report.rdm_trajectory) {
      json r = json::array();
      for (const auto& m : row) r.push_back(matrix2_to_json(m));
      rdms.push_back(r);
    }
    j["rdm_trajectory"] = rdms;
  }
  return j;
}

RunReport report_from_json_obj(const json& j, const ConnectivityGraph& graph) {
  RunReport report;
  report.layers = j.at("layers").get<int>();
  report.bitstring = j.at("bitstring").get<std::vector<int>>();
  report.objective_value = j.at("objective").get<double>();
  report.final_fidelity = j.at("final_fidelity").get<double>();
  report.entropy_trace = j.at("entropy_trace").get<std::vector<double>>();
  report.infidelity_trace = j.at("infidelity_trace").get<std::vector<double>>();
  report.z_trajectory = j.at("z_trajectory").get<std::vector<std::vector<double>>>();
  for (const auto& d : j.at("layer_diagnostics")) {
    LayerDiagnostics diag;
    diag.residual_before = d.at("residual_before").get<double>();
    diag.regauged = d.at("regauged").get<bool>();
    diag.bp_iterations = d.at("bp_iterations").get<int>();
    diag.bp_distance = d.at("bp_distance").get<double>();
    diag.bp_converged = d.at("bp_converged").get<bool>();
    diag.max_truncation_error = d.at("max_truncation_error").get<double>();
    report.layer_diagnostics.push_back(diag);
  }
  if (!j.at("bipartition_a").empty())
    report.bipartition = make_bipartition(graph, j.at("bipartition_a").get<std::vector<int>>());
  if (j.contains("rdm_trajectory"))
    for (const auto& row : j["rdm_trajectory"]) {
      std::vector<Eigen::Matrix2cd> r;
      for (const auto& m : row) r.push_back(matrix2_from_json(m));
      report.rdm_trajectory.push_back(std::move(r));
    }
  return report;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string graph_to_json(const ConnectivityGraph& g) { return graph_to_json_obj(g).dump(); }

ConnectivityGraph graph_from_json(const std::string& text) {
  json j = parse(text);
  check_format(j, "gtqa.graph");
  return graph_from_json_obj(j);
}

void save_graph(const std::string& path, const ConnectivityGraph& g) {
  write_text_file(path, graph_to_json(g) + "\n");
}

ConnectivityGraph load_graph(const std::string& path) {
  return graph_from_json(read_text_file(path));
}

std::string instance_to_json(const ProblemInstance& instance) {
  json edges = json::array();
  for (int e = 0; e < instance.graph.edge_count(); ++e) {
    const Edge& edge = instance.graph.edge(e);
    edges.push_back(json::array({edge.a, edge.b, instance.coupling[e]}));
  }
  json j{{"format", "gtqa.instance"},
         {"format_version", kFormatVersion},
         {"n", instance.graph.vertex_count()},
         {"edges", edges},
         {"h", instance.field},
         {"kind", instance.kind == ProblemKind::Qubo ? "qubo" : "maxcut"}};
  return j.dump();
}

ProblemInstance instance_from_json(const std::string& text) {
  json j = parse(text);
  check_format(j, "gtqa.instance");
  ProblemInstance instance;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> couplings;
  for (const auto& e : j.at("edges")) {
    edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    couplings.push_back(e.at(2).get<double>());
  }
  instance.graph = ConnectivityGraph(j.at("n").get<int>(), edges);
  // Couplings arrive in input order; rearrange to canonical edge order.
  instance.coupling.resize(couplings.size());
  for (size_t i = 0; i < edges.size(); ++i)
    instance.coupling[instance.graph.edge_index(edges[i].first, edges[i].second)] = couplings[i];
  instance.field = j.at("h").get<std::vector<double>>();
  if (static_cast<int>(instance.field.size()) != instance.graph.vertex_count())
    throw Error(ErrorKind::Io, "field vector length does not match n");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "qubo")
    instance.kind = ProblemKind::Qubo;
  else if (kind == "maxcut")
    instance.kind = ProblemKind::MaxCut;
  else
    throw Error(ErrorKind::Io, "unknown instance kind '" + kind + "'");
  return instance;
}

void save_instance(const std::string& path, const ProblemInstance& instance) {
  write_text_file(path, instance_to_json(instance) + "\n");
}

ProblemInstance load_instance(const std::string& path) {
  return instance_from_json(read_text_file(path));
}

std::string snapshot_to_json(const Snapshot& snapshot) {
  json j{{"format", "gtqa.snapshot"},
         {"format_version", kFormatVersion},
         {"instance", parse(instance_to_json(snapshot.instance))},
         {"config", config_to_json_obj(snapshot.config)},
         {"next_layer", snapshot.checkpoint.next_layer},
         {"fidelity", snapshot.checkpoint.fidelity},
         {"state", state_to_json_obj(snapshot.checkpoint.state)},
         {"partial_report", report_to_json_obj(snapshot.checkpoint.partial)}};
  return j.dump();
}

Snapshot snapshot_from_json(const std::string& text) {
  json j = parse(text);
  check_format(j, "gtqa.snapshot");
  Snapshot snapshot;
  snapshot.instance = instance_from_json(j.at("instance").dump());
  snapshot.config = config_from_json_obj(j.at("config"));
  snapshot.checkpoint.next_layer = j.at("next_layer").get<int>();
  snapshot.checkpoint.fidelity = j.at("fidelity").get<double>();
  snapshot.checkpoint.state = state_from_json_obj(j.at("state"));
  snapshot.checkpoint.partial =
      report_from_json_obj(j.at("partial_report"), snapshot.instance.graph);
  return snapshot;
}

void save_snapshot(const std::string& path, const Snapshot& snapshot) {
  write_text_file(path, snapshot_to_json(snapshot) + "\n");
}

Snapshot load_snapshot(const std::string& path) {
  return snapshot_from_json(read_text_file(path));
}

std::string report_to_json(const RunReport& report, const ProblemInstance& instance,
                           const AnnealConfig& config,
                           const std::optional<std::string>& metadata_json) {
  json j = report_to_json_obj(report);
  j["format"] = "gtqa.report";
  j["format_version"] = kFormatVersion;
  j["config"] = config_to_json_obj(config);
  j["kind"] = instance.kind == ProblemKind::Qubo ? "qubo" : "maxcut";
  if (instance.kind == ProblemKind::MaxCut)
    j["cut_value"] = cut_value(instance, report.bitstring);
  if (metadata_json) j["metadata"] = parse(*metadata_json);
  return j.dump();
}

void save_report(const std::string& path, const RunReport& report,
                 const ProblemInstance& instance, const AnnealConfig& config,
                 const std::optional<std::string>& metadata_json) {
  write_text_file(path, report_to_json(report, instance, config, metadata_json) + "\n");
}

void write_z_csv(const std::string& path, const RunReport& report) {
  std::ostringstream out;
  out << "layer,qubit,z\n";
  for (size_t k = 0; k < report.z_trajectory.size(); ++k)
    for (size_t a = 0; a < report.z_trajectory[k].size(); ++a)
      out << (k + 1) << ',' << a << ',' << format_double(report.z_trajectory[k][a]) << '\n';
  write_text_file(path, out.str());
}

void write_trace_csv(const std::string& path, const RunReport& report) {
  std::ostringstream out;
  out << "layer,entropy,infidelity\n";
  for (size_t k = 0; k < report.entropy_trace.size(); ++k)
    out << (k + 1) << ',' << format_double(report.entropy_trace[k]) << ','
        << format_double(report.infidelity_trace[k]) << '\n';
  write_text_file(path, out.str());
}

void write_loops_csv(const std::string& path, const ConnectivityGraph& g,
                     const std::vector<std::optional<int>>& loops) {
  std::ostringstream out;
  out << "edge_a,edge_b,shortest_loop\n";
  for (int e = 0; e < g.edge_count(); ++e) {
    out << g.edge(e).a << ',' << g.edge(e).b << ',';
    if (loops[e]) out << *loops[e];
    out << '\n';
  }
  write_text_file(path, out.str());
}

std::string sample_to_jsonl(const SampleTrace& trace, double objective_value) {
  json j{{"bitstring", trace.bitstring},
         {"log_probability", trace.log_probability},
         {"objective", objective_value},
         {"probabilities", trace.probabilities},
         {"residuals", trace.residuals},
         {"bp_iterations", trace.bp_iterations}};
  return j.dump();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error(ErrorKind::Io, "short write to '" + path + "'");
}

}  // namespace gtqa
