// Versioned file formats: graph / instance JSON, state snapshots for
// checkpoint-resume and sampling, run reports plus CSV time series.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gtqa/anneal.hpp"
#include "gtqa/graph.hpp"
#include "gtqa/sampling.hpp"
#include "gtqa/tn.hpp"

namespace gtqa {

std::string graph_to_json(const ConnectivityGraph& g);
ConnectivityGraph graph_from_json(const std::string& text);
void save_graph(const std::string& path, const ConnectivityGraph& g);
ConnectivityGraph load_graph(const std::string& path);

std::string instance_to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const std::string& text);
void save_instance(const std::string& path, const ProblemInstance& instance);
ProblemInstance load_instance(const std::string& path);

// Self-contained snapshot: problem, configuration and the mid- or post-run
// checkpoint (state plus accumulated traces).
struct Snapshot {
  ProblemInstance instance;
  AnnealConfig config;
  RunCheckpoint checkpoint;
};

std::string snapshot_to_json(const Snapshot& snapshot);
Snapshot snapshot_from_json(const std::string& text);
void save_snapshot(const std::string& path, const Snapshot& snapshot);
Snapshot load_snapshot(const std::string& path);

// Deterministic report serialization; wall-clock metadata is the caller's
// business and lives under a separate "metadata" key when provided.
std::string report_to_json(const RunReport& report, const ProblemInstance& instance,
                           const AnnealConfig& config,
                           const std::optional<std::string>& metadata_json = std::nullopt);
void save_report(const std::string& path, const RunReport& report,
                 const ProblemInstance& instance, const AnnealConfig& config,
                 const std::optional<std::string>& metadata_json = std::nullopt);

void write_z_csv(const std::string& path, const RunReport& report);
void write_trace_csv(const std::string& path, const RunReport& report);
void write_loops_csv(const std::string& path, const ConnectivityGraph& g,
                     const std::vector<std::optional<int>>& loops);

std::string sample_to_jsonl(const SampleTrace& trace, double objective_value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace gtqa
