#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detour/attack_eval.hpp"
#include "detour/dist_analyzer.hpp"
#include "detour/model_gateway.hpp"
#include "detour/nav_metrics.hpp"
#include "detour/refine_loop.hpp"
#include "detour/victim_world.hpp"

#include <nlohmann/json_fwd.hpp>

namespace detour::harness {

/// Which surrogate the analyzer talks to. "synthetic" and "table" are fully
/// offline; "http" reaches a real service and is rejected in offline runs.
struct SurrogateSpec {
  std::string kind = "synthetic";
  std::uint64_t seed = 7;
  std::string table_path;  // trace-table file for kind == "table"
  gateway::BackendConfig http;
};

/// Everything one run needs. Loaded from a single JSON document; relative
/// paths are resolved against the config file's directory.
struct RunConfig {
  eval::MetricWeights weights;
  nav::NeVariant ne_variant = nav::NeVariant::final_distance;
  dist::AnalyzerConfig analyzer;
  refine::OptimizationConfig loop;
  std::string initial_prompt;
  std::string world_path;
  bool defense = false;
  SurrogateSpec surrogate;
  std::optional<gateway::BackendConfig> feedback_model;
  world::SusceptibilityPolicy susceptibility = world::SusceptibilityPolicy::defaults();
  std::optional<std::uint64_t> agent_seed;  // defaults to loop.seed
  std::string lexicon_path;
  std::string distractors_path;
  std::string out_dir = "runs";

  std::string source;  // config file name, for diagnostics
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;
};

RunConfig load_run_config(const std::filesystem::path& file);
RunConfig run_config_from_json(const nlohmann::json& doc, const std::string& source,
                               const std::filesystem::path& base_dir);

/// Canonical serialization (sorted keys, defaults materialized) and its
/// FNV-1a hash. Every output artifact embeds the hash.
nlohmann::json canonical_config_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

/// Write-temp-then-rename.
void atomic_write_file(const std::filesystem::path& file, const std::string& content);

/// One row of a comparison table. spl/ndtw/cls are scaled by 100; asr is a
/// percentage (absent for clean rows only in rendering, never in data).
struct ReportRow {
  std::string label;
  double asr = 0.0;
  double tl = 0.0;
  double ne = 0.0;
  double spl = 0.0;
  double ndtw = 0.0;
  double cls = 0.0;
  std::string config_hash;
};

struct ReportTable {
  std::vector<ReportRow> rows;

  std::string render() const;
  nlohmann::json to_json() const;
};

// ---- metrics ----

struct MetricsOutput {
  std::vector<std::pair<std::string, nav::MetricVector>> per_episode;
  nav::MetricVector aggregate;  // means; spl/ndtw/cls in [0,1]
  std::string render() const;
  nlohmann::json to_json() const;
};

/// Load trajectory files (one JSON episode per file) and compute per-episode
/// plus aggregate metrics.
MetricsOutput run_metrics(std::span<const std::filesystem::path> files,
                          nav::NeVariant variant = nav::NeVariant::final_distance);

nav::Episode load_trajectory_file(const std::filesystem::path& file);

// ---- analyze ----

std::string render_analysis(const dist::AnalysisReport& report);
nlohmann::json analysis_to_json(const dist::AnalysisReport& report);

/// Offline analysis from a trace file.
dist::AnalysisReport run_analyze_trace_file(const std::filesystem::path& file,
                                            const dist::AnalyzerConfig& cfg);

/// Live analysis through the configured surrogate.
dist::AnalysisReport run_analyze_texts(const RunConfig& cfg, const std::string& original,
                                       const std::string& injected, bool offline);

// ---- optimize ----

struct OptimizeRunOutput {
  refine::OptimizeResult result;
  std::string config_hash;
  std::filesystem::path log_path;
  std::filesystem::path result_path;
};

/// Full offline-capable optimization run: builds the world, victim, baseline,
/// evaluator, analyzer and feedback generator from the config, executes the
/// loop and writes run.jsonl plus result.json into out_dir.
OptimizeRunOutput run_optimize(const RunConfig& cfg, const std::filesystem::path& out_dir,
                               bool offline);

// ---- baseline ----

/// Comparison over {none, naive, escape, ignore, combined, optimized}.
ReportTable run_baseline(const RunConfig& cfg, const std::string& payload,
                         const std::filesystem::path& out_dir, bool offline);

// ---- report ----

struct ReportOutput {
  ReportTable table;     // one row per run log
  std::string series_csv;  // round,S,D,best,config_hash
  nlohmann::json to_json() const;
};

/// Aggregate one or more run logs. Mixed config hashes are refused unless
/// force is set, in which case rows are tagged by hash.
ReportOutput run_report(std::span<const std::filesystem::path> logs, bool force);

}  // namespace detour::harness
