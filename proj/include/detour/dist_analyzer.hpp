#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "detour/model_gateway.hpp"
#include "detour/token_dist.hpp"

namespace detour::dist {

/// Knobs of the distribution analysis. alpha blends global divergence
/// against mean key-token impact; tau_token gates key-token selection;
/// epsilon smooths truncated distributions before KL.
struct AnalyzerConfig {
  double alpha = 0.5;
  double tau_token = 0.3;
  double epsilon = 1e-8;

  void validate() const;  // throws std::invalid_argument
};

/// Shannon entropy in nats over the listed tokens plus the tail bucket,
/// with 0 * ln 0 taken as 0.
double entropy(const TokenDist& d);

/// KL(att || ori) in nats over the union support plus the tail bucket.
/// Both sides are epsilon-smoothed and renormalized first, which keeps the
/// value finite under top-k truncation. Equal inputs give exactly 0.
double kl(const TokenDist& att, const TokenDist& ori, double epsilon);

/// Mean per-position KL over min(length) aligned positions. Rejects empty
/// traces.
double avg_kl(const DistTrace& att, const DistTrace& ori, double epsilon);

/// Per-position shift row. Positions are 1-based.
struct TokenScoreRow {
  std::size_t position = 0;
  std::string token;
  double delta_pmax = 0.0;     // max(att) - max(ori)
  double delta_entropy = 0.0;  // H_att - H_ori, nats
  double score = 0.0;          // |delta_pmax| + |delta_entropy|
};

std::vector<TokenScoreRow> token_scores(const DistTrace& att, const DistTrace& ori);

struct KeyToken {
  std::size_t position = 0;
  std::string token;
  double score = 0.0;
};

/// Rows whose score strictly exceeds tau_token.
std::vector<KeyToken> key_tokens(std::span<const TokenScoreRow> rows, double tau_token);

/// D = alpha * avg_kl + (1 - alpha) * mean(key-token score), with the second
/// term dropped when no key token was selected.
double distribution_score(double avg_kl_value, std::span<const KeyToken> selected, double alpha);

/// Full analyzer output. When the surrogate is unreachable the report is
/// flagged unavailable and carries no distribution score, so the
/// optimization loop can continue on the attack score alone.
struct AnalysisReport {
  bool available = true;
  std::string fault;
  double avg_kl = 0.0;
  std::vector<TokenScoreRow> rows;
  std::vector<KeyToken> key_tokens;
  std::optional<double> distribution_score;
};

/// Pure computation over two aligned traces (ori first, att second).
AnalysisReport analyze_traces(const DistTrace& ori, const DistTrace& att,
                              const AnalyzerConfig& cfg);

/// Analysis surface the refinement loop depends on.
class DistributionAnalyzer {
 public:
  virtual ~DistributionAnalyzer() = default;
  virtual AnalysisReport analyze(const std::string& original_instruction,
                                 const std::string& combined_instruction) = 0;
};

/// Obtains the surrogate's response to the original instruction once, then
/// teacher-forces that continuation under both contexts so every position is
/// comparable. Backend faults degrade the report instead of propagating.
class SurrogateAnalyzer final : public DistributionAnalyzer {
 public:
  SurrogateAnalyzer(gateway::LogprobBackend& backend, AnalyzerConfig cfg);

  AnalysisReport analyze(const std::string& original_instruction,
                         const std::string& combined_instruction) override;

 private:
  gateway::LogprobBackend& backend_;
  AnalyzerConfig cfg_;
};

/// Offline trace file: {"tokens": [...], "ori": [[[token, logprob], ...],
/// ...], "att": [...]}. Returns (ori, att) traces built with the tail-bucket
/// construction.
std::pair<DistTrace, DistTrace> load_trace_file(const std::filesystem::path& file);

}  // namespace detour::dist
