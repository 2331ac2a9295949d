#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detour/attack_eval.hpp"
#include "detour/dist_analyzer.hpp"
#include "detour/model_gateway.hpp"
#include "detour/prompt.hpp"

namespace detour::refine {

enum class FeedbackMode { rule_based, model_backed };

FeedbackMode parse_feedback_mode(const std::string& name);
std::string to_string(FeedbackMode m);

/// Settings of one optimization run.
struct OptimizationConfig {
  int rounds = 10;          // >= 1
  double threshold = 0.6;   // stop once S >= threshold, in [0,1]
  std::uint64_t seed = 1;
  CombineStrategy combine = CombineStrategy::suffix;
  FeedbackMode feedback = FeedbackMode::rule_based;

  void validate() const;
};

/// Structured edit suggestions for one round: tokens to retain, tokens to
/// swap out with candidate replacements, distractor phrases to add, and an
/// optional clause permutation. At least one field must carry content.
struct FeedbackReport {
  std::vector<std::string> keep_tokens;
  std::vector<std::pair<std::string, std::vector<std::string>>> replace_tokens;
  std::vector<std::string> insert_distractors;
  std::optional<std::vector<std::size_t>> reorder_hint;
  std::string rationale;
  bool fallback_used = false;

  bool has_edits() const;
};

/// Replacement candidates for low-impact words. Ships as a data file;
/// defaults() embeds the bundled content.
struct Lexicon {
  std::map<std::string, std::vector<std::string>> synonyms;

  static Lexicon defaults();
  static Lexicon load(const std::filesystem::path& file);
};

/// Distractor phrases available for insertion. Ships as a data file.
struct DistractorLibrary {
  std::vector<std::string> phrases;

  static DistractorLibrary defaults();
  static DistractorLibrary load(const std::filesystem::path& file);
};

/// Turns (prompt, attack score, analysis report) into edit suggestions.
///
/// rule_based is fully deterministic: tokens of the prompt that show up as
/// key tokens are kept; the lowest-impact lexicon-covered tokens are marked
/// for replacement; one distractor is proposed whenever the score sits below
/// a round-indexed schedule; a clause reorder is proposed after two
/// consecutive non-improving rounds. model_backed renders a request template
/// and parses the structured reply, falling back to the rule-based path when
/// the reply does not parse.
class FeedbackGenerator {
 public:
  FeedbackGenerator(FeedbackMode mode, Lexicon lexicon, DistractorLibrary distractors,
                    std::uint64_t seed, gateway::ChatBackend* model = nullptr);

  FeedbackReport generate(const InjectionPrompt& prompt, const eval::AttackScore& score,
                          const dist::AnalysisReport& report);

  /// Distractor gate: a distractor is proposed while S < schedule(round).
  static double distractor_schedule(int round);

  int rounds_seen() const { return round_; }

 private:
  FeedbackReport rule_based(const InjectionPrompt& prompt, const eval::AttackScore& score,
                            const dist::AnalysisReport& report);
  FeedbackReport model_backed(const InjectionPrompt& prompt, const eval::AttackScore& score,
                              const dist::AnalysisReport& report);

  FeedbackMode mode_;
  Lexicon lexicon_;
  DistractorLibrary distractors_;
  std::uint64_t seed_;
  gateway::ChatBackend* model_;
  int round_ = 0;
  std::vector<double> score_history_;
};

/// Apply feedback to a prompt: replacements, then insertions, then the
/// clause reorder. Tokens listed in keep_tokens are never replaced. The
/// result carries generation + 1; if the edits would empty the text the
/// input prompt is returned unchanged (same generation) so the caller can
/// flag the round.
InjectionPrompt prompt_update(const InjectionPrompt& prompt, const FeedbackReport& feedback,
                              std::uint64_t seed);

/// One optimization-round snapshot for the run log.
struct RunRecord {
  int round = 0;
  std::string prompt_text;
  double score = 0.0;
  std::optional<double> distribution_score;
  std::vector<dist::KeyToken> key_tokens;
  bool best_so_far = false;
  bool analysis_available = true;
  std::vector<std::string> flags;
  double duration_ms = 0.0;  // wall clock; excluded from determinism checks
};

struct OptimizeResult {
  InjectionPrompt best_prompt;
  double best_score = 0.0;
  std::vector<RunRecord> records;
  bool reached_threshold = false;
  bool aborted = false;
  std::string abort_reason;
  int evaluator_calls = 0;
};

/// Sink invoked once per completed round, with the evaluator outcome of that
/// round alongside the record.
using RoundSink = std::function<void(const RunRecord&, const eval::EvalOutcome&)>;

/// Closed-loop prompt optimization:
///   keep an incumbent (T*, S*), evaluate each round, adopt strictly better
///   prompts, stop early once S >= threshold, otherwise analyze the
///   distribution shift, generate feedback and update the prompt. A hard
///   evaluator failure aborts the run with the incumbent preserved.
OptimizeResult optimize(const InjectionPrompt& initial, const OptimizationConfig& cfg,
                        std::span<const std::string> instructions, eval::AttackEvaluator& evaluator,
                        dist::DistributionAnalyzer& analyzer, FeedbackGenerator& feedback,
                        const RoundSink& sink = {});

}  // namespace detour::refine
