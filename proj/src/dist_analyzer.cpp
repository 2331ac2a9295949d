#include "detour/dist_analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "detour/errors.hpp"

#include <nlohmann/json.hpp>

namespace detour::dist {

using nlohmann::json;

void AnalyzerConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("analyzer: alpha must be in [0,1]");
  }
  if (!(tau_token >= 0.0)) {
    throw std::invalid_argument("analyzer: tau_token must be non-negative");
  }
  if (!(epsilon > 0.0 && epsilon <= 1e-3)) {
    throw std::invalid_argument("analyzer: epsilon must be in (0, 1e-3]");
  }
}

double entropy(const TokenDist& d) {
  double h = 0.0;
  for (const auto& [token, p] : d.probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  if (d.tail_mass > 0.0) h -= d.tail_mass * std::log(d.tail_mass);
  return h;
}

double kl(const TokenDist& att, const TokenDist& ori, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("kl: epsilon must be positive");
  }
  std::set<std::string> support;
  for (const auto& [token, p] : att.probs) support.insert(token);
  for (const auto& [token, p] : ori.probs) support.insert(token);

  // Union support plus the tail bucket, epsilon added everywhere, then both
  // sides renormalized. Identical inputs therefore give exactly zero.
  const double buckets = static_cast<double>(support.size()) + 1.0;
  auto mass = [](const TokenDist& d) {
    double total = d.tail_mass;
    for (const auto& [token, p] : d.probs) total += p;
    return total;
  };
  const double denom_att = mass(att) + buckets * epsilon;
  const double denom_ori = mass(ori) + buckets * epsilon;

  auto prob_of = [](const TokenDist& d, const std::string& token) {
    const auto it = d.probs.find(token);
    return it == d.probs.end() ? 0.0 : it->second;
  };

  double acc = 0.0;
  for (const std::string& token : support) {
    const double pa = (prob_of(att, token) + epsilon) / denom_att;
    const double po = (prob_of(ori, token) + epsilon) / denom_ori;
    acc += pa * std::log(pa / po);
  }
  const double ta = (att.tail_mass + epsilon) / denom_att;
  const double to = (ori.tail_mass + epsilon) / denom_ori;
  acc += ta * std::log(ta / to);
  return acc;
}

double avg_kl(const DistTrace& att, const DistTrace& ori, double epsilon) {
  const std::size_t length = std::min(att.length(), ori.length());
  if (length == 0) {
    throw std::invalid_argument("avg_kl: traces must be non-empty");
  }
  double acc = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    acc += kl(att.positions[t], ori.positions[t], epsilon);
  }
  return acc / static_cast<double>(length);
}

std::vector<TokenScoreRow> token_scores(const DistTrace& att, const DistTrace& ori) {
  const std::size_t length = std::min(att.length(), ori.length());
  std::vector<TokenScoreRow> rows;
  rows.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    TokenScoreRow row;
    row.position = t + 1;
    row.token = t < ori.tokens.size() ? ori.tokens[t] : att.tokens[t];
    row.delta_pmax = att.positions[t].max_prob() - ori.positions[t].max_prob();
    row.delta_entropy = entropy(att.positions[t]) - entropy(ori.positions[t]);
    row.score = std::abs(row.delta_pmax) + std::abs(row.delta_entropy);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<KeyToken> key_tokens(std::span<const TokenScoreRow> rows, double tau_token) {
  std::vector<KeyToken> selected;
  for (const TokenScoreRow& row : rows) {
    if (row.score > tau_token) {
      selected.push_back({row.position, row.token, row.score});
    }
  }
  return selected;
}

double distribution_score(double avg_kl_value, std::span<const KeyToken> selected, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("distribution_score: alpha must be in [0,1]");
  }
  const double base = alpha * avg_kl_value;
  if (selected.empty()) {
    return base;
  }
  double mean = 0.0;
  for (const KeyToken& k : selected) mean += k.score;
  mean /= static_cast<double>(selected.size());
  return base + (1.0 - alpha) * mean;
}

AnalysisReport analyze_traces(const DistTrace& ori, const DistTrace& att,
                              const AnalyzerConfig& cfg) {
  cfg.validate();
  ori.validate();
  att.validate();
  AnalysisReport report;
  report.rows = token_scores(att, ori);
  report.key_tokens = key_tokens(report.rows, cfg.tau_token);
  report.avg_kl = avg_kl(att, ori, cfg.epsilon);
  report.distribution_score = distribution_score(report.avg_kl, report.key_tokens, cfg.alpha);
  return report;
}

SurrogateAnalyzer::SurrogateAnalyzer(gateway::LogprobBackend& backend, AnalyzerConfig cfg)
    : backend_(backend), cfg_(cfg) {
  cfg_.validate();
}

AnalysisReport SurrogateAnalyzer::analyze(const std::string& original_instruction,
                                          const std::string& combined_instruction) {
  try {
    const std::vector<std::string> continuation = backend_.respond_tokens(original_instruction);
    if (continuation.empty()) {
      AnalysisReport degraded;
      degraded.available = false;
      degraded.fault = "surrogate returned an empty response";
      return degraded;
    }
    const DistTrace ori =
        gateway::to_dist_trace(backend_.score_continuation(original_instruction, continuation));
    const DistTrace att =
        gateway::to_dist_trace(backend_.score_continuation(combined_instruction, continuation));
    return analyze_traces(ori, att, cfg_);
  } catch (const TransportFault& e) {
    AnalysisReport degraded;
    degraded.available = false;
    degraded.fault = e.what();
    return degraded;
  } catch (const ProtocolFault& e) {
    AnalysisReport degraded;
    degraded.available = false;
    degraded.fault = e.what();
    return degraded;
  } catch (const CapabilityFault& e) {
    AnalysisReport degraded;
    degraded.available = false;
    degraded.fault = e.what();
    return degraded;
  }
}

std::pair<DistTrace, DistTrace> load_trace_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw SchemaError(file.string(), "-", "cannot open file");
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw SchemaError(file.string(), "-", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("tokens") || !doc["tokens"].is_array() ||
      doc["tokens"].empty()) {
    throw SchemaError(file.string(), "tokens", "expected a non-empty array of strings");
  }
  std::vector<std::string> tokens;
  for (const auto& t : doc["tokens"]) {
    if (!t.is_string()) {
      throw SchemaError(file.string(), "tokens", "expected a non-empty array of strings");
    }
    tokens.push_back(t.get<std::string>());
  }

  auto parse_side = [&](const std::string& field) {
    if (!doc.contains(field) || !doc[field].is_array() || doc[field].size() != tokens.size()) {
      throw SchemaError(file.string(), field,
                        "expected one [token, logprob] listing per position (" +
                            std::to_string(tokens.size()) + " positions)");
    }
    gateway::LogprobTrace trace;
    for (std::size_t t = 0; t < doc[field].size(); ++t) {
      const auto& listing = doc[field][t];
      const std::string where = field + "[" + std::to_string(t) + "]";
      if (!listing.is_array() || listing.empty()) {
        throw SchemaError(file.string(), where, "expected a non-empty array of [token, logprob]");
      }
      gateway::LogprobPosition pos;
      pos.token = tokens[t];
      for (const auto& entry : listing) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
            !entry[1].is_number()) {
          throw SchemaError(file.string(), where, "expected [token, logprob] pairs");
        }
        const double logprob = entry[1].get<double>();
        if (logprob > 0.0) {
          throw SchemaError(file.string(), where, "logprobs must be <= 0");
        }
        pos.top.push_back({entry[0].get<std::string>(), logprob});
      }
      trace.positions.push_back(std::move(pos));
    }
    return gateway::to_dist_trace(trace);
  };

  return {parse_side("ori"), parse_side("att")};
}

}  // namespace detour::dist
