#include "detour/nav_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace detour::nav {

NeVariant parse_ne_variant(const std::string& name) {
  if (name == "final" || name == "final_distance") return NeVariant::final_distance;
  if (name == "max_dev" || name == "max_deviation") return NeVariant::max_deviation;
  throw std::invalid_argument("unknown NE variant: " + name);
}

std::string to_string(NeVariant v) {
  return v == NeVariant::final_distance ? "final" : "max_dev";
}

double path_length(const Path& p) {
  require_valid_path(p, "path");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    total += distance(p[i], p[i + 1]);
  }
  return total;
}

double nav_error_final(const Path& p, const Point3& goal) {
  require_valid_path(p, "path");
  return distance(p.back(), goal);
}

double nav_error_max_dev(const Path& predicted, const Path& reference) {
  require_valid_path(predicted, "predicted");
  require_valid_path(reference, "reference");
  double worst = 0.0;
  for (const Point3& q : predicted) {
    worst = std::max(worst, point_polyline_distance(q, reference));
  }
  return worst;
}

double dtw_cost(const Path& a, const Path& b) {
  require_valid_path(a, "a");
  require_valid_path(b, "b");
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  // Two-row DP; cell (i, j) holds the cheapest alignment ending at (i, j).
  std::vector<double> prev(m), curr(m);
  for (std::size_t j = 0; j < m; ++j) {
    prev[j] = distance(a[0], b[j]) + (j > 0 ? prev[j - 1] : 0.0);
  }
  for (std::size_t i = 1; i < n; ++i) {
    curr[0] = prev[0] + distance(a[i], b[0]);
    for (std::size_t j = 1; j < m; ++j) {
      const double step = std::min({prev[j], prev[j - 1], curr[j - 1]});
      curr[j] = step + distance(a[i], b[j]);
    }
    std::swap(prev, curr);
  }
  return prev[m - 1];
}

double ndtw(const Path& predicted, const Path& reference, double d_th) {
  if (d_th <= 0.0) {
    throw std::invalid_argument("ndtw: d_th must be positive");
  }
  const double cost = dtw_cost(predicted, reference);
  return std::exp(-cost / (static_cast<double>(reference.size()) * d_th));
}

int success(const Path& p, const Point3& goal, double d_th) {
  if (d_th <= 0.0) {
    throw std::invalid_argument("success: d_th must be positive");
  }
  return nav_error_final(p, goal) <= d_th ? 1 : 0;
}

double spl(std::span<const SplSample> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("spl: need at least one episode");
  }
  double total = 0.0;
  for (const SplSample& s : samples) {
    if (s.shortest_len <= 0.0) {
      throw std::invalid_argument("spl: shortest path length must be positive");
    }
    total += s.success * s.shortest_len / std::max(s.taken_len, s.shortest_len);
  }
  return total / static_cast<double>(samples.size());
}

double cls(const Path& predicted, const Path& reference, double d_th) {
  if (d_th <= 0.0) {
    throw std::invalid_argument("cls: d_th must be positive");
  }
  require_valid_path(predicted, "predicted");
  require_valid_path(reference, "reference");

  double pc = 0.0;
  for (const Point3& v : reference) {
    pc += std::exp(-point_set_distance(v, predicted) / d_th);
  }
  pc /= static_cast<double>(reference.size());

  const double expected = pc * path_length(reference);
  const double denom = expected + std::abs(path_length(predicted) - expected);
  const double ls = denom > 0.0 ? expected / denom : 1.0;
  return pc * ls;
}

double asr_threshold(std::span<const double> clean_spl) {
  if (clean_spl.size() < 2) {
    throw std::invalid_argument("asr: need at least two clean SPL samples");
  }
  double mean = 0.0;
  for (double v : clean_spl) mean += v;
  mean /= static_cast<double>(clean_spl.size());
  double var = 0.0;
  for (double v : clean_spl) var += (v - mean) * (v - mean);
  var /= static_cast<double>(clean_spl.size());
  return std::max(0.0, mean - 5.0 * std::sqrt(var));
}

double asr(std::span<const double> clean_spl, std::span<const AsrSample> attacked) {
  const double theta = asr_threshold(clean_spl);
  if (attacked.empty()) {
    throw std::invalid_argument("asr: need at least one attacked sample");
  }
  std::size_t hits = 0;
  for (const AsrSample& s : attacked) {
    if (s.spl < theta) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(attacked.size());
}

MetricVector metric_vector(const Episode& episode, NeVariant variant) {
  require_valid_path(episode.predicted, "predicted");
  require_valid_path(episode.reference, "reference");
  if (episode.reference.size() < 2) {
    throw std::invalid_argument("episode " + episode.id + ": reference needs at least two points");
  }
  if (episode.success_radius <= 0.0) {
    throw std::invalid_argument("episode " + episode.id + ": success radius must be positive");
  }

  MetricVector m;
  m.tl = path_length(episode.predicted);
  m.ne = variant == NeVariant::final_distance
             ? nav_error_final(episode.predicted, episode.goal)
             : nav_error_max_dev(episode.predicted, episode.reference);
  m.sr = success(episode.predicted, episode.goal, episode.success_radius);
  const SplSample sample{m.sr, path_length(episode.reference), m.tl};
  m.spl = spl(std::span<const SplSample>(&sample, 1));
  m.ndtw = ndtw(episode.predicted, episode.reference, episode.success_radius);
  m.cls = cls(episode.predicted, episode.reference, episode.success_radius);
  return m;
}

}  // namespace detour::nav
