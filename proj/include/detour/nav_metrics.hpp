#pragma once

#include <span>
#include <string>
#include <vector>

#include "detour/geometry.hpp"

namespace detour::nav {

/// One completed navigation episode: what the agent flew and what it was
/// supposed to fly.
struct Episode {
  std::string id;
  std::string instruction;
  Path predicted;
  Path reference;       // at least two points
  Point3 goal;
  double success_radius = 0.0;  // d_th, > 0
};

/// Per-episode metric bundle. spl/ndtw/cls live in [0,1]; reporting scales
/// them by 100.
struct MetricVector {
  double tl = 0.0;
  double ne = 0.0;
  int sr = 0;
  double spl = 0.0;
  double ndtw = 0.0;
  double cls = 0.0;
};

/// Which navigation-error reading to report: distance from the final point to
/// the goal, or the maximum deviation from the reference polyline.
enum class NeVariant { final_distance, max_deviation };

NeVariant parse_ne_variant(const std::string& name);
std::string to_string(NeVariant v);

/// Sum of consecutive segment lengths; 0 for a single point.
double path_length(const Path& p);

/// Euclidean distance from the last point of p to the goal.
double nav_error_final(const Path& p, const Point3& goal);

/// Maximum distance from any predicted point to the reference polyline.
double nav_error_max_dev(const Path& predicted, const Path& reference);

/// Classic dynamic-time-warping cost over Euclidean point distances with
/// step set {(1,0),(0,1),(1,1)} and matched endpoints.
double dtw_cost(const Path& a, const Path& b);

/// exp(-dtw_cost / (|reference| * d_th)), |reference| counted in points.
double ndtw(const Path& predicted, const Path& reference, double d_th);

/// 1 iff the final point lies within d_th of the goal (boundary inclusive).
int success(const Path& p, const Point3& goal, double d_th);

struct SplSample {
  int success = 0;
  double shortest_len = 0.0;  // must be > 0
  double taken_len = 0.0;
};

/// (1/N) * sum S_i * l_i / max(p_i, l_i). Rejects empty input and
/// non-positive shortest lengths.
double spl(std::span<const SplSample> samples);

/// Coverage-weighted length score: PC * LS, where
///   PC = (1/|r|) * sum_{v in r} exp(-d(v, p)/d_th), d = nearest predicted point
///   LS = PC*len(r) / (PC*len(r) + |len(p) - PC*len(r)|)
double cls(const Path& predicted, const Path& reference, double d_th);

struct AsrSample {
  std::string id;
  double spl = 0.0;
};

/// Attack success rate in percent. The failure threshold is
/// mean(clean) - 5 * population-stddev(clean), clamped at 0; an attacked
/// sample counts iff its SPL falls strictly below it. Needs at least two
/// clean samples and one attacked sample.
double asr(std::span<const double> clean_spl, std::span<const AsrSample> attacked);

/// Threshold used by asr(); exposed for reporting.
double asr_threshold(std::span<const double> clean_spl);

/// Bundle every per-episode metric. The SPL term uses the reference length as
/// the shortest path, so it requires len(reference) > 0.
MetricVector metric_vector(const Episode& episode, NeVariant variant = NeVariant::final_distance);

}  // namespace detour::nav
