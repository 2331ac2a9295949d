#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace detour::nav {

/// Cartesian point, meters.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Ordered polyline. Metric operations require at least one point.
using Path = std::vector<Point3>;

inline bool is_finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

inline bool near(const Point3& a, const Point3& b, double eps = 1e-9) {
  return std::abs(a.x - b.x) <= eps && std::abs(a.y - b.y) <= eps && std::abs(a.z - b.z) <= eps;
}

double distance(const Point3& a, const Point3& b);

/// Distance from q to the segment [a, b].
double point_segment_distance(const Point3& q, const Point3& a, const Point3& b);

/// Distance from q to the polyline through r. A single-point polyline
/// collapses to that point.
double point_polyline_distance(const Point3& q, const Path& r);

/// Minimum distance from q to the vertices of r (not its segments).
double point_set_distance(const Point3& q, const Path& r);

/// Throws std::invalid_argument when p is empty or has non-finite coordinates.
void require_valid_path(const Path& p, const std::string& name);

}  // namespace detour::nav
