#include "detour/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace detour::nav {

double distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double point_segment_distance(const Point3& q, const Point3& a, const Point3& b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double vz = b.z - a.z;
  const double len2 = vx * vx + vy * vy + vz * vz;
  if (len2 == 0.0) {
    return distance(q, a);
  }
  double t = ((q.x - a.x) * vx + (q.y - a.y) * vy + (q.z - a.z) * vz) / len2;
  t = std::clamp(t, 0.0, 1.0);
  const Point3 proj{a.x + t * vx, a.y + t * vy, a.z + t * vz};
  return distance(q, proj);
}

double point_polyline_distance(const Point3& q, const Path& r) {
  require_valid_path(r, "polyline");
  if (r.size() == 1) {
    return distance(q, r.front());
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    best = std::min(best, point_segment_distance(q, r[i], r[i + 1]));
  }
  return best;
}

double point_set_distance(const Point3& q, const Path& r) {
  require_valid_path(r, "point set");
  double best = std::numeric_limits<double>::infinity();
  for (const Point3& v : r) {
    best = std::min(best, distance(q, v));
  }
  return best;
}

void require_valid_path(const Path& p, const std::string& name) {
  if (p.empty()) {
    throw std::invalid_argument(name + ": path must contain at least one point");
  }
  for (const Point3& pt : p) {
    if (!is_finite(pt)) {
      throw std::invalid_argument(name + ": path contains non-finite coordinates");
    }
  }
}

}  // namespace detour::nav
