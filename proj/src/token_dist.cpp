#include "detour/token_dist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace detour::dist {

void TokenDist::validate() const {
  double total = tail_mass;
  if (tail_mass < 0.0) {
    throw std::invalid_argument("token distribution: tail mass must be non-negative");
  }
  for (const auto& [token, p] : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("token distribution: probability of '" + token +
                                  "' must be non-negative and finite");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw std::invalid_argument("token distribution: mass sums to " + std::to_string(total) +
                                ", expected 1");
  }
}

double TokenDist::max_prob() const {
  if (probs.empty()) {
    return tail_mass;
  }
  double best = 0.0;
  for (const auto& [token, p] : probs) {
    best = std::max(best, p);
  }
  return best;
}

void DistTrace::validate() const {
  if (positions.empty()) {
    throw std::invalid_argument("trace: must contain at least one position");
  }
  if (positions.size() != tokens.size()) {
    throw std::invalid_argument("trace: positions and tokens must have equal length");
  }
  for (const TokenDist& d : positions) {
    d.validate();
  }
}

}  // namespace detour::dist
