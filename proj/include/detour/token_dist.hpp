#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace detour::dist {

/// Truncated token distribution: explicit probabilities for the listed
/// tokens and a single tail bucket holding the mass of everything unlisted.
/// Listed mass plus tail must be 1 within 1e-6.
struct TokenDist {
  std::map<std::string, double> probs;
  double tail_mass = 0.0;

  void validate() const;  // throws std::invalid_argument

  /// Modal probability. The listing is assumed to contain the top tokens, so
  /// this is the maximum listed probability (tail_mass if nothing is listed).
  double max_prob() const;
};

/// Position-aligned sequence of distributions under teacher forcing.
/// `tokens[t]` is the continuation token forced at position t.
struct DistTrace {
  std::vector<TokenDist> positions;
  std::vector<std::string> tokens;

  std::size_t length() const { return positions.size(); }
  void validate() const;
};

}  // namespace detour::dist
