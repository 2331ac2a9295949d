#include "detour/prompt.hpp"

#include <stdexcept>

#include "detour/rng.hpp"

namespace detour::refine {

std::string InjectionPrompt::id() const {
  return fnv1a64_hex(text + "#" + std::to_string(generation));
}

CombineStrategy parse_combine_strategy(const std::string& name) {
  if (name.empty() || name == "suffix") return CombineStrategy::suffix;
  if (name == "prefix") return CombineStrategy::prefix;
  if (name == "mid_insert") return CombineStrategy::mid_insert;
  if (name == "escape_wrapped") return CombineStrategy::escape_wrapped;
  throw std::invalid_argument("unknown combine strategy: " + name);
}

std::string to_string(CombineStrategy s) {
  switch (s) {
    case CombineStrategy::suffix: return "suffix";
    case CombineStrategy::prefix: return "prefix";
    case CombineStrategy::mid_insert: return "mid_insert";
    case CombineStrategy::escape_wrapped: return "escape_wrapped";
  }
  return "suffix";
}

std::vector<std::string> split_clauses(const std::string& text) {
  std::vector<std::string> clauses;
  std::size_t begin = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      ++i;
      while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
      clauses.push_back(text.substr(begin, i - begin));
      begin = i;
    } else {
      ++i;
    }
  }
  if (begin < text.size()) {
    clauses.push_back(text.substr(begin));
  }
  if (clauses.empty()) {
    clauses.push_back(text);
  }
  return clauses;
}

std::string combine(const std::string& injection, const std::string& original,
                    CombineStrategy strategy) {
  if (injection.empty() || original.empty()) {
    throw std::invalid_argument("combine: injection and original must be non-empty");
  }
  switch (strategy) {
    case CombineStrategy::suffix:
      return original + std::string(kCombineSeparator) + injection;
    case CombineStrategy::prefix:
      return injection + std::string(kCombineSeparator) + original;
    case CombineStrategy::escape_wrapped:
      return original + std::string(kEscapeSequence) + injection;
    case CombineStrategy::mid_insert: {
      const auto clauses = split_clauses(original);
      if (clauses.size() < 2) {
        return original + std::string(kCombineSeparator) + injection;
      }
      const std::size_t mid = clauses.size() / 2;
      std::string out;
      for (std::size_t i = 0; i < mid; ++i) out += clauses[i];
      if (!out.empty() && out.back() != ' ' && out.back() != '\n') out += ' ';
      out += injection;
      if (injection.back() != ' ' && injection.back() != '\n') out += ' ';
      for (std::size_t i = mid; i < clauses.size(); ++i) out += clauses[i];
      return out;
    }
  }
  throw std::invalid_argument("combine: unknown strategy");
}

}  // namespace detour::refine
