#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace detour::refine {

/// The evolving attack text. `generation` counts applied updates; `parent`
/// holds the id of the prompt this one was derived from.
struct InjectionPrompt {
  std::string text;
  int generation = 0;
  std::optional<std::string> parent;

  /// Stable content id (hash of text and generation).
  std::string id() const;
};

/// How the injection is merged with the benign instruction.
enum class CombineStrategy { suffix, prefix, mid_insert, escape_wrapped };

CombineStrategy parse_combine_strategy(const std::string& name);
std::string to_string(CombineStrategy s);

/// Separator used by the suffix/prefix strategies.
inline constexpr std::string_view kCombineSeparator = "\n";

/// Escape block used by escape_wrapped and the escape-characters baseline.
inline constexpr std::string_view kEscapeSequence = "\n\n";

/// Merge injection text with the original instruction. Both must be
/// non-empty. mid_insert splices at the midpoint clause boundary of the
/// original and falls back to suffix when there is only one clause.
std::string combine(const std::string& injection, const std::string& original,
                    CombineStrategy strategy = CombineStrategy::suffix);

/// Split text into clauses at sentence terminators (. ! ?), keeping the
/// terminator and trailing spaces attached. Concatenating the result yields
/// the input unchanged.
std::vector<std::string> split_clauses(const std::string& text);

}  // namespace detour::refine
