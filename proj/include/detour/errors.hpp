#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace detour {

/// An input file violated its schema. Carries the offending file and field so
/// diagnostics can name both.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string file, std::string field, const std::string& what)
      : std::runtime_error(file + ": field '" + field + "': " + what),
        file_(std::move(file)),
        field_(std::move(field)) {}

  const std::string& file() const noexcept { return file_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  std::string field_;
};

/// Network-level failure that survived the retry budget.
class TransportFault : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The remote replied, but not in the shape the protocol promises.
class ProtocolFault : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The backend cannot provide a required capability (logprobs, credentials).
class CapabilityFault : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace detour
