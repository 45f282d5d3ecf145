#pragma once

#include <stdexcept>
#include <string>

namespace zel {

// Bad configuration or bad invocation: maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A required upstream artifact is absent: maps to CLI exit code 3.
struct MissingArtifactError : std::runtime_error {
  explicit MissingArtifactError(const std::string& msg) : std::runtime_error(msg) {}
};

// Artifact exists but fails validation (version/hash mismatch, malformed
// content, metric undefined on the given input): maps to CLI exit code 4.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Programming-contract violation (shape mismatch, missing gradient, argmax on
// nothing). These indicate caller bugs, not bad user input.
struct ContractError : std::logic_error {
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace zel
