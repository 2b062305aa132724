#pragma once

#include <stdexcept>
#include <string>

namespace voltsite {

inline constexpr const char* kVersion = "0.1.0";

// Scenario or data files that fail schema/invariant checks. Messages carry a
// field path ("stations[2].x: ...") so callers can point at the offending entry.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration values (CLI flags, config files, simulation settings).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// No path between two nodes of a road network.
class NoRouteError : public std::runtime_error {
 public:
  explicit NoRouteError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace voltsite
