#pragma once

#include <stdexcept>
#include <string>

namespace evidx {

// Base for all domain failures. CLI maps these to exit code 1.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error("ShapeError: " + msg) {}
};

struct MissingRegionError : Error {
  int code;
  explicit MissingRegionError(int region_code)
      : Error("MissingRegion: region code " + std::to_string(region_code) +
              " is not defined for this case"),
        code(region_code) {}
};

struct InsufficientDataError : Error {
  explicit InsufficientDataError(const std::string& msg)
      : Error("InsufficientData: " + msg) {}
};

struct DegenerateStatisticsError : Error {
  explicit DegenerateStatisticsError(const std::string& msg)
      : Error("DegenerateStatistics: " + msg) {}
};

struct LabelError : Error {
  explicit LabelError(const std::string& msg) : Error("LabelError: " + msg) {}
};

struct DivergenceError : Error {
  explicit DivergenceError(const std::string& msg)
      : Error("Divergence: " + msg) {}
};

struct EmptyEvalError : Error {
  explicit EmptyEvalError(const std::string& msg)
      : Error("EmptyEval: " + msg) {}
};

struct UndefinedMetricError : Error {
  explicit UndefinedMetricError(const std::string& msg)
      : Error("UndefinedMetric: " + msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error("ConfigError: " + msg) {}
};

// Raised when a phantom spec cannot be realized (e.g. a scaled region
// exceeds its allotted space in the grid).
struct PhantomSpecError : Error {
  explicit PhantomSpecError(const std::string& msg)
      : Error("PhantomSpec: " + msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error("IoError: " + msg) {}
};

}  // namespace evidx
