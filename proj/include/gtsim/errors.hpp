#pragma once

#include <stdexcept>
#include <string>

namespace gtsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SpectrumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RankDeficientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an algorithm state stops being finite.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, long iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration(iteration) {}
  long iteration;
};

}  // namespace gtsim
