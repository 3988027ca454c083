#pragma once

// Shared state and configuration types for the decentralized algorithms.

#include <cstdint>
#include <string>

#include "gtsim/errors.hpp"
#include "gtsim/matrix.hpp"

namespace gtsim {

enum class AlgorithmKind { lu_gt, atc_gt, dgd_local };

inline const char* to_string(AlgorithmKind a) {
  switch (a) {
    case AlgorithmKind::lu_gt: return "lu_gt";
    case AlgorithmKind::atc_gt: return "atc_gt";
    case AlgorithmKind::dgd_local: return "dgd_local";
  }
  return "?";
}

inline AlgorithmKind algorithm_from_string(const std::string& s) {
  if (s == "lu_gt") return AlgorithmKind::lu_gt;
  if (s == "atc_gt") return AlgorithmKind::atc_gt;
  if (s == "dgd_local") return AlgorithmKind::dgd_local;
  throw ConfigError("unknown algorithm '" + s + "'");
}

// Communication schedule tau = {0, T_o, 2T_o, ...}. T_o = 1 communicates
// every iteration; T_o - 1 local recursions happen between rounds.
struct Schedule {
  long T_o = 1;
  long K = 0;

  bool is_comm(long k) const { return k % T_o == 0; }
};

struct RunConfig {
  AlgorithmKind algorithm = AlgorithmKind::lu_gt;
  double eta = 0.0;
  double alpha = 0.0;
  Schedule schedule;
  std::uint64_t seed = 0;
  long record_every = 1;
};

// Stacked per-agent parameters (row i of x) and tracking variables (row i
// of y). comm_rounds counts communication events at iterations t < k.
struct NetworkState {
  Matrix x;  // n x m
  Matrix y;  // n x m
  long k = 0;
  long comm_rounds = 0;
};

}  // namespace gtsim
