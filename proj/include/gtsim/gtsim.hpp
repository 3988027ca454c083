#pragma once

// Umbrella header for the decentralized gradient-tracking simulator.

#include "gtsim/algorithms.hpp"
#include "gtsim/errors.hpp"
#include "gtsim/experiment.hpp"
#include "gtsim/graph.hpp"
#include "gtsim/jacobi.hpp"
#include "gtsim/matrix.hpp"
#include "gtsim/metrics.hpp"
#include "gtsim/mixing.hpp"
#include "gtsim/objective.hpp"
#include "gtsim/rng.hpp"
#include "gtsim/state.hpp"
#include "gtsim/theory.hpp"
