#pragma once

// Umbrella header: chain-strength bounds for minor-embedded Ising problems,
// brute-force verification oracles, a job-shop encoder, and an annealing
// harness.

#include "bounds.hpp"
#include "embedding.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "ising.hpp"
#include "jsp.hpp"
#include "oracle.hpp"
#include "rng.hpp"
#include "scalar.hpp"
#include "solver.hpp"
