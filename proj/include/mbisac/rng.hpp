#pragma once

#include <cstdint>
#include <random>

#include "mbisac/types.hpp"

namespace mbisac {

using Rng = std::mt19937_64;

/// Which experiment stage a substream belongs to. Each domain owns an
/// independent index space.
enum class Domain : std::uint64_t {
  Impairment = 1,
  Calibration = 2,
  CalibrationCheck = 3,
  Evaluation = 4,
  Training = 5,
  TrainingSector = 6,
  Validation = 7,
  Simulation = 8,
  Test = 9,
};

/// What a draw inside one episode is used for.
enum class Purpose : std::uint64_t {
  Priors = 1,
  SensingNoise = 2,
  CommNoise = 3,
  Sector = 4,
  Spacing = 5,
};

/// Counter-based substream: a fresh generator whose state depends only on
/// (master seed, domain, index, purpose). Batches are therefore independent of
/// evaluation order and thread count.
Rng substream(std::uint64_t masterSeed, Domain domain, std::uint64_t index, Purpose purpose);

/// CN(0, variance): independent real and imaginary parts of variance/2 each.
cdouble complexNormal(Rng& rng, double variance);

double uniform(Rng& rng, double lo, double hi);

}  // namespace mbisac
