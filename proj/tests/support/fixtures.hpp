#pragma once

// Glue between library value types and the reference implementations.

#include <vector>

#include "mbisac/config.hpp"
#include "mbisac/mbml/gradient.hpp"
#include "mbisac/sigmodel.hpp"
#include "oracle.hpp"

namespace fixtures {

/// K=8, S=16 with 90 x 25 grids: small enough for the loop oracles.
inline mbisac::ScenarioConfig smallConfig(std::uint64_t seed = 1) {
  mbisac::ScenarioConfig cfg = mbisac::ScenarioConfig::deskScale();
  cfg.antennaCount = 8;
  cfg.subcarrierCount = 16;
  cfg.angleGridSize = 90;
  cfg.delayGridSize = 25;
  cfg.masterSeed = seed;
  return cfg;
}

inline oracle::Scene toScene(const mbisac::mbml::BatchSetup& setup) {
  const auto& cfg = setup.cfg;
  oracle::Scene sc;
  sc.K = cfg.antennaCount;
  sc.S = cfg.subcarrierCount;
  sc.lambda = cfg.wavelength();
  sc.df = cfg.subcarrierSpacing;
  sc.gridAngles = oracle::linspace(-oracle::kPi / 2.0, oracle::kPi / 2.0, cfg.angleGridSize);
  sc.gridRanges = oracle::linspace(cfg.targetRangePrior.lo, cfg.targetRangePrior.hi, cfg.delayGridSize);
  sc.sectorLo = setup.sensingSector.lo;
  sc.sectorHi = setup.sensingSector.hi;
  sc.ueLo = setup.commSector.lo;
  sc.ueHi = setup.commSector.hi;
  sc.rangeLo = cfg.targetRangePrior.lo;
  sc.rangeHi = cfg.targetRangePrior.hi;
  sc.angleCells = setup.window.angleCells;
  sc.rangeCells = setup.window.rangeCells;
  sc.temperature = setup.estimator.temperature;
  sc.eta = setup.knobs.tradeoff;
  sc.phase = setup.knobs.combinerPhase;
  sc.truth = setup.trueSpacing.values();
  return sc;
}

inline std::vector<oracle::Episode> toEpisodes(const std::vector<mbisac::mbml::TrainingEpisode>& eps) {
  std::vector<oracle::Episode> out;
  for (const auto& e : eps) {
    oracle::Episode o;
    o.angle = e.target.angle;
    o.range = e.target.range;
    o.gain = e.target.gain;
    o.symbols = e.symbols;
    o.noise = e.noise;
    out.push_back(o);
  }
  return out;
}

}  // namespace fixtures
