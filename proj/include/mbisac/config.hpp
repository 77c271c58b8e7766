#pragma once

#include <cstdint>
#include <string>

#include "mbisac/types.hpp"

namespace mbisac {

/// How the resolution-window denominator is chosen when converting physical
/// resolution into grid cells.
enum class WindowSpan {
  DictionaryGrid,  ///< full angle grid span (pi) and dictionary range span
  TargetSector,    ///< span of the current target sector
};

/// Physical, prior, grid, and impairment parameters for one experiment.
struct ScenarioConfig {
  int antennaCount = 64;
  int subcarrierCount = 256;
  double subcarrierSpacing = 120e3;  // Hz
  double carrierFreq = 60e9;         // Hz
  int constellationSize = 4;
  int tapCount = 5;
  double sensingSnrDb = 15.0;
  double commSnrDb = 20.0;
  /// Reference noise power; signal gains are derived from the SNRs relative to it.
  double noisePower = 1.0;
  /// Multiplies the receiver noise standard deviation without touching signal
  /// gains. 0 gives the noiseless limit.
  double noiseScale = 1.0;
  Interval targetAnglePrior{degToRad(-40.0), degToRad(-20.0)};
  Interval targetRangePrior{0.0, 200.0};
  Interval ueAnglePrior{degToRad(30.0), degToRad(50.0)};
  int angleGridSize = 720;
  int delayGridSize = 200;
  double impairmentStd = 0.2e-3;  // meters
  WindowSpan windowSpan = WindowSpan::DictionaryGrid;
  std::uint64_t masterSeed = 1;

  double wavelength() const { return kSpeedOfLight / carrierFreq; }
  double rangeResolution() const { return kSpeedOfLight / (2.0 * subcarrierCount * subcarrierSpacing); }
  double angleResolution() const { return 2.0 / antennaCount; }
  /// Standard deviation of one complex receiver-noise sample.
  double noiseStd() const;

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;

  /// One `key = value` line per field in a fixed order, numbers in shortest round-trip form.
  std::string canonicalText() const;
  std::uint64_t hash() const;

  /// Full-size parameters: K=64, S=256, 120 kHz, 60 GHz, QPSK, L=5, 15/20 dB,
  /// 720x200 grids, sigma = lambda/25.
  static ScenarioConfig fullScale();
  /// Reduced dimensions used for desk-scale training and the acceptance suite.
  static ScenarioConfig deskScale();
};

}  // namespace mbisac
