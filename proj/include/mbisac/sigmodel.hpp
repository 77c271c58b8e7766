#pragma once

#include <utility>
#include <vector>

#include "mbisac/config.hpp"
#include "mbisac/rng.hpp"
#include "mbisac/types.hpp"

namespace mbisac {

/// Per-antenna inter-element spacing in meters. The only trained parameter.
class SpacingVector {
 public:
  SpacingVector() = default;
  /// Throws InvalidArgument unless every entry is finite and strictly positive.
  explicit SpacingVector(RVector spacings);

  /// (lambda/2) * 1.
  static SpacingVector nominal(const ScenarioConfig& cfg);

  const RVector& values() const { return spacings_; }
  int size() const { return static_cast<int>(spacings_.size()); }
  double operator[](int k) const { return spacings_[k]; }

 private:
  RVector spacings_;
};

/// Draws the true impairment N((lambda/2) 1, sigma^2 I), resampling any entry
/// that falls at or below zero.
SpacingVector sampleImpairment(const ScenarioConfig& cfg, Rng& rng);
SpacingVector sampleImpairment(const ScenarioConfig& cfg);

struct TargetDraw {
  bool present = false;
  double angle = 0.0;  // rad
  double range = 0.0;  // m
  double delay = 0.0;  // s, always 2R/c
  cdouble gain{0.0, 0.0};
};

struct CommDraw {
  double ueAngle = 0.0;
  CVector taps;
  CVector freqResponse;
  CVector symbols;
  std::vector<int> messages;
};

struct SensingObservation {
  CMatrix raw;       // K x S
  CMatrix filtered;  // raw with column s divided by symbol s
};

struct CommObservation {
  CVector received;
  CVector csi;
};

struct ChannelGains {
  double targetGainVariance = 0.0;
  RVector tapVariances;
};

/// Unit-energy PSK alphabet. For |M| = 4 this is Gray-mapped QPSK with
/// message 0 -> (1+j)/sqrt(2), bit 0 -> sign of the real part, bit 1 -> sign of
/// the imaginary part.
class Constellation {
 public:
  explicit Constellation(int size);
  int size() const { return static_cast<int>(points_.size()); }
  cdouble operator[](int m) const { return points_[static_cast<std::size_t>(m)]; }
  const std::vector<cdouble>& points() const { return points_; }

 private:
  std::vector<cdouble> points_;
};

/// exp(-j 2 pi (k - (K-1)/2) (lambda/2) sin(theta) / lambda).
CVector steeringNominal(double theta, const ScenarioConfig& cfg);
/// exp(-j 2 pi (k - (K-1)/2) d_k sin(theta) / lambda).
CVector steeringPerturbed(double theta, const SpacingVector& spacing, const ScenarioConfig& cfg);
/// K x N matrix whose columns are steeringPerturbed over the given angles.
CMatrix steeringMatrix(const std::vector<double>& angles, const SpacingVector& spacing,
                       const ScenarioConfig& cfg);
/// exp(-j 2 pi s df tau), s = 0..S-1.
CVector delayResponse(double tau, const ScenarioConfig& cfg);

ChannelGains deriveGains(const ScenarioConfig& cfg);

/// Unitary DFT of the zero-padded tap vector.
CVector tapsToFrequencyResponse(const CVector& taps, int subcarrierCount);

/// Draws presence, target parameters inside `sector` and the configured range
/// prior, the UE angle, channel taps, and messages.
std::pair<TargetDraw, CommDraw> samplePriors(Rng& rng, const ScenarioConfig& cfg, Interval sector);

CMatrix sampleSensingNoise(Rng& rng, const ScenarioConfig& cfg);
CVector sampleCommNoise(Rng& rng, const ScenarioConfig& cfg);

/// Deterministic core of the sensing channel: builds Y_r from explicit noise.
SensingObservation synthesizeSensing(const TargetDraw& target, const CVector& symbols,
                                     const CVector& precoder, const SpacingVector& trueSpacing,
                                     const CMatrix& noise, const ScenarioConfig& cfg);
SensingObservation simulateSensing(const TargetDraw& target, const CommDraw& comm,
                                   const CVector& precoder, const SpacingVector& trueSpacing,
                                   const ScenarioConfig& cfg, Rng& rng);

CommObservation synthesizeComm(const CommDraw& comm, const CVector& precoder,
                               const SpacingVector& trueSpacing, const CVector& noise,
                               const ScenarioConfig& cfg);
CommObservation simulateComm(const CommDraw& comm, const CVector& precoder,
                             const SpacingVector& trueSpacing, const ScenarioConfig& cfg, Rng& rng);

Position positionFromPolar(double theta, double range);
std::pair<double, double> polarFromPosition(const Position& p);

}  // namespace mbisac
