#include "mbisac/sigmodel.hpp"

#include <cmath>
#include <string>

#include "mbisac/errors.hpp"

namespace mbisac {

namespace {

void requireAngle(double theta) {
  if (!std::isfinite(theta)) throw InvalidArgument("steering angle must be finite");
  if (std::abs(theta) > kPi / 2.0 + 1e-12) throw InvalidArgument("steering angle outside [-pi/2, pi/2]");
}

void requireUnitNorm(const CVector& f, int antennaCount) {
  if (f.size() != antennaCount) throw InvalidArgument("precoder length does not match antenna count");
  if (std::abs(f.norm() - 1.0) > 1e-12) throw InvalidArgument("precoder must have unit norm");
}

}  // namespace

SpacingVector::SpacingVector(RVector spacings) : spacings_(std::move(spacings)) {
  for (Eigen::Index k = 0; k < spacings_.size(); ++k) {
    if (!std::isfinite(spacings_[k]) || spacings_[k] <= 0.0) {
      throw InvalidArgument("spacing entry " + std::to_string(k) + " must be finite and positive");
    }
  }
}

SpacingVector SpacingVector::nominal(const ScenarioConfig& cfg) {
  return SpacingVector(RVector::Constant(cfg.antennaCount, cfg.wavelength() / 2.0));
}

SpacingVector sampleImpairment(const ScenarioConfig& cfg, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RVector d(cfg.antennaCount);
  const double mean = cfg.wavelength() / 2.0;
  for (int k = 0; k < cfg.antennaCount; ++k) {
    double v;
    do {
      v = mean + cfg.impairmentStd * normal(rng);
    } while (v <= 0.0);
    d[k] = v;
  }
  return SpacingVector(std::move(d));
}

SpacingVector sampleImpairment(const ScenarioConfig& cfg) {
  Rng rng = substream(cfg.masterSeed, Domain::Impairment, 0, Purpose::Spacing);
  return sampleImpairment(cfg, rng);
}

Constellation::Constellation(int size) {
  if (size < 2) throw InvalidArgument("constellation needs at least two points");
  points_.resize(static_cast<std::size_t>(size));
  if (size == 4) {
    const double a = 1.0 / std::sqrt(2.0);
    for (int m = 0; m < 4; ++m) {
      const double re = (m & 1) ? -a : a;
      const double im = (m & 2) ? -a : a;
      points_[static_cast<std::size_t>(m)] = {re, im};
    }
    return;
  }
  for (int m = 0; m < size; ++m) {
    points_[static_cast<std::size_t>(m)] = std::polar(1.0, 2.0 * kPi * m / size);
  }
}

CVector steeringNominal(double theta, const ScenarioConfig& cfg) {
  requireAngle(theta);
  const int K = cfg.antennaCount;
  const double lambda = cfg.wavelength();
  const double half = lambda / 2.0;
  CVector a(K);
  for (int k = 0; k < K; ++k) {
    const double centered = k - (K - 1) / 2.0;
    a[k] = std::polar(1.0, -2.0 * kPi * centered * half * std::sin(theta) / lambda);
  }
  return a;
}

CVector steeringPerturbed(double theta, const SpacingVector& spacing, const ScenarioConfig& cfg) {
  requireAngle(theta);
  const int K = cfg.antennaCount;
  if (spacing.size() != K) throw InvalidArgument("spacing vector length does not match antenna count");
  const double lambda = cfg.wavelength();
  const double s = std::sin(theta);
  CVector a(K);
  for (int k = 0; k < K; ++k) {
    const double centered = k - (K - 1) / 2.0;
    a[k] = std::polar(1.0, -2.0 * kPi * centered * spacing[k] * s / lambda);
  }
  return a;
}

CMatrix steeringMatrix(const std::vector<double>& angles, const SpacingVector& spacing,
                       const ScenarioConfig& cfg) {
  CMatrix A(cfg.antennaCount, static_cast<Eigen::Index>(angles.size()));
  for (std::size_t i = 0; i < angles.size(); ++i) {
    A.col(static_cast<Eigen::Index>(i)) = steeringPerturbed(angles[i], spacing, cfg);
  }
  return A;
}

CVector delayResponse(double tau, const ScenarioConfig& cfg) {
  if (!std::isfinite(tau)) throw InvalidArgument("delay must be finite");
  if (tau < 0.0) throw InvalidArgument("delay must be non-negative");
  CVector rho(cfg.subcarrierCount);
  for (int s = 0; s < cfg.subcarrierCount; ++s) {
    rho[s] = std::polar(1.0, -2.0 * kPi * s * cfg.subcarrierSpacing * tau);
  }
  return rho;
}

ChannelGains deriveGains(const ScenarioConfig& cfg) {
  ChannelGains g;
  g.targetGainVariance = cfg.noisePower * std::pow(10.0, cfg.sensingSnrDb / 10.0) / cfg.antennaCount;
  RVector profile(cfg.tapCount);
  for (int l = 0; l < cfg.tapCount; ++l) profile[l] = std::exp(-static_cast<double>(l));
  const double total = cfg.subcarrierCount * cfg.noisePower * std::pow(10.0, cfg.commSnrDb / 10.0);
  g.tapVariances = profile * (total / profile.sum());
  return g;
}

CVector tapsToFrequencyResponse(const CVector& taps, int subcarrierCount) {
  if (taps.size() > subcarrierCount) throw InvalidArgument("more taps than subcarriers");
  CVector beta = CVector::Zero(subcarrierCount);
  const double scale = 1.0 / std::sqrt(static_cast<double>(subcarrierCount));
  for (int s = 0; s < subcarrierCount; ++s) {
    cdouble acc{0.0, 0.0};
    for (Eigen::Index l = 0; l < taps.size(); ++l) {
      acc += taps[l] * std::polar(1.0, -2.0 * kPi * static_cast<double>(s * l) / subcarrierCount);
    }
    beta[s] = scale * acc;
  }
  return beta;
}

std::pair<TargetDraw, CommDraw> samplePriors(Rng& rng, const ScenarioConfig& cfg, Interval sector) {
  if (!(sector.lo <= sector.hi) || sector.lo < -kPi / 2.0 - 1e-12 || sector.hi > kPi / 2.0 + 1e-12) {
    throw InvalidArgument("target sector must lie within [-pi/2, pi/2]");
  }
  const ChannelGains gains = deriveGains(cfg);

  TargetDraw target;
  target.present = uniform(rng, 0.0, 1.0) < 0.5;
  target.angle = uniform(rng, sector.lo, sector.hi);
  target.range = uniform(rng, cfg.targetRangePrior.lo, cfg.targetRangePrior.hi);
  target.delay = 2.0 * target.range / kSpeedOfLight;
  target.gain = complexNormal(rng, gains.targetGainVariance);

  CommDraw comm;
  comm.ueAngle = uniform(rng, cfg.ueAnglePrior.lo, cfg.ueAnglePrior.hi);
  comm.taps.resize(cfg.tapCount);
  for (int l = 0; l < cfg.tapCount; ++l) comm.taps[l] = complexNormal(rng, gains.tapVariances[l]);
  comm.freqResponse = tapsToFrequencyResponse(comm.taps, cfg.subcarrierCount);

  const Constellation constellation(cfg.constellationSize);
  std::uniform_int_distribution<int> message(0, cfg.constellationSize - 1);
  comm.messages.resize(static_cast<std::size_t>(cfg.subcarrierCount));
  comm.symbols.resize(cfg.subcarrierCount);
  for (int s = 0; s < cfg.subcarrierCount; ++s) {
    const int m = message(rng);
    comm.messages[static_cast<std::size_t>(s)] = m;
    comm.symbols[s] = constellation[m];
  }
  return {target, comm};
}

CMatrix sampleSensingNoise(Rng& rng, const ScenarioConfig& cfg) {
  const double var = cfg.noiseStd() * cfg.noiseStd();
  CMatrix W(cfg.antennaCount, cfg.subcarrierCount);
  for (int s = 0; s < cfg.subcarrierCount; ++s) {
    for (int k = 0; k < cfg.antennaCount; ++k) W(k, s) = complexNormal(rng, var);
  }
  return W;
}

CVector sampleCommNoise(Rng& rng, const ScenarioConfig& cfg) {
  const double var = cfg.noiseStd() * cfg.noiseStd();
  CVector n(cfg.subcarrierCount);
  for (int s = 0; s < cfg.subcarrierCount; ++s) n[s] = complexNormal(rng, var);
  return n;
}

SensingObservation synthesizeSensing(const TargetDraw& target, const CVector& symbols,
                                     const CVector& precoder, const SpacingVector& trueSpacing,
                                     const CMatrix& noise, const ScenarioConfig& cfg) {
  const int K = cfg.antennaCount;
  const int S = cfg.subcarrierCount;
  requireUnitNorm(precoder, K);
  if (symbols.size() != S || noise.rows() != K || noise.cols() != S) {
    throw InvalidArgument("sensing inputs have mismatched dimensions");
  }
  SensingObservation obs;
  obs.raw = noise;
  if (target.present) {
    const CVector a = steeringPerturbed(target.angle, trueSpacing, cfg);
    const cdouble txGain = a.transpose() * precoder;
    const cdouble scale = target.gain * txGain / std::sqrt(static_cast<double>(S));
    const CVector waveform = symbols.cwiseProduct(delayResponse(target.delay, cfg));
    obs.raw.noalias() += scale * a * waveform.transpose();
  }
  obs.filtered = obs.raw;
  for (int s = 0; s < S; ++s) obs.filtered.col(s) /= symbols[s];
  return obs;
}

SensingObservation simulateSensing(const TargetDraw& target, const CommDraw& comm,
                                   const CVector& precoder, const SpacingVector& trueSpacing,
                                   const ScenarioConfig& cfg, Rng& rng) {
  requireUnitNorm(precoder, cfg.antennaCount);
  const CMatrix W = sampleSensingNoise(rng, cfg);
  return synthesizeSensing(target, comm.symbols, precoder, trueSpacing, W, cfg);
}

CommObservation synthesizeComm(const CommDraw& comm, const CVector& precoder,
                               const SpacingVector& trueSpacing, const CVector& noise,
                               const ScenarioConfig& cfg) {
  const int S = cfg.subcarrierCount;
  if (precoder.size() != cfg.antennaCount) throw InvalidArgument("precoder length does not match antenna count");
  if (comm.symbols.size() != S || comm.freqResponse.size() != S || noise.size() != S) {
    throw InvalidArgument("communication inputs have mismatched dimensions");
  }
  const cdouble beamGain = precoder.transpose() * steeringPerturbed(comm.ueAngle, trueSpacing, cfg);
  CommObservation obs;
  obs.csi = comm.freqResponse * beamGain;
  obs.received = comm.symbols.cwiseProduct(obs.csi) + noise;
  return obs;
}

CommObservation simulateComm(const CommDraw& comm, const CVector& precoder,
                             const SpacingVector& trueSpacing, const ScenarioConfig& cfg, Rng& rng) {
  const CVector n = sampleCommNoise(rng, cfg);
  return synthesizeComm(comm, precoder, trueSpacing, n, cfg);
}

Position positionFromPolar(double theta, double range) {
  if (range < 0.0) throw InvalidArgument("range must be non-negative");
  return {range * std::cos(theta), range * std::sin(theta)};
}

std::pair<double, double> polarFromPosition(const Position& p) {
  return {std::atan2(p.y(), p.x()), p.norm()};
}

}  // namespace mbisac
