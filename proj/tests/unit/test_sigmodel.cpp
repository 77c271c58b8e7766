#include <doctest.h>

#include <cmath>
#include <limits>

#include "mbisac/errors.hpp"
#include "mbisac/rng.hpp"
#include "mbisac/sigmodel.hpp"
#include "oracle.hpp"

using namespace mbisac;

namespace {

ScenarioConfig smallConfig() {
  ScenarioConfig cfg = ScenarioConfig::deskScale();
  cfg.antennaCount = 8;
  cfg.subcarrierCount = 16;
  return cfg;
}

double maxModulusError(const CVector& v) { return (v.cwiseAbs().array() - 1.0).abs().maxCoeff(); }

CVector unitPrecoder(int K, std::uint64_t seed) {
  Rng rng = substream(seed, Domain::Test, 0, Purpose::Spacing);
  CVector f(K);
  for (int k = 0; k < K; ++k) f[k] = complexNormal(rng, 1.0);
  return f / f.norm();
}

}  // namespace

TEST_CASE("config validation and wavelength") {
  const ScenarioConfig cfg = ScenarioConfig::fullScale();
  CHECK(cfg.wavelength() == doctest::Approx(kSpeedOfLight / 60e9).epsilon(1e-15));
  CHECK(cfg.impairmentStd == doctest::Approx(0.2e-3).epsilon(1e-3));
  cfg.validate();

  ScenarioConfig bad = cfg;
  bad.angleGridSize = cfg.antennaCount - 1;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = cfg;
  bad.tapCount = cfg.subcarrierCount + 1;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = cfg;
  bad.targetAnglePrior = {0.2, 0.1};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = cfg;
  bad.targetRangePrior = {-1.0, 10.0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("steeringNominal values and symmetry") {
  ScenarioConfig cfg = smallConfig();
  const CVector a0 = steeringNominal(0.0, cfg);
  for (int k = 0; k < cfg.antennaCount; ++k) CHECK(std::abs(a0[k] - cdouble(1.0, 0.0)) < 1e-15);

  cfg.antennaCount = 2;
  const CVector a = steeringNominal(degToRad(30.0), cfg);
  CHECK(std::abs(a[0] - std::polar(1.0, kPi / 4.0)) < 1e-12);
  CHECK(std::abs(a[1] - std::polar(1.0, -kPi / 4.0)) < 1e-12);

  cfg = smallConfig();
  Rng rng = substream(7, Domain::Test, 0, Purpose::Priors);
  for (int i = 0; i < 50; ++i) {
    const double theta = uniform(rng, -kPi / 2.0, kPi / 2.0);
    const CVector p = steeringNominal(theta, cfg);
    const CVector m = steeringNominal(-theta, cfg);
    CHECK((m - p.conjugate()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(maxModulusError(p) < 1e-12);
  }
  CHECK_THROWS_AS(steeringNominal(std::numeric_limits<double>::quiet_NaN(), cfg), InvalidArgument);
}

TEST_CASE("steeringPerturbed reduces to nominal and matches the exponent formula") {
  ScenarioConfig cfg = smallConfig();
  const SpacingVector nominal = SpacingVector::nominal(cfg);
  Rng rng = substream(8, Domain::Test, 0, Purpose::Priors);
  for (int i = 0; i < 100; ++i) {
    const double theta = uniform(rng, -kPi / 2.0, kPi / 2.0);
    CHECK((steeringPerturbed(theta, nominal, cfg) - steeringNominal(theta, cfg)).cwiseAbs().maxCoeff() < 1e-12);
  }
  const SpacingVector impaired = sampleImpairment(cfg);
  CHECK((steeringPerturbed(0.0, impaired, cfg).array() - cdouble(1.0, 0.0)).abs().maxCoeff() < 1e-15);

  cfg.antennaCount = 4;
  const double lambda = cfg.wavelength();
  RVector d(4);
  d << 1.0, 1.1, 0.9, 1.0;
  d *= lambda / 2.0;
  const CVector a = steeringPerturbed(degToRad(45.0), SpacingVector(d), cfg);
  for (int k = 0; k < 4; ++k) {
    const double phase = -2.0 * kPi * (k - 1.5) * d[k] * (std::sqrt(2.0) / 2.0) / lambda;
    CHECK(std::abs(a[k] - std::polar(1.0, phase)) < 1e-12);
  }
  CHECK(maxModulusError(a) < 1e-12);
  CHECK_THROWS_AS(steeringPerturbed(0.1, SpacingVector::nominal(smallConfig()), cfg), InvalidArgument);
}

TEST_CASE("SpacingVector rejects non-positive entries") {
  RVector d = RVector::Constant(3, 1e-3);
  d[1] = 0.0;
  CHECK_THROWS_AS(SpacingVector{d}, InvalidArgument);
  d[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(SpacingVector{d}, InvalidArgument);
}

TEST_CASE("sampled impairments are positive and centred on half a wavelength") {
  ScenarioConfig cfg = ScenarioConfig::deskScale();
  double sum = 0.0;
  int count = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng rng = substream(3, Domain::Impairment, i, Purpose::Spacing);
    const SpacingVector d = sampleImpairment(cfg, rng);
    CHECK(d.values().minCoeff() > 0.0);
    sum += d.values().sum();
    count += d.size();
  }
  const double mean = sum / count;
  const double se = cfg.impairmentStd / std::sqrt(static_cast<double>(count));
  CHECK(std::abs(mean - cfg.wavelength() / 2.0) < 4.0 * se);

  // A spread far above lambda/2 forces the truncation branch.
  cfg.impairmentStd = cfg.wavelength();
  Rng rng = substream(3, Domain::Impairment, 999, Purpose::Spacing);
  CHECK(sampleImpairment(cfg, rng).values().minCoeff() > 0.0);
}

TEST_CASE("delayResponse") {
  const ScenarioConfig cfg = smallConfig();
  const CVector r0 = delayResponse(0.0, cfg);
  CHECK((r0.array() - cdouble(1.0, 0.0)).abs().maxCoeff() < 1e-15);

  const double cell = cfg.rangeResolution();
  const CVector r = delayResponse(2.0 * cell / kSpeedOfLight, cfg);
  for (int s = 0; s < cfg.subcarrierCount; ++s) {
    CHECK(std::abs(r[s] - std::polar(1.0, -2.0 * kPi * s / cfg.subcarrierCount)) < 1e-12);
  }
  CHECK(maxModulusError(delayResponse(3.7e-7, cfg)) < 1e-12);
  CHECK_THROWS_AS(delayResponse(-1e-9, cfg), InvalidArgument);
}

TEST_CASE("deriveGains") {
  ScenarioConfig cfg = ScenarioConfig::fullScale();
  cfg.sensingSnrDb = 15.0;
  CHECK(deriveGains(cfg).targetGainVariance == doctest::Approx(std::pow(10.0, 1.5) / 64.0).epsilon(1e-14));

  cfg.sensingSnrDb = 0.0;
  cfg.antennaCount = 1;
  CHECK(deriveGains(cfg).targetGainVariance == doctest::Approx(cfg.noisePower).epsilon(1e-15));

  cfg = ScenarioConfig::fullScale();
  cfg.tapCount = 1;
  const ChannelGains g = deriveGains(cfg);
  REQUIRE(g.tapVariances.size() == 1);
  CHECK(g.tapVariances[0] == doctest::Approx(cfg.subcarrierCount * cfg.noisePower * 100.0).epsilon(1e-14));

  cfg.tapCount = 5;
  const ChannelGains g5 = deriveGains(cfg);
  for (int l = 1; l < 5; ++l) CHECK(g5.tapVariances[l] / g5.tapVariances[l - 1] == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("samplePriors is deterministic and has the stated moments") {
  const ScenarioConfig cfg = ScenarioConfig::deskScale();
  const Interval sector = cfg.targetAnglePrior;
  {
    Rng a = substream(11, Domain::Simulation, 5, Purpose::Priors);
    Rng b = substream(11, Domain::Simulation, 5, Purpose::Priors);
    const auto da = samplePriors(a, cfg, sector);
    const auto db = samplePriors(b, cfg, sector);
    CHECK(da.first.angle == db.first.angle);
    CHECK(da.first.gain == db.first.gain);
    CHECK(da.second.taps == db.second.taps);
    CHECK(da.second.messages == db.second.messages);
  }

  const int n = 100000;
  const double snrc = std::pow(10.0, cfg.commSnrDb / 10.0);
  double present = 0.0;
  double tapPower = 0.0;
  Rng rng = substream(12, Domain::Test, 0, Purpose::Priors);
  for (int i = 0; i < n; ++i) {
    const auto [t, c] = samplePriors(rng, cfg, sector);
    present += t.present ? 1.0 : 0.0;
    tapPower += c.taps.squaredNorm();
    CHECK(t.delay == 2.0 * t.range / kSpeedOfLight);
    if (i < 200) {
      CHECK(sector.contains(t.angle));
      CHECK(cfg.ueAnglePrior.contains(c.ueAngle));
      CHECK((c.symbols.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
      CHECK((c.freqResponse - tapsToFrequencyResponse(c.taps, cfg.subcarrierCount)).norm() == 0.0);
    }
  }
  CHECK(std::abs(present / n - 0.5) < 0.005);
  CHECK(std::abs(tapPower / n / (cfg.subcarrierCount * cfg.noisePower) / snrc - 1.0) < 0.02);
}

TEST_CASE("tapsToFrequencyResponse is the unitary DFT of the zero-padded taps") {
  CVector taps(3);
  taps << cdouble(1.0, 0.5), cdouble(-0.3, 0.2), cdouble(0.1, -0.7);
  const int S = 8;
  const CVector beta = tapsToFrequencyResponse(taps, S);
  for (int s = 0; s < S; ++s) {
    cdouble acc(0.0, 0.0);
    for (int l = 0; l < 3; ++l) acc += taps[l] * std::polar(1.0, -2.0 * kPi * s * l / S);
    CHECK(std::abs(beta[s] - acc / std::sqrt(8.0)) < 1e-12);
  }
  CHECK(beta.squaredNorm() == doctest::Approx(taps.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("noiseless sensing equals the rank-one model") {
  ScenarioConfig cfg = smallConfig();
  cfg.noiseScale = 0.0;
  const SpacingVector truth = sampleImpairment(cfg);
  const CVector f = unitPrecoder(cfg.antennaCount, 4);
  Rng rng = substream(21, Domain::Test, 0, Purpose::Priors);
  for (int trial = 0; trial < 20; ++trial) {
    auto [target, comm] = samplePriors(rng, cfg, cfg.targetAnglePrior);
    target.present = true;
    Rng noise = substream(21, Domain::Test, static_cast<std::uint64_t>(trial), Purpose::SensingNoise);
    const SensingObservation obs = simulateSensing(target, comm, f, truth, cfg, noise);

    const CVector a = steeringPerturbed(target.angle, truth, cfg);
    const cdouble alpha = target.gain * cdouble(a.transpose() * f) / std::sqrt(static_cast<double>(cfg.subcarrierCount));
    const CMatrix expected = alpha * a * delayResponse(target.delay, cfg).transpose();
    CHECK((obs.filtered - expected).norm() / expected.norm() < 1e-10);
    const CMatrix raw = alpha * a * comm.symbols.cwiseProduct(delayResponse(target.delay, cfg)).transpose();
    CHECK((obs.raw - raw).norm() / raw.norm() < 1e-10);

    target.present = false;
    const SensingObservation empty = simulateSensing(target, comm, f, truth, cfg, noise);
    CHECK(empty.filtered.norm() == 0.0);
  }
}

TEST_CASE("unnormalized precoders are rejected") {
  const ScenarioConfig cfg = smallConfig();
  Rng rng = substream(2, Domain::Test, 0, Purpose::Priors);
  auto [target, comm] = samplePriors(rng, cfg, cfg.targetAnglePrior);
  const CVector f = 2.0 * unitPrecoder(cfg.antennaCount, 1);
  CHECK_THROWS_AS(simulateSensing(target, comm, f, SpacingVector::nominal(cfg), cfg, rng), InvalidArgument);
}

TEST_CASE("reciprocal filtering keeps the noise complex normal with variance N0") {
  ScenarioConfig cfg = smallConfig();
  cfg.subcarrierCount = 128;
  cfg.antennaCount = 8;
  std::vector<double> re, im;
  double power = 0.0;
  const CVector f = unitPrecoder(cfg.antennaCount, 9);
  for (std::uint64_t e = 0; re.size() < 100000; ++e) {
    Rng priors = substream(31, Domain::Test, e, Purpose::Priors);
    auto [target, comm] = samplePriors(priors, cfg, cfg.targetAnglePrior);
    target.present = false;
    Rng noise = substream(31, Domain::Test, e, Purpose::SensingNoise);
    const SensingObservation obs = simulateSensing(target, comm, f, SpacingVector::nominal(cfg), cfg, noise);
    for (Eigen::Index i = 0; i < obs.filtered.size(); ++i) {
      re.push_back(obs.filtered(i).real());
      im.push_back(obs.filtered(i).imag());
      power += std::norm(obs.filtered(i));
    }
  }
  const double n = static_cast<double>(re.size());
  // 1% critical value of the one-sample KS statistic.
  const double critical = 1.628 / std::sqrt(n);
  CHECK(oracle::ksStatisticNormal(re, cfg.noisePower / 2.0) < critical);
  CHECK(oracle::ksStatisticNormal(im, cfg.noisePower / 2.0) < critical);
  // |w|^2 is exponential with mean N0, so the sample mean has standard error N0/sqrt(n).
  CHECK(std::abs(power / n - cfg.noisePower) < 3.0 * cfg.noisePower / std::sqrt(n));
}

TEST_CASE("communication channel") {
  ScenarioConfig cfg = smallConfig();
  const SpacingVector truth = sampleImpairment(cfg);
  const CVector f = unitPrecoder(cfg.antennaCount, 5);
  Rng rng = substream(41, Domain::Test, 0, Purpose::Priors);
  const auto [target, comm] = samplePriors(rng, cfg, cfg.targetAnglePrior);

  const CommObservation clean = synthesizeComm(comm, f, truth, CVector::Zero(cfg.subcarrierCount), cfg);
  for (int s = 0; s < cfg.subcarrierCount; ++s) {
    REQUIRE(std::abs(clean.csi[s]) > 0.0);
    CHECK(std::abs(clean.received[s] / clean.csi[s] - comm.symbols[s]) < 1e-12);
  }

  // Precoder orthogonal to the UE steering vector: nothing but noise arrives.
  const CVector a = steeringPerturbed(comm.ueAngle, truth, cfg);
  CVector g = unitPrecoder(cfg.antennaCount, 6);
  const CVector aConj = a.conjugate();
  g -= aConj * (aConj.adjoint() * g)(0) / aConj.squaredNorm();
  g /= g.norm();
  Rng noiseRng = substream(41, Domain::Test, 1, Purpose::CommNoise);
  const CVector n = sampleCommNoise(noiseRng, cfg);
  const CommObservation blocked = synthesizeComm(comm, g, truth, n, cfg);
  CHECK((blocked.received - n).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("received communication power matches the configured SNR") {
  const ScenarioConfig cfg = ScenarioConfig::deskScale();
  const SpacingVector truth = sampleImpairment(cfg);
  const CVector f = unitPrecoder(cfg.antennaCount, 7);
  const int draws = 10000;
  double signal = 0.0;
  double beam = 0.0;
  for (int i = 0; i < draws; ++i) {
    Rng rng = substream(51, Domain::Test, static_cast<std::uint64_t>(i), Purpose::Priors);
    Rng noiseRng = substream(51, Domain::Test, static_cast<std::uint64_t>(i), Purpose::CommNoise);
    const auto [target, comm] = samplePriors(rng, cfg, cfg.targetAnglePrior);
    const CommObservation obs = simulateComm(comm, f, truth, cfg, noiseRng);
    Rng replay = substream(51, Domain::Test, static_cast<std::uint64_t>(i), Purpose::CommNoise);
    const CVector n = sampleCommNoise(replay, cfg);
    signal += (obs.received - n).squaredNorm();
    beam += std::norm(cdouble(f.transpose() * steeringPerturbed(comm.ueAngle, truth, cfg)));
  }
  const double expected = cfg.subcarrierCount * cfg.noisePower * std::pow(10.0, cfg.commSnrDb / 10.0) * beam / draws;
  CHECK(std::abs(signal / draws / expected - 1.0) < 0.03);
}

TEST_CASE("polar and cartesian positions") {
  const Position p = positionFromPolar(0.0, 100.0);
  CHECK(p.x() == doctest::Approx(100.0));
  CHECK(std::abs(p.y()) < 1e-12);
  const Position q = positionFromPolar(kPi / 2.0, 1.0);
  CHECK(std::abs(q.x()) < 1e-12);
  CHECK(q.y() == doctest::Approx(1.0));

  Rng rng = substream(61, Domain::Test, 0, Purpose::Priors);
  for (int i = 0; i < 1000; ++i) {
    const double theta = uniform(rng, -kPi / 2.0 + 1e-6, kPi / 2.0 - 1e-6);
    const double range = uniform(rng, 1e-3, 500.0);
    const auto [t, r] = polarFromPosition(positionFromPolar(theta, range));
    CHECK(std::abs(t - theta) < 1e-12);
    CHECK(std::abs(r - range) < 1e-12 * std::max(1.0, range));
  }
  CHECK_THROWS_AS(positionFromPolar(0.1, -1.0), InvalidArgument);
}

TEST_CASE("simulation is reproducible from the seed") {
  const ScenarioConfig cfg = smallConfig();
  const SpacingVector truth = sampleImpairment(cfg);
  CHECK(truth.values() == sampleImpairment(cfg).values());
  const CVector f = unitPrecoder(cfg.antennaCount, 8);
  auto run = [&] {
    Rng priors = substream(cfg.masterSeed, Domain::Simulation, 3, Purpose::Priors);
    Rng noise = substream(cfg.masterSeed, Domain::Simulation, 3, Purpose::SensingNoise);
    auto [target, comm] = samplePriors(priors, cfg, cfg.targetAnglePrior);
    target.present = true;
    return simulateSensing(target, comm, f, truth, cfg, noise).filtered;
  };
  const CMatrix a = run();
  const CMatrix b = run();
  CHECK(a == b);
}

TEST_CASE("complex normal draws have the requested variance split evenly") {
  Rng rng = substream(71, Domain::Test, 0, Purpose::SensingNoise);
  const int n = 200000;
  double re2 = 0.0, im2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const cdouble z = complexNormal(rng, 2.0);
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
  }
  CHECK(std::abs(re2 / n - 1.0) < 0.02);
  CHECK(std::abs(im2 / n - 1.0) < 0.02);
  CHECK(complexNormal(rng, 0.0) == cdouble(0.0, 0.0));
}
