#include "mbisac/baseline_rx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mbisac/errors.hpp"
#include "mbisac/parallel.hpp"

namespace mbisac {

PeakLocation argmaxRowMajor(const RMatrix& values) {
  if (values.size() == 0) throw InvalidArgument("argmax of an empty map");
  PeakLocation best{0, 0, values(0, 0)};
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (values(i, j) > best.value) best = {static_cast<int>(i), static_cast<int>(j), values(i, j)};
    }
  }
  return best;
}

MapProcessor::MapProcessor(SectorGrid grid, const SpacingVector& spacing, const ScenarioConfig& cfg)
    : grid_(std::move(grid)),
      angleDict_(steeringMatrix(grid_.angles, spacing, cfg)),
      delayDict_(mbisac::delayDictionary(grid_.delays, cfg)),
      angleDictAdjoint_(angleDict_.adjoint()),
      delayDictConj_(delayDict_.conjugate()) {
  if (grid_.angles.empty() || grid_.delays.empty()) throw InvalidArgument("map grids must be nonempty");
}

MapProcessor::Products MapProcessor::products(const CMatrix& filtered) const {
  if (filtered.rows() != angleDict_.rows() || filtered.cols() != delayDict_.rows()) {
    throw InvalidArgument("observation is " + std::to_string(filtered.rows()) + "x" +
                          std::to_string(filtered.cols()) + ", expected " + std::to_string(angleDict_.rows()) +
                          "x" + std::to_string(delayDict_.rows()));
  }
  Products p;
  p.delayProjected.noalias() = filtered * delayDictConj_;
  p.bilinear.noalias() = angleDictAdjoint_ * p.delayProjected;
  return p;
}

AngleDelayMap MapProcessor::mapFromProducts(const Products& p) const {
  return {p.bilinear.cwiseAbs(), grid_.angles, grid_.delays, grid_.ranges};
}

AngleDelayMap MapProcessor::map(const CMatrix& filtered) const { return mapFromProducts(products(filtered)); }

AngleDelayMap angleDelayMap(const CMatrix& filtered, const SectorGrid& grid, const SpacingVector& spacing,
                            const ScenarioConfig& cfg) {
  return MapProcessor(grid, spacing, cfg).map(filtered);
}

DetectionResult maprtDetectEstimate(const AngleDelayMap& map, double threshold) {
  if (!(threshold >= 0.0)) throw InvalidArgument("detection threshold must be non-negative");
  const PeakLocation peak = argmaxRowMajor(map.values);
  DetectionResult r;
  r.peakValue = peak.value;
  if (peak.value > threshold) {
    r.detected = true;
    r.angleEst = map.angles[static_cast<std::size_t>(peak.row)];
    r.rangeEst = map.ranges[static_cast<std::size_t>(peak.col)];
    r.positionEst = positionFromPolar(r.angleEst, r.rangeEst);
  }
  return r;
}

DetectionResult maprtDetectEstimate(const CMatrix& filtered, const MapProcessor& processor, double threshold) {
  return maprtDetectEstimate(processor.map(filtered), threshold);
}

double empiricalQuantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> noisePeaks(std::size_t count, Domain domain, const MapProcessor& processor,
                               const ScenarioConfig& cfg, int threads) {
  std::vector<double> peaks(count);
  const Interval sector{processor.grid().angles.front(), processor.grid().angles.back()};
  parallelFor(count, threads, [&](std::size_t i) {
    Rng priors = substream(cfg.masterSeed, domain, i, Purpose::Priors);
    const auto draws = samplePriors(priors, cfg, sector);
    Rng noise = substream(cfg.masterSeed, domain, i, Purpose::SensingNoise);
    CMatrix filtered = sampleSensingNoise(noise, cfg);
    for (int s = 0; s < cfg.subcarrierCount; ++s) filtered.col(s) /= draws.second.symbols[s];
    peaks[i] = processor.products(filtered).bilinear.cwiseAbs().maxCoeff();
  });
  return peaks;
}

ThresholdCalibration calibrateThreshold(double targetPfa, std::size_t nSamples, const ScenarioConfig& cfg,
                                        const MapProcessor& processor, int threads) {
  if (!(targetPfa > 0.0 && targetPfa <= 1.0)) throw InvalidArgument("target Pfa must lie in (0, 1]");
  const double required = std::ceil(100.0 / targetPfa);
  if (static_cast<double>(nSamples) < required) {
    throw CalibrationUnderpowered("calibration needs at least " + std::to_string(static_cast<long long>(required)) +
                                  " samples for Pfa " + std::to_string(targetPfa) + ", got " +
                                  std::to_string(nSamples));
  }
  std::vector<double> peaks = noisePeaks(nSamples, Domain::Calibration, processor, cfg, threads);
  std::sort(peaks.begin(), peaks.end());

  ThresholdCalibration cal;
  cal.targetPfa = targetPfa;
  cal.calibrationSamples = nSamples;
  // Every noisy peak is positive, so zero is the only threshold that guarantees Pfa = 1.
  cal.threshold = targetPfa >= 1.0 ? 0.0 : empiricalQuantile(peaks, 1.0 - targetPfa);

  const std::vector<double> check = noisePeaks(nSamples, Domain::CalibrationCheck, processor, cfg, threads);
  const auto alarms = std::count_if(check.begin(), check.end(), [&](double v) { return v > cal.threshold; });
  cal.empiricalPfa = static_cast<double>(alarms) / static_cast<double>(nSamples);
  return cal;
}

std::vector<int> mleDecode(const CVector& received, const CVector& csi, const Constellation& constellation) {
  if (received.size() != csi.size()) throw InvalidArgument("received signal and CSI lengths differ");
  std::vector<int> decided(static_cast<std::size_t>(received.size()), 0);
  for (Eigen::Index s = 0; s < received.size(); ++s) {
    double best = std::numeric_limits<double>::infinity();
    for (int m = 0; m < constellation.size(); ++m) {
      const double dist = std::norm(received[s] - csi[s] * constellation[m]);
      if (dist < best) {
        best = dist;
        decided[static_cast<std::size_t>(s)] = m;
      }
    }
  }
  return decided;
}

}  // namespace mbisac
