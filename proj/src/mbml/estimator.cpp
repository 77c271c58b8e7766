#include "mbisac/mbml/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mbisac/errors.hpp"

namespace mbisac::mbml {

ResolutionWindow resolutionWindow(const ScenarioConfig& cfg, Interval targetSector) {
  const double angleSpan = cfg.windowSpan == WindowSpan::DictionaryGrid ? kPi : targetSector.span();
  const double rangeSpan = cfg.targetRangePrior.span();
  if (!(angleSpan > 0.0) || !(rangeSpan > 0.0)) throw InvalidArgument("resolution window span must be positive");
  ResolutionWindow w;
  w.angleCells = static_cast<int>(std::floor(cfg.angleResolution() * cfg.angleGridSize / angleSpan));
  w.rangeCells = static_cast<int>(std::floor(cfg.rangeResolution() * cfg.delayGridSize / rangeSpan));
  return w;
}

WindowBounds clipWindow(const PeakLocation& peak, ResolutionWindow window, int mapRows, int mapCols) {
  WindowBounds b;
  b.rowBegin = std::max(0, peak.row - window.angleCells);
  b.rowEnd = std::min(mapRows, peak.row + window.angleCells + 1);
  b.colBegin = std::max(0, peak.col - window.rangeCells);
  b.colEnd = std::min(mapCols, peak.col + window.rangeCells + 1);
  return b;
}

SoftEstimate mbmlEstimate(const AngleDelayMap& map, double threshold, ResolutionWindow window,
                          const EstimatorOptions& options) {
  if (!(threshold >= 0.0)) throw InvalidArgument("detection threshold must be non-negative");
  if (!(options.temperature > 0.0)) throw InvalidArgument("softmax temperature must be positive");
  SoftEstimate est;
  est.peak = argmaxRowMajor(map.values);
  est.peakValue = est.peak.value;
  if (!(est.peakValue > threshold)) return est;

  est.detected = true;
  est.window = clipWindow(est.peak, window, static_cast<int>(map.values.rows()), static_cast<int>(map.values.cols()));
  const auto& w = est.window;
  if (options.hardArgmax) {
    est.probabilities = RMatrix::Zero(w.rows(), w.cols());
    est.probabilities(est.peak.row - w.rowBegin, est.peak.col - w.colBegin) = 1.0;
    est.angleEst = map.angles[static_cast<std::size_t>(est.peak.row)];
    est.rangeEst = map.ranges[static_cast<std::size_t>(est.peak.col)];
  } else {
    const RMatrix slice = map.values.block(w.rowBegin, w.colBegin, w.rows(), w.cols());
    est.probabilities = ((slice.array() - est.peakValue) / options.temperature).exp().matrix();
    est.probabilities /= est.probabilities.sum();
    const RVector rowMass = est.probabilities.rowwise().sum();
    const RVector colMass = est.probabilities.colwise().sum().transpose();
    for (int n = 0; n < w.rows(); ++n) est.angleEst += map.angles[static_cast<std::size_t>(w.rowBegin + n)] * rowMass[n];
    for (int m = 0; m < w.cols(); ++m) est.rangeEst += map.ranges[static_cast<std::size_t>(w.colBegin + m)] * colMass[m];
  }
  est.positionEst = positionFromPolar(est.angleEst, est.rangeEst);
  return est;
}

SoftEstimate mbmlEstimate(const CMatrix& filtered, const MapProcessor& processor, double threshold,
                          ResolutionWindow window, const EstimatorOptions& options) {
  return mbmlEstimate(processor.map(filtered), threshold, window, options);
}

double lossSupervised(const std::vector<SoftEstimate>& estimates, const std::vector<Position>& truths) {
  if (estimates.size() != truths.size()) throw InvalidBatch("estimate and label counts differ");
  if (estimates.empty()) throw InvalidBatch("supervised loss of an empty batch");
  double total = 0.0;
  for (std::size_t e = 0; e < estimates.size(); ++e) {
    if (!estimates[e].detected) {
      throw InvalidBatch("episode " + std::to_string(e) + " has no position estimate");
    }
    total += (truths[e] - estimates[e].positionEst).squaredNorm();
  }
  return total / static_cast<double>(estimates.size());
}

double lossUnsupervised(const AngleDelayMap& map) {
  if (map.values.size() == 0) throw InvalidArgument("unsupervised loss of an empty map");
  return -map.values.maxCoeff();
}

double lossUnsupervised(const std::vector<AngleDelayMap>& maps) {
  if (maps.empty()) throw InvalidBatch("unsupervised loss of an empty batch");
  double total = 0.0;
  for (const auto& m : maps) total += lossUnsupervised(m);
  return total / static_cast<double>(maps.size());
}

}  // namespace mbisac::mbml
