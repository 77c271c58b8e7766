#pragma once

#include <cstdint>
#include <vector>

#include "mbisac/config.hpp"
#include "mbisac/grid.hpp"
#include "mbisac/sigmodel.hpp"
#include "mbisac/types.hpp"

namespace mbisac {

/// |a^H(theta_i) Y rho^*(tau_j)| over an angle grid and a delay grid.
struct AngleDelayMap {
  RMatrix values;  // angles x delays
  std::vector<double> angles;
  std::vector<double> delays;
  std::vector<double> ranges;
};

struct PeakLocation {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Argmax of a matrix with ties resolved to the lowest row-major index.
PeakLocation argmaxRowMajor(const RMatrix& values);

/// Precomputed angle and delay dictionaries for one sector grid and one
/// steering model. Evaluating maps through this avoids rebuilding the
/// dictionaries per observation.
class MapProcessor {
 public:
  MapProcessor(SectorGrid grid, const SpacingVector& spacing, const ScenarioConfig& cfg);

  /// Complex bilinear form Z = Phi^H Y Phi_d^* and the intermediate
  /// G = Y Phi_d^*, both needed for differentiation.
  struct Products {
    CMatrix delayProjected;  // K x Nτ
    CMatrix bilinear;        // Nθ x Nτ
  };

  Products products(const CMatrix& filtered) const;
  AngleDelayMap map(const CMatrix& filtered) const;
  AngleDelayMap mapFromProducts(const Products& p) const;

  const SectorGrid& grid() const { return grid_; }
  const CMatrix& angleDictionary() const { return angleDict_; }
  const CMatrix& delayDictionary() const { return delayDict_; }

 private:
  SectorGrid grid_;
  CMatrix angleDict_;  // K x Nθ
  CMatrix delayDict_;  // S x Nτ
  CMatrix angleDictAdjoint_;
  CMatrix delayDictConj_;
};

AngleDelayMap angleDelayMap(const CMatrix& filtered, const SectorGrid& grid, const SpacingVector& spacing,
                            const ScenarioConfig& cfg);

struct DetectionResult {
  bool detected = false;
  double angleEst = 0.0;
  double rangeEst = 0.0;
  Position positionEst = Position::Zero();
  double peakValue = 0.0;
};

/// Grid-search detector and estimator: peak of the sector map against the threshold.
DetectionResult maprtDetectEstimate(const AngleDelayMap& map, double threshold);
DetectionResult maprtDetectEstimate(const CMatrix& filtered, const MapProcessor& processor, double threshold);

struct ThresholdCalibration {
  double targetPfa = 0.0;
  double threshold = 0.0;
  std::size_t calibrationSamples = 0;
  double empiricalPfa = 0.0;
};

/// Linear interpolation between order statistics of an ascending sample.
double empiricalQuantile(const std::vector<double>& sorted, double q);

/// Peak values of the sector map for `count` target-free episodes.
std::vector<double> noisePeaks(std::size_t count, Domain domain, const MapProcessor& processor,
                               const ScenarioConfig& cfg, int threads);

/// Sets the threshold to the (1 - targetPfa) quantile of H0 peaks, then
/// re-measures the false-alarm rate on an independent H0 set of the same size.
/// Throws CalibrationUnderpowered when nSamples < 100 / targetPfa.
ThresholdCalibration calibrateThreshold(double targetPfa, std::size_t nSamples, const ScenarioConfig& cfg,
                                        const MapProcessor& processor, int threads = 1);

/// Per-subcarrier ML symbol decision given the CSI; ties go to the lowest message index.
std::vector<int> mleDecode(const CVector& received, const CVector& csi, const Constellation& constellation);

}  // namespace mbisac
