#pragma once

#include <vector>

#include "mbisac/baseline_rx.hpp"
#include "mbisac/config.hpp"
#include "mbisac/types.hpp"

namespace mbisac::mbml {

/// Half-widths, in grid cells, of the window averaged around the map peak.
struct ResolutionWindow {
  int angleCells = 0;
  int rangeCells = 0;
};

/// floor(resolution * gridSize / span). The span is the dictionary span by
/// default or the target-sector span under WindowSpan::TargetSector.
ResolutionWindow resolutionWindow(const ScenarioConfig& cfg, Interval targetSector);

/// Half-open row/column range of the window after clipping to the map.
struct WindowBounds {
  int rowBegin = 0;
  int rowEnd = 0;
  int colBegin = 0;
  int colEnd = 0;

  int rows() const { return rowEnd - rowBegin; }
  int cols() const { return colEnd - colBegin; }
};

WindowBounds clipWindow(const PeakLocation& peak, ResolutionWindow window, int mapRows, int mapCols);

struct EstimatorOptions {
  double temperature = 1.0;
  /// Replace the softmax with a one-hot at the peak (the grid-search estimator).
  bool hardArgmax = false;
};

struct SoftEstimate {
  bool detected = false;
  double peakValue = 0.0;
  PeakLocation peak;
  WindowBounds window;
  RMatrix probabilities;  // window-shaped, sums to 1
  double angleEst = 0.0;
  double rangeEst = 0.0;
  Position positionEst = Position::Zero();
};

/// Softmax-weighted estimate over the window around the peak. No estimate is
/// produced when the peak does not exceed the threshold.
SoftEstimate mbmlEstimate(const AngleDelayMap& map, double threshold, ResolutionWindow window,
                          const EstimatorOptions& options = {});
SoftEstimate mbmlEstimate(const CMatrix& filtered, const MapProcessor& processor, double threshold,
                          ResolutionWindow window, const EstimatorOptions& options = {});

/// Mean squared position error. Throws InvalidBatch when an estimate is missing.
double lossSupervised(const std::vector<SoftEstimate>& estimates, const std::vector<Position>& truths);

/// Negative peak of the map.
double lossUnsupervised(const AngleDelayMap& map);
double lossUnsupervised(const std::vector<AngleDelayMap>& maps);

}  // namespace mbisac::mbml
