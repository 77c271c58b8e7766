#pragma once

#include <vector>

#include "mbisac/config.hpp"
#include "mbisac/types.hpp"

namespace mbisac {

/// Uniform angle grid over [-pi/2, pi/2], both endpoints included.
struct AngleGrid {
  std::vector<double> points;

  static AngleGrid uniform(int size);
  int size() const { return static_cast<int>(points.size()); }
  double step() const { return points.size() > 1 ? points[1] - points[0] : 0.0; }
};

/// Uniform range grid over an interval, endpoints included, with matching round-trip delays.
struct RangeGrid {
  std::vector<double> ranges;
  std::vector<double> delays;

  static RangeGrid uniform(Interval rangeInterval, int size);
  int size() const { return static_cast<int>(ranges.size()); }
  double step() const { return ranges.size() > 1 ? ranges[1] - ranges[0] : 0.0; }
};

/// The dictionary grids restricted to a target sector. Offsets record where
/// the restriction starts inside the full grids.
struct SectorGrid {
  std::vector<double> angles;
  std::vector<double> ranges;
  std::vector<double> delays;
  int angleOffset = 0;
  int rangeOffset = 0;

  int angleCount() const { return static_cast<int>(angles.size()); }
  int delayCount() const { return static_cast<int>(delays.size()); }
};

/// Keeps the grid points inside [angleSector] x [rangeSector]. Throws
/// InvalidArgument if either restriction is empty.
SectorGrid restrictGrid(const AngleGrid& angles, const RangeGrid& ranges, Interval angleSector,
                        Interval rangeSector);

/// The full dictionary grids of a scenario: Nθ angles over [-pi/2, pi/2] and
/// Nτ ranges over the target range prior.
struct DictionaryGrids {
  AngleGrid angles;
  RangeGrid ranges;

  static DictionaryGrids fromConfig(const ScenarioConfig& cfg);
  SectorGrid sector(Interval angleSector, Interval rangeSector) const {
    return restrictGrid(angles, ranges, angleSector, rangeSector);
  }
};

/// S x N matrix with delayResponse columns.
CMatrix delayDictionary(const std::vector<double>& delays, const ScenarioConfig& cfg);

}  // namespace mbisac
