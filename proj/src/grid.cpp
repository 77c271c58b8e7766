#include "mbisac/grid.hpp"

#include "mbisac/errors.hpp"
#include "mbisac/sigmodel.hpp"

namespace mbisac {

AngleGrid AngleGrid::uniform(int size) {
  if (size < 2) throw InvalidArgument("angle grid needs at least two points");
  AngleGrid g;
  g.points.resize(static_cast<std::size_t>(size));
  const double step = kPi / (size - 1);
  for (int i = 0; i < size; ++i) g.points[static_cast<std::size_t>(i)] = -kPi / 2.0 + i * step;
  g.points.back() = kPi / 2.0;
  return g;
}

RangeGrid RangeGrid::uniform(Interval rangeInterval, int size) {
  if (size < 2) throw InvalidArgument("range grid needs at least two points");
  if (!(rangeInterval.span() > 0.0)) throw InvalidArgument("range grid interval must be non-empty");
  RangeGrid g;
  g.ranges.resize(static_cast<std::size_t>(size));
  g.delays.resize(static_cast<std::size_t>(size));
  const double step = rangeInterval.span() / (size - 1);
  for (int j = 0; j < size; ++j) {
    const double r = (j == size - 1) ? rangeInterval.hi : rangeInterval.lo + j * step;
    g.ranges[static_cast<std::size_t>(j)] = r;
    g.delays[static_cast<std::size_t>(j)] = 2.0 * r / kSpeedOfLight;
  }
  return g;
}

SectorGrid restrictGrid(const AngleGrid& angles, const RangeGrid& ranges, Interval angleSector,
                        Interval rangeSector) {
  SectorGrid out;
  out.angleOffset = -1;
  for (int i = 0; i < angles.size(); ++i) {
    const double a = angles.points[static_cast<std::size_t>(i)];
    if (angleSector.contains(a)) {
      if (out.angleOffset < 0) out.angleOffset = i;
      out.angles.push_back(a);
    }
  }
  out.rangeOffset = -1;
  for (int j = 0; j < ranges.size(); ++j) {
    const double r = ranges.ranges[static_cast<std::size_t>(j)];
    if (rangeSector.contains(r)) {
      if (out.rangeOffset < 0) out.rangeOffset = j;
      out.ranges.push_back(r);
      out.delays.push_back(ranges.delays[static_cast<std::size_t>(j)]);
    }
  }
  if (out.angles.empty()) throw InvalidArgument("angle sector contains no grid points");
  if (out.ranges.empty()) throw InvalidArgument("range sector contains no grid points");
  return out;
}

DictionaryGrids DictionaryGrids::fromConfig(const ScenarioConfig& cfg) {
  return {AngleGrid::uniform(cfg.angleGridSize), RangeGrid::uniform(cfg.targetRangePrior, cfg.delayGridSize)};
}

CMatrix delayDictionary(const std::vector<double>& delays, const ScenarioConfig& cfg) {
  CMatrix D(cfg.subcarrierCount, static_cast<Eigen::Index>(delays.size()));
  for (std::size_t j = 0; j < delays.size(); ++j) {
    D.col(static_cast<Eigen::Index>(j)) = delayResponse(delays[j], cfg);
  }
  return D;
}

}  // namespace mbisac
