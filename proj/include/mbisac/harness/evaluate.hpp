#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mbisac/baseline_rx.hpp"
#include "mbisac/harness/experiment.hpp"
#include "mbisac/harness/metrics.hpp"
#include "mbisac/mbml/estimator.hpp"
#include "mbisac/mbml/gradient.hpp"
#include "mbisac/mbml/train.hpp"

namespace mbisac::harness {

/// The steering model a method assumes: the true spacing (genie), lambda/2
/// (nominal), or the learned spacing. Throws InvalidArgument if mbml is
/// requested without a learned spacing.
SpacingVector methodSpacing(Method method, const ScenarioConfig& cfg, const SpacingVector* learned = nullptr);

/// Threshold for one steering model, calibrated on target-free episodes over the evaluation sector.
ThresholdCalibration calibrateForSpacing(const ScenarioConfig& cfg, const SpacingVector& dictionary,
                                         const EvaluationSettings& settings, int threads = 1);

struct EpisodeOutcome {
  std::size_t index = 0;
  TargetDraw target;
  bool detected = false;
  double angleEst = 0.0;
  double rangeEst = 0.0;
  double peak = 0.0;
  double squaredError = 0.0;  // only meaningful for true positives
  std::size_t symbolErrors = 0;
};

/// Runs evaluation episodes [0, count) with the given dictionary, precoder
/// knobs and threshold. `soft` selects the windowed soft estimator.
std::vector<EpisodeOutcome> runEpisodes(std::size_t count, const ScenarioConfig& cfg, const SpacingVector& dictionary,
                                        const EvaluationSettings& settings, double threshold, bool soft,
                                        const mbml::EstimatorOptions& estimator, int threads = 1);

/// Pmd, Pfa, RMSE and SER of one method. Calibrates unless a threshold is given.
MetricsRecord evaluate(Method method, const ScenarioConfig& cfg, const SpacingVector& dictionary,
                       const EvaluationSettings& settings, std::optional<double> threshold = std::nullopt,
                       const mbml::EstimatorOptions& estimator = {}, int threads = 1);

/// Evaluates each method on the (eta, phase) grid with common random numbers,
/// calibrating once per method. Returns every grid record.
std::vector<MetricsRecord> paretoSweep(const ScenarioConfig& cfg, const std::vector<Method>& methods,
                                       const SpacingVector* learned, const EvaluationSettings& settings,
                                       const SweepSettings& sweep, const mbml::EstimatorOptions& estimator = {},
                                       int threads = 1);

/// Pareto fronts per method tag, concatenated in input order.
std::vector<MetricsRecord> paretoFronts(const std::vector<MetricsRecord>& records);

/// Training schedule for one labeled ratio: round(ratio * total) SL iterations
/// then UL for the rest, using the rates and options of `base`.
mbml::TrainingSchedule ratioSchedule(const mbml::TrainingSchedule& base, double ratio, std::int64_t totalIterations);

struct RatioResult {
  double ratio = 0.0;
  SpacingVector learned;
  MetricsRecord metrics;
};

std::vector<RatioResult> labeledRatioStudy(const ExperimentConfig& cfg);

/// Loads the configured checkpoint, or trains the configured schedule when none is set.
SpacingVector learnedSpacing(const ExperimentConfig& cfg);

struct GradientCheckRow {
  int configuration = 0;
  mbml::LossKind loss = mbml::LossKind::Supervised;
  bool txPath = false;
  double relativeError = 0.0;
};

/// Analytic gradient against central differences (step 1e-7 lambda) on
/// random spacing, sector, knob and episode draws at K=8, S=16, 90 x 25 grids.
std::vector<GradientCheckRow> gradientCheckSuite(std::uint64_t seed, int configurations, int threads = 1);

}  // namespace mbisac::harness
