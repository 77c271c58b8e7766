#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "mbisac/config.hpp"
#include "mbisac/mbml/adam.hpp"
#include "mbisac/mbml/gradient.hpp"
#include "mbisac/rng.hpp"

namespace mbisac::mbml {

enum class TrainMode { Supervised, Unsupervised };

const char* toString(TrainMode mode);

struct TrainPhase {
  TrainMode mode = TrainMode::Supervised;
  std::int64_t iterations = 0;
  double learningRate = 0.0;
  /// Phase-local iteration after which droppedLearningRate applies; < 0 disables.
  std::int64_t lrDropAt = -1;
  double droppedLearningRate = 0.0;

  double learningRateAt(std::int64_t phaseIteration) const {
    return (lrDropAt >= 0 && phaseIteration >= lrDropAt) ? droppedLearningRate : learningRate;
  }
};

struct TrainingSchedule {
  std::vector<TrainPhase> phases;
  int batchSize = 64;
  /// Labeled samples available to supervised phases; < 0 means unlimited.
  std::int64_t labeledBudget = -1;
  PathFlags supervisedPaths{true, true};
  /// The transmit path lets the peak objective trade beam gain for alignment, so UL is receive-only by default.
  PathFlags unsupervisedPaths{true, false};
  /// Precoder knobs used when re-simulating training episodes.
  IsacKnobs knobs;
  EstimatorOptions estimator;
  /// Training sectors: center ~ U[meanRange], width ~ U[spanRange].
  Interval sectorMeanRange{degToRad(-60.0), degToRad(60.0)};
  Interval sectorSpanRange{degToRad(10.0), degToRad(20.0)};
  /// Unsupervised batches contain only present targets when true.
  bool ulPresenceConditioned = true;
  /// Unsupervised episodes whose map peak does not exceed this are dropped; 0 disables gating.
  double ulGateThreshold = 0.0;
  int validationEvery = 0;
  int validationEpisodes = 256;
  int threads = 1;

  std::int64_t totalIterations() const;
  /// Labeled samples consumed by all supervised phases.
  std::int64_t supervisedSamples() const;

  /// Full-size schedule: SL at 4e-7 dropping to 4e-8 after
  /// 50,000 iterations, UL at 5e-7, batch 3000, 85,000 iterations in total.
  /// `supervisedIterations` of SL are followed by UL for the remainder.
  static TrainingSchedule fullScale(std::int64_t supervisedIterations = 85000);
  /// Sequential semi-supervised schedule with a fixed total iteration count.
  static TrainingSchedule sequential(std::int64_t supervisedIterations, std::int64_t unsupervisedIterations,
                                     bool supervisedFirst, int batchSize, double supervisedLr, double unsupervisedLr);
};

struct TrainState {
  SpacingVector estimate;
  AdamMoments adam;
  /// Global iteration counter; also the cursor into the counter-based streams.
  std::int64_t iteration = 0;
  std::size_t phaseIndex = 0;
  std::int64_t phaseIteration = 0;
  std::int64_t labeledRemaining = -1;
  std::vector<double> lossHistory;
};

struct TrainLogEntry {
  std::int64_t iteration = 0;
  TrainMode mode = TrainMode::Supervised;
  double loss = 0.0;
  double learningRate = 0.0;
  int batchUsed = 0;
  double validationSupervised = std::numeric_limits<double>::quiet_NaN();
  double validationUnsupervised = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  TrainState state;
  std::vector<TrainLogEntry> log;
};

TrainState initialTrainState(const ScenarioConfig& cfg, const TrainingSchedule& schedule);

/// Random training sector for one iteration.
Interval drawTrainingSector(const ScenarioConfig& cfg, const TrainingSchedule& schedule, std::int64_t iteration);

/// Episodes [firstIndex, firstIndex + count) of a domain. Presence is forced
/// when presenceConditioned, otherwise Bernoulli(1/2).
std::vector<TrainingEpisode> drawEpisodes(const ScenarioConfig& cfg, Domain domain, std::uint64_t firstIndex,
                                          std::size_t count, Interval sector, bool presenceConditioned,
                                          int threads = 1);

/// Runs the schedule from `resume` (or the nominal initialization). Each
/// iteration draws a sector, rebuilds the precoders from the current
/// estimate, simulates a batch, and takes one Adam step. Adam moments restart
/// at phase boundaries. Throws BudgetExhausted if a supervised iteration
/// would exceed the labeled budget.
TrainResult train(const ScenarioConfig& cfg, const TrainingSchedule& schedule,
                  std::optional<TrainState> resume = std::nullopt,
                  const std::function<void(const TrainLogEntry&)>& progress = {});

/// Mean ||a(theta; estimate) - a(theta; truth)|| over `count` angles spread uniformly in [-pi/2, pi/2].
double steeringMismatch(const SpacingVector& estimate, const SpacingVector& truth, const ScenarioConfig& cfg,
                        int count = 100);

}  // namespace mbisac::mbml
