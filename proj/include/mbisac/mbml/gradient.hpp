#pragma once

#include <optional>
#include <vector>

#include "mbisac/config.hpp"
#include "mbisac/grid.hpp"
#include "mbisac/mbml/estimator.hpp"
#include "mbisac/precoder.hpp"
#include "mbisac/sigmodel.hpp"

namespace mbisac::mbml {

enum class LossKind { Supervised, Unsupervised };

/// Which branches of the computation graph carry gradient: the receive
/// dictionary (rx) and the precoder that shapes the transmitted signal (tx).
struct PathFlags {
  bool rx = true;
  bool tx = true;
};

/// The random part of one episode. Together with a precoder and the true
/// spacing it determines the filtered observation exactly, so the episode can
/// be re-simulated whenever the precoder changes.
struct TrainingEpisode {
  TargetDraw target;
  CVector symbols;
  CMatrix noise;  // W, K x S
};

/// Quantities fixed for one batch.
struct BatchSetup {
  ScenarioConfig cfg;
  SpacingVector trueSpacing;
  DictionaryGrids grids;
  Interval sensingSector;
  Interval commSector;
  IsacKnobs knobs;
  ResolutionWindow window;
  EstimatorOptions estimator;
};

BatchSetup makeBatchSetup(const ScenarioConfig& cfg, const SpacingVector& trueSpacing, Interval sensingSector,
                          const IsacKnobs& knobs, const EstimatorOptions& estimator = {});

struct GradientReport {
  RVector grad;
  double lossValue = 0.0;
  std::optional<double> fdCheck;
};

/// Mean batch loss. The dictionary spacing builds the receive map; the
/// precoder spacing builds the transmit beam used to re-simulate each episode.
double batchLoss(LossKind kind, const std::vector<TrainingEpisode>& episodes, const SpacingVector& dictionarySpacing,
                 const SpacingVector& precoderSpacing, const BatchSetup& setup, int threads = 1);

/// d(mean batch loss)/d(spacing) by reverse accumulation through the fixed
/// graph. Window bounds and the argmax are treated as constants; |z| at z = 0
/// contributes nothing. Throws NumericalFailure on a non-finite entry.
GradientReport gradient(LossKind kind, const std::vector<TrainingEpisode>& episodes, const SpacingVector& estimate,
                        PathFlags paths, const BatchSetup& setup, int threads = 1);

/// Central finite differences of batchLoss, perturbing the paths selected by `paths`.
RVector finiteDifferenceGradient(LossKind kind, const std::vector<TrainingEpisode>& episodes,
                                 const SpacingVector& estimate, PathFlags paths, const BatchSetup& setup,
                                 double step, int threads = 1);

/// max_k |a_k - b_k| / max_k |b_k|.
double relativeError(const RVector& analytic, const RVector& reference);

}  // namespace mbisac::mbml
