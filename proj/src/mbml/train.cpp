#include "mbisac/mbml/train.hpp"

#include <cmath>
#include <string>

#include "mbisac/baseline_rx.hpp"
#include "mbisac/errors.hpp"
#include "mbisac/parallel.hpp"

namespace mbisac::mbml {

namespace {

constexpr int kEpisodeIndexBits = 20;

LossKind lossFor(TrainMode mode) {
  return mode == TrainMode::Supervised ? LossKind::Supervised : LossKind::Unsupervised;
}

void validateSchedule(const TrainingSchedule& s) {
  if (s.phases.empty()) throw InvalidArgument("training schedule has no phases");
  if (s.batchSize < 1 || s.batchSize >= (1 << kEpisodeIndexBits)) {
    throw InvalidArgument("batch size out of range");
  }
  for (const auto& p : s.phases) {
    if (p.iterations < 0) throw InvalidArgument("phase iteration count must be non-negative");
    if (!(p.learningRate > 0.0) || !std::isfinite(p.learningRate)) {
      throw InvalidArgument("learning rate must be positive");
    }
    if (p.lrDropAt >= 0 && !(p.droppedLearningRate > 0.0)) {
      throw InvalidArgument("dropped learning rate must be positive");
    }
  }
  if (!(s.sectorSpanRange.lo > 0.0) || s.sectorSpanRange.lo > s.sectorSpanRange.hi) {
    throw InvalidArgument("sector span range must be positive and ordered");
  }
  if (s.sectorMeanRange.lo > s.sectorMeanRange.hi) throw InvalidArgument("sector mean range is reversed");
  if (s.ulGateThreshold < 0.0) throw InvalidArgument("gate threshold must be non-negative");
  if (s.validationEvery < 0 || s.validationEpisodes < 1) throw InvalidArgument("bad validation settings");
  s.knobs.validate();
}

/// Drops episodes whose map peak under the current estimate is not above the gate.
std::vector<TrainingEpisode> gateEpisodes(std::vector<TrainingEpisode> batch, const SpacingVector& estimate,
                                          const BatchSetup& setup, double gate, int threads) {
  const SectorPrecoders precoders =
      buildSectorPrecoders(setup.sensingSector, setup.commSector, estimate, setup.grids.angles, setup.cfg);
  const CVector f = precoders.combine(setup.knobs).weights;
  const MapProcessor processor(setup.grids.sector(setup.sensingSector, setup.cfg.targetRangePrior), estimate,
                               setup.cfg);
  std::vector<char> keep(batch.size(), 0);
  parallelFor(batch.size(), threads, [&](std::size_t e) {
    const auto& ep = batch[e];
    const SensingObservation obs = synthesizeSensing(ep.target, ep.symbols, f, setup.trueSpacing, ep.noise, setup.cfg);
    keep[e] = argmaxRowMajor(processor.map(obs.filtered).values).value > gate ? 1 : 0;
  });
  std::vector<TrainingEpisode> kept;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    if (keep[e]) kept.push_back(std::move(batch[e]));
  }
  return kept;
}

}  // namespace

const char* toString(TrainMode mode) { return mode == TrainMode::Supervised ? "SL" : "UL"; }

std::int64_t TrainingSchedule::totalIterations() const {
  std::int64_t n = 0;
  for (const auto& p : phases) n += p.iterations;
  return n;
}

std::int64_t TrainingSchedule::supervisedSamples() const {
  std::int64_t n = 0;
  for (const auto& p : phases) {
    if (p.mode == TrainMode::Supervised) n += p.iterations * batchSize;
  }
  return n;
}

TrainingSchedule TrainingSchedule::fullScale(std::int64_t supervisedIterations) {
  constexpr std::int64_t total = 85000;
  if (supervisedIterations < 0 || supervisedIterations > total) {
    throw InvalidArgument("supervised iterations must lie in [0, 85000]");
  }
  TrainingSchedule s;
  s.batchSize = 3000;
  if (supervisedIterations > 0) {
    s.phases.push_back({TrainMode::Supervised, supervisedIterations, 4e-7, 50000, 4e-8});
  }
  if (total - supervisedIterations > 0) {
    s.phases.push_back({TrainMode::Unsupervised, total - supervisedIterations, 5e-7, -1, 0.0});
  }
  return s;
}

TrainingSchedule TrainingSchedule::sequential(std::int64_t supervisedIterations, std::int64_t unsupervisedIterations,
                                              bool supervisedFirst, int batchSize, double supervisedLr,
                                              double unsupervisedLr) {
  TrainingSchedule s;
  s.batchSize = batchSize;
  const TrainPhase sl{TrainMode::Supervised, supervisedIterations, supervisedLr, -1, 0.0};
  const TrainPhase ul{TrainMode::Unsupervised, unsupervisedIterations, unsupervisedLr, -1, 0.0};
  if (supervisedFirst) {
    if (sl.iterations > 0) s.phases.push_back(sl);
    if (ul.iterations > 0) s.phases.push_back(ul);
  } else {
    if (ul.iterations > 0) s.phases.push_back(ul);
    if (sl.iterations > 0) s.phases.push_back(sl);
  }
  return s;
}

TrainState initialTrainState(const ScenarioConfig& cfg, const TrainingSchedule& schedule) {
  TrainState state;
  state.estimate = SpacingVector::nominal(cfg);
  state.adam = AdamMoments::zeros(cfg.antennaCount);
  state.labeledRemaining = schedule.labeledBudget;
  return state;
}

Interval drawTrainingSector(const ScenarioConfig& cfg, const TrainingSchedule& schedule, std::int64_t iteration) {
  Rng rng = substream(cfg.masterSeed, Domain::TrainingSector, static_cast<std::uint64_t>(iteration), Purpose::Sector);
  const double center = uniform(rng, schedule.sectorMeanRange.lo, schedule.sectorMeanRange.hi);
  const double span = uniform(rng, schedule.sectorSpanRange.lo, schedule.sectorSpanRange.hi);
  double lo = center - span / 2.0;
  double hi = center + span / 2.0;
  // Shift rather than shrink so the width is kept near endfire.
  if (lo < -kPi / 2.0) {
    hi += -kPi / 2.0 - lo;
    lo = -kPi / 2.0;
  }
  if (hi > kPi / 2.0) {
    lo -= hi - kPi / 2.0;
    hi = kPi / 2.0;
  }
  return {lo, hi};
}

std::vector<TrainingEpisode> drawEpisodes(const ScenarioConfig& cfg, Domain domain, std::uint64_t firstIndex,
                                          std::size_t count, Interval sector, bool presenceConditioned,
                                          int threads) {
  std::vector<TrainingEpisode> out(count);
  parallelFor(count, threads, [&](std::size_t e) {
    const std::uint64_t index = firstIndex + e;
    Rng priors = substream(cfg.masterSeed, domain, index, Purpose::Priors);
    Rng noise = substream(cfg.masterSeed, domain, index, Purpose::SensingNoise);
    auto [target, comm] = samplePriors(priors, cfg, sector);
    if (presenceConditioned) target.present = true;
    out[e] = {target, comm.symbols, sampleSensingNoise(noise, cfg)};
  });
  return out;
}

TrainResult train(const ScenarioConfig& cfg, const TrainingSchedule& schedule, std::optional<TrainState> resume,
                  const std::function<void(const TrainLogEntry&)>& progress) {
  cfg.validate();
  validateSchedule(schedule);
  const SpacingVector truth = sampleImpairment(cfg);

  TrainResult result;
  result.state = resume ? std::move(*resume) : initialTrainState(cfg, schedule);
  TrainState& st = result.state;
  if (st.estimate.size() != cfg.antennaCount) throw InvalidArgument("resumed estimate has the wrong size");
  if (st.phaseIndex > schedule.phases.size()) throw InvalidArgument("resumed phase index out of range");

  std::vector<TrainingEpisode> validation;
  BatchSetup validationSetup = makeBatchSetup(cfg, truth, cfg.targetAnglePrior, schedule.knobs, schedule.estimator);
  if (schedule.validationEvery > 0) {
    validation = drawEpisodes(cfg, Domain::Validation, 0, static_cast<std::size_t>(schedule.validationEpisodes),
                              cfg.targetAnglePrior, true, schedule.threads);
  }

  while (st.phaseIndex < schedule.phases.size()) {
    const TrainPhase& phase = schedule.phases[st.phaseIndex];
    if (st.phaseIteration >= phase.iterations) {
      ++st.phaseIndex;
      st.phaseIteration = 0;
      // Keep the final moments so a checkpoint of a finished run can be resumed mid-phase.
      if (st.phaseIndex < schedule.phases.size()) st.adam = AdamMoments::zeros(cfg.antennaCount);
      continue;
    }
    if (phase.mode == TrainMode::Supervised && st.labeledRemaining >= 0 &&
        st.labeledRemaining < schedule.batchSize) {
      throw BudgetExhausted("labeled budget exhausted at iteration " + std::to_string(st.iteration));
    }

    const Interval sector = drawTrainingSector(cfg, schedule, st.iteration);
    const bool conditioned = phase.mode == TrainMode::Supervised || schedule.ulPresenceConditioned;
    std::vector<TrainingEpisode> batch =
        drawEpisodes(cfg, Domain::Training, static_cast<std::uint64_t>(st.iteration) << kEpisodeIndexBits,
                     static_cast<std::size_t>(schedule.batchSize), sector, conditioned, schedule.threads);
    const BatchSetup setup = makeBatchSetup(cfg, truth, sector, schedule.knobs, schedule.estimator);
    if (phase.mode == TrainMode::Unsupervised && schedule.ulGateThreshold > 0.0) {
      batch = gateEpisodes(std::move(batch), st.estimate, setup, schedule.ulGateThreshold, schedule.threads);
    }

    TrainLogEntry entry;
    entry.iteration = st.iteration;
    entry.mode = phase.mode;
    entry.learningRate = phase.learningRateAt(st.phaseIteration);
    entry.batchUsed = static_cast<int>(batch.size());
    if (!batch.empty()) {
      const GradientReport rep =
          gradient(lossFor(phase.mode), batch, st.estimate,
                   phase.mode == TrainMode::Supervised ? schedule.supervisedPaths : schedule.unsupervisedPaths, setup,
                   schedule.threads);
      RVector d = st.estimate.values();
      adamUpdate(d, st.adam, rep.grad, entry.learningRate);
      for (Eigen::Index k = 0; k < d.size(); ++k) {
        if (!(d[k] > 0.0)) {
          throw NumericalFailure("spacing entry " + std::to_string(k) + " left the positive orthant");
        }
      }
      st.estimate = SpacingVector(d);
      entry.loss = rep.lossValue;
    } else {
      entry.loss = std::numeric_limits<double>::quiet_NaN();
    }
    st.lossHistory.push_back(entry.loss);
    if (phase.mode == TrainMode::Supervised && st.labeledRemaining >= 0) st.labeledRemaining -= schedule.batchSize;

    ++st.iteration;
    ++st.phaseIteration;
    if (schedule.validationEvery > 0 && st.iteration % schedule.validationEvery == 0) {
      entry.validationSupervised = batchLoss(LossKind::Supervised, validation, st.estimate, st.estimate,
                                             validationSetup, schedule.threads);
      entry.validationUnsupervised = batchLoss(LossKind::Unsupervised, validation, st.estimate, st.estimate,
                                               validationSetup, schedule.threads);
    }
    if (progress) progress(entry);
    result.log.push_back(entry);
  }
  return result;
}

double steeringMismatch(const SpacingVector& estimate, const SpacingVector& truth, const ScenarioConfig& cfg,
                        int count) {
  if (count < 2) throw InvalidArgument("mismatch needs at least two angles");
  double sum = 0.0;
  for (int i = 0; i < count; ++i) {
    const double theta = -kPi / 2.0 + kPi * i / (count - 1);
    sum += (steeringPerturbed(theta, estimate, cfg) - steeringPerturbed(theta, truth, cfg)).norm();
  }
  return sum / count;
}

}  // namespace mbisac::mbml
