#include "mbisac/harness/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "mbisac/errors.hpp"
#include "mbisac/format.hpp"
#include "mbisac/mbml/checkpoint.hpp"
#include "mbisac/parallel.hpp"
#include "mbisac/precoder.hpp"

namespace mbisac::harness {

namespace {

std::size_t nearestIndex(const std::vector<double>& points, double value) {
  const auto it = std::lower_bound(points.begin(), points.end(), value);
  if (it == points.begin()) return 0;
  if (it == points.end()) return points.size() - 1;
  const auto hi = static_cast<std::size_t>(it - points.begin());
  return (value - points[hi - 1] <= points[hi] - value) ? hi - 1 : hi;
}

}  // namespace

SpacingVector methodSpacing(Method method, const ScenarioConfig& cfg, const SpacingVector* learned) {
  switch (method) {
    case Method::BaselineGenie:
      return sampleImpairment(cfg);
    case Method::BaselineNominal:
      return SpacingVector::nominal(cfg);
    case Method::Mbml:
      if (!learned) throw InvalidArgument("mbml evaluation needs a learned spacing");
      return *learned;
  }
  throw InvalidArgument("unknown method");
}

ThresholdCalibration calibrateForSpacing(const ScenarioConfig& cfg, const SpacingVector& dictionary,
                                         const EvaluationSettings& settings, int threads) {
  const DictionaryGrids grids = DictionaryGrids::fromConfig(cfg);
  const MapProcessor processor(grids.sector(settings.sector, cfg.targetRangePrior), dictionary, cfg);
  return calibrateThreshold(settings.targetPfa, settings.nCalib, cfg, processor, threads);
}

std::vector<EpisodeOutcome> runEpisodes(std::size_t count, const ScenarioConfig& cfg, const SpacingVector& dictionary,
                                        const EvaluationSettings& settings, double threshold, bool soft,
                                        const mbml::EstimatorOptions& estimator, int threads) {
  cfg.validate();
  const SpacingVector truth = sampleImpairment(cfg);
  const DictionaryGrids grids = DictionaryGrids::fromConfig(cfg);
  const MapProcessor processor(grids.sector(settings.sector, cfg.targetRangePrior), dictionary, cfg);
  const SectorPrecoders precoders = buildSectorPrecoders(settings.sector, cfg.ueAnglePrior, dictionary, grids.angles, cfg);
  const CVector f = precoders.combine(settings.knobs).weights;
  const mbml::ResolutionWindow window = mbml::resolutionWindow(cfg, settings.sector);
  const Constellation constellation(cfg.constellationSize);

  std::vector<EpisodeOutcome> out(count);
  parallelFor(count, threads, [&](std::size_t i) {
    Rng priors = substream(cfg.masterSeed, Domain::Evaluation, i, Purpose::Priors);
    Rng sensingNoise = substream(cfg.masterSeed, Domain::Evaluation, i, Purpose::SensingNoise);
    Rng commNoise = substream(cfg.masterSeed, Domain::Evaluation, i, Purpose::CommNoise);
    auto [target, comm] = samplePriors(priors, cfg, settings.sector);
    if (settings.onGridTargets) {
      const auto& g = processor.grid();
      target.angle = g.angles[nearestIndex(g.angles, target.angle)];
      target.range = g.ranges[nearestIndex(g.ranges, target.range)];
      target.delay = 2.0 * target.range / kSpeedOfLight;
    }
    const CMatrix w = sampleSensingNoise(sensingNoise, cfg);
    const SensingObservation obs = synthesizeSensing(target, comm.symbols, f, truth, w, cfg);

    EpisodeOutcome& o = out[i];
    o.index = i;
    o.target = target;
    if (soft) {
      const mbml::SoftEstimate est = mbml::mbmlEstimate(obs.filtered, processor, threshold, window, estimator);
      o.detected = est.detected;
      o.peak = est.peakValue;
      o.angleEst = est.angleEst;
      o.rangeEst = est.rangeEst;
      if (est.detected && target.present) {
        o.squaredError = (est.positionEst - positionFromPolar(target.angle, target.range)).squaredNorm();
      }
    } else {
      const DetectionResult det = maprtDetectEstimate(obs.filtered, processor, threshold);
      o.detected = det.detected;
      o.peak = det.peakValue;
      o.angleEst = det.angleEst;
      o.rangeEst = det.rangeEst;
      if (det.detected && target.present) {
        o.squaredError = (det.positionEst - positionFromPolar(target.angle, target.range)).squaredNorm();
      }
    }

    const CVector n = sampleCommNoise(commNoise, cfg);
    const CommObservation rx = synthesizeComm(comm, f, truth, n, cfg);
    const std::vector<int> decided = mleDecode(rx.received, rx.csi, constellation);
    for (std::size_t s = 0; s < decided.size(); ++s) o.symbolErrors += decided[s] != comm.messages[s] ? 1 : 0;
  });
  return out;
}

MetricsRecord evaluate(Method method, const ScenarioConfig& cfg, const SpacingVector& dictionary,
                       const EvaluationSettings& settings, std::optional<double> threshold,
                       const mbml::EstimatorOptions& estimator, int threads) {
  MetricsRecord r;
  r.method = toString(method);
  r.seed = cfg.masterSeed;
  r.eta = settings.knobs.tradeoff;
  r.phic = settings.knobs.combinerPhase;
  r.nEval = settings.nEval;
  r.threshold = threshold ? *threshold : calibrateForSpacing(cfg, dictionary, settings, threads).threshold;

  const auto outcomes =
      runEpisodes(settings.nEval, cfg, dictionary, settings, r.threshold, method == Method::Mbml, estimator, threads);
  std::vector<double> squared;
  for (const auto& o : outcomes) {
    if (o.target.present) {
      ++r.presentCount;
      if (!o.detected) {
        ++r.missedCount;
      } else {
        ++r.truePositiveCount;
        squared.push_back(o.squaredError);
      }
    } else {
      ++r.absentCount;
      if (o.detected) ++r.falseAlarmCount;
    }
    r.symbolErrors += o.symbolErrors;
  }
  r.symbolCount = settings.nEval * static_cast<std::size_t>(cfg.subcarrierCount);
  r.pmd = r.presentCount ? static_cast<double>(r.missedCount) / static_cast<double>(r.presentCount) : 0.0;
  r.pfa = r.absentCount ? static_cast<double>(r.falseAlarmCount) / static_cast<double>(r.absentCount) : 0.0;
  r.ser = static_cast<double>(r.symbolErrors) / static_cast<double>(r.symbolCount);
  if (squared.empty()) {
    r.rmse = std::numeric_limits<double>::quiet_NaN();
    r.warnings.push_back("no true positives; RMSE undefined");
  } else {
    r.rmse = std::sqrt(pairwiseSum(squared) / static_cast<double>(squared.size()));
  }
  if (static_cast<double>(settings.nEval) < 10.0 / settings.targetPfa) {
    r.warnings.push_back("n_eval " + std::to_string(settings.nEval) + " is below 10/target_pfa; Pmd is underpowered");
  }
  if (r.presentCount == 0) r.warnings.push_back("no target-present episodes; Pmd undefined");
  if (r.absentCount == 0) r.warnings.push_back("no target-absent episodes; Pfa undefined");
  return r;
}

std::vector<MetricsRecord> paretoSweep(const ScenarioConfig& cfg, const std::vector<Method>& methods,
                                       const SpacingVector* learned, const EvaluationSettings& settings,
                                       const SweepSettings& sweep, const mbml::EstimatorOptions& estimator,
                                       int threads) {
  std::vector<MetricsRecord> out;
  for (const Method method : methods) {
    const SpacingVector dictionary = methodSpacing(method, cfg, learned);
    const double threshold = calibrateForSpacing(cfg, dictionary, settings, threads).threshold;
    for (const double eta : sweep.etaGrid()) {
      for (const double phase : sweep.phaseGrid()) {
        EvaluationSettings point = settings;
        point.knobs = {eta, phase};
        out.push_back(evaluate(method, cfg, dictionary, point, threshold, estimator, threads));
      }
    }
  }
  return out;
}

std::vector<MetricsRecord> paretoFronts(const std::vector<MetricsRecord>& records) {
  std::vector<std::string> tags;
  for (const auto& r : records) {
    if (std::find(tags.begin(), tags.end(), r.method) == tags.end()) tags.push_back(r.method);
  }
  std::vector<MetricsRecord> out;
  for (const auto& tag : tags) {
    std::vector<MetricsRecord> group;
    for (const auto& r : records) {
      if (r.method == tag) group.push_back(r);
    }
    for (auto& r : paretoFilter(group)) out.push_back(std::move(r));
  }
  return out;
}

mbml::TrainingSchedule ratioSchedule(const mbml::TrainingSchedule& base, double ratio, std::int64_t totalIterations) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw InvalidArgument("labeled ratio must lie in [0, 1]");
  mbml::TrainPhase sl{mbml::TrainMode::Supervised, 0, 0.0, -1, 0.0};
  mbml::TrainPhase ul{mbml::TrainMode::Unsupervised, 0, 0.0, -1, 0.0};
  bool haveSl = false;
  bool haveUl = false;
  for (const auto& p : base.phases) {
    if (p.mode == mbml::TrainMode::Supervised && !haveSl) {
      sl = p;
      haveSl = true;
    }
    if (p.mode == mbml::TrainMode::Unsupervised && !haveUl) {
      ul = p;
      haveUl = true;
    }
  }
  if (!haveSl || !haveUl) {
    const auto desk = deskSchedule(1, 1);
    if (!haveSl) sl = desk.phases[0];
    if (!haveUl) ul = desk.phases[1];
  }
  sl.iterations = std::llround(ratio * static_cast<double>(totalIterations));
  ul.iterations = totalIterations - sl.iterations;

  mbml::TrainingSchedule s = base;
  s.phases.clear();
  if (sl.iterations > 0) s.phases.push_back(sl);
  if (ul.iterations > 0) s.phases.push_back(ul);
  s.labeledBudget = sl.iterations * s.batchSize;
  return s;
}

std::vector<RatioResult> labeledRatioStudy(const ExperimentConfig& cfg) {
  std::vector<RatioResult> out;
  for (const double ratio : cfg.ratioStudy.ratios) {
    mbml::TrainingSchedule schedule = ratioSchedule(cfg.schedule, ratio, cfg.ratioStudy.totalIterations);
    schedule.threads = cfg.threads;
    const mbml::TrainResult trained = mbml::train(cfg.scenario, schedule);
    RatioResult r;
    r.ratio = ratio;
    r.learned = trained.state.estimate;
    r.metrics = evaluate(Method::Mbml, cfg.scenario, r.learned, cfg.evaluation, std::nullopt, schedule.estimator,
                         cfg.threads);
    r.metrics.method = "ssl-r" + formatDouble(ratio);
    out.push_back(std::move(r));
  }
  return out;
}

SpacingVector learnedSpacing(const ExperimentConfig& cfg) {
  if (!cfg.checkpointPath.empty()) return mbml::loadCheckpoint(cfg.checkpointPath, cfg.scenario).estimate;
  mbml::TrainingSchedule schedule = cfg.schedule;
  schedule.threads = cfg.threads;
  return mbml::train(cfg.scenario, schedule).state.estimate;
}

std::vector<GradientCheckRow> gradientCheckSuite(std::uint64_t seed, int configurations, int threads) {
  ScenarioConfig cfg = ScenarioConfig::deskScale();
  cfg.antennaCount = 8;
  cfg.subcarrierCount = 16;
  cfg.angleGridSize = 90;
  cfg.delayGridSize = 25;
  cfg.masterSeed = seed;
  const SpacingVector truth = sampleImpairment(cfg);
  const double step = 1e-7 * cfg.wavelength();

  std::vector<GradientCheckRow> rows;
  for (int c = 0; c < configurations; ++c) {
    Rng rng = substream(seed, Domain::Test, static_cast<std::uint64_t>(c), Purpose::Spacing);
    const SpacingVector estimate = sampleImpairment(cfg, rng);
    const double center = uniform(rng, degToRad(-60.0), degToRad(60.0));
    const double span = uniform(rng, degToRad(10.0), degToRad(20.0));
    const Interval sector{center - span / 2.0, center + span / 2.0};
    const IsacKnobs knobs{uniform(rng, 0.2, 1.0), uniform(rng, 0.0, 2.0 * kPi)};
    const auto episodes = mbml::drawEpisodes(cfg, Domain::Test, (static_cast<std::uint64_t>(c) + 1) << 20, 4, sector,
                                             true, threads);
    const mbml::BatchSetup setup = mbml::makeBatchSetup(cfg, truth, sector, knobs);
    for (const auto loss : {mbml::LossKind::Supervised, mbml::LossKind::Unsupervised}) {
      for (const bool tx : {false, true}) {
        const mbml::PathFlags paths{true, tx};
        const auto report = mbml::gradient(loss, episodes, estimate, paths, setup, threads);
        const RVector fd = mbml::finiteDifferenceGradient(loss, episodes, estimate, paths, setup, step, threads);
        rows.push_back({c, loss, tx, mbml::relativeError(report.grad, fd)});
      }
    }
  }
  return rows;
}

}  // namespace mbisac::harness
