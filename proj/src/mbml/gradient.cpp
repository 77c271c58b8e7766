#include "mbisac/mbml/gradient.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mbisac/errors.hpp"
#include "mbisac/parallel.hpp"

namespace mbisac::mbml {

namespace {

struct EpisodeOutput {
  double loss = 0.0;
  RVector rx;
  CVector precoderAdjoint;
};

void requireLabel(LossKind kind, const TrainingEpisode& ep, std::size_t index) {
  if (kind == LossKind::Supervised && !ep.target.present) {
    throw InvalidBatch("supervised batch contains absent-target episode " + std::to_string(index));
  }
}

double forwardLoss(LossKind kind, const TrainingEpisode& ep, const MapProcessor& processor, const CVector& precoder,
                   const BatchSetup& setup) {
  const SensingObservation obs =
      synthesizeSensing(ep.target, ep.symbols, precoder, setup.trueSpacing, ep.noise, setup.cfg);
  const AngleDelayMap map = processor.map(obs.filtered);
  if (kind == LossKind::Unsupervised) return lossUnsupervised(map);
  const SoftEstimate est = mbmlEstimate(map, 0.0, setup.window, setup.estimator);
  return lossSupervised({est}, {positionFromPolar(ep.target.angle, ep.target.range)});
}

/// Upstream gradient dJ/dL over the window (SL) or at the peak (UL), as a
/// dense block anchored at (rowBegin, colBegin).
struct MapAdjoint {
  WindowBounds bounds;
  RMatrix values;
  double loss = 0.0;
};

MapAdjoint mapAdjoint(LossKind kind, const TrainingEpisode& ep, const AngleDelayMap& map, const BatchSetup& setup) {
  MapAdjoint out;
  if (kind == LossKind::Unsupervised) {
    const PeakLocation peak = argmaxRowMajor(map.values);
    out.loss = -peak.value;
    out.bounds = {peak.row, peak.row + 1, peak.col, peak.col + 1};
    out.values = RMatrix::Constant(1, 1, -1.0);
    return out;
  }
  const SoftEstimate est = mbmlEstimate(map, 0.0, setup.window, setup.estimator);
  if (!est.detected) throw InvalidBatch("supervised episode produced no position estimate");
  const Position truth = positionFromPolar(ep.target.angle, ep.target.range);
  const Eigen::Vector2d diff = est.positionEst - truth;
  out.loss = diff.squaredNorm();
  out.bounds = est.window;
  out.values = RMatrix::Zero(est.window.rows(), est.window.cols());
  if (setup.estimator.hardArgmax) return out;

  const double c = std::cos(est.angleEst);
  const double s = std::sin(est.angleEst);
  const double gAngle = 2.0 * (diff.x() * (-est.rangeEst * s) + diff.y() * (est.rangeEst * c));
  const double gRange = 2.0 * (diff.x() * c + diff.y() * s);
  const auto& w = est.window;
  RMatrix u(w.rows(), w.cols());
  for (int n = 0; n < w.rows(); ++n) {
    for (int m = 0; m < w.cols(); ++m) {
      u(n, m) = gAngle * map.angles[static_cast<std::size_t>(w.rowBegin + n)] +
                gRange * map.ranges[static_cast<std::size_t>(w.colBegin + m)];
    }
  }
  const double mean = (est.probabilities.array() * u.array()).sum();
  out.values = (est.probabilities.array() * (u.array() - mean) / setup.estimator.temperature).matrix();
  return out;
}

EpisodeOutput backwardEpisode(LossKind kind, const TrainingEpisode& ep, const MapProcessor& processor,
                              const CVector& precoder, PathFlags paths, const BatchSetup& setup) {
  const ScenarioConfig& cfg = setup.cfg;
  const int K = cfg.antennaCount;
  const SensingObservation obs =
      synthesizeSensing(ep.target, ep.symbols, precoder, setup.trueSpacing, ep.noise, cfg);
  const MapProcessor::Products prod = processor.products(obs.filtered);
  const AngleDelayMap map = processor.mapFromProducts(prod);
  const MapAdjoint adj = mapAdjoint(kind, ep, map, setup);

  EpisodeOutput out;
  out.loss = adj.loss;
  out.rx = RVector::Zero(K);
  out.precoderAdjoint = CVector::Zero(K);

  // e_ij = dJ/dL_ij * conj(Z_ij) / |Z_ij|, so that dJ = Re(sum e_ij dZ_ij).
  const auto& b = adj.bounds;
  CMatrix e = CMatrix::Zero(b.rows(), b.cols());
  for (int n = 0; n < b.rows(); ++n) {
    for (int m = 0; m < b.cols(); ++m) {
      const cdouble z = prod.bilinear(b.rowBegin + n, b.colBegin + m);
      const double mag = std::abs(z);
      if (mag > 0.0 && adj.values(n, m) != 0.0) e(n, m) = adj.values(n, m) * std::conj(z) / mag;
    }
  }

  const CMatrix& dict = processor.angleDictionary();
  const auto& angles = processor.grid().angles;
  const double lambda = cfg.wavelength();

  if (paths.rx) {
    // dZ_ij/dd_k = j w_ki conj(Phi_ki) G_kj with w_ki = 2 pi c_k sin(theta_i) / lambda.
    for (int n = 0; n < b.rows(); ++n) {
      const int i = b.rowBegin + n;
      const CVector v = prod.delayProjected.middleCols(b.colBegin, b.cols()) * e.row(n).transpose();
      const double s = std::sin(angles[static_cast<std::size_t>(i)]);
      for (int k = 0; k < K; ++k) {
        const double rate = 2.0 * kPi * (k - (K - 1) / 2.0) * s / lambda;
        out.rx[k] += (kJ * rate * std::conj(dict(k, i)) * v[k]).real();
      }
    }
  }

  if (paths.tx && ep.target.present) {
    // Filtered signal part is gamma * H with gamma = a_tx^T f, so dZ_ij = H_ij dgamma.
    const CVector aTrue = steeringPerturbed(ep.target.angle, setup.trueSpacing, cfg);
    const CVector rho = delayResponse(ep.target.delay, cfg);
    const cdouble scale = ep.target.gain / std::sqrt(static_cast<double>(cfg.subcarrierCount));
    const CMatrix& delays = processor.delayDictionary();
    cdouble cGamma{0.0, 0.0};
    for (int n = 0; n < b.rows(); ++n) {
      const cdouble angular = dict.col(b.rowBegin + n).dot(aTrue);
      for (int m = 0; m < b.cols(); ++m) {
        if (e(n, m) == cdouble{0.0, 0.0}) continue;
        const cdouble delay = delays.col(b.colBegin + m).dot(rho);
        cGamma += e(n, m) * scale * angular * delay;
      }
    }
    // dJ = Re(cGamma a^T df) = Re(fbar^H df) with fbar = conj(cGamma a).
    out.precoderAdjoint = (cGamma * aTrue).conjugate();
  }
  return out;
}

void requireFinite(const RVector& grad) {
  for (Eigen::Index k = 0; k < grad.size(); ++k) {
    if (!std::isfinite(grad[k])) {
      throw NumericalFailure("gradient entry " + std::to_string(k) + " is not finite");
    }
  }
}

}  // namespace

BatchSetup makeBatchSetup(const ScenarioConfig& cfg, const SpacingVector& trueSpacing, Interval sensingSector,
                          const IsacKnobs& knobs, const EstimatorOptions& estimator) {
  return {cfg,
          trueSpacing,
          DictionaryGrids::fromConfig(cfg),
          sensingSector,
          cfg.ueAnglePrior,
          knobs,
          resolutionWindow(cfg, sensingSector),
          estimator};
}

double batchLoss(LossKind kind, const std::vector<TrainingEpisode>& episodes, const SpacingVector& dictionarySpacing,
                 const SpacingVector& precoderSpacing, const BatchSetup& setup, int threads) {
  if (episodes.empty()) throw InvalidBatch("empty batch");
  for (std::size_t e = 0; e < episodes.size(); ++e) requireLabel(kind, episodes[e], e);
  const SectorPrecoders precoders = buildSectorPrecoders(setup.sensingSector, setup.commSector, precoderSpacing,
                                                         setup.grids.angles, setup.cfg);
  const CVector f = precoders.combine(setup.knobs).weights;
  const MapProcessor processor(setup.grids.sector(setup.sensingSector, setup.cfg.targetRangePrior),
                               dictionarySpacing, setup.cfg);
  std::vector<double> losses(episodes.size());
  parallelFor(episodes.size(), threads,
              [&](std::size_t e) { losses[e] = forwardLoss(kind, episodes[e], processor, f, setup); });
  return pairwiseSum(losses) / static_cast<double>(episodes.size());
}

GradientReport gradient(LossKind kind, const std::vector<TrainingEpisode>& episodes, const SpacingVector& estimate,
                        PathFlags paths, const BatchSetup& setup, int threads) {
  if (episodes.empty()) throw InvalidBatch("empty batch");
  for (std::size_t e = 0; e < episodes.size(); ++e) requireLabel(kind, episodes[e], e);
  const SectorPrecoders precoders =
      buildSectorPrecoders(setup.sensingSector, setup.commSector, estimate, setup.grids.angles, setup.cfg);
  const CVector f = precoders.combine(setup.knobs).weights;
  const MapProcessor processor(setup.grids.sector(setup.sensingSector, setup.cfg.targetRangePrior), estimate,
                               setup.cfg);

  std::vector<EpisodeOutput> outputs(episodes.size());
  parallelFor(episodes.size(), threads, [&](std::size_t e) {
    outputs[e] = backwardEpisode(kind, episodes[e], processor, f, paths, setup);
  });

  const double inv = 1.0 / static_cast<double>(episodes.size());
  std::vector<double> losses(outputs.size());
  std::vector<RVector> rx(outputs.size());
  std::vector<CVector> fbar(outputs.size());
  for (std::size_t e = 0; e < outputs.size(); ++e) {
    losses[e] = outputs[e].loss;
    rx[e] = std::move(outputs[e].rx);
    fbar[e] = std::move(outputs[e].precoderAdjoint);
  }

  GradientReport report;
  report.lossValue = pairwiseSum(losses) * inv;
  report.grad = pairwiseSum(rx) * inv;
  if (paths.tx) {
    const CVector precoderAdjoint = pairwiseSum(fbar) * inv;
    const auto [sensingAdj, commAdj] = isacCombineAdjoint(precoders.sensing.weights(), precoders.comm.weights(),
                                                          setup.knobs, precoderAdjoint);
    report.grad += precoders.sensing.spacingGradient(sensingAdj, setup.grids.angles.points, setup.cfg);
    report.grad += precoders.comm.spacingGradient(commAdj, setup.grids.angles.points, setup.cfg);
  }
  requireFinite(report.grad);
  return report;
}

RVector finiteDifferenceGradient(LossKind kind, const std::vector<TrainingEpisode>& episodes,
                                 const SpacingVector& estimate, PathFlags paths, const BatchSetup& setup,
                                 double step, int threads) {
  const int K = estimate.size();
  RVector fd = RVector::Zero(K);
  for (int k = 0; k < K; ++k) {
    RVector plus = estimate.values();
    RVector minus = estimate.values();
    plus[k] += step;
    minus[k] -= step;
    const SpacingVector dp(plus), dm(minus);
    const double jp = batchLoss(kind, episodes, paths.rx ? dp : estimate, paths.tx ? dp : estimate, setup, threads);
    const double jm = batchLoss(kind, episodes, paths.rx ? dm : estimate, paths.tx ? dm : estimate, setup, threads);
    fd[k] = (jp - jm) / (2.0 * step);
  }
  return fd;
}

double relativeError(const RVector& analytic, const RVector& reference) {
  const double scale = reference.cwiseAbs().maxCoeff();
  const double err = (analytic - reference).cwiseAbs().maxCoeff();
  if (scale == 0.0) return err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return err / scale;
}

}  // namespace mbisac::mbml
