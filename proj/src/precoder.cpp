#include "mbisac/precoder.hpp"

#include <cmath>

#include "mbisac/errors.hpp"

namespace mbisac {

void IsacKnobs::validate() const {
  if (!(tradeoff >= 0.0 && tradeoff <= 1.0)) throw InvalidArgument("ISAC trade-off must lie in [0, 1]");
  if (!(combinerPhase >= 0.0 && combinerPhase < 2.0 * kPi)) {
    throw InvalidArgument("combiner phase must lie in [0, 2 pi)");
  }
}

BeamSpec desiredBeampattern(Interval interval, const AngleGrid& grid, int antennaCount) {
  if (interval.lo > interval.hi) throw InvalidArgument("beam interval is empty");
  if (interval.lo < -kPi / 2.0 - 1e-12 || interval.hi > kPi / 2.0 + 1e-12) {
    throw InvalidArgument("beam interval outside [-pi/2, pi/2]");
  }
  BeamSpec spec{interval, RVector::Zero(grid.size())};
  for (int i = 0; i < grid.size(); ++i) {
    if (interval.contains(grid.points[static_cast<std::size_t>(i)])) spec.desired[i] = antennaCount;
  }
  return spec;
}

LsBeamformer::LsBeamformer(const CMatrix& steering, const RVector& desired)
    : design_(steering.transpose()) {
  if (design_.rows() != desired.size()) throw InvalidArgument("desired beampattern length does not match grid");
  if (design_.rows() < design_.cols()) {
    throw SingularSystem("steering matrix has fewer grid angles than antennas");
  }
  qr_.setThreshold(1e-10);
  qr_.compute(design_);
  if (qr_.rank() < design_.cols()) {
    throw SingularSystem("steering matrix is rank deficient (rank " + std::to_string(qr_.rank()) + " < " +
                         std::to_string(design_.cols()) + ")");
  }
  const CVector b = desired.cast<cdouble>();
  weights_ = qr_.solve(b);
  residual_ = b - design_ * weights_;
}

CVector LsBeamformer::solveGram(const CVector& rhs) const {
  // A^T = Q R P^T, so A^* A^T = P R^H R P^T.
  const Eigen::Index K = design_.cols();
  const auto R = qr_.matrixR().topLeftCorner(K, K).triangularView<Eigen::Upper>();
  CVector y = qr_.colsPermutation().transpose() * rhs;
  y = R.adjoint().solve(y);
  y = R.solve(y);
  return qr_.colsPermutation() * y;
}

RVector LsBeamformer::spacingGradient(const CVector& weightAdjoint, const std::vector<double>& angles,
                                      const ScenarioConfig& cfg) const {
  const Eigen::Index N = design_.rows();
  const Eigen::Index K = design_.cols();
  if (static_cast<Eigen::Index>(angles.size()) != N || weightAdjoint.size() != K) {
    throw InvalidArgument("LS adjoint inputs have mismatched dimensions");
  }
  // df = G^{-1} (dM^H r - M^H dM f) with M = A^T, G = M^H M, r = b - M f.
  const CVector w = solveGram(weightAdjoint);
  const CVector Mw = design_ * w;
  const double lambda = cfg.wavelength();
  RVector grad = RVector::Zero(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double centered = static_cast<double>(k) - (static_cast<double>(K) - 1.0) / 2.0;
    cdouble acc{0.0, 0.0};
    for (Eigen::Index i = 0; i < N; ++i) {
      const double rate = 2.0 * kPi * centered * std::sin(angles[static_cast<std::size_t>(i)]) / lambda;
      const cdouble dM = -kJ * rate * design_(i, k);
      acc += dM * (std::conj(residual_[i]) * w[k] - std::conj(Mw[i]) * weights_[k]);
    }
    grad[k] = acc.real();
  }
  return grad;
}

Precoder lsBeamformer(const CMatrix& steering, const BeamSpec& beam, PrecoderKind kind) {
  LsBeamformer solver(steering, beam.desired);
  return {solver.weights(), kind};
}

Precoder isacCombine(const CVector& sensing, const CVector& comm, const IsacKnobs& knobs) {
  knobs.validate();
  if (sensing.size() != comm.size()) throw InvalidArgument("precoders have different lengths");
  if (sensing.norm() == 0.0 || comm.norm() == 0.0) throw InvalidArgument("precoders must be nonzero");
  const CVector u = std::sqrt(knobs.tradeoff) * sensing +
                    std::sqrt(1.0 - knobs.tradeoff) * std::polar(1.0, knobs.combinerPhase) * comm;
  const double n = u.norm();
  if (n < 1e-14) throw DegenerateCombination("ISAC beams cancel; combined precoder norm below 1e-14");
  return {u / n, PrecoderKind::Isac};
}

std::pair<CVector, CVector> isacCombineAdjoint(const CVector& sensing, const CVector& comm,
                                               const IsacKnobs& knobs, const CVector& combinedAdjoint) {
  const double a = std::sqrt(knobs.tradeoff);
  const double b = std::sqrt(1.0 - knobs.tradeoff);
  const cdouble rot = std::polar(1.0, knobs.combinerPhase);
  const CVector u = a * sensing + b * rot * comm;
  const double n = u.norm();
  const double proj = combinedAdjoint.dot(u).real();  // Re(fbar^H u)
  const CVector ubar = combinedAdjoint / n - (proj / (n * n * n)) * u;
  return {a * ubar, b * std::conj(rot) * ubar};
}

SectorPrecoders buildSectorPrecoders(Interval sensingSector, Interval commSector,
                                     const SpacingVector& spacing, const AngleGrid& grid,
                                     const ScenarioConfig& cfg) {
  const CMatrix A = steeringMatrix(grid.points, spacing, cfg);
  const BeamSpec sensingBeam = desiredBeampattern(sensingSector, grid, cfg.antennaCount);
  const BeamSpec commBeam = desiredBeampattern(commSector, grid, cfg.antennaCount);
  return {LsBeamformer(A, sensingBeam.desired), LsBeamformer(A, commBeam.desired)};
}

}  // namespace mbisac
