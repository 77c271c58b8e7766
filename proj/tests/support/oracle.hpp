#pragma once

// Independent reference implementations used only by tests. Written with
// plain loops and the textbook formulas, sharing no code with the library
// beyond its value types.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kC = 299792458.0;

inline double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

inline double normalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// One-sample Kolmogorov-Smirnov statistic of `samples` against N(0, variance).
inline double ksStatisticNormal(std::vector<double> samples, double variance) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  const double sd = std::sqrt(variance);
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = normalCdf(samples[i] / sd);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// exp(-j 2 pi (k - (K-1)/2) d_k sin(theta) / lambda).
inline CVec steering(double theta, const RVec& d, double lambda) {
  const int K = static_cast<int>(d.size());
  CVec a(K);
  for (int k = 0; k < K; ++k) {
    const double phase = -2.0 * kPi * (k - (K - 1) / 2.0) * d[k] * std::sin(theta) / lambda;
    a[k] = cd(std::cos(phase), std::sin(phase));
  }
  return a;
}

inline CVec delay(double tau, int S, double df) {
  CVec r(S);
  for (int s = 0; s < S; ++s) {
    const double phase = -2.0 * kPi * s * df * tau;
    r[s] = cd(std::cos(phase), std::sin(phase));
  }
  return r;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

/// |sum_k sum_s conj(a_k(theta_i)) Y_ks conj(rho_s(tau_j))| by explicit loops.
inline RMat map(const CMat& Y, const std::vector<double>& angles, const std::vector<double>& delays, const RVec& d,
                double lambda, double df) {
  RMat L(angles.size(), delays.size());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const CVec a = steering(angles[i], d, lambda);
    for (std::size_t j = 0; j < delays.size(); ++j) {
      const CVec r = delay(delays[j], static_cast<int>(Y.cols()), df);
      cd acc(0.0, 0.0);
      for (Eigen::Index k = 0; k < Y.rows(); ++k) {
        for (Eigen::Index s = 0; s < Y.cols(); ++s) acc += std::conj(a[k]) * Y(k, s) * std::conj(r[s]);
      }
      L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::abs(acc);
    }
  }
  return L;
}

/// LS precoder through the normal equations (A^* A^T) f = A^* b with a full-pivot LU.
inline CVec lsPrecoder(const CMat& A, const RVec& b) {
  const CMat At = A.transpose();
  const CMat gram = A.conjugate() * At;
  const CVec rhs = A.conjugate() * b.cast<cd>();
  return gram.fullPivLu().solve(rhs);
}

inline CVec combine(const CVec& fr, const CVec& fc, double eta, double phase) {
  const CVec f = std::sqrt(eta) * fr + std::sqrt(1.0 - eta) * std::polar(1.0, phase) * fc;
  return f / f.norm();
}

struct Scene {
  int K = 8;
  int S = 16;
  double lambda = 0.0;
  double df = 0.0;
  std::vector<double> gridAngles;  // full dictionary angles
  std::vector<double> gridRanges;  // full dictionary ranges
  double sectorLo = 0.0, sectorHi = 0.0;
  double ueLo = 0.0, ueHi = 0.0;
  double rangeLo = 0.0, rangeHi = 0.0;
  int angleCells = 0, rangeCells = 0;
  double temperature = 1.0;
  double eta = 1.0, phase = 0.0;
  RVec truth;
};

struct Episode {
  double angle = 0.0, range = 0.0;
  cd gain;
  CVec symbols;
  CMat noise;
};

/// Precoder a transmitter with spacing model `d` would use for the scene.
inline CVec precoder(const Scene& sc, const RVec& d) {
  CMat A(sc.K, static_cast<Eigen::Index>(sc.gridAngles.size()));
  RVec br = RVec::Zero(static_cast<Eigen::Index>(sc.gridAngles.size()));
  RVec bc = br;
  for (std::size_t i = 0; i < sc.gridAngles.size(); ++i) {
    const double t = sc.gridAngles[i];
    A.col(static_cast<Eigen::Index>(i)) = steering(t, d, sc.lambda);
    if (t >= sc.sectorLo && t <= sc.sectorHi) br[static_cast<Eigen::Index>(i)] = sc.K;
    if (t >= sc.ueLo && t <= sc.ueHi) bc[static_cast<Eigen::Index>(i)] = sc.K;
  }
  return combine(lsPrecoder(A, br), lsPrecoder(A, bc), sc.eta, sc.phase);
}

/// Loss of one present-target episode with receive model dRx and transmit
/// model dTx. Supervised: squared position error of the windowed softmax
/// estimate. Unsupervised: negative map peak.
inline double episodeLoss(const Scene& sc, const Episode& ep, const RVec& dRx, const RVec& dTx, bool supervised) {
  const CVec f = precoder(sc, dTx);
  const CVec aTrue = steering(ep.angle, sc.truth, sc.lambda);
  cd txGain(0.0, 0.0);
  for (int k = 0; k < sc.K; ++k) txGain += aTrue[k] * f[k];
  const CVec rho = delay(2.0 * ep.range / kC, sc.S, sc.df);
  CMat Y = ep.noise;
  for (int k = 0; k < sc.K; ++k) {
    for (int s = 0; s < sc.S; ++s) {
      Y(k, s) += ep.gain * txGain / std::sqrt(static_cast<double>(sc.S)) * aTrue[k] * ep.symbols[s] * rho[s];
    }
  }
  for (int s = 0; s < sc.S; ++s) Y.col(s) /= ep.symbols[s];

  std::vector<double> angles, ranges, delays;
  for (double t : sc.gridAngles) {
    if (t >= sc.sectorLo && t <= sc.sectorHi) angles.push_back(t);
  }
  for (double r : sc.gridRanges) {
    if (r >= sc.rangeLo && r <= sc.rangeHi) {
      ranges.push_back(r);
      delays.push_back(2.0 * r / kC);
    }
  }
  const RMat L = map(Y, angles, delays, dRx, sc.lambda, sc.df);
  Eigen::Index bi = 0, bj = 0;
  double best = L(0, 0);
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    for (Eigen::Index j = 0; j < L.cols(); ++j) {
      if (L(i, j) > best) {
        best = L(i, j);
        bi = i;
        bj = j;
      }
    }
  }
  if (!supervised) return -best;

  const Eigen::Index r0 = std::max<Eigen::Index>(0, bi - sc.angleCells);
  const Eigen::Index r1 = std::min<Eigen::Index>(L.rows() - 1, bi + sc.angleCells);
  const Eigen::Index c0 = std::max<Eigen::Index>(0, bj - sc.rangeCells);
  const Eigen::Index c1 = std::min<Eigen::Index>(L.cols() - 1, bj + sc.rangeCells);
  double z = 0.0, thetaHat = 0.0, rangeHat = 0.0;
  for (Eigen::Index i = r0; i <= r1; ++i) {
    for (Eigen::Index j = c0; j <= c1; ++j) {
      const double w = std::exp((L(i, j) - best) / sc.temperature);
      z += w;
      thetaHat += w * angles[static_cast<std::size_t>(i)];
      rangeHat += w * ranges[static_cast<std::size_t>(j)];
    }
  }
  thetaHat /= z;
  rangeHat /= z;
  const double dx = rangeHat * std::cos(thetaHat) - ep.range * std::cos(ep.angle);
  const double dy = rangeHat * std::sin(thetaHat) - ep.range * std::sin(ep.angle);
  return dx * dx + dy * dy;
}

inline double batchLoss(const Scene& sc, const std::vector<Episode>& eps, const RVec& dRx, const RVec& dTx,
                        bool supervised) {
  double sum = 0.0;
  for (const auto& ep : eps) sum += episodeLoss(sc, ep, dRx, dTx, supervised);
  return sum / static_cast<double>(eps.size());
}

/// Central differences of the oracle loss. With tx=false only the receive
/// model moves; otherwise both move together.
inline RVec finiteDifference(const Scene& sc, const std::vector<Episode>& eps, const RVec& d, bool supervised,
                             bool tx, double step) {
  RVec g(d.size());
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    RVec p = d, m = d;
    p[k] += step;
    m[k] -= step;
    g[k] = (batchLoss(sc, eps, p, tx ? p : d, supervised) - batchLoss(sc, eps, m, tx ? m : d, supervised)) /
           (2.0 * step);
  }
  return g;
}

}  // namespace oracle
