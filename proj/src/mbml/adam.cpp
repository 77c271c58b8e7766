#include "mbisac/mbml/adam.hpp"

#include <cmath>
#include <string>

#include "mbisac/errors.hpp"

namespace mbisac::mbml {

void adamUpdate(RVector& params, AdamMoments& moments, const RVector& grad, double learningRate,
                const AdamConfig& config) {
  if (grad.size() != params.size() || moments.first.size() != params.size() ||
      moments.second.size() != params.size()) {
    throw InvalidArgument("Adam state dimensions do not match the parameters");
  }
  if (!grad.allFinite()) throw NumericalFailure("Adam received a non-finite gradient");

  moments.step += 1;
  const double t = static_cast<double>(moments.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  RVector next = params;
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    moments.first[k] = config.beta1 * moments.first[k] + (1.0 - config.beta1) * grad[k];
    moments.second[k] = config.beta2 * moments.second[k] + (1.0 - config.beta2) * grad[k] * grad[k];
    const double mHat = moments.first[k] / correction1;
    const double vHat = moments.second[k] / correction2;
    next[k] -= learningRate * mHat / (std::sqrt(vHat) + config.epsilon);
    if (!std::isfinite(next[k])) {
      throw NumericalFailure("Adam update produced a non-finite entry " + std::to_string(k));
    }
  }
  params = std::move(next);
}

}  // namespace mbisac::mbml
