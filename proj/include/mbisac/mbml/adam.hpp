#pragma once

#include <cstdint>

#include "mbisac/types.hpp"

namespace mbisac::mbml {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamMoments {
  RVector first;
  RVector second;
  std::int64_t step = 0;

  static AdamMoments zeros(int size) { return {RVector::Zero(size), RVector::Zero(size), 0}; }
};

/// One bias-corrected Adam update of `params` in place. Throws NumericalFailure
/// if the gradient or the updated parameters are not finite.
void adamUpdate(RVector& params, AdamMoments& moments, const RVector& grad, double learningRate,
                const AdamConfig& config = {});

}  // namespace mbisac::mbml
