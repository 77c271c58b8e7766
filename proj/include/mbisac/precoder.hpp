#pragma once

#include <utility>

#include "mbisac/config.hpp"
#include "mbisac/grid.hpp"
#include "mbisac/sigmodel.hpp"
#include "mbisac/types.hpp"

namespace mbisac {

enum class PrecoderKind { Sensing, Communication, Isac };

struct Precoder {
  CVector weights;
  PrecoderKind kind = PrecoderKind::Isac;
};

/// Desired beampattern: K inside the interval, 0 elsewhere.
struct BeamSpec {
  Interval interval;
  RVector desired;
};

/// Trade-off eta in [0, 1] and combiner phase in [0, 2 pi).
struct IsacKnobs {
  double tradeoff = 1.0;
  double combinerPhase = 0.0;

  void validate() const;
};

BeamSpec desiredBeampattern(Interval interval, const AngleGrid& grid, int antennaCount);

/// Least-squares beampattern fit min ||b - A^T f||^2 for a K x N steering
/// matrix A. Keeps the pivoted QR of A^T so the solve can be differentiated.
class LsBeamformer {
 public:
  /// Throws SingularSystem when A is not full row rank.
  LsBeamformer(const CMatrix& steering, const RVector& desired);

  const CVector& weights() const { return weights_; }
  /// Solves (A^* A^T) w = rhs with the stored factorization.
  CVector solveGram(const CVector& rhs) const;
  /// ||b - A^T f||.
  double residualNorm() const { return residual_.norm(); }

  /// Gradient of a real loss J with respect to the antenna spacings, given the
  /// adjoint of the weights (dJ = Re(adjoint^H df)) and the angles and spacing
  /// that generated the steering matrix.
  RVector spacingGradient(const CVector& weightAdjoint, const std::vector<double>& angles,
                          const ScenarioConfig& cfg) const;

 private:
  CMatrix design_;  // A^T, N x K
  Eigen::ColPivHouseholderQR<CMatrix> qr_;
  CVector weights_;
  CVector residual_;
};

Precoder lsBeamformer(const CMatrix& steering, const BeamSpec& beam,
                      PrecoderKind kind = PrecoderKind::Sensing);

/// f = (sqrt(eta) fr + sqrt(1-eta) e^{j phi} fc) / norm. Throws
/// DegenerateCombination when the beams cancel.
Precoder isacCombine(const CVector& sensing, const CVector& comm, const IsacKnobs& knobs);

/// Back-propagates the adjoint of the combined precoder to its two inputs.
std::pair<CVector, CVector> isacCombineAdjoint(const CVector& sensing, const CVector& comm,
                                               const IsacKnobs& knobs, const CVector& combinedAdjoint);

/// Sensing and communication LS precoders for one pair of sectors, built from
/// a steering dictionary with the given spacing (nominal, genie, or learned).
struct SectorPrecoders {
  LsBeamformer sensing;
  LsBeamformer comm;

  Precoder combine(const IsacKnobs& knobs) const {
    return isacCombine(sensing.weights(), comm.weights(), knobs);
  }
};

SectorPrecoders buildSectorPrecoders(Interval sensingSector, Interval commSector,
                                     const SpacingVector& spacing, const AngleGrid& grid,
                                     const ScenarioConfig& cfg);

}  // namespace mbisac
