#pragma once

#include <optional>
#include <utility>

#include "bwgeo/cov_point.hpp"
#include "bwgeo/matrix_kernel.hpp"

namespace bwgeo {

// How a segment was constructed. swapped records that the endpoints were
// rank-ordered internally (the public segment still runs from the caller's
// first endpoint to the second); ball_param and rotation keep the parameter
// that generated the segment, in the caller's orientation.
struct SegmentProvenance {
  bool swapped = false;
  std::optional<Matrix> ball_param;
  std::optional<Matrix> rotation;
};

// A candidate geodesic segment between two PSD endpoints, stored by its
// endpoints and mixed term:
//
//   eval(t) = (1-t)^2 Sigma + t^2 Lambda + 2 t (1-t) M.
//
// eval(0) and eval(1) return the endpoint matrices bit-for-bit.
class GeodesicSegment {
 public:
  GeodesicSegment(CovPoint sigma, CovPoint lambda, SymMatrix mixed,
                  SegmentProvenance provenance = {})
      : sigma_(std::move(sigma)),
        lambda_(std::move(lambda)),
        mixed_(std::move(mixed)),
        provenance_(std::move(provenance)) {
    if (sigma_.n() != lambda_.n() || sigma_.n() != mixed_.n()) {
      throw DimensionMismatch("GeodesicSegment: endpoint sizes differ");
    }
  }

  const CovPoint& sigma() const { return sigma_; }
  const CovPoint& lambda() const { return lambda_; }
  const SymMatrix& mixed() const { return mixed_; }
  const SegmentProvenance& provenance() const { return provenance_; }

  SymMatrix eval(double t) const {
    if (t == 0.0) return sigma_.mat();
    if (t == 1.0) return lambda_.mat();
    const double a = (1.0 - t) * (1.0 - t);
    const double b = t * t;
    const double c = 2.0 * t * (1.0 - t);
    return SymMatrix(a * sigma_.mat().mat() + b * lambda_.mat().mat() +
                     c * mixed_.mat());
  }

 private:
  CovPoint sigma_;
  CovPoint lambda_;
  SymMatrix mixed_;
  SegmentProvenance provenance_;
};

}  // namespace bwgeo
