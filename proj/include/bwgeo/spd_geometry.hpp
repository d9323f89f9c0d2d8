#pragma once

#include <cmath>
#include <limits>

#include "bwgeo/cov_point.hpp"
#include "bwgeo/matrix_kernel.hpp"
#include "bwgeo/segment.hpp"

namespace bwgeo::spd {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A positive definite matrix with its spectral decomposition cached.
class SpdPoint {
 public:
  SpdPoint() = default;

  static SpdPoint certify(const SymMatrix& s, const Tolerances& tol = {}) {
    SpdPoint p;
    p.mat_ = s;
    const EigSym es = eig_sym(s);
    p.u_ = es.u;
    p.d_ = es.d;
    const double band =
        es.d.size() == 0 ? 0.0 : tol.rank_rel * es.d.cwiseAbs().maxCoeff();
    if (es.d.size() > 0 && es.d(0) <= band) {
      throw NotSpd("SpdPoint: smallest eigenvalue " + std::to_string(es.d(0)) +
                   " is not positive");
    }
    return p;
  }

  static SpdPoint certify(const Matrix& m, const Tolerances& tol = {}) {
    return certify(symmetrize(m, tol), tol);
  }

  const SymMatrix& mat() const { return mat_; }
  int n() const { return mat_.n(); }
  const Matrix& u() const { return u_; }
  const Vector& d() const { return d_; }

  Matrix sqrt() const {
    return u_ * d_.cwiseSqrt().asDiagonal() * u_.transpose();
  }

  Matrix inv_sqrt() const {
    return u_ * d_.cwiseSqrt().cwiseInverse().asDiagonal() * u_.transpose();
  }

  // Unique symmetric Z with  mat Z + Z mat = b, solved in the cached basis.
  SymMatrix sylvester(const SymMatrix& b) const {
    if (b.n() != n()) {
      throw DimensionMismatch("SpdPoint::sylvester: operand size differs");
    }
    Matrix bp = u_.transpose() * b.mat() * u_;
    for (Eigen::Index i = 0; i < bp.rows(); ++i) {
      for (Eigen::Index j = 0; j < bp.cols(); ++j) {
        bp(i, j) /= d_(i) + d_(j);
      }
    }
    return SymMatrix(u_ * bp * u_.transpose());
  }

 private:
  SymMatrix mat_;
  Matrix u_;
  Vector d_;
};

// Interval of parameters around 0; either bound may be infinite.
struct OpenInterval {
  double lo = -kInf;
  double hi = kInf;
  bool contains(double t) const { return lo < t && t < hi; }
};

// A tangent vector at a full-rank point, with the solution S of
// Sigma S + S Sigma = V and the spectral range of S cached. S drives every
// geodesic formula at the point: the curve through Sigma with velocity V is
// (I + tS) Sigma (I + tS).
struct FullTangent {
  SpdPoint base;
  SymMatrix v;
  SymMatrix s;
  double s_min = 0.0;
  double s_max = 0.0;
};

inline FullTangent make_tangent(const SpdPoint& base, const SymMatrix& v) {
  FullTangent t;
  t.base = base;
  t.v = v;
  t.s = base.sylvester(v);
  const EigSym es = eig_sym(t.s);
  t.s_min = es.d.size() == 0 ? 0.0 : es.d(0);
  t.s_max = es.d.size() == 0 ? 0.0 : es.d(es.d.size() - 1);
  return t;
}

// Riemannian inner product g(V, W) = tr(S_V Sigma S_W).
inline double metric(const SpdPoint& base, const SymMatrix& v,
                     const SymMatrix& w) {
  const SymMatrix sv = base.sylvester(v);
  const SymMatrix sw = base.sylvester(w);
  return (sv.mat() * base.mat().mat() * sw.mat()).trace();
}

inline double speed(const FullTangent& t) {
  return std::sqrt(
      std::max(0.0, (t.s.mat() * t.base.mat().mat() * t.s.mat()).trace()));
}

// Largest interval around 0 on which the geodesic through the tangent stays
// positive definite. The bounds come from the spectral range of S, with the
// rank band deciding when an extreme counts as zero.
inline OpenInterval definition_interval(const FullTangent& t,
                                        const Tolerances& tol = {}) {
  const double band =
      tol.rank_rel * std::max(std::abs(t.s_min), std::abs(t.s_max));
  OpenInterval iv;
  iv.hi = t.s_min < -band ? -1.0 / t.s_min : kInf;
  iv.lo = t.s_max > band ? -1.0 / t.s_max : -kInf;
  return iv;
}

// The geodesic from the tangent is minimizing up to the end of its
// definition interval; forward that is -1/s_min when S has a negative
// eigenvalue and +infinity otherwise.
inline double cut_time(const FullTangent& t, const Tolerances& tol = {}) {
  return definition_interval(t, tol).hi;
}

struct ExpResult {
  SymMatrix mat;
  bool in_domain = true;
};

// Geodesic evaluation Sigma + tV + t^2 S Sigma S. Outside the definition
// interval the quadratic is still returned (it is the ambient extension of
// the curve) with in_domain = false.
inline ExpResult exp_map(const FullTangent& t, double time,
                         const Tolerances& tol = {}) {
  const Matrix& sigma = t.base.mat().mat();
  Matrix value = sigma + time * t.v.mat() +
                 (time * time) * (t.s.mat() * sigma * t.s.mat());
  return ExpResult{SymMatrix(value),
                   definition_interval(t, tol).contains(time)};
}

inline ExpResult exp_map(const SpdPoint& base, const SymMatrix& v, double time,
                         const Tolerances& tol = {}) {
  return exp_map(make_tangent(base, v), time, tol);
}

namespace detail {

// Mixed term M = sym(Sigma^{1/2} (Sigma^{1/2} Lambda Sigma^{1/2})^{1/2}
// Sigma^{-1/2}); the geodesic between the points is
// (1-t)^2 Sigma + t^2 Lambda + 2t(1-t) M.
inline SymMatrix mixed_term(const SpdPoint& sigma, const SpdPoint& lambda,
                            const Tolerances& tol) {
  const Matrix root = sigma.sqrt();
  const SymMatrix inner(root * lambda.mat().mat() * root);
  const Matrix inner_root = sqrt_psd(inner, tol).mat();
  return SymMatrix(root * inner_root * sigma.inv_sqrt());
}

}  // namespace detail

// Unique tangent whose geodesic reaches lambda at t = 1.
inline SymMatrix log_map(const SpdPoint& sigma, const SpdPoint& lambda,
                         const Tolerances& tol = {}) {
  if (sigma.n() != lambda.n()) {
    throw DimensionMismatch("log_map: operand sizes differ");
  }
  return SymMatrix(2.0 * detail::mixed_term(sigma, lambda, tol).mat() -
                   2.0 * sigma.mat().mat());
}

inline GeodesicSegment geodesic(const SpdPoint& sigma, const SpdPoint& lambda,
                                const Tolerances& tol = {}) {
  if (sigma.n() != lambda.n()) {
    throw DimensionMismatch("geodesic: operand sizes differ");
  }
  return GeodesicSegment(CovPoint::certify(sigma.mat(), tol),
                         CovPoint::certify(lambda.mat(), tol),
                         detail::mixed_term(sigma, lambda, tol));
}

// Horizontal lift of V at the factor X (any X with X X^T = Sigma):
// V# = S X, the unique lift with X (V#)^T + V# X^T = V that is orthogonal to
// the fiber directions X Omega, Omega skew.
inline Factor horizontal_lift(const FullTangent& t, const Factor& x,
                              const Tolerances& tol = {}) {
  require_factor_of(x, t.base.mat(), tol);
  return t.s.mat() * x;
}

inline Factor horizontal_lift(const SpdPoint& base, const SymMatrix& v,
                              const Factor& x, const Tolerances& tol = {}) {
  return horizontal_lift(make_tangent(base, v), x, tol);
}

}  // namespace bwgeo::spd
