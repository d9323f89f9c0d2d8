#pragma once

#include "bwgeo/matrix_kernel.hpp"

namespace bwgeo {

// A certified PSD matrix of any rank, with its spectral decomposition and
// numerical rank fixed at construction.
//
// Certification clips eigenvalues in [-rank_rel * max|d|, 0] to zero and
// records the largest clipped magnitude; anything below the band raises
// NotPsd. The stored matrix keeps the caller's (symmetrized) bits, only the
// cached spectrum used for rank, square roots and pseudo-inverses is clipped.
class CovPoint {
 public:
  CovPoint() = default;

  static CovPoint certify(const SymMatrix& s, const Tolerances& tol = {}) {
    CovPoint p;
    p.mat_ = s;
    const EigSym es = eig_sym(s);
    p.u_ = es.u;
    p.d_ = es.d;
    const double band =
        es.d.size() == 0 ? 0.0 : tol.rank_rel * es.d.cwiseAbs().maxCoeff();
    p.clip_ = 0.0;
    for (Eigen::Index i = 0; i < p.d_.size(); ++i) {
      if (p.d_(i) < -band) {
        throw NotPsd("CovPoint: eigenvalue " + std::to_string(p.d_(i)) +
                     " below clipping band");
      }
      if (p.d_(i) < 0.0) {
        p.clip_ = std::max(p.clip_, -p.d_(i));
        p.d_(i) = 0.0;
      }
    }
    p.band_ = band;
    p.rank_ = 0;
    for (Eigen::Index i = 0; i < p.d_.size(); ++i) {
      if (p.d_(i) > band) ++p.rank_;
    }
    return p;
  }

  static CovPoint certify(const Matrix& m, const Tolerances& tol = {}) {
    return certify(symmetrize(m, tol), tol);
  }

  const SymMatrix& mat() const { return mat_; }
  int n() const { return mat_.n(); }
  int rank() const { return rank_; }
  double clip() const { return clip_; }

  // Spectral cache, eigenvalues ascending and already clipped.
  const Matrix& u() const { return u_; }
  const Vector& d() const { return d_; }

  // Positive part of the spectrum, descending, with matching eigenvectors.
  Vector thin_d() const {
    Vector out(rank_);
    for (int i = 0; i < rank_; ++i) out(i) = d_(d_.size() - 1 - i);
    return out;
  }

  Matrix thin_u() const {
    Matrix out(n(), rank_);
    for (int i = 0; i < rank_; ++i) out.col(i) = u_.col(d_.size() - 1 - i);
    return out;
  }

  // Thin factor X0 = U_k diag(sqrt d_k), so X0 X0^T reproduces the matrix.
  Factor thin_factor() const {
    return thin_u() * thin_d().cwiseSqrt().asDiagonal();
  }

  Matrix sqrt() const {
    return u_ * d_.cwiseSqrt().asDiagonal() * u_.transpose();
  }

  Matrix pinv() const { return spectral_inverse(1); }

  Matrix pinv_sqrt() const { return spectral_inverse(2); }

 private:
  Matrix spectral_inverse(int root) const {
    Vector inv = Vector::Zero(d_.size());
    for (Eigen::Index i = 0; i < d_.size(); ++i) {
      if (d_(i) > band_) {
        inv(i) = root == 1 ? 1.0 / d_(i) : 1.0 / std::sqrt(d_(i));
      }
    }
    return u_ * inv.asDiagonal() * u_.transpose();
  }

  SymMatrix mat_;
  Matrix u_;
  Vector d_;
  int rank_ = 0;
  double clip_ = 0.0;
  double band_ = 0.0;
};

}  // namespace bwgeo
