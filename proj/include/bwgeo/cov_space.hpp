#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "bwgeo/cov_point.hpp"
#include "bwgeo/matrix_kernel.hpp"
#include "bwgeo/segment.hpp"

// The space Cov(n) of all n x n PSD matrices, any rank, with the metric
// induced by the Frobenius distance between factors modulo rotations.
namespace bwgeo::cov {

// d(A, B)^2 = tr A + tr B - 2 sum_i s_i(X0^T Y0) for thin factors X0, Y0.
// The singular values of the thin cross Gram matrix are exactly the positive
// spectrum of (A^{1/2} B A^{1/2})^{1/2}, and summing them avoids any rank
// decision on a possibly cancelled product.
inline double bw_distance(const CovPoint& a, const CovPoint& b) {
  if (a.n() != b.n()) {
    throw DimensionMismatch("bw_distance: operand sizes differ");
  }
  double cross = 0.0;
  if (a.rank() > 0 && b.rank() > 0) {
    Eigen::JacobiSVD<Matrix> svd(a.thin_factor().transpose() * b.thin_factor());
    cross = svd.singularValues().sum();
  }
  const double d2 =
      a.mat().mat().trace() + b.mat().mat().trace() - 2.0 * cross;
  return std::sqrt(std::max(0.0, d2));
}

inline double bw_distance(const SymMatrix& a, const SymMatrix& b,
                          const Tolerances& tol = {}) {
  return bw_distance(CovPoint::certify(a, tol), CovPoint::certify(b, tol));
}

// Rank of the matrix product A B, read off the thin cross Gram matrix and
// judged against the endpoint scales (for orthogonal images the product is
// all roundoff and must count as zero).
inline int rank_product(const CovPoint& a, const CovPoint& b,
                        const Tolerances& tol = {}) {
  if (a.n() != b.n()) {
    throw DimensionMismatch("rank_product: operand sizes differ");
  }
  if (a.rank() == 0 || b.rank() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a.thin_factor().transpose() * b.thin_factor());
  const double band = tol.rank_rel * std::sqrt(a.thin_d()(0) * b.thin_d()(0));
  int r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()(r) > band) ++r;
  return r;
}

inline int rank_product(const SymMatrix& a, const SymMatrix& b,
                        const Tolerances& tol = {}) {
  return rank_product(CovPoint::certify(a, tol), CovPoint::certify(b, tol), tol);
}

// Optimal rotation between two factors of the same shape: the orthogonal R
// closest to aligning Y with X, from the polar decomposition of X^T Y. The
// residual |Y R^T - X|_F realizes the quotient distance between X X^T and
// Y Y^T whenever the factors are square (or wide enough to hold both ranks).
struct Registration {
  Matrix rotation;  // m x m orthogonal
  SymMatrix gram;   // X^T Y rotation^T, PSD
  double residual;  // |Y rotation^T - X|_F
};

inline Registration register_factors(const Factor& x, const Factor& y,
                                     const Tolerances& tol = {}) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionMismatch("register_factors: factor shapes differ");
  }
  const PolarDecomposition pd = polar_orthogonal(x.transpose() * y, tol);
  Registration reg;
  reg.rotation = pd.r;
  reg.gram = pd.h;
  reg.residual = (y * pd.r.transpose() - x).norm();
  return reg;
}

// Factor pair rotated so the cross Gram matrix X^T Y is Diag(d_1..d_r, 0)
// with d_i > 0 descending. Columns beyond each rank are zero, so both
// factors are square roots of their matrices with a common shape.
struct AlignedFactors {
  Matrix x;  // n x n, X X^T = A
  Matrix y;  // n x n, Y Y^T = B
  Vector d;  // the r positive cross-Gram values, descending
  int n = 0;
  int k = 0;  // rank of A
  int l = 0;  // rank of B
  int r = 0;  // rank of A B

  Matrix x_shared() const { return x.leftCols(r); }
  Matrix x_free() const { return x.middleCols(r, k - r); }
  Matrix y_shared() const { return y.leftCols(r); }
  Matrix y_free() const { return y.middleCols(r, l - r); }
};

inline AlignedFactors aligned_factors(const CovPoint& a, const CovPoint& b,
                                      const Tolerances& tol = {}) {
  if (a.n() != b.n()) {
    throw DimensionMismatch("aligned_factors: operand sizes differ");
  }
  AlignedFactors af;
  af.n = a.n();
  af.k = a.rank();
  af.l = b.rank();
  af.x = Matrix::Zero(af.n, af.n);
  af.y = Matrix::Zero(af.n, af.n);
  if (af.k == 0 || af.l == 0) {
    if (af.k > 0) af.x.leftCols(af.k) = a.thin_factor();
    if (af.l > 0) af.y.leftCols(af.l) = b.thin_factor();
    af.d = Vector(0);
    return af;
  }
  const Factor x0 = a.thin_factor();
  const Factor y0 = b.thin_factor();
  Eigen::JacobiSVD<Matrix> svd(x0.transpose() * y0,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double band = tol.rank_rel * std::sqrt(a.thin_d()(0) * b.thin_d()(0));
  while (af.r < svd.singularValues().size() &&
         svd.singularValues()(af.r) > band) {
    ++af.r;
  }
  af.x.leftCols(af.k) = x0 * svd.matrixU();
  af.y.leftCols(af.l) = y0 * svd.matrixV();
  af.d = svd.singularValues().head(af.r);
  return af;
}

// Minimizing geodesic selected by the free block R0, given in the caller's
// endpoint order with shape (rank(a) - r) x (rank(b) - r) and spectral norm
// at most one. Internally the construction runs from the higher-rank side;
// the segment itself keeps the caller's orientation.
inline GeodesicSegment minimizing_geodesic(const CovPoint& a, const CovPoint& b,
                                           const Matrix& r0,
                                           const Tolerances& tol = {}) {
  const bool swap = a.rank() < b.rank();
  const AlignedFactors af =
      swap ? aligned_factors(b, a, tol) : aligned_factors(a, b, tol);
  const Matrix param = swap ? Matrix(r0.transpose()) : r0;
  if (param.rows() != af.k - af.r || param.cols() != af.l - af.r) {
    throw DimensionMismatch("minimizing_geodesic: free block has wrong shape");
  }
  if (spectral_norm(param) > 1.0 + tol.geo_tol) {
    throw ParamOutOfBall("minimizing_geodesic: free block leaves the unit ball");
  }
  Matrix cross = af.x_shared() * af.y_shared().transpose();
  if (af.k > af.r && af.l > af.r) {
    cross += af.x_free() * param * af.y_free().transpose();
  }
  SegmentProvenance prov;
  prov.swapped = swap;
  prov.ball_param = r0;
  return GeodesicSegment(a, b, SymMatrix(sym_part(cross)), std::move(prov));
}

// The distinguished minimizing geodesic (free block zero), in closed form:
// mixed term sym(S B^- S Lambda) with S = A^{1/2}, B = (S Lambda S)^{1/2}.
inline GeodesicSegment canonical_geodesic(const CovPoint& a, const CovPoint& b,
                                          const Tolerances& tol = {}) {
  if (a.n() != b.n()) {
    throw DimensionMismatch("canonical_geodesic: operand sizes differ");
  }
  const Matrix s = a.sqrt();
  const EigSym es = eig_sym(SymMatrix(Matrix(s * b.mat().mat() * s)));
  double scale = es.d.size() == 0 ? 0.0 : es.d.cwiseAbs().maxCoeff();
  if (a.rank() > 0 && b.rank() > 0) {
    scale = std::max(scale, a.thin_d()(0) * b.thin_d()(0));
  }
  const double band = tol.rank_rel * scale;
  Vector mapped = Vector::Zero(es.d.size());
  for (Eigen::Index i = 0; i < es.d.size(); ++i) {
    if (es.d(i) > band) mapped(i) = 1.0 / std::sqrt(es.d(i));
  }
  const Matrix bridge = es.u * mapped.asDiagonal() * es.u.transpose();
  const Matrix mixed = sym_part(s * bridge * s * b.mat().mat());
  return GeodesicSegment(a, b, SymMatrix(mixed), SegmentProvenance{});
}

inline SymMatrix interpolate(const SymMatrix& a, const SymMatrix& b, double t,
                             const Tolerances& tol = {}) {
  return canonical_geodesic(CovPoint::certify(a, tol), CovPoint::certify(b, tol),
                            tol)
      .eval(t);
}

enum class Multiplicity { One, Two, Infinite };

// How many minimizing geodesics join the pair: in the whole space, and
// within the set of minimal interior rank (free block an orthonormal frame).
// With k >= l the frame set is St(k-r, l-r): empty frame for l = r, a sign
// for k = l = r + 1, a continuum otherwise.
struct GeodesicCount {
  int rank_a = 0;
  int rank_b = 0;
  int overlap = 0;  // rank of the product
  Multiplicity in_cov = Multiplicity::One;
  Multiplicity in_stratum = Multiplicity::One;
};

inline GeodesicCount count_minimizing_geodesics(const CovPoint& a,
                                                const CovPoint& b,
                                                const Tolerances& tol = {}) {
  GeodesicCount gc;
  gc.rank_a = a.rank();
  gc.rank_b = b.rank();
  gc.overlap = rank_product(a, b, tol);
  const int k = std::max(gc.rank_a, gc.rank_b);
  const int l = std::min(gc.rank_a, gc.rank_b);
  gc.in_cov = gc.overlap == l ? Multiplicity::One : Multiplicity::Infinite;
  if (l == gc.overlap) {
    gc.in_stratum = Multiplicity::One;
  } else if (k - gc.overlap == 1) {
    gc.in_stratum = Multiplicity::Two;
  } else {
    gc.in_stratum = Multiplicity::Infinite;
  }
  return gc;
}

// Whether the free block picks a minimal-interior-rank geodesic: exactly the
// orthonormal-frame case (all singular values one).
inline bool is_minimal_rank_param(const Matrix& r0, const Tolerances& tol = {}) {
  if (r0.cols() == 0) return true;
  if (r0.rows() < r0.cols()) return false;
  const Matrix gram = r0.transpose() * r0;
  const Matrix id = Matrix::Identity(r0.cols(), r0.cols());
  return max_abs(gram - id) <= tol.geo_tol;
}

// Certified ranks at the endpoints and at interior samples. The interior
// rank of a minimizing geodesic is constant; disagreeing samples raise
// NonConstantRank.
struct RankProfile {
  int at_start = 0;
  int interior = 0;
  int at_end = 0;
};

inline RankProfile rank_profile(const GeodesicSegment& g, int samples,
                                const Tolerances& tol = {}) {
  if (samples < 1) {
    throw Error("rank_profile: needs at least one interior sample");
  }
  RankProfile rp;
  rp.at_start = CovPoint::certify(g.eval(0.0), tol).rank();
  rp.at_end = CovPoint::certify(g.eval(1.0), tol).rank();
  rp.interior = -1;
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i + 1) / (samples + 1);
    const int rank = CovPoint::certify(g.eval(t), tol).rank();
    if (rp.interior == -1) {
      rp.interior = rank;
    } else if (rank != rp.interior) {
      throw NonConstantRank("rank_profile: interior rank changed between samples");
    }
  }
  return rp;
}

}  // namespace bwgeo::cov
