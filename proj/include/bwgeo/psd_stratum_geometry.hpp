#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "bwgeo/cov_point.hpp"
#include "bwgeo/matrix_kernel.hpp"
#include "bwgeo/segment.hpp"
#include "bwgeo/spd_geometry.hpp"

// Geometry of the manifold of PSD matrices with fixed rank k inside the
// space of n x n PSD matrices.
namespace bwgeo::stratum {

using spd::ExpResult;
using spd::kInf;
using spd::OpenInterval;

// A PSD matrix of fixed rank k carrying its thin spectral data: U is n x k
// orthonormal, d holds the k positive eigenvalues in descending order.
class StratumPoint {
 public:
  StratumPoint() = default;

  static StratumPoint from(const CovPoint& p) {
    StratumPoint s;
    s.mat_ = p.mat();
    s.k_ = p.rank();
    s.u_ = p.thin_u();
    s.d_ = p.thin_d();
    return s;
  }

  static StratumPoint from(const SymMatrix& m, const Tolerances& tol = {}) {
    return from(CovPoint::certify(m, tol));
  }

  const SymMatrix& mat() const { return mat_; }
  int n() const { return mat_.n(); }
  int k() const { return k_; }
  const Matrix& u() const { return u_; }
  const Vector& d() const { return d_; }

  Factor factor() const { return u_ * d_.cwiseSqrt().asDiagonal(); }
  Matrix projector() const { return u_ * u_.transpose(); }
  Matrix pinv() const {
    return u_ * d_.cwiseInverse().asDiagonal() * u_.transpose();
  }

  // Solution F of D F + F D = B for the diagonal positive spectrum D.
  Matrix sylvester_d(const Matrix& b) const {
    Matrix f = b;
    for (int i = 0; i < k_; ++i) {
      for (int j = 0; j < k_; ++j) f(i, j) /= d_(i) + d_(j);
    }
    return f;
  }

 private:
  SymMatrix mat_;
  int k_ = 0;
  Matrix u_;
  Vector d_;
};

// A tangent vector V at a rank-k point, characterized by P_perp V P_perp = 0
// for the projector P_perp onto the kernel. Caches the three matrices the
// geodesic formulas run on:
//   s  = U F0 U^T, the solution of Sigma S + S Sigma = V restricted to im(U)
//   f0 = the k x k solution of D F0' + F0' D = U^T V U
//   m0 = D^-1 U^T V (I - U U^T) V U D^-1, PSD by construction
struct StratumTangent {
  StratumPoint base;
  SymMatrix v;
  SymMatrix s;
  Matrix f0;
  SymMatrix m0;
};

namespace detail {

inline StratumTangent finish_tangent(StratumPoint base, SymMatrix v) {
  StratumTangent t;
  const Matrix& u = base.u();
  const Matrix vu = v.mat() * u;
  const Matrix core = u.transpose() * vu;
  t.f0 = base.sylvester_d(sym_part(core));
  t.s = SymMatrix(u * t.f0 * u.transpose());
  const Matrix g =
      (vu - u * core) * base.d().cwiseInverse().asDiagonal();  // (I-P) V U D^-1
  t.m0 = SymMatrix(g.transpose() * g);
  t.base = std::move(base);
  t.v = std::move(v);
  return t;
}

}  // namespace detail

// Orthogonal projection of an arbitrary symmetric W onto the tangent space:
// V = W - P_perp W P_perp.
inline StratumTangent project_tangent(const StratumPoint& base,
                                      const SymMatrix& w) {
  if (w.n() != base.n()) {
    throw DimensionMismatch("project_tangent: operand sizes differ");
  }
  const Matrix p = base.projector();
  const Matrix q = Matrix::Identity(base.n(), base.n()) - p;
  return detail::finish_tangent(base, SymMatrix(w.mat() - q * w.mat() * q));
}

// Wraps a vector that is already tangent; rejects vectors with a kernel-side
// component beyond the geometric tolerance.
inline StratumTangent make_tangent(const StratumPoint& base, const SymMatrix& v,
                                   const Tolerances& tol = {}) {
  if (v.n() != base.n()) {
    throw DimensionMismatch("make_tangent: operand sizes differ");
  }
  const Matrix q = Matrix::Identity(base.n(), base.n()) - base.projector();
  const double residual = max_abs(q * v.mat() * q);
  if (residual > tol.geo_tol * std::max(1.0, max_abs(v.mat()))) {
    throw NotTangent("make_tangent: kernel-side residual " +
                     std::to_string(residual));
  }
  return detail::finish_tangent(base, v);
}

// Horizontal lift of V at an arbitrary rank-k factor X of the base point:
// V# = X (X^T X)^-1 F + X_perp K with F solving (X^T X) F + F (X^T X) = X^T V X
// and K = X_perp^T V X (X^T X)^-1. The lift satisfies
// X (V#)^T + V# X^T = V and X^T V# symmetric.
inline Factor horizontal_lift(const StratumTangent& t, const Factor& x,
                              const Tolerances& tol = {}) {
  require_factor_of(x, t.base.mat(), tol);
  if (x.cols() != t.base.k()) {
    throw RankDeficient("horizontal_lift: factor must have k columns");
  }
  const SymMatrix gram{Matrix(x.transpose() * x)};
  const SymMatrix f = sylvester_spd(gram, SymMatrix(x.transpose() * t.v.mat() * x), tol);
  const Matrix gram_inv = pinv_sym(gram, tol).mat();
  const Matrix x_perp = orth_complement(x, tol);
  const Matrix k_block = x_perp.transpose() * t.v.mat() * x * gram_inv;
  return x * gram_inv * f.mat() + x_perp * k_block;
}

// Riemannian inner product at the common base point:
// g(V, W) = tr(S_V Sigma S_W) + tr(V Sigma^- W P_perp), equal to the ambient
// trace product of any pair of horizontal lifts.
inline double metric(const StratumTangent& a, const StratumTangent& b) {
  if (a.base.n() != b.base.n()) {
    throw DimensionMismatch("metric: tangents live at different sizes");
  }
  const StratumPoint& base = a.base;
  const Matrix& sigma = base.mat().mat();
  const double rotational =
      (a.s.mat() * sigma * b.s.mat()).trace();
  const Matrix q = Matrix::Identity(base.n(), base.n()) - base.projector();
  const double kernel_side =
      (a.v.mat() * base.pinv() * b.v.mat() * q).trace();
  return rotational + kernel_side;
}

inline double metric(const StratumPoint& base, const SymMatrix& v,
                     const SymMatrix& w, const Tolerances& tol = {}) {
  return metric(make_tangent(base, v, tol), make_tangent(base, w, tol));
}

inline double speed(const StratumTangent& t) {
  return std::sqrt(std::max(0.0, metric(t, t)));
}

namespace detail {

// Quadratic coefficient of the geodesic: W = S Sigma S + S V Q + Q V S
// + Q V Sigma^- V Q with Q = I - U U^T. Equals V# (V#)^T for the canonical
// factor U D^{1/2}.
inline Matrix quadratic_term(const StratumTangent& t) {
  const StratumPoint& base = t.base;
  const Matrix& sigma = base.mat().mat();
  const Matrix q = Matrix::Identity(base.n(), base.n()) - base.projector();
  const Matrix sv_q = t.s.mat() * t.v.mat() * q;
  return t.s.mat() * sigma * t.s.mat() + sv_q + sv_q.transpose() +
         q * t.v.mat() * base.pinv() * t.v.mat() * q;
}

// Zero band for the spectrum of F0. Its own largest eigenvalue is the wrong
// scale when F0 is numerically zero (a purely kernel-side velocity), so the
// band is floored by the size F0 inherits from the data that produced it:
// F0 solves D F0 + F0 D = U^T V U, hence |F0| <= |V| / (2 d_min).
inline double f0_band(const StratumTangent& t, const Vector& eigs,
                      const Tolerances& tol) {
  double scale = eigs.size() == 0 ? 0.0 : eigs.cwiseAbs().maxCoeff();
  const double d_min = t.base.d()(t.base.k() - 1);
  scale = std::max(scale, max_abs(t.v.mat()) / (2.0 * d_min));
  return tol.rank_rel * scale;
}

}  // namespace detail

// The set E of eigenvalues of F0 whose eigenspace meets ker(M0): exactly the
// spectral values that make the geodesic leave the rank-k stratum at the
// finite time -1/lambda.
inline std::vector<double> exit_spectrum(const StratumTangent& t,
                                         const Tolerances& tol = {}) {
  std::vector<double> out;
  const SymMatrix f0{t.f0};
  const EigSym es = eig_sym(f0);
  // Kernel decisions on M0 are made against the size it inherits from its
  // construction, |M0| <= (|V| / d_min)^2, so that a numerically-zero M0
  // (full-rank base, or velocity entirely inside the image) reads as the
  // zero matrix instead of a full-rank speck of noise.
  const double d_min = t.base.d()(t.base.k() - 1);
  const double built = max_abs(t.v.mat()) / d_min;
  const double m0_scale = std::max(spectral_norm(t.m0.mat()), built * built);
  for (const EigenCluster& c : cluster_eigenvalues(es.d, tol)) {
    const Matrix basis = es.u.middleCols(c.begin, c.end - c.begin);
    if (intersect_nontrivial(basis, t.m0, m0_scale, tol)) {
      for (int i = c.begin; i < c.end; ++i) out.push_back(es.d(i));
    }
  }
  return out;
}

// Largest interval around 0 on which the geodesic keeps rank k. Bounds come
// from the extremes of the exit spectrum, with the rank band deciding when
// an extreme counts as zero.
inline OpenInterval definition_interval(const StratumTangent& t,
                                        const Tolerances& tol = {}) {
  const std::vector<double> e = exit_spectrum(t, tol);
  OpenInterval iv;
  if (e.empty()) return iv;
  double lo = e.front(), hi = e.front();
  for (double v : e) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double band = detail::f0_band(t, eig_sym(SymMatrix(t.f0)).d, tol);
  iv.hi = lo < -band ? -1.0 / lo : kInf;
  iv.lo = hi > band ? -1.0 / hi : -kInf;
  return iv;
}

struct CutTimes {
  double forward = kInf;
  double backward = kInf;
};

// The geodesic is minimizing on [0, -1/lambda_min(F0)] when F0 has a negative
// eigenvalue and on all of [0, sup) otherwise; symmetrically backwards with
// lambda_max.
inline CutTimes cut_times(const StratumTangent& t, const Tolerances& tol = {}) {
  CutTimes ct;
  const EigSym es = eig_sym(SymMatrix(t.f0));
  if (es.d.size() == 0) return ct;
  const double band = detail::f0_band(t, es.d, tol);
  if (es.d(0) < -band) ct.forward = -1.0 / es.d(0);
  if (es.d(es.d.size() - 1) > band) ct.backward = 1.0 / es.d(es.d.size() - 1);
  return ct;
}

// Geodesic evaluation Sigma + tV + t^2 W. Outside the definition interval
// the quadratic is still returned (ambient extension) with in_domain = false.
inline ExpResult exp_map(const StratumTangent& t, double time,
                         const Tolerances& tol = {}) {
  const Matrix value = t.base.mat().mat() + time * t.v.mat() +
                       (time * time) * detail::quadratic_term(t);
  return ExpResult{SymMatrix(value),
                   definition_interval(t, tol).contains(time)};
}

// A rotation tested against the target factor pair (X, Y). The flags are
// nested: log_ok implies preimage_ok implies symmetric_ok.
//   symmetric_ok   X^T Y R^T is symmetric, so the chord is a geodesic segment
//   preimage_ok    the segment stays in the stratum on [0, 1)
//   log_ok         X^T Y R^T is PSD: the segment is minimizing to t = 1
struct RotationCandidate {
  Matrix r;
  Matrix h;  // X^T Y R^T as computed, symmetric when symmetric_ok
  bool symmetric_ok = false;
  bool preimage_ok = false;
  bool log_ok = false;
};

namespace detail {

inline void check_rotation_inputs(const Factor& x, const Factor& y,
                                  const Matrix& r) {
  const int k = static_cast<int>(x.cols());
  if (y.cols() != k || x.rows() != y.rows()) {
    throw DimensionMismatch("rotation test: factor shapes differ");
  }
  if (r.rows() != k || r.cols() != k) {
    throw DimensionMismatch("rotation test: rotation must be k x k");
  }
  if (max_abs(r.transpose() * r - Matrix::Identity(k, k)) > 1e-6) {
    throw Error("rotation test: matrix is not orthogonal");
  }
}

}  // namespace detail

inline RotationCandidate is_preimage(const Factor& x, const Factor& y,
                                     const Matrix& r, const Tolerances& tol = {}) {
  detail::check_rotation_inputs(x, y, r);
  RotationCandidate cand;
  cand.r = r;
  cand.h = x.transpose() * y * r.transpose();
  cand.symmetric_ok = max_abs(cand.h - cand.h.transpose()) <= tol.sym_abs;
  if (!cand.symmetric_ok) return cand;

  // Congruence by (X^T X)^{-1/2} turns H into A and the target Gram matrix
  // into B; the segment leaves the stratum before t = 1 exactly when some
  // negative eigenvalue mu of A has an eigenvector that B maps with norm
  // mu^2, i.e. ker(mu I - A) meets ker(mu^2 I - B).
  const SymMatrix gram{Matrix(x.transpose() * x)};
  const EigSym ges = eig_sym(gram);
  if (numerical_rank(ges.d, tol) < gram.n()) {
    throw RankDeficient("is_preimage: factor X must have full column rank");
  }
  const Matrix gram_inv_sqrt =
      ges.u * ges.d.cwiseSqrt().cwiseInverse().asDiagonal() * ges.u.transpose();
  const SymMatrix a{Matrix(gram_inv_sqrt * sym_part(cand.h) * gram_inv_sqrt)};
  const SymMatrix b{
      Matrix(gram_inv_sqrt * r * y.transpose() * y * r.transpose() * gram_inv_sqrt)};

  // The zero band for A's spectrum is floored by sqrt(|B|): when the factor
  // images are orthogonal A is numerically zero, and |B|^{1/2} is the size A
  // would have at comparable overlap.
  const EigSym aes = eig_sym(a);
  const double b_norm = spectral_norm(b.mat());
  const double a_scale =
      std::max(aes.d.size() == 0 ? 0.0 : aes.d.cwiseAbs().maxCoeff(),
               std::sqrt(b_norm));
  const double band = tol.rank_rel * a_scale;
  bool ok = true;
  const int kk = a.n();
  for (const EigenCluster& c : cluster_eigenvalues(aes.d, tol)) {
    if (c.mean >= -band) continue;
    const Matrix basis = aes.u.middleCols(c.begin, c.end - c.begin);
    // The shift can cancel B exactly (that is the interesting case), so the
    // kernel test runs against the sizes of the two terms, not the residue.
    const SymMatrix shifted{
        Matrix(c.mean * c.mean * Matrix::Identity(kk, kk) - b.mat())};
    if (intersect_nontrivial(basis, shifted, c.mean * c.mean + b_norm, tol)) {
      ok = false;
      break;
    }
  }
  cand.preimage_ok = ok;
  cand.log_ok = ok && aes.d(0) >= -band;
  return cand;
}

// Tangent whose geodesic reaches Y Y^T at t = 1 along the rotation R:
// V = 2 sym(X R Y^T) - 2 X X^T.
inline StratumTangent tangent_from_rotation(const Factor& x, const Factor& y,
                                            const Matrix& r,
                                            const Tolerances& tol = {}) {
  const RotationCandidate cand = is_preimage(x, y, r, tol);
  if (!cand.preimage_ok) {
    throw NotPreimage(
        "tangent_from_rotation: segment leaves the stratum before t = 1");
  }
  const SymMatrix sigma{Matrix(x * x.transpose())};
  const SymMatrix v{Matrix(2.0 * sym_part(x * r * y.transpose()) - sigma.mat() -
                           sigma.mat())};
  return make_tangent(StratumPoint::from(sigma, tol), v, tol);
}

// Inverse of tangent_from_rotation: recovers R from X + V#, which equals
// Y R^T when V is a preimage tangent for the pair.
inline Matrix rotation_from_tangent(const Factor& x, const Factor& y,
                                    const SymMatrix& v,
                                    const Tolerances& tol = {}) {
  const StratumPoint base = StratumPoint::from(SymMatrix(Matrix(x * x.transpose())), tol);
  const StratumTangent t = make_tangent(base, v, tol);
  const Factor lift = horizontal_lift(t, x, tol);
  const SymMatrix ygram{Matrix(y.transpose() * y)};
  const Matrix r =
      (pinv_sym(ygram, tol).mat() * y.transpose() * (x + lift)).transpose();
  const int k = static_cast<int>(x.cols());
  if (max_abs(r.transpose() * r - Matrix::Identity(k, k)) > 1e-6) {
    throw NotPreimage("rotation_from_tangent: tangent does not reach the target");
  }
  const RotationCandidate cand = is_preimage(x, y, r, tol);
  if (!cand.preimage_ok ||
      max_abs(2.0 * sym_part(x * r * y.transpose()) - 2.0 * base.mat().mat() -
              v.mat()) > 1e-6 * std::max(1.0, max_abs(v.mat()))) {
    throw NotPreimage("rotation_from_tangent: tangent does not reach the target");
  }
  return r;
}

// Candidate geodesic segment for a rotation in the solution set
// (X^T Y R^T symmetric): endpoints X X^T and Y Y^T, mixed term sym(X R Y^T).
inline GeodesicSegment geodesic_by_rotation(const Factor& x, const Factor& y,
                                            const Matrix& r,
                                            const Tolerances& tol = {}) {
  detail::check_rotation_inputs(x, y, r);
  const Matrix h = x.transpose() * y * r.transpose();
  if (max_abs(h - h.transpose()) > tol.sym_abs) {
    throw NotPreimage("geodesic_by_rotation: rotation is not in the solution set");
  }
  SegmentProvenance prov;
  prov.rotation = r;
  return GeodesicSegment(CovPoint::certify(SymMatrix(Matrix(x * x.transpose())), tol),
                         CovPoint::certify(SymMatrix(Matrix(y * y.transpose())), tol),
                         SymMatrix(sym_part(x * r * y.transpose())),
                         std::move(prov));
}

enum class LogKind { Unique, Pair, OrthogonalFamily };

// All logarithms between two rank-k points, synthesized from aligned thin
// factors with X^T Y = Diag(d_1..d_r, 0), d_i > 0 descending. Every
// logarithm is member(Q) for an orthogonal Q of size (k-r) x (k-r):
// exactly one for r = k (Q empty), two for r = k-1, a full orthogonal
// family otherwise.
class LogFamily {
 public:
  LogFamily(StratumPoint base, Factor x, Factor y, int r, const Tolerances& tol)
      : base_(std::move(base)), x_(std::move(x)), y_(std::move(y)), r_(r),
        tol_(tol) {
    const int k = base_.k();
    kind_ = r_ == k ? LogKind::Unique
                    : (r_ == k - 1 ? LogKind::Pair : LogKind::OrthogonalFamily);
  }

  LogKind kind() const { return kind_; }
  int r() const { return r_; }
  int free_dim() const { return base_.k() - r_; }
  const Factor& x() const { return x_; }
  const Factor& y() const { return y_; }
  const StratumPoint& base() const { return base_; }

  Matrix rotation(const Matrix& q) const {
    const int k = base_.k();
    if (q.rows() != k - r_ || q.cols() != k - r_) {
      throw DimensionMismatch("LogFamily: free block has wrong shape");
    }
    Matrix r = Matrix::Identity(k, k);
    r.bottomRightCorner(k - r_, k - r_) = q;
    return r;
  }

  StratumTangent member(const Matrix& q) const {
    const Matrix r = rotation(q);
    const SymMatrix v{Matrix(2.0 * sym_part(x_ * r * y_.transpose()) -
                             2.0 * base_.mat().mat())};
    return make_tangent(base_, v, tol_);
  }

  StratumTangent canonical_member() const {
    return member(Matrix::Identity(free_dim(), free_dim()));
  }

  StratumTangent unique_member() const {
    if (kind_ != LogKind::Unique) {
      throw NotUnique("LogFamily: logarithm is not unique");
    }
    return canonical_member();
  }

  std::pair<StratumTangent, StratumTangent> pair_members() const {
    if (kind_ != LogKind::Pair) {
      throw NotUnique("LogFamily: family does not have exactly two members");
    }
    Matrix plus = Matrix::Identity(1, 1);
    Matrix minus = -Matrix::Identity(1, 1);
    return {member(plus), member(minus)};
  }

 private:
  StratumPoint base_;
  Factor x_;
  Factor y_;
  int r_;
  Tolerances tol_;
  LogKind kind_;
};

// Enumerates the logarithms from sigma to lambda inside their common rank-k
// stratum. The thin factors are rotated so X^T Y is diagonal with the
// positive part leading; the free orthogonal block then spans the family.
inline LogFamily logarithms(const StratumPoint& sigma, const StratumPoint& lambda,
                            const Tolerances& tol = {}) {
  if (sigma.n() != lambda.n()) {
    throw DimensionMismatch("logarithms: operand sizes differ");
  }
  if (sigma.k() != lambda.k()) {
    throw RankMismatch("logarithms: points have different ranks");
  }
  const int k = sigma.k();
  const Factor x0 = sigma.factor();
  const Factor y0 = lambda.factor();
  if (k == 0) {
    return LogFamily(sigma, x0, y0, 0, tol);
  }
  Eigen::JacobiSVD<Matrix> svd(x0.transpose() * y0,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  // Rank of the cross Gram matrix relative to the factor scales, not to its
  // own largest singular value: for orthogonal images the whole matrix is
  // roundoff and must count as rank zero.
  const double scale = std::sqrt(sigma.d()(0) * lambda.d()(0));
  int r = 0;
  while (r < k && svd.singularValues()(r) > tol.rank_rel * scale) ++r;
  return LogFamily(sigma, x0 * svd.matrixU(), y0 * svd.matrixV(), r, tol);
}

// Closed-form unique logarithm for full-overlap pairs (rank of the product
// equals k): V = 2 sym(S ((S Lambda S)^{1/2})^- S Lambda) - 2 Sigma with
// S = Sigma^{1/2}. The rank decision for the pseudo-inverse happens on the
// spectrum of S Lambda S itself.
inline SymMatrix log_map(const StratumPoint& sigma, const SymMatrix& lambda,
                         const Tolerances& tol = {}) {
  if (sigma.n() != lambda.n()) {
    throw DimensionMismatch("log_map: operand sizes differ");
  }
  const CovPoint target = CovPoint::certify(lambda, tol);
  if (target.rank() != sigma.k()) {
    throw RankMismatch("log_map: points have different ranks");
  }
  const Matrix root =
      sigma.u() * sigma.d().cwiseSqrt().asDiagonal() * sigma.u().transpose();
  const SymMatrix inner{Matrix(root * lambda.mat() * root)};

  // One spectral pass makes both decisions: the rank of the product, judged
  // against the product of the endpoint scales (for orthogonal images the
  // whole matrix is roundoff), and the inverse square root on the kept part.
  const EigSym ies = eig_sym(inner);
  const double band = tol.rank_rel *
                      std::max(ies.d.size() == 0 ? 0.0 : ies.d.cwiseAbs().maxCoeff(),
                               sigma.d()(0) * target.thin_d()(0));
  Vector mapped = Vector::Zero(ies.d.size());
  int r = 0;
  for (Eigen::Index i = 0; i < ies.d.size(); ++i) {
    if (ies.d(i) > band) {
      mapped(i) = 1.0 / std::sqrt(ies.d(i));
      ++r;
    }
  }
  if (r < sigma.k()) {
    throw RankMismatch("log_map: product rank is below the base rank");
  }
  const Matrix bridge = ies.u * mapped.asDiagonal() * ies.u.transpose();
  const Matrix mixed = sym_part(root * bridge * root * lambda.mat());
  return SymMatrix(2.0 * mixed - 2.0 * sigma.mat().mat());
}

}  // namespace bwgeo::stratum
