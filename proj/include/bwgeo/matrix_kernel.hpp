#pragma once

#include <Eigen/Dense>

#include <vector>

#include "bwgeo/errors.hpp"
#include "bwgeo/tolerances.hpp"

namespace bwgeo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// An n x k matrix whose columns factor a PSD matrix as X X^T.
using Factor = Eigen::MatrixXd;

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Symmetric part (A + A^T)/2 of a square matrix.
inline Matrix sym_part(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// A square matrix stored in exactly symmetric form. Construction averages
// M and M^T, so entries (i,j) and (j,i) are bitwise equal afterwards.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(const Matrix& m) {
    if (m.rows() != m.cols()) {
      throw DimensionMismatch("SymMatrix: matrix must be square");
    }
    mat_ = sym_part(m);
  }

  int n() const { return static_cast<int>(mat_.rows()); }
  const Matrix& mat() const { return mat_; }
  operator const Matrix&() const { return mat_; }
  double operator()(int i, int j) const { return mat_(i, j); }

 private:
  Matrix mat_;
};

// Checked construction from possibly noisy input: rejects matrices whose
// asymmetry max|M - M^T| exceeds tol.sym_abs.
inline SymMatrix symmetrize(const Matrix& m, const Tolerances& tol = {}) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("symmetrize: matrix must be square");
  }
  const double asym = max_abs(m - m.transpose());
  if (asym > tol.sym_abs) {
    throw AsymmetricInput("symmetrize: asymmetry " + std::to_string(asym) +
                          " exceeds tolerance");
  }
  return SymMatrix(m);
}

// Eigendecomposition S = U diag(d) U^T with d ascending and U orthogonal.
struct EigSym {
  Matrix u;
  Vector d;
};

inline EigSym eig_sym(const SymMatrix& s) {
  if (s.n() == 0) return EigSym{Matrix(0, 0), Vector(0)};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.mat());
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("eig_sym: eigensolver did not converge");
  }
  return EigSym{solver.eigenvectors(), solver.eigenvalues()};
}

// Numerical rank of a list of eigen/singular values: entries strictly above
// rank_rel * max|v| count. Scale invariant; an all-zero or empty list has
// rank 0.
inline int numerical_rank(const Vector& values, const Tolerances& tol = {}) {
  if (values.size() == 0) return 0;
  const double band = tol.rank_rel * values.cwiseAbs().maxCoeff();
  int r = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i)) > band) ++r;
  }
  return r;
}

inline int numerical_rank(const SymMatrix& s, const Tolerances& tol = {}) {
  return numerical_rank(eig_sym(s).d, tol);
}

// Rank of a general rectangular matrix via its singular values.
inline int numerical_rank_general(const Matrix& m, const Tolerances& tol = {}) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return numerical_rank(svd.singularValues(), tol);
}

// Largest singular value; 0 for empty shapes.
inline double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

namespace detail {

// Shared spectral transform: f applied to the eigenvalues, with near-PSD
// clipping. Eigenvalues below -band raise NotPsd; band = rank_rel * max|d|.
template <class F>
Matrix psd_spectral_map(const SymMatrix& s, const Tolerances& tol, F&& f,
                        const char* who) {
  const EigSym es = eig_sym(s);
  const double band =
      es.d.size() == 0 ? 0.0 : tol.rank_rel * es.d.cwiseAbs().maxCoeff();
  Vector mapped(es.d.size());
  for (Eigen::Index i = 0; i < es.d.size(); ++i) {
    const double v = es.d(i);
    if (v < -band) {
      throw NotPsd(std::string(who) + ": eigenvalue " + std::to_string(v) +
                   " below clipping band");
    }
    mapped(i) = f(v < 0.0 ? 0.0 : v, band);
  }
  return es.u * mapped.asDiagonal() * es.u.transpose();
}

}  // namespace detail

// Principal square root of a near-PSD matrix. Eigenvalues inside [-band,
// band] are treated as exact zeros (the square root would amplify their
// noise to sqrt(band) otherwise); anything below -band is an error.
inline SymMatrix sqrt_psd(const SymMatrix& s, const Tolerances& tol = {}) {
  return SymMatrix(detail::psd_spectral_map(
      s, tol, [](double v, double band) { return v > band ? std::sqrt(v) : 0.0; },
      "sqrt_psd"));
}

// Moore-Penrose pseudo-inverse of a symmetric matrix: eigenvalues inside the
// rank band are treated as exact zeros, the rest are inverted.
inline SymMatrix pinv_sym(const SymMatrix& s, const Tolerances& tol = {}) {
  const EigSym es = eig_sym(s);
  const double band =
      es.d.size() == 0 ? 0.0 : tol.rank_rel * es.d.cwiseAbs().maxCoeff();
  Vector inv(es.d.size());
  for (Eigen::Index i = 0; i < es.d.size(); ++i) {
    inv(i) = std::abs(es.d(i)) > band ? 1.0 / es.d(i) : 0.0;
  }
  return SymMatrix(es.u * inv.asDiagonal() * es.u.transpose());
}

// ((S)^{1/2})^- computed in one spectral pass. The rank decision is made on
// the spectrum of S itself, not of its square root, so the kept part is
// exactly the rank-band complement of S and no near-zero value gets the
// 1/sqrt amplification.
inline SymMatrix pinv_sqrt_psd(const SymMatrix& s, const Tolerances& tol = {}) {
  return SymMatrix(detail::psd_spectral_map(
      s, tol,
      [](double v, double band) { return v > band ? 1.0 / std::sqrt(v) : 0.0; },
      "pinv_sqrt_psd"));
}

// Unique symmetric solution Z of A Z + Z A = B for A positive definite,
// solved entrywise in A's eigenbasis: Z'_ij = B'_ij / (a_i + a_j).
inline SymMatrix sylvester_spd(const SymMatrix& a, const SymMatrix& b,
                               const Tolerances& tol = {}) {
  if (a.n() != b.n()) {
    throw DimensionMismatch("sylvester_spd: operand sizes differ");
  }
  const EigSym es = eig_sym(a);
  const double band =
      es.d.size() == 0 ? 0.0 : tol.rank_rel * es.d.cwiseAbs().maxCoeff();
  if (es.d.size() > 0 && es.d(0) <= band) {
    throw NotSpd("sylvester_spd: operator matrix is not positive definite");
  }
  Matrix bp = es.u.transpose() * b.mat() * es.u;
  for (Eigen::Index i = 0; i < bp.rows(); ++i) {
    for (Eigen::Index j = 0; j < bp.cols(); ++j) {
      bp(i, j) /= es.d(i) + es.d(j);
    }
  }
  return SymMatrix(es.u * bp * es.u.transpose());
}

namespace detail {

// Deterministic orthonormal completion of a subspace given by orthonormal
// columns. Candidates are the standard basis vectors; each step keeps the
// one with the largest residual against everything collected so far (ties
// break toward the lowest index), then re-orthogonalizes once. The result
// depends only on span(basis), not on the particular basis matrix, so two
// equal subspaces always receive the same completion.
inline Matrix orthonormal_completion(const Matrix& basis, int n) {
  const int r = static_cast<int>(basis.cols());
  Matrix out(n, n - r);
  auto project_out = [&](Vector v, int filled) {
    v -= basis * (basis.transpose() * v);
    if (filled > 0) {
      v -= out.leftCols(filled) * (out.leftCols(filled).transpose() * v);
    }
    return v;
  };
  for (int c = 0; c < n - r; ++c) {
    double best = -1.0;
    int best_i = -1;
    for (int i = 0; i < n; ++i) {
      const double nv = project_out(Vector::Unit(n, i), c).norm();
      if (nv > best + 1e-12) {
        best = nv;
        best_i = i;
      }
    }
    Vector v = project_out(Vector::Unit(n, best_i), c);
    v = project_out(v, c);
    out.col(c) = v / v.norm();
  }
  return out;
}

}  // namespace detail

// Polar decomposition M = H R with H PSD and R orthogonal.
struct PolarDecomposition {
  SymMatrix h;
  Matrix r;
};

// On the row space H and R are determined by the SVD. On the kernel of M the
// orthogonal part is free; it is fixed deterministically by completing the
// kept singular bases against the standard basis, which makes R act as the
// identity on the free subspace whenever the left and right kernels agree.
inline PolarDecomposition polar_orthogonal(const Matrix& m,
                                           const Tolerances& tol = {}) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("polar_orthogonal: matrix must be square");
  }
  const int n = static_cast<int>(m.rows());
  if (n == 0) return PolarDecomposition{SymMatrix(Matrix(0, 0)), Matrix(0, 0)};
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const int r = numerical_rank(s, tol);
  const Matrix u_r = svd.matrixU().leftCols(r);
  const Matrix v_r = svd.matrixV().leftCols(r);
  const Matrix u_c = detail::orthonormal_completion(u_r, n);
  const Matrix v_c = detail::orthonormal_completion(v_r, n);
  Matrix h = svd.matrixU() * s.asDiagonal() * svd.matrixU().transpose();
  Matrix rot = u_r * v_r.transpose() + u_c * v_c.transpose();
  return PolarDecomposition{SymMatrix(h), std::move(rot)};
}

// Orthonormal basis of the orthogonal complement of im(X) for a full
// column rank X (n x k), returned as n x (n-k).
inline Matrix orth_complement(const Factor& x, const Tolerances& tol = {}) {
  const int n = static_cast<int>(x.rows());
  const int k = static_cast<int>(x.cols());
  if (k == 0) return detail::orthonormal_completion(Matrix(n, 0), n);
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU);
  if (numerical_rank(svd.singularValues(), tol) < k) {
    throw RankDeficient("orth_complement: factor does not have full column rank");
  }
  return detail::orthonormal_completion(svd.matrixU().leftCols(k), n);
}

// Orthonormal basis of the numerical kernel of a symmetric matrix
// (eigenvalues inside the rank band), n x (n - rank).
inline Matrix kernel_basis(const SymMatrix& s, const Tolerances& tol = {}) {
  const EigSym es = eig_sym(s);
  const double band =
      es.d.size() == 0 ? 0.0 : tol.rank_rel * es.d.cwiseAbs().maxCoeff();
  const int n = s.n();
  Matrix basis(n, n);
  int m = 0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(es.d(i)) <= band) basis.col(m++) = es.u.col(i);
  }
  return basis.leftCols(m);
}

// Whether span(basis_a) meets ker(M) nontrivially, decided by comparing the
// smallest singular value of M * basis_a against the rank band of M. basis_a
// must have orthonormal columns; an empty basis never intersects. The scale
// overload exists for callers whose M may be numerically zero: M's own norm
// is then pure roundoff and the caller knows what size M would have if its
// construction had not cancelled.
inline bool intersect_nontrivial(const Matrix& basis_a, const SymMatrix& m,
                                 double scale, const Tolerances& tol = {}) {
  if (basis_a.rows() != m.n()) {
    throw DimensionMismatch("intersect_nontrivial: basis rows != matrix size");
  }
  if (basis_a.cols() == 0) return false;
  const Matrix p = m.mat() * basis_a;
  Eigen::JacobiSVD<Matrix> svd(p);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  return smin <= tol.rank_rel * scale;
}

inline bool intersect_nontrivial(const Matrix& basis_a, const SymMatrix& m,
                                 const Tolerances& tol = {}) {
  return intersect_nontrivial(basis_a, m, spectral_norm(m.mat()), tol);
}

// A run of eigenvalues treated as one spectral value. Indices refer to the
// ascending eigenvalue order; mean is the run's average value.
struct EigenCluster {
  int begin;
  int end;  // one past the last member
  double mean;
};

// Groups an ascending spectrum into clusters separated by gaps larger than
// eig_cluster * max|d|. Degenerate eigenspaces can only be trusted through
// their whole cluster, so eigenspace-based tests iterate these runs.
inline std::vector<EigenCluster> cluster_eigenvalues(const Vector& d,
                                                     const Tolerances& tol = {}) {
  std::vector<EigenCluster> out;
  if (d.size() == 0) return out;
  const double gap = tol.eig_cluster * d.cwiseAbs().maxCoeff();
  int begin = 0;
  for (int i = 1; i <= d.size(); ++i) {
    if (i == d.size() || d(i) - d(i - 1) > gap) {
      const double mean = d.segment(begin, i - begin).mean();
      out.push_back(EigenCluster{begin, i, mean});
      begin = i;
    }
  }
  return out;
}

// Checks that X X^T reproduces S within the geometric tolerance.
inline void require_factor_of(const Factor& x, const SymMatrix& s,
                              const Tolerances& tol = {}) {
  if (x.rows() != s.n()) {
    throw DimensionMismatch("factor rows do not match matrix size");
  }
  const double scale = std::max(1.0, max_abs(s.mat()));
  if (max_abs(x * x.transpose() - s.mat()) > tol.geo_tol * scale) {
    throw FactorMismatch("factor does not reproduce its matrix");
  }
}

}  // namespace bwgeo
