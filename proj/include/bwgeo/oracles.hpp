#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "bwgeo/cov_space.hpp"
#include "bwgeo/segment.hpp"

// Slow, brute-force checks meant for test suites: chordal length along a
// grid, grid-pairwise minimality, sampled orthogonal alignment, and finite
// difference velocity residuals. Production code paths never call into this
// header; tests use it to confirm the closed forms from the outside.
namespace bwgeo::oracle {

// A curve on [a, b] sampled through a callable.
struct CurveSampler {
  std::function<SymMatrix(double)> at;
  double a = 0.0;
  double b = 1.0;

  static CurveSampler of(const GeodesicSegment& seg) {
    return {[seg](double t) { return seg.eval(t); }, 0.0, 1.0};
  }
};

// Chordal length over the uniform grid with the given number of
// subdivisions. Non-decreasing under grid refinement by the triangle
// inequality, so it approximates the metric length from below.
inline double polyline_length(const CurveSampler& c, int subdivisions) {
  if (subdivisions < 2) {
    throw Error("polyline_length: need at least 2 subdivisions");
  }
  double length = 0.0;
  SymMatrix prev = c.at(c.a);
  for (int i = 1; i <= subdivisions; ++i) {
    const double t = c.a + (c.b - c.a) * static_cast<double>(i) / subdivisions;
    const SymMatrix cur = c.at(t);
    length += cov::bw_distance(prev, cur);
    prev = cur;
  }
  return length;
}

struct MinimalityReport {
  bool minimizing = false;
  // Largest deviation |d(c(s), c(t)) - (t - s) d(c(0), c(1))| over grid
  // pairs s < t.
  double worst_violation = 0.0;
};

// A curve is minimizing iff the distance between any two of its points is
// proportional to the parameter gap. Checking all grid pairs instead of the
// total length alone catches curves that waste length in one stretch and
// make it up by cutting a corner elsewhere.
inline MinimalityReport check_minimizing(const GeodesicSegment& seg, int grid,
                                         double tol) {
  if (grid < 3) throw Error("check_minimizing: need at least 3 subdivisions");
  std::vector<SymMatrix> pts;
  pts.reserve(grid + 1);
  for (int i = 0; i <= grid; ++i) {
    pts.push_back(seg.eval(static_cast<double>(i) / grid));
  }
  const double d = cov::bw_distance(pts.front(), pts.back());
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int j = i + 1; j <= grid; ++j) {
      const double gap = static_cast<double>(j - i) / grid;
      const double pair = cov::bw_distance(pts[i], pts[j]);
      worst = std::max(worst, std::abs(pair - gap * d));
    }
  }
  return {worst <= tol, worst};
}

// Minimum of ||Y R^T - X||_F over `trials` Haar-random orthogonal matrices.
// An upper bound on the alignment infimum, so it never undercuts the closed
// form distance and sinks toward it as trials grow.
inline double procrustes_sampled(const Matrix& x, const Matrix& y, int trials,
                                 std::uint64_t seed) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionMismatch("procrustes_sampled: factor shapes differ");
  }
  if (trials < 1) throw Error("procrustes_sampled: need at least one trial");
  const int q = static_cast<int>(x.cols());
  if (q == 0) return (y - x).norm();

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Matrix g(q, q);
    for (int i = 0; i < q; ++i) {
      for (int j = 0; j < q; ++j) g(i, j) = normal(gen);
    }
    const Eigen::HouseholderQR<Matrix> qr(g);
    Matrix rot = qr.householderQ() * Matrix::Identity(q, q);
    const Matrix tri = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < q; ++j) {
      if (tri(j, j) < 0.0) rot.col(j) = -rot.col(j);
    }
    best = std::min(best, (y * rot.transpose() - x).norm());
  }
  return best;
}

// Max-norm residual of the one-sided difference quotient at t = 0 against a
// claimed initial velocity. O(h) when the claim is right.
inline double velocity_check(const GeodesicSegment& seg,
                             const SymMatrix& v_claimed, double h) {
  if (!(h > 0.0) || h > 1e-3) {
    throw Error("velocity_check: step must be in (0, 1e-3]");
  }
  const Matrix diff =
      (seg.eval(h).mat() - seg.eval(0.0).mat()) / h - v_claimed.mat();
  return max_abs(diff);
}

}  // namespace bwgeo::oracle
