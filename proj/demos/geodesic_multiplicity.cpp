// Walks the classic degenerate pair: two rank-2 projectors sharing one
// direction. The shortest path between them is not unique, and this program
// prints the whole family: the two rank-preserving curves, a few of the
// infinitely many rank-raising ones, and the count report.

#include <cstdio>

#include "bwgeo/bwgeo.hpp"

using bwgeo::CovPoint;
using bwgeo::Matrix;
using bwgeo::SymMatrix;
using bwgeo::Vector;

namespace {

void print_matrix(const char* tag, const Matrix& m) {
  std::printf("%s\n", tag);
  for (int i = 0; i < m.rows(); ++i) {
    std::printf("   ");
    for (int j = 0; j < m.cols(); ++j) std::printf(" % 8.4f", m(i, j));
    std::printf("\n");
  }
}

const char* name(bwgeo::cov::Multiplicity m) {
  switch (m) {
    case bwgeo::cov::Multiplicity::One: return "one";
    case bwgeo::cov::Multiplicity::Two: return "two";
    default: return "infinitely many";
  }
}

}  // namespace

int main() {
  Vector da(3), db(3);
  da << 1, 1, 0;
  db << 1, 0, 1;
  const CovPoint a = CovPoint::certify(SymMatrix(Matrix(da.asDiagonal())));
  const CovPoint b = CovPoint::certify(SymMatrix(Matrix(db.asDiagonal())));

  print_matrix("endpoint A (span of e1, e2):", a.mat().mat());
  print_matrix("endpoint B (span of e1, e3):", b.mat().mat());
  std::printf("\ndistance: %.6f\n", bwgeo::cov::bw_distance(a, b));

  const auto count = bwgeo::cov::count_minimizing_geodesics(a, b);
  std::printf("ranks %d and %d overlap in rank %d\n", count.rank_a,
              count.rank_b, count.overlap);
  std::printf("minimizing geodesics: %s, of which rank-preserving: %s\n\n",
              name(count.in_cov), name(count.in_stratum));

  // The free parameter is a 1 x 1 block of spectral norm at most one. The
  // two unit values give the rank-preserving pair; everything strictly
  // inside the unit ball passes through rank 3.
  for (const double r0 : {1.0, -1.0, 0.5, 0.0}) {
    Matrix param(1, 1);
    param << r0;
    const auto seg = bwgeo::cov::minimizing_geodesic(a, b, param);
    const auto profile = bwgeo::cov::rank_profile(seg, 5);
    std::printf("parameter % .2f: rank %d -> %d -> %d, midpoint:\n", r0,
                profile.at_start, profile.interior, profile.at_end);
    print_matrix("", seg.eval(0.5).mat());
    const auto ok = bwgeo::oracle::check_minimizing(seg, 32, 1e-7);
    std::printf("    independent minimality check: %s\n\n",
                ok.minimizing ? "passed" : "FAILED");
  }
  return 0;
}
