#pragma once

namespace bwgeo {

// Numerical policy shared by every operation in the library.
//
// rank_rel     relative eigen/singular value threshold: entries with
//              |v| <= rank_rel * max|v| count as zero
// sym_abs      max allowed asymmetry max|M - M^T| on checked inputs
// eig_cluster  relative gap below which eigenvalues are treated as one
//              cluster when eigenspaces are needed
// geo_tol      default tolerance for geometric identity checks
struct Tolerances {
  double rank_rel = 1e-9;
  double sym_abs = 1e-8;
  double eig_cluster = 1e-7;
  double geo_tol = 1e-9;
};

}  // namespace bwgeo
