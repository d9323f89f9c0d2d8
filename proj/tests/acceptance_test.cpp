// Acceptance suite: twelve end-to-end checks, one per release criterion,
// each printing a single PASS/FAIL line. Tolerances are fixed here and not
// meant to be loosened; a red line means the library misses its contract.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bwgeo/cov_space.hpp"
#include "bwgeo/matrix_io.hpp"
#include "bwgeo/oracles.hpp"
#include "bwgeo/psd_stratum_geometry.hpp"
#include "bwgeo/spd_geometry.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;
using bwgeo::CovPoint;
using bwgeo::GeodesicSegment;
using bwgeo::Matrix;
using bwgeo::SymMatrix;
using bwgeo::Vector;
using bwgeo::cov::bw_distance;
using bwgeo::cov::canonical_geodesic;
using bwgeo::cov::count_minimizing_geodesics;
using bwgeo::cov::minimizing_geodesic;
using bwgeo::cov::Multiplicity;
using bwgeo::cov::rank_profile;
using bwgeo::oracle::check_minimizing;
using bwgeo::oracle::CurveSampler;
using bwgeo::oracle::polyline_length;
using bwtest::frobenius;
using bwtest::Rng;

class Acceptance : public ::testing::Test {
 protected:
  void begin(int number, std::string label) {
    number_ = number;
    label_ = std::move(label);
  }

  void TearDown() override {
    std::printf("[criterion %2d] %s  %s\n", number_,
                HasFailure() ? "FAIL" : "PASS", label_.c_str());
    std::fflush(stdout);
  }

 private:
  int number_ = 0;
  std::string label_;
};

Matrix diag3(double a, double b, double c) {
  Vector d(3);
  d << a, b, c;
  return d.asDiagonal();
}

// The geodesic that the quadratic with this tangent sweeps on [0, horizon],
// reparametrized to [0, 1] so the grid oracle can drive it.
GeodesicSegment clipped_curve(const SymMatrix& sigma, const SymMatrix& v,
                              const SymMatrix& endpoint, double horizon) {
  const SymMatrix mixed{Matrix(sigma.mat() + 0.5 * horizon * v.mat())};
  return GeodesicSegment(CovPoint::certify(sigma), CovPoint::certify(endpoint),
                         mixed);
}

TEST_F(Acceptance, C01_ScaledProjectorLogAndCounts) {
  begin(1, "rank-2 projector pair: unique log, squared-scale curve, counts");
  const SymMatrix sigma{diag3(1, 1, 0)};
  const SymMatrix lambda{Matrix(4.0 * sigma.mat())};
  const auto base = bwgeo::stratum::StratumPoint::from(CovPoint::certify(sigma));
  const SymMatrix v = bwgeo::stratum::log_map(base, lambda);
  const auto tan = bwgeo::stratum::make_tangent(base, v);
  for (const double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const Matrix want = (1.0 + t) * (1.0 + t) * sigma.mat();
    EXPECT_LE(bwgeo::max_abs(bwgeo::stratum::exp_map(tan, t).mat.mat() - want),
              1e-10);
  }
  const auto count = count_minimizing_geodesics(CovPoint::certify(sigma),
                                                CovPoint::certify(lambda));
  EXPECT_EQ(count.in_cov, Multiplicity::One);
  EXPECT_EQ(count.in_stratum, Multiplicity::One);
}

TEST_F(Acceptance, C02_PlaneSwapPairOfLogs) {
  begin(2, "plane swap: exactly two logs, printed curves, both minimizing");
  const CovPoint a = CovPoint::certify(SymMatrix(diag3(1, 1, 0)));
  const CovPoint b = CovPoint::certify(SymMatrix(diag3(1, 0, 1)));
  const auto fam = bwgeo::stratum::logarithms(
      bwgeo::stratum::StratumPoint::from(a), bwgeo::stratum::StratumPoint::from(b));
  ASSERT_EQ(fam.kind(), bwgeo::stratum::LogKind::Pair);
  const auto [first, second] = fam.pair_members();

  // One member per sign of the off-diagonal coupling; which branch carries
  // which sign depends on the eigenbasis gauge, so match as a set.
  const auto curve_matches = [](const bwgeo::stratum::StratumTangent& tan,
                                double sign) {
    double worst = 0.0;
    for (const double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      Matrix want(3, 3);
      const double off = sign * t * (1 - t);
      want << 1, 0, 0, 0, (1 - t) * (1 - t), off, 0, off, t * t;
      worst = std::max(
          worst, bwgeo::max_abs(bwgeo::stratum::exp_map(tan, t).mat.mat() - want));
    }
    return worst <= 1e-10;
  };
  EXPECT_TRUE((curve_matches(first, 1.0) && curve_matches(second, -1.0)) ||
              (curve_matches(first, -1.0) && curve_matches(second, 1.0)));

  for (const double sign : {1.0, -1.0}) {
    Matrix r0(1, 1);
    r0 << sign;
    EXPECT_TRUE(check_minimizing(minimizing_geodesic(a, b, r0), 32, 1e-7)
                    .minimizing);
  }
  EXPECT_NEAR(bw_distance(a, b), std::sqrt(2.0), 1e-10);
}

TEST_F(Acceptance, C03_ShearTargetRotationDiscrimination) {
  begin(3, "shear target: detour rotation flagged, early-exit rotation timed");
  Matrix x(3, 2), y(3, 2);
  x << 1, 0, 0, 1, 0, 0;
  y << 1, 0, 0, 1, 0, 1;

  Matrix half_turn(2, 2);
  half_turn << 1, 0, 0, -1;
  const auto detour = bwgeo::stratum::is_preimage(x, y, half_turn);
  EXPECT_TRUE(detour.preimage_ok);
  EXPECT_FALSE(detour.log_ok);
  const auto detour_seg = bwgeo::stratum::geodesic_by_rotation(x, y, half_turn);
  EXPECT_FALSE(check_minimizing(detour_seg, 32, 1e-7).minimizing);

  Matrix flip_first(2, 2);
  flip_first << -1, 0, 0, 1;
  const auto early = bwgeo::stratum::is_preimage(x, y, flip_first);
  EXPECT_FALSE(early.preimage_ok);
  const SymMatrix sigma{Matrix(x * x.transpose())};
  const SymMatrix v{Matrix(
      2.0 * bwgeo::sym_part(x * flip_first * y.transpose()) - 2.0 * sigma.mat())};
  const auto base = bwgeo::stratum::StratumPoint::from(CovPoint::certify(sigma));
  const auto tan = bwgeo::stratum::make_tangent(base, v);
  EXPECT_NEAR(bwgeo::stratum::definition_interval(tan).hi, 0.5, 1e-9);
}

TEST_F(Acceptance, C04_DisjointPlanesOrthogonalFamily) {
  begin(4, "disjoint planes: every orthogonal parameter minimizes at rank 2");
  Matrix sa = Matrix::Zero(4, 4), sb = Matrix::Zero(4, 4);
  sa(0, 0) = sa(1, 1) = 1.0;
  sb(2, 2) = sb(3, 3) = 1.0;
  const CovPoint a = CovPoint::certify(SymMatrix(sa));
  const CovPoint b = CovPoint::certify(SymMatrix(sb));
  Rng rng(9004);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix q = rng.orthogonal(2);
    const auto seg = minimizing_geodesic(a, b, q);
    EXPECT_TRUE(check_minimizing(seg, 32, 1e-7).minimizing);
    const auto profile = rank_profile(seg, 7);
    EXPECT_EQ(profile.at_start, 2);
    EXPECT_EQ(profile.interior, 2);
    EXPECT_EQ(profile.at_end, 2);
  }
  EXPECT_EQ(count_minimizing_geodesics(a, b).in_cov, Multiplicity::Infinite);
}

TEST_F(Acceptance, C05_FullRankRoundTrip) {
  begin(5, "full rank: exp/log round trip, log speed = distance, midpoints");
  Rng rng(9005);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(2, 6);
    const SymMatrix a = rng.spd(n);
    const SymMatrix b = rng.spd(n);
    const auto pa = bwgeo::spd::SpdPoint::certify(a);
    const auto pb = bwgeo::spd::SpdPoint::certify(b);

    const SymMatrix v = bwgeo::spd::log_map(pa, pb);
    const SymMatrix reached = bwgeo::spd::exp_map(pa, v, 1.0).mat;
    EXPECT_LE(bwgeo::max_abs(reached.mat() - b.mat()),
              1e-8 * bwgeo::max_abs(b.mat()));

    const double d = bw_distance(a, b);
    EXPECT_NEAR(bwgeo::spd::speed(bwgeo::spd::make_tangent(pa, v)), d, 1e-8);

    const SymMatrix mid_full = bwgeo::spd::geodesic(pa, pb).eval(0.5);
    const SymMatrix mid_cov =
        canonical_geodesic(CovPoint::certify(a), CovPoint::certify(b)).eval(0.5);
    EXPECT_LE(bwgeo::max_abs(mid_full.mat() - mid_cov.mat()), 1e-9);
  }
}

TEST_F(Acceptance, C06_DistanceAxiomsAndRegistration) {
  begin(6, "distance: symmetry, triangle slack, registration equality");
  Rng rng(9006);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = rng.uniform_int(2, 6);
    const SymMatrix a = rng.psd_of_rank(n, rng.uniform_int(1, n));
    const SymMatrix b = rng.psd_of_rank(n, rng.uniform_int(1, n));
    const SymMatrix c = rng.psd_of_rank(n, rng.uniform_int(1, n));
    const double dab = bw_distance(a, b);
    EXPECT_NEAR(dab, bw_distance(b, a), 1e-10);
    EXPECT_GE(dab + bw_distance(b, c) - bw_distance(a, c), -1e-9);

    const auto af = bwgeo::cov::aligned_factors(CovPoint::certify(a),
                                                CovPoint::certify(b));
    const auto reg = bwgeo::cov::register_factors(af.x, af.y);
    EXPECT_NEAR(reg.residual, dab, 1e-9);
  }
}

struct RankRow {
  int n, k, l, r;
  Multiplicity cov, stratum;
};

const std::vector<RankRow>& rank_rows() {
  static const std::vector<RankRow> rows = {
      {3, 3, 3, 3, Multiplicity::One, Multiplicity::One},
      {4, 4, 2, 2, Multiplicity::One, Multiplicity::One},
      {5, 3, 3, 3, Multiplicity::One, Multiplicity::One},
      {4, 2, 2, 1, Multiplicity::Infinite, Multiplicity::Two},
      {6, 4, 4, 2, Multiplicity::Infinite, Multiplicity::Infinite},
      {5, 3, 2, 2, Multiplicity::One, Multiplicity::One},
      {6, 4, 2, 1, Multiplicity::Infinite, Multiplicity::Infinite},
      {8, 5, 3, 1, Multiplicity::Infinite, Multiplicity::Infinite},
  };
  return rows;
}

TEST_F(Acceptance, C07_BallParametrizationMinimality) {
  begin(7, "spectral-ball parameters: minimality and interior rank law");
  Rng rng(9007);
  for (int pair_index = 0; pair_index < 50; ++pair_index) {
    const RankRow row = rank_rows()[pair_index % rank_rows().size()];
    const auto pair = bwtest::ranked_pair(rng, row.n, row.k, row.l, row.r);
    const CovPoint a = CovPoint::certify(pair.sigma);
    const CovPoint b = CovPoint::certify(pair.lambda);
    const int p = row.k - row.r;
    const int q = row.l - row.r;

    for (int j = 0; j < 10; ++j) {
      Matrix r0;
      bool is_stiefel = false;
      if (j == 0) {
        r0 = Matrix::Zero(p, q);
      } else if (j <= 2) {
        r0 = rng.stiefel(p, q);
        is_stiefel = true;
      } else if (j == 3) {
        r0 = rng.ball_param(p, q, 1.0);
      } else {
        r0 = rng.ball_param(p, q, rng.uniform(0.0, 1.0));
      }
      const auto seg = minimizing_geodesic(a, b, r0);
      EXPECT_TRUE(check_minimizing(seg, 16, 1e-7).minimizing)
          << "n=" << row.n << " k=" << row.k << " l=" << row.l
          << " r=" << row.r << " j=" << j;

      const auto profile = rank_profile(seg, 5);
      EXPECT_GE(profile.interior, std::max(row.k, row.l));
      if (is_stiefel || q == 0) {
        EXPECT_EQ(profile.interior, row.k);
      }
      if (j == 0 && row.r == row.l) {
        EXPECT_EQ(profile.interior, row.k);
      }
    }
  }
}

TEST_F(Acceptance, C08_CountClassificationTable) {
  begin(8, "multiplicity table: every rank/overlap row classifies correctly");
  Rng rng(9008);
  for (const RankRow& row : rank_rows()) {
    const auto pair = bwtest::ranked_pair(rng, row.n, row.k, row.l, row.r);
    const auto count = count_minimizing_geodesics(CovPoint::certify(pair.sigma),
                                                  CovPoint::certify(pair.lambda));
    EXPECT_EQ(count.overlap, row.r);
    EXPECT_EQ(count.in_cov, row.cov)
        << "n=" << row.n << " k=" << row.k << " l=" << row.l << " r=" << row.r;
    EXPECT_EQ(count.in_stratum, row.stratum)
        << "n=" << row.n << " k=" << row.k << " l=" << row.l << " r=" << row.r;
  }
}

TEST_F(Acceptance, C09_HorizontalLiftContract) {
  begin(9, "horizontal lift: differential, verticality, norm, factor curve");
  Rng rng(9009);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(2, 8);
    const int k = rng.uniform_int(1, n - 1);
    const auto base =
        bwgeo::stratum::StratumPoint::from(CovPoint::certify(rng.psd_of_rank(n, k)));
    SymMatrix seed = rng.symmetric(n);
    const double norm = std::max(1.0, bwgeo::max_abs(seed.mat()));
    const auto tan =
        bwgeo::stratum::project_tangent(base, SymMatrix(Matrix(seed.mat() / norm)));

    const Matrix x = base.factor() * rng.orthogonal(k);
    const Matrix lift = bwgeo::stratum::horizontal_lift(tan, x);

    EXPECT_LE(bwgeo::max_abs(x * lift.transpose() + lift * x.transpose() -
                             tan.v.mat()),
              1e-9);
    const Matrix gram = x.transpose() * lift;
    EXPECT_LE(bwgeo::max_abs(gram - gram.transpose()), 1e-9);

    const double g = bwgeo::stratum::metric(tan, tan);
    EXPECT_NEAR(lift.squaredNorm(), g, 1e-9 * std::max(1.0, g));

    for (const double t : {0.4, 1.0}) {
      const Matrix moved = (x + t * lift) * (x + t * lift).transpose();
      const SymMatrix swept = bwgeo::stratum::exp_map(tan, t).mat;
      EXPECT_LE(bwgeo::max_abs(moved - swept.mat()),
                1e-9 * std::max(1.0, bwgeo::max_abs(swept.mat())));
    }
  }
}

TEST_F(Acceptance, C10_CutTimeSemantics) {
  begin(10, "cut times: minimal before, degenerate at, beaten after");
  Rng rng(9010);

  int full_rank_done = 0;
  while (full_rank_done < 50) {
    const int n = rng.uniform_int(2, 5);
    const auto base = bwgeo::spd::SpdPoint::certify(rng.spd(n));
    auto tan = bwgeo::spd::make_tangent(base, rng.symmetric(n));
    if (tan.s_min >= -1e-6) continue;

    // Scale the velocity so the forward cut lands in [0.5, 2].
    const double target = rng.uniform(0.5, 2.0);
    const double scale = -1.0 / (target * tan.s_min);
    tan = bwgeo::spd::make_tangent(base, SymMatrix(Matrix(scale * tan.v.mat())));
    const double cut = bwgeo::spd::cut_time(tan);
    ASSERT_LT(cut, bwgeo::spd::kInf);

    // The dying eigenvalue vanishes quadratically in time, so a margin of
    // 1e-2 keeps the clipped endpoint two orders above the rank band.
    const double horizon = cut * (1.0 - 1e-2);
    const SymMatrix endpoint = bwgeo::spd::exp_map(tan, horizon).mat;
    const auto seg = clipped_curve(base.mat(), SymMatrix(Matrix(horizon * tan.v.mat())),
                                   endpoint, 1.0);
    EXPECT_TRUE(check_minimizing(seg, 16, 1e-7).minimizing);

    const SymMatrix near_exit = bwgeo::spd::exp_map(tan, cut - 1e-4).mat;
    const Eigen::SelfAdjointEigenSolver<Matrix> es(near_exit.mat());
    EXPECT_LT(es.eigenvalues().minCoeff(), 1e-6);
    ++full_rank_done;
  }

  int stratum_done = 0;
  while (stratum_done < 50) {
    const int n = rng.uniform_int(3, 6);
    const int k = rng.uniform_int(1, n - 1);
    const auto base =
        bwgeo::stratum::StratumPoint::from(CovPoint::certify(rng.psd_of_rank(n, k)));
    auto tan = bwgeo::stratum::project_tangent(base, rng.symmetric(n));
    const Eigen::SelfAdjointEigenSolver<Matrix> f0(tan.f0);
    if (f0.eigenvalues().minCoeff() >= -1e-6) continue;

    const double target = rng.uniform(0.5, 2.0);
    const double scale = -1.0 / (target * f0.eigenvalues().minCoeff());
    tan = bwgeo::stratum::make_tangent(base,
                                       SymMatrix(Matrix(scale * tan.v.mat())));
    const double cut = bwgeo::stratum::cut_times(tan).forward;
    ASSERT_LT(cut, bwgeo::spd::kInf);

    const double beyond = 1.5 * cut;
    const SymMatrix far = bwgeo::stratum::exp_map(tan, beyond).mat;
    const double direct = bw_distance(base.mat(), far);
    const double along = beyond * bwgeo::stratum::speed(tan);
    EXPECT_LT(direct, along - 1e-6);
    ++stratum_done;
  }
}

TEST_F(Acceptance, C11_RankIdentities) {
  begin(11, "rank identities: product rank and the overlap bound");
  Rng rng(9011);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = rng.uniform_int(2, 8);
    const int k = rng.uniform_int(1, n);
    const int l = rng.uniform_int(1, k);
    const int r = rng.uniform_int(std::max(0, k + l - n), l);
    const auto pair = bwtest::ranked_pair(rng, n, k, l, r);
    const CovPoint a = CovPoint::certify(pair.sigma);
    const CovPoint b = CovPoint::certify(pair.lambda);

    const int via_product = bwgeo::cov::rank_product(a, b);
    const Eigen::JacobiSVD<Matrix> svd(pair.sigma.mat() * pair.lambda.mat());
    const double floor = a.thin_d()(0) * b.thin_d()(0);
    int plain = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) > 1e-9 * floor) ++plain;
    }
    EXPECT_EQ(via_product, plain);
    EXPECT_EQ(via_product, r);
    EXPECT_LE(l - r, n - k);
  }
}

TEST_F(Acceptance, C12_CliDistanceEndToEnd) {
  begin(12, "command line: distance report is exact and byte-stable");
  const fs::path dir =
      fs::temp_directory_path() / ("bwgeo_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string a = (dir / "a.json").string();
  const std::string b = (dir / "b.json").string();
  bwgeo::io::write_matrix_file(a, diag3(1, 1, 0));
  bwgeo::io::write_matrix_file(b, diag3(1, 0, 1));

  const auto run_once = [&](const std::string& tag) {
    const fs::path out = dir / ("out_" + tag);
    const std::string cmd = std::string(BWGEO_CLI_PATH) + " dist " + a + " " +
                            b + " > " + out.string();
    const int status = std::system(cmd.c_str());
    EXPECT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 0);
    std::ifstream in(out, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };

  const std::string first = run_once("1");
  const std::string second = run_once("2");
  EXPECT_EQ(first, second);
  EXPECT_FALSE(first.empty());

  const auto doc = nlohmann::json::parse(first);
  EXPECT_NEAR(doc["distance"].get<double>(), 1.414213562373095, 1e-9);
  EXPECT_EQ(doc["rank_a"].get<int>(), 2);
  EXPECT_EQ(doc["rank_b"].get<int>(), 2);
  EXPECT_EQ(doc["rank_product"].get<int>(), 1);
  fs::remove_all(dir);
}

}  // namespace
