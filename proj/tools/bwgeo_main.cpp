// Command line front end: file-based distances, interpolation, logarithms,
// geodesic enumeration, and input validation.
//
// Exit codes: 0 success, 2 invalid input, 3 domain condition (non-unique
// logarithm under --require-unique), 4 bad parameter.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bwgeo/cov_space.hpp"
#include "bwgeo/matrix_io.hpp"
#include "bwgeo/oracles.hpp"
#include "bwgeo/psd_stratum_geometry.hpp"

namespace {

using bwgeo::CovPoint;
using bwgeo::Matrix;
using bwgeo::SymMatrix;
using bwgeo::Tolerances;
namespace io = bwgeo::io;

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitDomain = 3;
constexpr int kExitBadParameter = 4;

struct Options {
  Tolerances tol;
  std::uint64_t seed = 0;
  bool csv = false;
};

std::string matrix_payload(const Options& opt, const Matrix& m) {
  return opt.csv ? io::to_csv(m) : io::to_json(m) + "\n";
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

const char* multiplicity_name(bwgeo::cov::Multiplicity m) {
  switch (m) {
    case bwgeo::cov::Multiplicity::One:
      return "one";
    case bwgeo::cov::Multiplicity::Two:
      return "two";
    default:
      return "infinite";
  }
}

CovPoint load_point(const std::string& path, const Tolerances& tol) {
  const Matrix m = io::read_matrix_file(path);
  return CovPoint::certify(m, tol);
}

Matrix haar_orthogonal(int q, std::uint64_t seed) {
  if (q == 0) return Matrix(0, 0);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
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
  return rot;
}

int run_dist(const Options& opt, const std::string& file_a,
             const std::string& file_b) {
  const CovPoint a = load_point(file_a, opt.tol);
  const CovPoint b = load_point(file_b, opt.tol);
  if (a.n() != b.n()) {
    throw bwgeo::DimensionMismatch("dist: matrices have different sizes");
  }
  const double d = bwgeo::cov::bw_distance(a, b);
  const int r = bwgeo::cov::rank_product(a, b, opt.tol);
  std::cout << "{\"distance\":" << io::format_double(d)
            << ",\"rank_a\":" << a.rank() << ",\"rank_b\":" << b.rank()
            << ",\"rank_product\":" << r << "}\n";
  return kExitOk;
}

int run_interp(const Options& opt, const std::string& file_a,
               const std::string& file_b, bool has_t, double t, int steps,
               const std::string& out_dir) {
  const CovPoint a = load_point(file_a, opt.tol);
  const CovPoint b = load_point(file_b, opt.tol);
  if (a.n() != b.n()) {
    throw bwgeo::DimensionMismatch("interp: matrices have different sizes");
  }
  const auto seg = bwgeo::cov::canonical_geodesic(a, b, opt.tol);
  if (has_t) {
    if (!(t >= 0.0 && t <= 1.0)) {
      std::cerr << "interp: --t must lie in [0, 1]\n";
      return kExitBadParameter;
    }
    std::cout << matrix_payload(opt, seg.eval(t).mat());
    return kExitOk;
  }
  if (steps < 2) {
    std::cerr << "interp: --steps must be at least 2\n";
    return kExitBadParameter;
  }
  if (out_dir.empty()) {
    std::cerr << "interp: --steps needs --out DIR\n";
    return kExitBadParameter;
  }
  std::filesystem::create_directories(out_dir);
  const char* ext = opt.csv ? ".csv" : ".json";
  std::string files;
  for (int i = 0; i < steps; ++i) {
    const double ti = static_cast<double>(i) / (steps - 1);
    char name[32];
    std::snprintf(name, sizeof name, "step_%03d%s", i, ext);
    io::write_matrix_file((std::filesystem::path(out_dir) / name).string(),
                          seg.eval(ti).mat());
    if (i > 0) files += ",";
    files += quote(name);
  }
  std::cout << "{\"steps\":" << steps << ",\"dir\":" << quote(out_dir)
            << ",\"files\":[" << files << "]}\n";
  return kExitOk;
}

int run_log(const Options& opt, const std::string& file_a,
            const std::string& file_b, bool require_unique) {
  const CovPoint a = load_point(file_a, opt.tol);
  const CovPoint b = load_point(file_b, opt.tol);
  const auto base = bwgeo::stratum::StratumPoint::from(a);
  const auto target = bwgeo::stratum::StratumPoint::from(b);
  const auto fam = bwgeo::stratum::logarithms(base, target, opt.tol);
  const int k = base.k();
  if (require_unique && fam.r() < k) {
    std::cout << "{\"status\":\"non_unique\",\"rank\":" << k
              << ",\"overlap\":" << fam.r() << "}\n";
    return kExitDomain;
  }
  const std::string head = "{\"rank\":" + std::to_string(k) +
                           ",\"overlap\":" + std::to_string(fam.r());
  switch (fam.kind()) {
    case bwgeo::stratum::LogKind::Unique:
      std::cout << head << ",\"kind\":\"unique\",\"tangent\":"
                << io::to_json(fam.unique_member().v.mat()) << "}\n";
      break;
    case bwgeo::stratum::LogKind::Pair: {
      const auto [plus, minus] = fam.pair_members();
      std::cout << head << ",\"kind\":\"pair\",\"tangents\":["
                << io::to_json(plus.v.mat()) << ","
                << io::to_json(minus.v.mat()) << "]}\n";
      break;
    }
    default: {
      const auto sample = fam.member(haar_orthogonal(fam.free_dim(), opt.seed));
      std::cout << head << ",\"kind\":\"orthogonal_family\",\"free_dim\":"
                << fam.free_dim()
                << ",\"sample\":" << io::to_json(sample.v.mat()) << "}\n";
      break;
    }
  }
  return kExitOk;
}

int run_enumerate(const Options& opt, const std::string& file_a,
                  const std::string& file_b, bool count,
                  const std::string& r0_file, int samples) {
  const CovPoint a = load_point(file_a, opt.tol);
  const CovPoint b = load_point(file_b, opt.tol);
  if (count) {
    const auto c = bwgeo::cov::count_minimizing_geodesics(a, b, opt.tol);
    std::cout << "{\"rank_a\":" << a.rank() << ",\"rank_b\":" << b.rank()
              << ",\"overlap\":" << c.overlap << ",\"param_shape\":["
              << a.rank() - c.overlap << "," << b.rank() - c.overlap
              << "],\"in_cov\":" << quote(multiplicity_name(c.in_cov))
              << ",\"in_stratum\":" << quote(multiplicity_name(c.in_stratum))
              << "}\n";
    return kExitOk;
  }
  const Matrix r0 = io::read_matrix_file(r0_file);
  try {
    const auto seg = bwgeo::cov::minimizing_geodesic(a, b, r0, opt.tol);
    std::string out = "{\"mixed\":" + io::to_json(seg.mixed().mat());
    if (samples > 0) {
      out += ",\"samples\":[";
      for (int i = 0; i <= samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        if (i > 0) out += ",";
        out += "{\"t\":" + io::format_double(t) +
               ",\"matrix\":" + io::to_json(seg.eval(t).mat()) + "}";
      }
      out += "]";
    }
    std::cout << out << "}\n";
  } catch (const bwgeo::ParamOutOfBall& e) {
    std::cerr << e.what() << "\n";
    return kExitBadParameter;
  } catch (const bwgeo::DimensionMismatch& e) {
    std::cerr << e.what() << "\n";
    return kExitBadParameter;
  }
  return kExitOk;
}

int run_check(const Options& opt, const std::string& file) {
  const Matrix m = io::read_matrix_file(file);
  if (m.rows() != m.cols()) {
    throw bwgeo::ParseError("check: matrix must be square");
  }
  const double sym_residual = bwgeo::max_abs(m - m.transpose());
  const Matrix s = bwgeo::sym_part(m);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const double eig_min = es.eigenvalues().minCoeff();
  const double eig_max = es.eigenvalues().maxCoeff();
  const double band = opt.tol.rank_rel * es.eigenvalues().cwiseAbs().maxCoeff();
  const bool symmetric = sym_residual <= opt.tol.sym_abs;
  const bool psd = symmetric && eig_min >= -band;
  const double clipped = psd ? std::max(0.0, -eig_min) : 0.0;
  int rank = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > band) ++rank;
  }
  std::cout << "{\"n\":" << m.rows()
            << ",\"symmetry_residual\":" << io::format_double(sym_residual)
            << ",\"eig_min\":" << io::format_double(eig_min)
            << ",\"eig_max\":" << io::format_double(eig_max)
            << ",\"clipped\":" << io::format_double(clipped)
            << ",\"rank\":" << rank << ",\"psd\":" << (psd ? "true" : "false")
            << ",\"not_psd\":" << (psd ? "false" : "true") << "}\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bures-Wasserstein geometry of PSD matrices"};
  app.require_subcommand(1);

  Options opt;
  if (const char* env = std::getenv("BWGEO_TOL_RANK")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0) opt.tol.rank_rel = v;
  }
  app.add_option("--tol-rank", opt.tol.rank_rel,
                 "relative rank threshold (also: BWGEO_TOL_RANK)")
      ->check(CLI::PositiveNumber);
  app.add_option("--tol-sym", opt.tol.sym_abs, "max allowed asymmetry")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", opt.seed, "seed for sampled outputs");
  bool want_json = false;
  auto* json_flag = app.add_flag("--json", want_json, "matrix output as JSON (default)");
  auto* csv_flag = app.add_flag("--csv", opt.csv, "matrix output as CSV");
  json_flag->excludes(csv_flag);
  csv_flag->excludes(json_flag);

  std::string file_a, file_b, out_dir, r0_file;
  double t_value = 0.0;
  int steps = 0, samples = 0;
  bool require_unique = false, want_count = false;

  auto* dist = app.add_subcommand("dist", "distance and rank report");
  dist->add_option("a", file_a, "first matrix file")->required();
  dist->add_option("b", file_b, "second matrix file")->required();

  auto* interp = app.add_subcommand("interp", "canonical geodesic samples");
  interp->add_option("a", file_a, "first matrix file")->required();
  interp->add_option("b", file_b, "second matrix file")->required();
  auto* t_opt = interp->add_option("--t", t_value, "evaluation time in [0, 1]");
  auto* steps_opt =
      interp->add_option("--steps", steps, "number of uniform samples");
  interp->add_option("--out", out_dir, "output directory for --steps");
  t_opt->excludes(steps_opt);
  steps_opt->excludes(t_opt);

  auto* log_cmd = app.add_subcommand("log", "logarithms between equal ranks");
  log_cmd->add_option("a", file_a, "base matrix file")->required();
  log_cmd->add_option("b", file_b, "target matrix file")->required();
  log_cmd->add_flag("--require-unique", require_unique,
                    "fail with exit 3 when the logarithm is not unique");

  auto* enumerate =
      app.add_subcommand("enumerate", "minimizing geodesics between two points");
  enumerate->add_option("a", file_a, "first matrix file")->required();
  enumerate->add_option("b", file_b, "second matrix file")->required();
  auto* count_flag =
      enumerate->add_flag("--count", want_count, "classification only");
  auto* r0_opt = enumerate->add_option(
      "--r0", r0_file, "ball parameter file of shape (rank_a-r) x (rank_b-r)");
  enumerate->add_option("--samples", samples,
                        "also emit this many uniform curve samples");
  count_flag->excludes(r0_opt);
  r0_opt->excludes(count_flag);

  auto* check = app.add_subcommand("check", "validate a matrix file");
  check->add_option("file", file_a, "matrix file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadParameter;
  }

  try {
    if (dist->parsed()) return run_dist(opt, file_a, file_b);
    if (interp->parsed()) {
      if (t_opt->count() == 0 && steps_opt->count() == 0) {
        std::cerr << "interp: need --t or --steps\n";
        return kExitBadParameter;
      }
      return run_interp(opt, file_a, file_b, t_opt->count() > 0, t_value,
                        steps, out_dir);
    }
    if (log_cmd->parsed()) return run_log(opt, file_a, file_b, require_unique);
    if (enumerate->parsed()) {
      if (!want_count && r0_file.empty()) {
        std::cerr << "enumerate: need --count or --r0\n";
        return kExitBadParameter;
      }
      return run_enumerate(opt, file_a, file_b, want_count, r0_file, samples);
    }
    if (check->parsed()) return run_check(opt, file_a);
  } catch (const bwgeo::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitInvalidInput;
  }
  return kExitOk;
}
