#include <gtest/gtest.h>

#include "mvr/io.hpp"
#include "mvr/noise.hpp"
#include "mvr/preview.hpp"
#include "support/oracles.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mvr;
namespace fs = std::filesystem;

namespace {

ReadResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_mvs(in);
}

int line_of_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mvr_io_noise_test";
  fs::create_directories(dir);
  return dir / name;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + MVR_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Signal random_signal(const ManifoldPtr& m, int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point> pts;
  for (int k = 0; k < rows * cols; ++k) pts.push_back(m->random_point(rng, 1.0));
  return cols > 1 ? Signal(m, pts, rows, cols) : Signal(m, pts);
}

}  // namespace

// ---- MVS ---------------------------------------------------------------

TEST(Mvs, SpdImageRoundTripIsBitwise) {
  const Signal s = random_signal(make_spd(3), 4, 5, 11);
  const ReadResult r = parse(format_mvs(s));
  EXPECT_TRUE(r.warnings.empty());
  ASSERT_TRUE(r.signal.is_image);
  ASSERT_EQ(r.signal.rows, 4);
  ASSERT_EQ(r.signal.cols, 5);
  for (int i = 0; i < s.size(); ++i)
    for (Eigen::Index c = 0; c < s[i].size(); ++c) EXPECT_EQ(r.signal[i][c], s[i][c]);
  EXPECT_EQ(format_mvs(r.signal), format_mvs(s));
}

TEST(Mvs, EveryManifoldRoundTrips) {
  for (const auto& [name, m] : oracle::manifold_zoo()) {
    const Signal s = random_signal(m, 7, 1, 3);
    const std::string text = format_mvs(s);
    EXPECT_EQ(format_mvs(parse(text).signal), text) << name;
  }
}

TEST(Mvs, FileRoundTrip) {
  const Signal s = random_signal(make_sphere(2), 9, 1, 5);
  const fs::path p = scratch("roundtrip.mvs");
  write_mvs(p.string(), s);
  EXPECT_EQ(format_mvs(read_mvs(p.string()).signal), format_mvs(s));
  EXPECT_THROW(read_mvs((scratch("missing") / "x.mvs").string()), ArgumentError);
}

TEST(Mvs, WrongRowLengthReportsItsLine) {
  const std::string text =
      "MVS 1\n"
      "manifold euclidean:2\n"
      "shape 3\n"
      "ambient 2\n"
      "1 2\n"
      "3 4 5\n"
      "6 7\n";
  EXPECT_EQ(line_of_error(text), 6);
  EXPECT_THROW(parse(text), ParseError);
}

TEST(Mvs, CommentsAndBlankLinesCountTowardLineNumbers) {
  const std::string text =
      "# leading comment\n"
      "MVS 1\n"
      "\n"
      "manifold circle\n"
      "shape 2\n"
      "ambient 1\n"
      "# between samples\n"
      "0.5\n"
      "zero\n";
  EXPECT_EQ(line_of_error(text), 9);
}

TEST(Mvs, HeaderErrors) {
  EXPECT_EQ(line_of_error("MVS 2\nmanifold circle\nshape 1\nambient 1\n0\n"), 1);
  EXPECT_EQ(line_of_error("MVS 1\nmanifold torus\nshape 1\nambient 1\n0\n"), 2);
  EXPECT_EQ(line_of_error("MVS 1\nmanifold circle\nshape 0\nambient 1\n0\n"), 3);
  EXPECT_EQ(line_of_error("MVS 1\nmanifold circle\nshape 1.5\nambient 1\n0\n"), 3);
  EXPECT_EQ(line_of_error("MVS 1\nmanifold sphere:2\nshape 1\nambient 2\n0 1\n"), 4);
  EXPECT_EQ(line_of_error("MVS 1\nmanifold circle\nshape 2\nambient 1\n0\n"), 6);
  EXPECT_EQ(line_of_error("MVS 1\nmanifold circle\nshape 1\nambient 1\n0\n1\n"), 6);
  EXPECT_EQ(line_of_error(""), 0);
}

TEST(Mvs, CircleAngleIsWrappedWithWarning) {
  const ReadResult r = parse("MVS 1\nmanifold circle\nshape 2\nambient 1\n7.0\n0.25\n");
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("line 5"), std::string::npos);
  EXPECT_NEAR(r.signal[0][0], 7.0 - 2 * kPi, 1e-15);
  EXPECT_EQ(r.signal[1][0], 0.25);
}

TEST(Mvs, WrappedRangeIsHalfOpen) {
  const ReadResult r = parse("MVS 1\nmanifold circle\nshape 2\nambient 1\n3.141592653589793\n-3.141592653589793\n");
  EXPECT_EQ(r.signal[0][0], -kPi);
  EXPECT_EQ(r.signal[1][0], -kPi);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Mvs, OffManifoldThresholds) {
  auto sphere_line = [](double radius) {
    return "MVS 1\nmanifold sphere:2\nshape 1\nambient 3\n0 0 " + format_double(radius) + "\n";
  };
  const ReadResult exact = parse(sphere_line(1.0 + 1e-10));
  EXPECT_TRUE(exact.warnings.empty());

  const ReadResult snapped = parse(sphere_line(1.0 + 1e-6));
  ASSERT_EQ(snapped.warnings.size(), 1u);
  EXPECT_NEAR(snapped.signal[0].norm(), 1.0, 1e-15);

  EXPECT_EQ(line_of_error(sphere_line(1.001)), 5);
}

TEST(Mvs, AsymmetricSpdIsRejected) {
  EXPECT_EQ(line_of_error("MVS 1\nmanifold spd:2\nshape 1\nambient 4\n2 0.5 0 1\n"), 5);
  EXPECT_EQ(line_of_error("MVS 1\nmanifold spd:2\nshape 1\nambient 4\n-1 0 0 1\n"), 5);
}

TEST(Mvs, NonFiniteNumbersAreRejected) {
  EXPECT_EQ(line_of_error("MVS 1\nmanifold euclidean:1\nshape 1\nambient 1\nnan\n"), 5);
  EXPECT_EQ(line_of_error("MVS 1\nmanifold euclidean:1\nshape 1\nambient 1\ninf\n"), 5);
}

TEST(Mvs, ShortestRoundTripNumbers) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, kPi}) {
    double y = 0;
    const std::string t = format_double(x);
    std::istringstream(t) >> y;
    EXPECT_EQ(x, y) << t;
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

// ---- traces ------------------------------------------------------------

TEST(Trace, HeaderAndTotals) {
  std::vector<TraceRow> rows{{0, 1.5, 0.25}, {1, 0.1, 0.2}};
  const std::string csv = format_trace(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iteration,data,regularizer,total");
  int n = 0;
  while (std::getline(in, line)) {
    int it = 0;
    double d = 0, r = 0, t = 0;
    char c1, c2, c3;
    std::istringstream(line) >> it >> c1 >> d >> c2 >> r >> c3 >> t;
    EXPECT_EQ(it, n);
    EXPECT_NEAR(t, d + r, 1e-9);
    ++n;
  }
  EXPECT_EQ(n, 2);
}

TEST(Trace, JumpColumn) {
  std::vector<TraceRow> rows{{0, 1.0, 2.0}};
  std::vector<int> jumps{3};
  EXPECT_EQ(format_trace(rows, &jumps), "iteration,data,regularizer,total,jumps\n0,1,2,3,3\n");
}

// ---- sampling ----------------------------------------------------------

TEST(Vmf, HugeConcentrationStaysAtMean) {
  const Point mu = Eigen::Vector3d(1, 2, 2) / 3.0;
  const auto xs = sample_vmf(mu, 1e6, 2000, 1);
  const auto s2 = make_sphere(2);
  for (const Point& x : xs) {
    EXPECT_NEAR(x.norm(), 1.0, 1e-12);
    EXPECT_LT(s2->dist(x, mu), 0.01);
  }
}

TEST(Vmf, MeanDirection) {
  const Point mu = Eigen::Vector3d(0, 0.6, -0.8);
  const auto xs = sample_vmf(mu, 10.0, 100000, 2);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const Point& x : xs) sum += x;
  const double angle = std::acos(std::clamp(sum.normalized().dot(mu), -1.0, 1.0));
  EXPECT_LT(angle * 180.0 / kPi, 0.5);
}

TEST(Vmf, MeanResultantLength) {
  const double kappa = 5.0;
  // Cosine marginal density is proportional to exp(kappa t) on [-1, 1].
  const int n = 20000;
  double num = 0, den = 0;
  for (int k = 0; k <= n; ++k) {
    const double t = -1.0 + 2.0 * k / n;
    const double w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
    num += w * t * std::exp(kappa * t);
    den += w * std::exp(kappa * t);
  }
  const double integrated = num / den;
  const double closed = 1.0 / std::tanh(kappa) - 1.0 / kappa;
  EXPECT_NEAR(integrated, closed, 1e-10);

  const Point mu = Eigen::Vector3d(1, 0, 0);
  const auto xs = sample_vmf(mu, kappa, 100000, 3);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const Point& x : xs) sum += x;
  const double rbar = sum.norm() / xs.size();
  EXPECT_NEAR(rbar / closed, 1.0, 0.01);
}

TEST(Vmf, SeededDeterminism) {
  const Point mu = Eigen::Vector3d(0, 0, 1);
  const auto a = sample_vmf(mu, 3.0, 50, 42), b = sample_vmf(mu, 3.0, 50, 42), c = sample_vmf(mu, 3.0, 50, 43);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_NE(a[0], c[0]);
}

TEST(VonMises, CircularMean) {
  const double mu = 2.9;
  const auto xs = sample_von_mises(mu, 10.0, 100000, 4);
  double c = 0, s = 0;
  for (double x : xs) {
    EXPECT_GE(x, -kPi);
    EXPECT_LT(x, kPi);
    c += std::cos(x);
    s += std::sin(x);
  }
  const double err = std::abs(wrap_angle(std::atan2(s, c) - mu));
  EXPECT_LT(err * 180.0 / kPi, 0.5);
}

TEST(TangentGaussian, ZeroSigmaReturnsBase) {
  for (const auto& [name, m] : oracle::manifold_zoo()) {
    std::mt19937_64 rng(9);
    const Point p = m->random_point(rng, 1.0);
    for (const Point& x : sample_tangent_gaussian(*m, p, 0.0, 5, 1)) EXPECT_EQ(x, p) << name;
  }
}

TEST(TangentGaussian, EuclideanIsOrdinaryGaussian) {
  const auto m = make_euclidean(2);
  const Point p = Eigen::Vector2d(3, -1);
  const int n = 100000;
  const auto xs = sample_tangent_gaussian(*m, p, 0.5, n, 6);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const Point& x : xs) mean += x;
  mean /= n;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const Point& x : xs) cov += (x - mean) * (x - mean).transpose();
  cov /= n - 1;
  EXPECT_LT((mean - p).norm(), 0.01);
  EXPECT_NEAR(cov(0, 0), 0.25, 0.01);
  EXPECT_NEAR(cov(1, 1), 0.25, 0.01);
  EXPECT_NEAR(cov(0, 1), 0.0, 0.01);
}

TEST(TangentGaussian, StaysOnManifold) {
  for (const auto& [name, m] : oracle::manifold_zoo()) {
    std::mt19937_64 rng(10);
    const Point p = m->random_point(rng, 1.0);
    for (const Point& x : sample_tangent_gaussian(*m, p, 0.3, 20, 2))
      EXPECT_LE(m->constraint_violation(x), 1e-8) << name;
  }
}

TEST(AddNoise, SameSeedSameBytes) {
  const Signal h = random_signal(make_spd(2), 3, 4, 12);
  NoiseSpec spec;
  spec.seed = 77;
  EXPECT_EQ(format_mvs(add_noise(h, spec)), format_mvs(add_noise(h, spec)));
  spec.seed = 78;
  const Signal other = add_noise(h, spec);
  spec.seed = 77;
  EXPECT_NE(format_mvs(other), format_mvs(add_noise(h, spec)));
}

TEST(AddNoise, KindChecks) {
  const Signal h = random_signal(make_circle(), 4, 1, 1);
  NoiseSpec spec;
  spec.kind = NoiseKind::vmf;
  EXPECT_THROW(add_noise(h, spec), ArgumentError);
  spec.kind = NoiseKind::von_mises;
  spec.kappa = 0;
  EXPECT_THROW(add_noise(h, spec), ArgumentError);
  spec.kind = NoiseKind::gaussian;
  spec.sigma = 0;
  EXPECT_EQ(format_mvs(add_noise(h, spec)), format_mvs(h));
}

// ---- metrics -----------------------------------------------------------

TEST(DeltaSnr, Examples) {
  const auto m = make_euclidean(1);
  const Signal h(m, {Point::Constant(1, 0.0), Point::Constant(1, 1.0), Point::Constant(1, 2.0)});
  const Signal f(m, {Point::Constant(1, 0.4), Point::Constant(1, 0.2), Point::Constant(1, 2.6)});
  Signal half = h;
  for (int i = 0; i < h.size(); ++i) half[i] = 0.5 * (h[i] + f[i]);
  EXPECT_DOUBLE_EQ(delta_snr(h, f, f), 0.0);
  EXPECT_TRUE(std::isinf(delta_snr(h, f, h)));
  EXPECT_GT(delta_snr(h, f, h), 0.0);
  EXPECT_NEAR(delta_snr(h, f, half), 10.0 * std::log10(4.0), 1e-12);
  const Signal shorter(m, {Point::Constant(1, 0.0)});
  EXPECT_THROW(delta_snr(h, f, shorter), ArgumentError);
}

TEST(DeltaSnr, HalvedGeodesicOnSphere) {
  const auto s2 = make_sphere(2);
  std::mt19937_64 rng(13);
  std::vector<Point> hp, fp, up;
  for (int i = 0; i < 10; ++i) {
    const Point h = s2->random_point(rng, 1.0);
    const Point f = s2->exp(h, s2->random_tangent(h, rng, 0.3));
    hp.push_back(h);
    fp.push_back(f);
    up.push_back(s2->geopoint(h, f, 0.5));
  }
  EXPECT_NEAR(delta_snr(Signal(s2, hp), Signal(s2, fp), Signal(s2, up)), 10.0 * std::log10(4.0), 1e-9);
}

// ---- preview -----------------------------------------------------------

TEST(Preview, CircleHueGolden) {
  const Signal s(make_circle(), {Point::Constant(1, -kPi), Point::Constant(1, -kPi / 2), Point::Constant(1, 0.0)}, 1,
                 3);
  const std::string ppm = render_ppm(s);
  const std::string header = "P6\n3 1\n255\n";
  ASSERT_EQ(ppm.size(), header.size() + 9);
  EXPECT_EQ(ppm.substr(0, header.size()), header);
  const std::vector<int> expect{255, 0, 0, 128, 255, 0, 0, 255, 255};
  for (int k = 0; k < 9; ++k) EXPECT_EQ(static_cast<unsigned char>(ppm[header.size() + k]), expect[k]) << k;
}

TEST(Preview, SpdAnisotropyGolden) {
  Eigen::Matrix2d a = Eigen::Matrix2d::Identity(), b = Eigen::Vector2d(4, 1).asDiagonal();
  const Signal s(make_spd(2), {Eigen::Map<Point>(a.data(), 4), Eigen::Map<Point>(b.data(), 4)}, 1, 2);
  const std::string ppm = render_ppm(s);
  const std::size_t h = std::string("P6\n2 1\n255\n").size();
  const int grey = static_cast<int>(std::lround(255.0 * std::sqrt(9.0 / 17.0)));
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(static_cast<unsigned char>(ppm[h + k]), 0);
    EXPECT_EQ(static_cast<unsigned char>(ppm[h + 3 + k]), grey);
  }
}

TEST(Preview, StripForSignalsAndPurity) {
  const Signal s = random_signal(make_sphere(2), 6, 1, 21);
  const std::string a = render_ppm(s, 4);
  EXPECT_EQ(a.rfind("P6\n6 4\n255\n", 0), 0u);
  EXPECT_EQ(a.size(), std::string("P6\n6 4\n255\n").size() + 6 * 4 * 3);
  EXPECT_EQ(a, render_ppm(s, 4));
  const fs::path p = scratch("strip.ppm");
  write_ppm(p.string(), s);
  EXPECT_EQ(slurp(p), render_ppm(s));
}

// ---- command line ------------------------------------------------------

TEST(Cli, ZeroWeightTvReproducesInput) {
  const Signal s = random_signal(make_sphere(2), 12, 1, 31);
  const fs::path in = scratch("tv_in.mvs"), out = scratch("tv_out.mvs"), trace = scratch("tv_trace.csv");
  write_mvs(in.string(), s);
  ASSERT_EQ(run_cli("denoise-tv -i " + in.string() + " -o " + out.string() + " --alpha 0 --iters 20 --trace " +
                    trace.string()),
            0);
  EXPECT_EQ(slurp(out), slurp(in));
  EXPECT_EQ(slurp(trace).rfind("iteration,data,regularizer,total\n", 0), 0u);
}

TEST(Cli, PottsHugeGammaGivesOneSegment) {
  std::vector<Point> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(Point::Constant(1, i < 5 ? 0.0 : 1.0));
  const fs::path in = scratch("potts_in.mvs"), out = scratch("potts_out.mvs"), trace = scratch("potts.csv");
  write_mvs(in.string(), Signal(make_euclidean(1), pts));
  ASSERT_EQ(run_cli("potts -i " + in.string() + " -o " + out.string() + " --gamma 1e9 --trace " + trace.string()), 0);
  const Signal u = read_mvs(out.string()).signal;
  for (int i = 1; i < u.size(); ++i) EXPECT_EQ(u[i], u[0]);
  std::istringstream csv(slurp(trace));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(header, "iteration,data,regularizer,total,jumps");
  EXPECT_EQ(row.substr(row.rfind(',') + 1), "0");
}

TEST(Cli, ExitCodes) {
  const Signal s = random_signal(make_circle(), 5, 1, 8);
  const fs::path in = scratch("codes.mvs"), bad = scratch("bad.mvs");
  write_mvs(in.string(), s);
  write_text(bad.string(), "MVS 1\nmanifold circle\nshape 2\nambient 1\n0\n");
  EXPECT_EQ(run_cli("denoise-tv -i " + in.string() + " --no-such-flag"), 2);
  EXPECT_EQ(run_cli("no-such-command"), 2);
  EXPECT_EQ(run_cli("denoise-tv"), 2);
  EXPECT_EQ(run_cli("denoise-tv -i " + bad.string()), 2);
  EXPECT_EQ(run_cli("denoise-tv -i " + in.string() + " --manifold sphere:2"), 2);
  EXPECT_EQ(run_cli("denoise-tv -i " + in.string() + " --alpha -1"), 2);
  EXPECT_EQ(run_cli("denoise-tv -i " + in.string() + " -o " + scratch("ok.mvs").string()), 0);
}

TEST(Cli, NoiseIsSeeded) {
  const Signal s = random_signal(make_sphere(2), 8, 1, 4);
  const fs::path in = scratch("clean.mvs"), a = scratch("noisy_a.mvs"), b = scratch("noisy_b.mvs");
  write_mvs(in.string(), s);
  ASSERT_EQ(run_cli("noise -i " + in.string() + " -o " + a.string() + " --kappa 50 --seed 5"), 0);
  ASSERT_EQ(run_cli("noise -i " + in.string() + " -o " + b.string() + " --kappa 50 --seed 5"), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(slurp(a), slurp(in));
}

TEST(Cli, MetricsCsv) {
  const auto m = make_euclidean(1);
  const fs::path h = scratch("m_h.mvs"), f = scratch("m_f.mvs"), u = scratch("m_u.mvs"), out = scratch("m.csv");
  write_mvs(h.string(), Signal(m, {Point::Constant(1, 0.0), Point::Constant(1, 0.0)}));
  write_mvs(f.string(), Signal(m, {Point::Constant(1, 1.0), Point::Constant(1, -1.0)}));
  write_mvs(u.string(), Signal(m, {Point::Constant(1, 0.5), Point::Constant(1, -0.5)}));
  ASSERT_EQ(run_cli("metrics --ground " + h.string() + " --noisy " + f.string() + " --denoised " + u.string() +
                    " -o " + out.string()),
            0);
  std::istringstream csv(slurp(out));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "metric,value");
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("delta_snr_db,", 0), 0u);
  EXPECT_NEAR(std::stod(line.substr(13)), 10.0 * std::log10(4.0), 1e-12);
  std::getline(csv, line);
  EXPECT_EQ(line, "mean_dist_noisy,1");
  std::getline(csv, line);
  EXPECT_EQ(line, "mean_dist_denoised,0.5");
}
