#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace mvr;

namespace {

Point scalar(double x) { return Point::Constant(1, x); }

Signal line(ManifoldPtr m, const std::vector<double>& v) {
  std::vector<Point> pts;
  for (double x : v) pts.push_back(scalar(x));
  return Signal(std::move(m), pts);
}

Eigen::VectorXd flat(const Signal& s) {
  Eigen::VectorXd v(s.size());
  for (int i = 0; i < s.size(); ++i) v[i] = s[i][0];
  return v;
}

Signal smooth_sphere_signal(int n, std::mt19937_64& rng) {
  auto m = make_sphere(2);
  const double a = oracle::uniform(rng, 0.2, 0.6), b = oracle::uniform(rng, 0.2, 0.6);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    pts.push_back(m->exp(m->base_point(), Tangent(Eigen::Vector3d(a * std::sin(3 * t), b * t, 0.0))));
  }
  return Signal(m, pts);
}

}  // namespace

// --- forward operators ------------------------------------------------------------------------

TEST(ForwardOperator, RowSumGuard) {
  Eigen::MatrixXd a(2, 2);
  a << 0.5, 0.5, 0.3, 0.6;
  EXPECT_THROW(ForwardOperator{a}, ArgumentError);
  a(1, 1) = 0.7;
  EXPECT_NO_THROW(ForwardOperator{a});
  a << 1.5, -0.5, 0.2, 0.8;  // negative entries are fine
  EXPECT_NO_THROW(ForwardOperator{a});
  a(0, 0) += 1e-11;
  EXPECT_THROW(ForwardOperator{a}, ArgumentError);
}

TEST(ForwardOperator, GaussianRows) {
  EXPECT_TRUE(gaussian_kernel_operator(6, 0.3, 1).is_identity());
  const ForwardOperator g = gaussian_kernel_operator(12, 1.0, 5);
  for (int i = 0; i < 12; ++i) EXPECT_NEAR(g.matrix().row(i).sum(), 1.0, 1e-14);
  double z = 0;
  for (int k = -2; k <= 2; ++k) z += std::exp(-k * k / 2.0);
  for (int k = -2; k <= 2; ++k) EXPECT_NEAR(g.matrix()(6, 6 + k), std::exp(-k * k / 2.0) / z, 1e-15);
  EXPECT_EQ(g.matrix()(6, 9), 0.0);
  // boundary row renormalized over the in-range entries
  double zb = 0;
  for (int k = 0; k <= 2; ++k) zb += std::exp(-k * k / 2.0);
  EXPECT_NEAR(g.matrix()(0, 1), std::exp(-0.5) / zb, 1e-15);
  const ForwardOperator g2 = gaussian_kernel_operator_2d(4, 5, 1.0, 5);
  EXPECT_EQ(g2.rows(), 20);
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(g2.matrix().row(i).sum(), 1.0, 1e-14);
}

TEST(ForwardApply, Examples) {
  std::mt19937_64 rng(1);
  const Signal u = smooth_sphere_signal(6, rng);
  const Signal same = forward_apply(ForwardOperator::identity(6), u);
  EXPECT_EQ(same.data, u.data);
  Eigen::MatrixXd half(1, 6);
  half << 0, 0.5, 0.5, 0, 0, 0;
  const Signal mid = forward_apply(ForwardOperator(half), u);
  EXPECT_LE(u.M().dist(mid[0], u.M().midpoint(u[1], u[2])), 1e-12);
  auto e = make_euclidean(1);
  const ForwardOperator g = gaussian_kernel_operator(10, 1.3, 5);
  const Signal v = line(e, {0.3, 1, -2, 0.5, 4, 1, 1, 0, -1, 2});
  EXPECT_LE((flat(forward_apply(g, v)) - g.matrix() * flat(v)).lpNorm<Eigen::Infinity>(), 1e-10);
}

// --- data atoms ---------------------------------------------------------------------------------

TEST(DataAtom, ZeroAtTheData) {
  std::mt19937_64 rng(2);
  const Signal u = smooth_sphere_signal(8, rng);
  const ForwardOperator g = gaussian_kernel_operator(8, 1.0, 3);
  const Signal f = forward_apply(g, u);
  const Atom a = data_atom(g, f, 4, 2.0);
  EXPECT_NEAR(a.evaluate(u), 0.0, 1e-20);
  std::vector<Tangent> grad = zero_field(u);
  a.gradient(u, grad);
  for (const Tangent& t : grad) EXPECT_LE(t.norm(), 1e-9);
}

TEST(DataAtom, EuclideanGradientIsLeastSquares) {
  auto e = make_euclidean(1);
  const ForwardOperator g = gaussian_kernel_operator(9, 1.0, 5);
  const Signal u = line(e, {0.1, 0.5, -0.2, 1.0, 0.3, 0.0, 0.7, -0.4, 0.2});
  const Signal f = line(e, {0, 0, 0, 0, 0, 0, 0, 0, 0});
  for (int i = 0; i < 9; ++i) {
    const Atom a = data_atom(g, f, i, 2.0);
    std::vector<Tangent> grad = zero_field(u);
    a.gradient(u, grad);
    const double r = g.matrix().row(i).dot(flat(u)) - 0.0;
    for (int j = 0; j < 9; ++j) EXPECT_NEAR(grad[j][0], g.matrix()(i, j) * r, 1e-10);
    EXPECT_NEAR(a.evaluate(u), 0.5 * r * r, 1e-14);
  }
}

TEST(DataAtom, SphereGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  auto m = make_sphere(2);
  for (int k = 0; k < 10; ++k) {
    std::vector<Point> pts;
    for (int i = 0; i < 4; ++i) pts.push_back(oracle::near(*m, m->base_point(), rng, 0.8));
    Eigen::MatrixXd w(1, 4);
    w << 0.1, 0.4, 0.3, 0.2;
    if (k % 2) w << -0.2, 0.6, 0.7, -0.1;
    const ForwardOperator a(w);
    const Signal u(m, pts), f(m, {oracle::near(*m, m->base_point(), rng, 0.8)});
    for (double q : {1.0, 2.0}) {
      const Atom atom = data_atom(a, f, 0, q);
      std::vector<Tangent> grad = zero_field(u);
      atom.gradient(u, grad);
      for (int j = 0; j < 4; ++j) {
        const Tangent fd = oracle::fd_gradient(*m, pts, j, [&](const std::vector<Point>& x) {
          return atom.evaluate(Signal(m, x));
        }, 1e-5);
        EXPECT_LE((grad[j] - fd).norm(), 1e-5 * std::max(1.0, fd.norm())) << k << " " << q << " " << j;
      }
    }
  }
}

// --- reconstruction --------------------------------------------------------------------------------

TEST(SolveInverse, IdentityOperatorIsDenoising) {
  std::mt19937_64 rng(4);
  const Signal f = smooth_sphere_signal(10, rng);
  RegularizerSpec reg;
  reg.tv.alpha = 0.2;
  SolverSchedule s;
  s.max_iters = 50;
  const SolveResult a = solve_inverse(ForwardOperator::identity(10), f, reg, 2.0, s, Engine::cppa);
  const SolveResult b = denoise_tv(f, reg.tv, Engine::cppa, s);
  for (int i = 0; i < 10; ++i) EXPECT_LE(f.M().dist(a.x[i], b.x[i]), 1e-14);
}

TEST(SolveInverse, AbsoluteDataNeedsAProximalEngine) {
  const Signal f = line(make_euclidean(1), {0, 1, 2});
  EXPECT_THROW(solve_inverse(ForwardOperator::identity(3), f, RegularizerSpec{}, 1.0, SolverSchedule{}, Engine::fbs),
               ArgumentError);
  EXPECT_THROW(solve_inverse(gaussian_kernel_operator(4, 1.0, 3), f, RegularizerSpec{}, 2.0, SolverSchedule{}, Engine::fbs),
               ArgumentError);
}

TEST(SolveInverse, NoiselessResidualVanishes) {
  std::mt19937_64 rng(5);
  const Signal u = smooth_sphere_signal(12, rng);
  const ForwardOperator g = gaussian_kernel_operator(12, 0.8, 3);
  const Signal f = forward_apply(g, u);
  RegularizerSpec reg;
  reg.kind = RegularizerKind::none;
  const SolveResult r = solve_inverse(g, f, reg, 2.0, SolverSchedule{100, 0.51, 3000, 0.0}, Engine::fbs_traj);
  EXPECT_LE(data_residual(g, r.x, f), 1e-6);
  for (std::size_t k = 1; k < r.trace.size(); ++k) EXPECT_LE(r.trace[k].total(), r.trace[k - 1].total() + 1e-7);
}

TEST(SolveInverse, AbsoluteDataCppaNearSubgradientLimit) {
  // q = 1 through cppa against a long subgradient run on the same energy
  auto e = make_euclidean(1);
  std::mt19937_64 rng(6);
  const ForwardOperator g = gaussian_kernel_operator(12, 0.8, 3);
  std::vector<double> v(12);
  for (int i = 0; i < 12; ++i) v[i] = (i < 6 ? 0.0 : 1.0) + 0.05 * oracle::uniform(rng, -1, 1);
  const Signal f = forward_apply(g, line(e, v));
  RegularizerSpec reg;
  reg.tv.alpha = 0.05;
  const Eigen::MatrixXd am = g.matrix();
  const Eigen::VectorXd fv = flat(f);
  auto energy = [&](const Signal& x) {
    const Eigen::VectorXd r = am * flat(x) - fv;
    double tv = 0;
    for (int i = 0; i + 1 < x.size(); ++i) tv += std::abs(x[i + 1][0] - x[i][0]);
    return r.cwiseAbs().sum() + 0.05 * tv;
  };
  const SolveResult prox = solve_inverse(g, f, reg, 1.0, SolverSchedule{0.5, 1.0, 3000, 0.0}, Engine::cppa);
  std::vector<Atom> data = data_atoms(g, f, 1.0);
  std::vector<Atom> all = data;
  for (Atom& a : regularizer_atoms(reg, f)) all.push_back(a);
  const SolveResult sub = subgradient_descent(all, f, SolverSchedule{0.05, 0.6, 20000, 0.0});
  EXPECT_LE(energy(prox.x), 1.02 * energy(sub.x) + 1e-9);
}

// --- wavelets ---------------------------------------------------------------------------------------

TEST(Subdivision, MaskValidation) {
  SubdivisionScheme bad{"bad", {{-1, 0.5}, {0, 1.0}, {1, 0.4}}, -1};
  EXPECT_THROW(bad.validate(), ArgumentError);
  SubdivisionScheme not_interp{"ni", {{-1, 0.5}, {0, 0.9}, {2, 0.1}, {1, 0.5}}, -1};
  EXPECT_THROW(not_interp.validate(), ArgumentError);
  EXPECT_NO_THROW(SubdivisionScheme::dd3().validate());
  EXPECT_THROW(SubdivisionScheme::by_name("cubic"), ArgumentError);
}

TEST(Subdivision, MidpointAndConstants) {
  std::mt19937_64 rng(7);
  const Signal c = smooth_sphere_signal(5, rng);
  const Signal fine = subdivide(c, SubdivisionScheme::midpoint());
  ASSERT_EQ(fine.size(), 9);
  for (int n = 0; n < 4; ++n) {
    EXPECT_EQ(fine[2 * n], c[n]);
    EXPECT_LE(c.M().dist(fine[2 * n + 1], c.M().midpoint(c[n], c[n + 1])), 1e-12);
  }
  const Signal k(c.manifold, std::vector<Point>(6, c[2]));
  for (const auto& scheme : {SubdivisionScheme::midpoint(), SubdivisionScheme::dd3()})
    for (const Point& p : subdivide(k, scheme).data) EXPECT_LE(c.M().dist(p, c[2]), 1e-12);
}

TEST(Subdivision, Dd3InteriorWeights) {
  auto e = make_euclidean(1);
  const Signal c = line(e, {0, 0, 0, 1, 0, 0, 0});
  const Signal f = subdivide(c, SubdivisionScheme::dd3());
  EXPECT_NEAR(f[5][0], 9.0 / 16, 1e-15);
  EXPECT_NEAR(f[7][0], 9.0 / 16, 1e-15);
  EXPECT_NEAR(f[3][0], -1.0 / 16, 1e-15);
  EXPECT_NEAR(f[9][0], -1.0 / 16, 1e-15);
}

TEST(Wavelet, SubdividedSignalsHaveZeroDetails) {
  std::mt19937_64 rng(8);
  for (const auto& scheme : {SubdivisionScheme::midpoint(), SubdivisionScheme::dd3()}) {
    Signal u = smooth_sphere_signal(5, rng);
    for (int r = 0; r < 3; ++r) u = subdivide(u, scheme);
    const WaveletPyramid pyr = wavelet_analyze(u, scheme, 3);
    for (const auto& level : pyr.details)
      for (const Tangent& d : level) EXPECT_LE(d.norm(), 1e-12);
    EXPECT_EQ(pyr.coarse.size(), 5);
  }
  auto e = make_euclidean(1);
  std::vector<double> ramp(17);
  for (int i = 0; i < 17; ++i) ramp[i] = 0.25 * i - 1;
  for (const auto& level : wavelet_analyze(line(e, ramp), SubdivisionScheme::midpoint(), 4).details)
    for (const Tangent& d : level) EXPECT_LE(d.norm(), 1e-14);
  EXPECT_THROW(wavelet_analyze(line(e, ramp), SubdivisionScheme::midpoint(), 5), ArgumentError);
  EXPECT_THROW(wavelet_analyze(line(e, std::vector<double>(16, 0.0)), SubdivisionScheme::midpoint(), 2), ArgumentError);
}

TEST(Wavelet, SynthesisOfZeroDetailsIsSubdivision) {
  std::mt19937_64 rng(9);
  const Signal u = smooth_sphere_signal(17, rng);
  WaveletPyramid pyr = wavelet_analyze(u, SubdivisionScheme::dd3(), 2);
  for (auto& level : pyr.details)
    for (Tangent& d : level) d.setZero();
  const Signal s = wavelet_synthesize(pyr);
  const Signal ref = subdivide(subdivide(pyr.coarse, SubdivisionScheme::dd3()), SubdivisionScheme::dd3());
  for (int i = 0; i < s.size(); ++i) EXPECT_LE(u.M().dist(s[i], ref[i]), 1e-12);
}

TEST(Wavelet, FinestDetailIsLocal) {
  std::mt19937_64 rng(10);
  const Signal u = smooth_sphere_signal(17, rng);
  for (const auto& scheme : {SubdivisionScheme::midpoint(), SubdivisionScheme::dd3()}) {
    WaveletPyramid pyr = wavelet_analyze(u, scheme, 2);
    const Point b = pyr.bases[1][3];
    pyr.details[1][3] += u.M().project_tangent(b, Tangent(Eigen::Vector3d(0.01, 0.02, -0.01)));
    const Signal v = wavelet_synthesize(pyr);
    for (int i = 0; i < 17; ++i) {
      if (i == 7) EXPECT_GT(u.M().dist(u[i], v[i]), 1e-3);
      else EXPECT_LE(u.M().dist(u[i], v[i]), 1e-12) << i;
    }
  }
}

TEST(Wavelet, MidpointDetailsDecayOnSmoothSignals) {
  auto e = make_euclidean(1);
  auto max_detail = [&](int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = std::sin(2.0 * i / (n - 1));
    const WaveletPyramid pyr = wavelet_analyze(line(e, v), SubdivisionScheme::midpoint(), 1);
    double m = 0;
    for (const Tangent& d : pyr.details[0]) m = std::max(m, d.norm());
    return m;
  };
  EXPECT_GE(max_detail(33) / max_detail(65), 2.0);
}

TEST(Wavelet, EnergiesMatchScalarReference) {
  auto e = make_euclidean(1);
  std::mt19937_64 rng(11);
  const int n = 17, levels = 3;
  std::vector<double> v(n);
  for (auto& x : v) x = oracle::uniform(rng, -1, 1);
  const Eigen::MatrixXd ana = oracle::midpoint_synthesis_matrix(n, levels).inverse();
  const std::vector<int> lev = oracle::midpoint_levels(n, levels);
  const Eigen::VectorXd coef = ana * Eigen::Map<Eigen::VectorXd>(v.data(), n);
  const Signal u = line(e, v);
  for (double p : {1.0, 2.0}) {
    const double mu = 0.7;
    double det = 0, coarse = 0;
    int ndet = 0;
    for (int k = 0; k < n; ++k)
      if (lev[k] > 0) {
        // stored details carry 2^{-r/2}
        const double d = std::pow(2.0, -0.5 * lev[k]) * std::abs(coef[k]);
        det += std::pow(2.0, lev[k] * p * (mu + 0.5 - 1.0 / p)) * std::pow(d, p);
        ndet += d > 1e-12;
      }
    for (int k = 1; k < 3; ++k) coarse += std::pow(std::abs(coef[k] - coef[k - 1]), p);
    EXPECT_NEAR(w_energy(u, {0.3, 0.2}, mu, p, SubdivisionScheme::midpoint(), levels), 0.3 * det + 0.2 * coarse, 1e-10);
    EXPECT_NEAR(w_energy(u, {0.6, 0.0}, mu, p, SubdivisionScheme::midpoint(), levels),
                2 * w_energy(u, {0.3, 0.0}, mu, p, SubdivisionScheme::midpoint(), levels), 1e-12);
    EXPECT_EQ(w0_energy(u, {1.0, 0.0}, SubdivisionScheme::midpoint(), levels), ndet);
  }
}

TEST(Wavelet, SparseCountsAndThreshold) {
  auto e = make_euclidean(1);
  Signal u = line(e, std::vector<double>(9, 0.4));
  const WaveletWeights w{0.7, 0.3};
  EXPECT_EQ(w_energy(u, w, 1.0, 1.0, SubdivisionScheme::midpoint(), 2), 0.0);
  EXPECT_EQ(w0_energy(u, w, SubdivisionScheme::midpoint(), 2), 0.0);
  u[3][0] += 0.5;
  EXPECT_DOUBLE_EQ(w0_energy(u, w, SubdivisionScheme::midpoint(), 2), 0.7);
  Signal tiny = line(e, std::vector<double>(9, 0.4));
  tiny[5][0] += 1e-14;
  EXPECT_EQ(w0_energy(tiny, w, SubdivisionScheme::midpoint(), 2), 0.0);
}

TEST(DenoiseWavelet, ZeroWeightsKeepTheData) {
  std::mt19937_64 rng(12);
  const Signal f = smooth_sphere_signal(17, rng);
  WaveletModel model;
  model.alpha = {0.0, 0.0};
  model.levels = 2;
  SolverSchedule s;
  s.max_iters = 10;
  const SolveResult r = denoise_wavelet(f, nullptr, model, 2.0, s);
  for (int i = 0; i < f.size(); ++i) EXPECT_LE(f.M().dist(r.x[i], f[i]), 1e-12);
}

TEST(DenoiseWavelet, NonDyadicLengthIsPadded) {
  auto e = make_euclidean(1);
  const Signal f = line(e, {0, 0.1, 0.3, 0.2, 0.5, 0.4, 0.6, 0.9, 0.8, 1.0, 1.1, 1.0});
  WaveletModel model;
  model.alpha = {0.1, 0.0};
  model.levels = 2;
  SolverSchedule s;
  s.max_iters = 200;
  const SolveResult r = denoise_wavelet(f, nullptr, model, 2.0, s);
  EXPECT_EQ(r.x.size(), f.size());
  EXPECT_EQ(reflect_pad(f, 2).size(), 13);
}

TEST(DenoiseWavelet, L1TraceDecreasesAndSphereSnrImproves) {
  std::mt19937_64 rng(13);
  const Signal clean = smooth_sphere_signal(33, rng);
  auto m = clean.manifold;
  std::normal_distribution<double> nd(0.0, 0.05);
  Signal noisy = clean;
  for (Point& p : noisy.data) p = m->exp(p, m->project_tangent(p, Tangent(Eigen::Vector3d(nd(rng), nd(rng), nd(rng)))));
  WaveletModel model;
  model.alpha = {0.02, 0.0};
  model.levels = 3;
  SolverSchedule s;
  s.max_iters = 300;
  const SolveResult r = denoise_wavelet(noisy, nullptr, model, 2.0, s);
  // The first cycles take unit-size proximal steps and may overshoot.
  for (std::size_t k = r.trace.size() / 20 + 1; k < r.trace.size(); ++k)
    EXPECT_LE(r.trace[k].total(), r.trace[k - 1].total() + 1e-7) << k;
  EXPECT_LT(r.trace.back().total(), r.trace.front().total());
  EXPECT_GT(delta_snr(clean, noisy, r.x), 0.0);
}

TEST(DenoiseWavelet, L0KillsIsolatedSmallDetails) {
  auto e = make_euclidean(1);
  std::vector<double> v(17);
  for (int i = 0; i < 17; ++i) v[i] = 0.1 * i;
  v[5] += 0.02;
  const Signal f = line(e, v);
  WaveletModel model;
  model.alpha = {0.05, 0.0};
  model.penalty = WaveletPenalty::l0;
  model.levels = 2;
  SolverSchedule s;
  s.max_iters = 50;
  const SolveResult r = denoise_wavelet(f, nullptr, model, 2.0, s);
  auto energy = [&](const Signal& x) {
    double d = 0;
    for (int i = 0; i < 17; ++i) d += 0.5 * std::pow(x[i][0] - v[i], 2);
    return d + w0_energy(x, {0.05, 0.0}, SubdivisionScheme::midpoint(), 2);
  };
  EXPECT_EQ(w0_energy(r.x, {1.0, 0.0}, SubdivisionScheme::midpoint(), 2), 0.0);
  EXPECT_NEAR(r.x[5][0], 0.5, 0.01);
  EXPECT_LT(energy(r.x), 0.1 * energy(f));
}
