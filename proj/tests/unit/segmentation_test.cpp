#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace mvr;

namespace {

Point scalar(double x) { return Point::Constant(1, x); }

Signal line(ManifoldPtr m, std::vector<double> v) {
  std::vector<Point> pts;
  for (double x : v) pts.push_back(scalar(x));
  return Signal(std::move(m), pts);
}

MSModel potts(double gamma, double q = 2.0) {
  MSModel m;
  m.gamma = gamma;
  m.q = q;
  m.mode = MSMode::potts;
  return m;
}

MSModel mumford_shah(double alpha, double gamma, double p = 2.0, double q = 2.0) {
  return MSModel{alpha, gamma, p, q, MSMode::mumford_shah};
}

Signal random_signal(ManifoldPtr m, int n, std::mt19937_64& rng, double spread = 1.0) {
  std::vector<Point> pts;
  const Point c = m->random_point(rng, 1.0);
  Point level = c;
  for (int i = 0; i < n; ++i) {
    if (i % 3 == 0) level = oracle::near(*m, c, rng, spread);
    pts.push_back(oracle::near(*m, level, rng, 0.2 * spread));
  }
  return Signal(std::move(m), pts);
}

Point sphere_point(double theta, double phi) {
  return Point(Eigen::Vector3d(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)));
}

}  // namespace

// --- energies ---------------------------------------------------------------------------------

TEST(MsEnergy, UnivariateExamples) {
  auto e = make_euclidean(1);
  const Signal c = line(e, {1, 1, 1});
  EXPECT_EQ(ms_energy_1d(c, c, mumford_shah(1.0, 0.5)), 0.0);
  // s = 1 from gamma = alpha s^p / p with alpha = p = 1
  const Signal x = line(e, {0, 10});
  EXPECT_DOUBLE_EQ(ms_energy_1d(x, x, mumford_shah(1.0, 1.0, 1.0, 1.0)), 1.0);
  const Signal f = line(e, {0.1, 0, 1, 0.8});
  const Signal y = line(e, {0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(ms_energy_1d(y, f, potts(0.5)), 0.5 * (0.01 + 0.04) + 0.5);
  EXPECT_THROW(ms_energy_1d(y, line(e, {0}), potts(0.5)), ArgumentError);
}

TEST(MsEnergy, NeighborhoodWeights) {
  const NeighborhoodSystem ns = NeighborhoodSystem::standard();
  ASSERT_EQ(ns.directions.size(), 4u);
  EXPECT_NEAR(ns.weights[0], 0.41421, 1e-5);
  EXPECT_NEAR(ns.weights[1], 0.41421, 1e-5);
  EXPECT_NEAR(ns.weights[2], 0.29289, 1e-5);
  EXPECT_NEAR(ns.weights[3], 0.29289, 1e-5);
}

TEST(MsEnergy, BivariateMatchesReferenceLoop) {
  auto e = make_euclidean(1);
  const Signal c(e, std::vector<Point>(4, scalar(0.3)), 2, 2);
  EXPECT_EQ(ms_energy_2d(c, c, potts(1.0)), 0.0);
  std::mt19937_64 rng(1);
  const NeighborhoodSystem ns = NeighborhoodSystem::standard();
  for (int k = 0; k < 10; ++k) {
    const int rows = 2 + k % 3, cols = 3;
    std::vector<double> xv(rows * cols), fv(rows * cols);
    for (int i = 0; i < rows * cols; ++i) {
      xv[i] = (k == 0) ? (i / cols + i % cols) % 2 : std::round(oracle::uniform(rng, 0, 2));
      fv[i] = oracle::uniform(rng, -1, 2);
    }
    std::vector<Point> xp, fp;
    for (int i = 0; i < rows * cols; ++i) xp.push_back(scalar(xv[i])), fp.push_back(scalar(fv[i]));
    const Signal x(e, xp, rows, cols), f(e, fp, rows, cols);
    for (MSModel model : {potts(1.0), mumford_shah(0.7, 0.2)}) {
      model.alpha = 0.7;
      const double sp = model.mode == MSMode::potts ? 0.0 : 2 * 0.2 / 0.7;
      double ref = 0;
      for (int i = 0; i < rows * cols; ++i) ref += 0.5 * (xv[i] - fv[i]) * (xv[i] - fv[i]);
      for (std::size_t s = 0; s < 4; ++s)
        for (int i = 0; i < rows; ++i)
          for (int j = 0; j < cols; ++j) {
            const int u = i + ns.directions[s][0], w = j + ns.directions[s][1];
            if (u < 0 || u >= rows || w < 0 || w >= cols) continue;
            const double d = std::abs(xv[u * cols + w] - xv[i * cols + j]);
            const double psi = model.mode == MSMode::potts ? (d > 0 ? 1.0 : 0.0) : std::min(sp, d * d) / 2;
            ref += model.alpha * ns.weights[s] * psi;
          }
      EXPECT_NEAR(ms_energy_2d(x, f, model), ref, 1e-12);
    }
  }
}

// --- segment errors ---------------------------------------------------------------------------

TEST(SegmentError, SinglePointAndVariance) {
  auto e = make_euclidean(1);
  const Signal f = line(e, {0.3, 1.2, -0.4, 2.0});
  const SegmentFit one = segment_error(f, 2, 2, potts(1.0));
  EXPECT_EQ(one.error, 0.0);
  EXPECT_EQ(one.h[0][0], -0.4);
  EXPECT_EQ(segment_error(f, 1, 1, mumford_shah(1.0, 1.0)).error, 0.0);
  const double mean = (0.3 + 1.2 - 0.4 + 2.0) / 4;
  double var = 0;
  for (double v : {0.3, 1.2, -0.4, 2.0}) var += 0.5 * (v - mean) * (v - mean);
  EXPECT_NEAR(segment_error(f, 0, 3, potts(1.0)).error, var, 1e-14);
  EXPECT_THROW(segment_error(f, 2, 1, potts(1.0)), ArgumentError);
  EXPECT_THROW(segment_error(f, 0, 4, potts(1.0)), ArgumentError);
}

TEST(SegmentError, SphereTripleMatchesGridSearch) {
  auto m = make_sphere(2);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 3; ++k) {
    std::vector<Point> pts;
    for (int i = 0; i < 3; ++i) pts.push_back(oracle::near(*m, m->base_point(), rng, 1.0));
    auto obj = [&](const Point& c) {
      double v = 0;
      for (const Point& p : pts) v += 0.5 * std::pow(m->dist(c, p), 2);
      return v;
    };
    // 0.5 degree grid, then zoom in around the best cell
    const double step = kPi / 360;
    double bt = 0, bp = 0, best = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= 360; ++a)
      for (int b = 0; b < 720; ++b) {
        const double v = obj(sphere_point(a * step, b * step));
        if (v < best) best = v, bt = a * step, bp = b * step;
      }
    for (double h = step; h > 1e-9; h *= 0.5)
      for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b) {
          const double t = bt + a * h / 2, p = bp + b * h / 2, v = obj(sphere_point(t, p));
          if (v < best) best = v, bt = t, bp = p;
        }
    const double lib = segment_error(Signal(m, pts), 0, 2, potts(1.0)).error;
    EXPECT_NEAR(lib, best, 1e-6);
    EXPECT_LE(lib, best + 1e-12);
  }
}

TEST(SegmentError, WarmStartDoesNotChangeTheFit) {
  std::mt19937_64 rng(3);
  for (ManifoldPtr m : {make_sphere(2), make_spd(2)}) {
    const Signal f = random_signal(m, 6, rng);
    for (const MSModel& model : {potts(1.0), mumford_shah(0.8, 0.5), mumford_shah(0.5, 0.5, 1.0, 2.0)}) {
      const SegmentFit cold = segment_error(f, 0, 5, model);
      std::vector<Point> warm = segment_error(f, 0, 4, model).h;
      warm.push_back(f[5]);
      if (model.mode == MSMode::potts) warm.resize(1);
      const SegmentFit hot = segment_error(f, 0, 5, model, &warm);
      // p = 1 segments come from a finite proximal point run.
      EXPECT_NEAR(cold.error, hot.error, model.p == 1.0 ? 1e-6 : 1e-8);
    }
  }
}

// --- dynamic programming ----------------------------------------------------------------------

TEST(DpSolve, StepSignal) {
  auto e = make_euclidean(1);
  const DPResult r = dp_solve_1d(line(e, {0, 0, 1, 1}), potts(0.1));
  EXPECT_EQ(r.jumps, std::vector<int>{1});
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.x[i][0], i < 2 ? 0.0 : 1.0, 1e-15);
  EXPECT_NEAR(r.energy, 0.1, 1e-15);
  EXPECT_NEAR(r.energy, ms_energy_1d(r.x, line(e, {0, 0, 1, 1}), potts(0.1)), 1e-15);
}

TEST(DpSolve, HugeJumpPenaltyGivesOneSegment) {
  std::mt19937_64 rng(4);
  for (const auto& [name, m] : oracle::manifold_zoo()) {
    const Signal f = random_signal(m, 9, rng);
    for (const MSModel& model : {potts(1e9), mumford_shah(1.0, 1e9)}) {
      const DPResult r = dp_solve_1d(f, model);
      EXPECT_TRUE(r.jumps.empty()) << name;
      if (model.mode == MSMode::potts)
        for (int i = 1; i < f.size(); ++i) EXPECT_EQ(r.x[i], r.x[0]) << name;
    }
  }
}

TEST(DpSolve, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(5);
  for (ManifoldPtr m : {make_euclidean(2), make_spd(2), make_circle()}) {
    for (int k = 0; k < 4; ++k) {
      const Signal f = random_signal(m, 7, rng);
      const double gamma = oracle::uniform(rng, 0.05, 0.5);
      for (bool is_potts : {true, false}) {
        const MSModel model = is_potts ? potts(gamma) : mumford_shah(1.0, gamma);
        const DPResult r = dp_solve_1d(f, model);
        const double ex = oracle::exhaustive_partition(*m, f.data, is_potts, 1.0, gamma);
        EXPECT_NEAR(r.energy, ex, 1e-9) << m->descriptor().to_string();
        EXPECT_NEAR(oracle::partition_energy(*m, r.x.data, f.data, is_potts, 1.0, gamma), r.energy, 1e-9);
      }
    }
  }
}

TEST(DpSolve, PruningIsSound) {
  std::mt19937_64 rng(6);
  MSOptions plain;
  plain.pruning = false;
  for (int k = 0; k < 100; ++k) {
    const Signal f = random_signal(make_euclidean(1), 12, rng);
    const double gamma = oracle::uniform(rng, 0.02, 1.0);
    const MSModel model = k % 2 ? potts(gamma) : mumford_shah(1.0, gamma);
    const DPResult a = dp_solve_1d(f, model), b = dp_solve_1d(f, model, plain);
    EXPECT_EQ(a.jumps, b.jumps);
    EXPECT_NEAR(a.energy, b.energy, 1e-12);
  }
}

TEST(DpSolve, JumpCountFallsWithGamma) {
  std::mt19937_64 rng(7);
  for (ManifoldPtr m : {make_euclidean(1), make_sphere(2)}) {
    const Signal f = random_signal(m, 15, rng);
    for (bool is_potts : {true, false}) {
      std::size_t prev = f.size();
      for (double gamma = 0.01; gamma < 5; gamma *= 1.5) {
        const std::size_t j = dp_solve_1d(f, is_potts ? potts(gamma) : mumford_shah(1.0, gamma)).jumps.size();
        EXPECT_LE(j, prev);
        prev = j;
      }
    }
  }
}

TEST(DpSolve, AbsoluteDataUsesTheMedian) {
  auto e = make_euclidean(1);
  const DPResult r = dp_solve_1d(line(e, {0, 0.1, 5, 0.2}), potts(100.0, 1.0));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.x[i][0], 0.1, 1e-6);
}

TEST(MsModel, Validation) {
  const Signal f = line(make_euclidean(1), {0, 1});
  EXPECT_THROW(dp_solve_1d(f, potts(0.0)), ArgumentError);
  EXPECT_THROW(dp_solve_1d(f, mumford_shah(0.0, 1.0)), ArgumentError);
  EXPECT_THROW(dp_solve_1d(f, mumford_shah(1.0, 1.0, 0.5)), ArgumentError);
  EXPECT_NEAR(mumford_shah(2.0, 1.0).jump_height(), 1.0, 1e-15);
}

// --- splitting --------------------------------------------------------------------------------

TEST(Splitting, ConstantImageIsUnchanged) {
  auto e = make_euclidean(2);
  const Signal f(e, std::vector<Point>(12, Point(Eigen::Vector2d(0.3, -1))), 3, 4);
  MSModel model = potts(1.0);
  const SplitResult r = splitting_solve_2d(f, model);
  EXPECT_EQ(r.x.data, f.data);
  for (double d : r.disagreement) EXPECT_EQ(d, 0.0);
}

TEST(Splitting, TwoRegionPottsPartition) {
  auto e = make_euclidean(1);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0.0, 0.05);
  std::vector<Point> pts;
  std::vector<int> truth;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      truth.push_back(j >= 3);
      pts.push_back(scalar(truth.back() + nd(rng)));
    }
  const Signal f(e, pts, 8, 8);
  MSModel model = potts(1.0);
  model.alpha = 0.2;
  const SplitResult r = splitting_solve_2d(f, model);
  EXPECT_TRUE(r.converged);
  for (int i = 0; i < 64; ++i)
    for (int k = 0; k < 64; ++k) {
      const bool same_label = truth[i] == truth[k];
      EXPECT_EQ(same_label, std::abs(r.x[i][0] - r.x[k][0]) < 1e-3) << i << " " << k;
    }
  // the disagreement sequence settles toward zero
  ASSERT_FALSE(r.disagreement.empty());
  EXPECT_LE(r.disagreement.back(), 1e-7);
  for (std::size_t k = r.disagreement.size() / 2 + 1; k < r.disagreement.size(); ++k)
    EXPECT_LE(r.disagreement[k], r.disagreement[k - 1] + 1e-6);
}

TEST(Splitting, SphereMumfordShahStaysBounded) {
  auto m = make_sphere(2);
  std::mt19937_64 rng(9);
  std::vector<Point> pts;
  for (int i = 0; i < 25; ++i) pts.push_back(oracle::near(*m, m->base_point(), rng, 0.5));
  SplitOptions opt;
  opt.max_outer = 60;
  const SplitResult r = splitting_solve_2d(Signal(m, pts, 5, 5), mumford_shah(1.0, 0.3), NeighborhoodSystem::standard(), opt);
  for (double d : r.disagreement) EXPECT_LE(d, kPi);
  EXPECT_LT(r.disagreement.back(), r.disagreement.front() + 1e-12);
}

// --- pair atoms -------------------------------------------------------------------------------

TEST(MsAtoms, SumToTheRegularizer) {
  std::mt19937_64 rng(10);
  auto m = make_sphere(2);
  std::vector<Point> pts;
  for (int i = 0; i < 12; ++i) pts.push_back(oracle::near(*m, m->base_point(), rng, 0.6));
  const Signal x(m, pts, 3, 4);
  for (const MSModel& model : {potts(0.4), mumford_shah(0.8, 0.1)}) {
    MSModel mm = model;
    mm.alpha = 0.8;
    double sum = 0;
    for (const Atom& a : ms_atoms(x, mm)) sum += a.evaluate(x);
    EXPECT_NEAR(sum, ms_energy_parts_2d(x, x, mm).regularizer, 1e-12);
  }
}

TEST(MsAtoms, PottsPairProxMergesOnlyWhenCheaper) {
  auto e = make_euclidean(1);
  Signal x = line(e, {0, 0.2});
  const Atom a = ms_atoms(x, potts(1.0))[0];
  a.prox(x, 1.0);  // merging costs 0.02, keeping costs 1
  EXPECT_DOUBLE_EQ(x[0][0], 0.1);
  EXPECT_DOUBLE_EQ(x[1][0], 0.1);
  Signal y = line(e, {0, 3});
  a.prox(y, 1.0);  // merging costs 4.5
  EXPECT_EQ(y[1][0], 3.0);
}
