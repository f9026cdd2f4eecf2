#include "mvr.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace mvr;

struct Common {
  std::string input, output, manifold, trace, preview;
  double alpha = 1.0, alpha0 = 1.0, alpha1 = 1.0, alpha2 = 0.0, gamma = 1.0;
  double p = 1.0, q = 2.0;
  /// Empty selects the subcommand default.
  std::string engine;
  double lambda0 = 1.0, decay = 1.0;
  int iters = 1000;
  double tol = 1e-8;
  double split_tol = 1e-7;
  std::uint64_t seed = 0;
};

Engine parse_engine(const std::string& s, Engine fallback = Engine::cppa) {
  if (s.empty()) return fallback;
  if (s == "cppa") return Engine::cppa;
  if (s == "pppa") return Engine::pppa;
  if (s == "fbs") return Engine::fbs;
  if (s == "fbs-traj" || s == "fbs_traj") return Engine::fbs_traj;
  throw ArgumentError("unknown engine '" + s + "'");
}

SolverSchedule schedule(const Common& c) {
  SolverSchedule s;
  s.lambda0 = c.lambda0;
  s.decay = c.decay;
  s.max_iters = c.iters;
  s.tol = c.tol;
  s.rng_seed = c.seed;
  s.validate();
  return s;
}

/// Reads --input; --manifold, when given, must agree with the file header.
Signal load(const Common& c) {
  if (c.input.empty()) throw ArgumentError("--input is required");
  ReadResult r = read_mvs(c.input);
  for (const auto& w : r.warnings) std::cerr << "warning: " << c.input << ": " << w << "\n";
  if (!c.manifold.empty() && !(make_manifold(c.manifold)->descriptor() == r.signal.M().descriptor()))
    throw ArgumentError("--manifold " + c.manifold + " does not match the file (" +
                        r.signal.M().descriptor().to_string() + ")");
  return std::move(r.signal);
}

void emit(const Common& c, const Signal& x, const std::vector<TraceRow>* trace, const std::vector<int>* jumps = nullptr) {
  if (c.output.empty()) {
    std::cout << format_mvs(x);
  } else {
    write_mvs(c.output, x);
  }
  if (!c.trace.empty()) {
    const std::vector<TraceRow> none;
    write_text(c.trace, format_trace(trace ? *trace : none, jumps));
  }
  if (!c.preview.empty()) write_ppm(c.preview, x);
}

void add_io(CLI::App* app, Common& c) {
  app->add_option("--input,-i", c.input, "Input MVS file")->required();
  app->add_option("--output,-o", c.output, "Output MVS file (stdout if omitted)");
  app->add_option("--manifold", c.manifold, "Expected manifold spec, checked against the file");
  app->add_option("--trace", c.trace, "CSV energy trace path");
  app->add_option("--preview", c.preview, "PPM preview path");
}

void add_schedule(CLI::App* app, Common& c) {
  app->add_option("--engine", c.engine, "cppa | pppa | fbs | fbs-traj (default cppa, fbs-traj for deconv)");
  app->add_option("--lambda0", c.lambda0, "Initial step size");
  app->add_option("--decay", c.decay, "Step decay exponent in (1/2, 1]");
  app->add_option("--iters", c.iters, "Maximum iterations");
  app->add_option("--tol", c.tol, "Stopping tolerance");
  app->add_option("--seed", c.seed, "Seed for shuffled orders and noise");
}

MSModel ms_model(const Common& c, MSMode mode) {
  MSModel m;
  m.alpha = c.alpha;
  m.gamma = c.gamma;
  m.p = c.p;
  m.q = c.q;
  m.mode = mode;
  return m;
}

/// Mumford-Shah / Potts: exact DP in 1-D, penalty splitting on images.
void run_ms(const Common& c, MSMode mode) {
  const Signal f = load(c);
  MSModel model = ms_model(c, mode);
  if (!f.is_image) {
    const DPResult r = dp_solve_1d(f, model);
    // Single-row trace of the DP optimum.
    const double data = [&] {
      double v = 0;
      for (int i = 0; i < f.size(); ++i) v += std::pow(f.M().dist(r.x[i], f[i]), model.q) / model.q;
      return v;
    }();
    const std::vector<TraceRow> rows{{1, data, r.energy - data}};
    const std::vector<int> jumps{static_cast<int>(r.jumps.size())};
    emit(c, r.x, &rows, &jumps);
    return;
  }
  // The jump weight of the 2-D Potts functional is alpha; --gamma sets it.
  if (mode == MSMode::potts) model.alpha = c.gamma;
  SplitOptions opt;
  opt.max_outer = c.iters;
  opt.tol = c.split_tol;
  const SplitResult r = splitting_solve_2d(f, model, NeighborhoodSystem::standard(), opt);
  if (!r.converged) std::cerr << "warning: splitting stopped at disagreement " << r.disagreement.back() << "\n";
  emit(c, r.x, &r.trace, &r.jumps);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational regularization of manifold-valued signals and images"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Common c;
  std::function<void()> job;

  auto* tv = app.add_subcommand("denoise-tv", "l^q-TV^p denoising");
  add_io(tv, c);
  add_schedule(tv, c);
  bool diagonal = false;
  tv->add_option("--alpha", c.alpha, "TV weight");
  tv->add_option("--p", c.p, "TV exponent (1 or 2)");
  tv->add_option("--q", c.q, "Data exponent");
  tv->add_flag("--diagonal", diagonal, "Add diagonal differences on images");
  tv->callback([&] {
    job = [&] {
      const Signal f = load(c);
      const SolveResult r = denoise_tv(f, TVModel{c.alpha, c.q, c.p, diagonal}, parse_engine(c.engine), schedule(c));
      emit(c, r.x, &r.trace);
    };
  });

  auto* tv2 = app.add_subcommand("denoise-tv2", "Second-order TV denoising (cppa)");
  add_io(tv2, c);
  add_schedule(tv2, c);
  tv2->add_option("--alpha", c.alpha, "TV2 weight");
  tv2->add_option("--p", c.p, "Penalty exponent");
  tv2->add_option("--q", c.q, "Data exponent");
  tv2->callback([&] {
    job = [&] {
      const Signal f = load(c);
      if (parse_engine(c.engine) != Engine::cppa) throw ArgumentError("denoise-tv2 supports --engine cppa");
      const SolveResult r = denoise_tv2(f, c.alpha, c.p, c.q, schedule(c));
      emit(c, r.x, &r.trace);
    };
  });

  auto* tgv = app.add_subcommand("denoise-tgv", "Second-order S-TGV denoising (cppa)");
  add_io(tgv, c);
  add_schedule(tgv, c);
  tgv->add_option("--alpha0", c.alpha0, "Second-order weight");
  tgv->add_option("--alpha1", c.alpha1, "First-order weight");
  tgv->add_option("--p", c.p, "Penalty exponent");
  tgv->add_option("--q", c.q, "Data exponent");
  tgv->callback([&] {
    job = [&] {
      const Signal f = load(c);
      if (parse_engine(c.engine) != Engine::cppa) throw ArgumentError("denoise-tgv supports --engine cppa");
      const STGVResult r = denoise_stgv(f, TGVWeights{c.alpha1, c.alpha0, c.p}, c.q, schedule(c));
      emit(c, r.u, &r.raw.trace);
    };
  });

  auto* ms = app.add_subcommand("mumshah", "Mumford-Shah segmentation");
  add_io(ms, c);
  ms->add_option("--alpha", c.alpha, "Smoothness weight");
  ms->add_option("--gamma", c.gamma, "Jump penalty");
  ms->add_option("--p", c.p, "Smoothness exponent");
  ms->add_option("--q", c.q, "Data exponent");
  ms->add_option("--iters", c.iters, "Outer splitting iterations (images)");
  ms->add_option("--tol", c.split_tol, "Split disagreement tolerance (images)");
  ms->callback([&] { job = [&] { run_ms(c, MSMode::mumford_shah); }; });

  auto* potts = app.add_subcommand("potts", "Potts segmentation");
  add_io(potts, c);
  potts->add_option("--gamma", c.gamma, "Jump penalty");
  potts->add_option("--q", c.q, "Data exponent");
  potts->add_option("--iters", c.iters, "Outer splitting iterations (images)");
  potts->add_option("--tol", c.split_tol, "Split disagreement tolerance (images)");
  potts->callback([&] { job = [&] { run_ms(c, MSMode::potts); }; });

  auto* deconv = app.add_subcommand("deconv", "Indirect measurements through a Gaussian blur");
  add_io(deconv, c);
  add_schedule(deconv, c);
  double kernel_sigma = 1.0;
  int kernel_width = 5;
  std::string kind = "tv";
  deconv->add_option("--kernel-sigma", kernel_sigma, "Gaussian kernel deviation");
  deconv->add_option("--kernel-width", kernel_width, "Odd kernel width");
  deconv->add_option("--kind", kind, "none | tv | tv-tv2 | tgv | mumshah | potts");
  deconv->add_option("--alpha", c.alpha, "First-order weight");
  deconv->add_option("--alpha2", c.alpha2, "Second-order weight (tv-tv2)");
  deconv->add_option("--alpha0", c.alpha0, "TGV second-order weight");
  deconv->add_option("--alpha1", c.alpha1, "TGV first-order weight");
  deconv->add_option("--gamma", c.gamma, "Jump penalty (mumshah, potts)");
  deconv->add_option("--p", c.p, "Regularizer exponent");
  deconv->add_option("--q", c.q, "Data exponent (1 or 2)");
  deconv->callback([&] {
    job = [&] {
      const Signal f = load(c);
      if (kernel_width < 1 || kernel_width % 2 == 0) throw ArgumentError("--kernel-width must be odd and positive");
      if (!(kernel_sigma > 0)) throw ArgumentError("--kernel-sigma must be positive");
      const ForwardOperator a = f.is_image ? gaussian_kernel_operator_2d(f.rows, f.cols, kernel_sigma, kernel_width)
                                           : gaussian_kernel_operator(f.size(), kernel_sigma, kernel_width);
      RegularizerSpec reg;
      reg.tv = TVModel{c.alpha, c.q, c.p, false};
      reg.alpha2 = c.alpha2;
      reg.p2 = c.p;
      reg.tgv = TGVWeights{c.alpha1, c.alpha0, c.p};
      if (kind == "none") reg.kind = RegularizerKind::none;
      else if (kind == "tv") reg.kind = RegularizerKind::tv;
      else if (kind == "tv-tv2") reg.kind = RegularizerKind::tv_tv2;
      else if (kind == "tgv") reg.kind = RegularizerKind::stgv;
      else if (kind == "mumshah" || kind == "potts") {
        reg.kind = kind == "potts" ? RegularizerKind::potts : RegularizerKind::mumford_shah;
        reg.ms = ms_model(c, kind == "potts" ? MSMode::potts : MSMode::mumford_shah);
      } else throw ArgumentError("unknown --kind '" + kind + "'");
      const SolveResult r = solve_inverse(a, f, reg, c.q, schedule(c), parse_engine(c.engine, Engine::fbs_traj));
      emit(c, r.x, &r.trace);
    };
  });

  auto* wav = app.add_subcommand("wavelet", "Interpolatory wavelet sparse regularization");
  add_io(wav, c);
  add_schedule(wav, c);
  std::string scheme = "midpoint", mode = "l1";
  int levels = 3;
  double mu = 1.0;
  wav->add_option("--alpha1", c.alpha1, "Detail weight");
  wav->add_option("--alpha2", c.alpha2, "Coarse-level weight");
  wav->add_option("--scheme", scheme, "midpoint | dd3");
  wav->add_option("--levels", levels, "Decomposition levels");
  wav->add_option("--mode", mode, "l1 | l0");
  wav->add_option("--mu", mu, "Besov smoothness");
  wav->add_option("--p", c.p, "Detail exponent");
  wav->add_option("--q", c.q, "Data exponent");
  wav->callback([&] {
    job = [&] {
      const Signal f = load(c);
      WaveletModel m;
      m.alpha = WaveletWeights{c.alpha1, c.alpha2};
      m.mu = mu;
      m.p = c.p;
      m.scheme = SubdivisionScheme::by_name(scheme);
      m.levels = levels;
      if (mode == "l1") m.penalty = WaveletPenalty::l1;
      else if (mode == "l0") m.penalty = WaveletPenalty::l0;
      else throw ArgumentError("unknown --mode '" + mode + "'");
      const SolveResult r = denoise_wavelet(f, nullptr, m, c.q, schedule(c), parse_engine(c.engine));
      emit(c, r.x, &r.trace);
    };
  });

  auto* noise = app.add_subcommand("noise", "Seeded synthetic noise");
  std::string noise_kind = "auto";
  NoiseSpec spec;
  noise->add_option("--input,-i", c.input, "Clean MVS file")->required();
  noise->add_option("--output,-o", c.output, "Noisy MVS file (stdout if omitted)");
  noise->add_option("--manifold", c.manifold, "Expected manifold spec");
  noise->add_option("--preview", c.preview, "PPM preview path");
  noise->add_option("--kind", noise_kind, "auto | vmf | von-mises | gaussian");
  noise->add_option("--kappa", spec.kappa, "Concentration (vmf, von-mises)");
  noise->add_option("--sigma", spec.sigma, "Tangent deviation (gaussian)");
  noise->add_option("--seed", c.seed, "Random seed");
  noise->callback([&] {
    job = [&] {
      const Signal h = load(c);
      if (noise_kind == "auto") spec.kind = NoiseKind::automatic;
      else if (noise_kind == "vmf") spec.kind = NoiseKind::vmf;
      else if (noise_kind == "von-mises") spec.kind = NoiseKind::von_mises;
      else if (noise_kind == "gaussian") spec.kind = NoiseKind::gaussian;
      else throw ArgumentError("unknown --kind '" + noise_kind + "'");
      spec.seed = c.seed;
      emit(c, add_noise(h, spec), nullptr);
    };
  });

  auto* metrics = app.add_subcommand("metrics", "Quality metrics as CSV");
  std::string ground, noisy, denoised;
  metrics->add_option("--ground", ground, "Ground truth MVS")->required();
  metrics->add_option("--noisy", noisy, "Noisy MVS")->required();
  metrics->add_option("--denoised", denoised, "Restored MVS")->required();
  metrics->add_option("--output,-o", c.output, "CSV path (stdout if omitted)");
  metrics->callback([&] {
    job = [&] {
      auto read = [](const std::string& path) {
        ReadResult r = read_mvs(path);
        for (const auto& w : r.warnings) std::cerr << "warning: " << path << ": " << w << "\n";
        return std::move(r.signal);
      };
      const Signal h = read(ground), f = read(noisy), u = read(denoised);
      const double snr = delta_snr(h, f, u);
      std::string out = "metric,value\n";
      out += "delta_snr_db," + (std::isinf(snr) ? std::string(snr > 0 ? "inf" : "-inf") : format_double(snr)) + "\n";
      out += "mean_dist_noisy," + format_double(mean_dist(h, f)) + "\n";
      out += "mean_dist_denoised," + format_double(mean_dist(h, u)) + "\n";
      if (c.output.empty()) std::cout << out;
      else write_text(c.output, out);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    job();
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
