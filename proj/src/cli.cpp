#include "mrgap/cli.hpp"

#include "mrgap/denoiser.hpp"
#include "mrgap/evaluation.hpp"
#include "mrgap/interpolator.hpp"
#include "mrgap/parallel.hpp"
#include "mrgap/spectral_dim.hpp"
#include "mrgap/trace_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

namespace mrgap {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  return f;
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  return path.parent_path() / (path.stem().string() + suffix + path.extension().string());
}

struct GenerateArgs {
  std::string shape;
  std::size_t n = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> noise_seed;
  std::size_t dim = 0;
  std::string out;
  std::string noisy_out;
};

struct DenoiseArgs {
  std::string in;
  DenoiseConfig config;
  std::optional<double> tol;
  std::string out;
  std::string trace_out;
  bool cloud_files = false;
};

struct InterpolateArgs {
  std::string trace_in;
  std::size_t k = 20;
  std::uint64_t seed = 0;
  std::string out;
  std::string charts_out;
};

struct EvaluateArgs {
  std::string in;
  std::string ref;
  std::string distances_out;
};

struct EstimateArgs {
  std::string in;
  DimensionOptions options;
  std::string profile_out;
};

void cmd_generate(const GenerateArgs& a, std::ostream& out) {
  if (a.n == 0) throw InputError("--n must be >= 1");
  if (!(a.sigma >= 0.0)) throw InputError("--sigma must be >= 0");
  PointCloud clean;
  if (a.shape == "cassini") {
    clean = gen_cassini(a.n, a.seed);
  } else if (a.shape == "torus") {
    clean = gen_torus(a.n, a.seed);
  } else if (a.shape == "ellipsoid") {
    clean = gen_ellipsoid_embedded(a.n, a.dim ? a.dim : 30, a.seed).cloud;
  } else if (a.shape == "circle") {
    clean = gen_circle(a.n, a.dim ? a.dim : 3, 1.0, a.seed);
  } else if (a.shape == "plane") {
    clean = gen_plane(a.n, a.dim ? a.dim : 3, a.seed);
  } else {
    throw InputError("unknown shape '" + a.shape + "' (cassini, torus, ellipsoid, circle, plane)");
  }
  save_csv(clean, a.out);
  out << a.out << '\n';
  if (a.sigma > 0.0) {
    const fs::path noisy = a.noisy_out.empty() ? sibling(a.out, "_noisy") : fs::path(a.noisy_out);
    save_csv(add_gaussian_noise(clean, {a.sigma, a.noise_seed.value_or(a.seed + 1)}), noisy);
    out << noisy.string() << '\n';
  }
}

void cmd_denoise(DenoiseArgs a, std::ostream& out) {
  if (a.tol) a.config.sigma_tol = a.tol;
  a.config.validate();
  const PointCloud cloud = load_csv(a.in);
  DenoiseTrace trace = denoise(cloud, a.config);
  save_csv(trace.denoised(), a.out);
  out << "rounds " << trace.rounds() << ", sigma " << fmt17(trace.sigma_history.back()) << '\n';
  out << a.out << '\n';
  if (!a.trace_out.empty()) {
    save_trace({a.config, std::move(trace)}, a.trace_out,
               a.cloud_files ? CloudStorage::referenced : CloudStorage::embedded);
    out << a.trace_out << '\n';
  }
}

void cmd_interpolate(const InterpolateArgs& a, std::ostream& out) {
  if (a.k == 0) throw InputError("--k must be >= 1");
  const StoredTrace stored = load_trace(a.trace_in);
  const InterpolationResult r = interpolate(stored.trace, stored.config, a.k, a.seed);
  save_csv(r.points, a.out);
  if (!a.charts_out.empty()) {
    auto f = open_out(a.charts_out);
    for (std::size_t c : r.source_chart) f << c << '\n';
  }
  out << r.points.size() << " points\n" << a.out << '\n';
}

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const PointCloud eval_set = load_csv(a.in);
  const PointCloud reference = load_csv(a.ref);
  const GrmseReport r = grmse(eval_set, reference, !a.distances_out.empty());
  if (!a.distances_out.empty()) {
    auto f = open_out(a.distances_out);
    for (double d : r.per_point_distances) f << fmt17(d) << '\n';
  }
  out << fmt17(r.value) << '\n';
}

void cmd_estimate_dim(const EstimateArgs& a, std::ostream& out) {
  const DimensionProfile p = estimate_dimension(load_csv(a.in), a.options);
  if (!a.profile_out.empty()) {
    auto f = open_out(a.profile_out);
    f << "embed_dim,epsilon,i,lambda_bar\n";
    for (const auto& e : p.entries)
      for (Eigen::Index i = 0; i < e.lambda_bar.size(); ++i)
        f << e.embed_dim << ',' << fmt17(e.epsilon) << ',' << (i + 1) << ',' << fmt17(e.lambda_bar(i)) << '\n';
  }
  out << p.estimated_dim << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Manifold reconstruction from noisy samples"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: MRGAP_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Sample a synthetic manifold");
  g->add_option("--shape", gen.shape, "cassini, torus, ellipsoid, circle or plane")->required();
  g->add_option("--n", gen.n, "Number of points")->required();
  g->add_option("--sigma", gen.sigma, "Gaussian noise level");
  g->add_option("--seed", gen.seed, "Sampling seed");
  g->add_option("--noise-seed", gen.noise_seed, "Noise seed (default seed + 1)");
  g->add_option("--dim", gen.dim, "Ambient dimension for ellipsoid (30), circle and plane (3)");
  g->add_option("--out", gen.out, "Clean CSV")->required();
  g->add_option("--noisy-out", gen.noisy_out, "Noisy CSV (default <out>_noisy.csv)");

  DenoiseArgs den;
  auto* d = app.add_subcommand("denoise", "Iteratively denoise a point cloud");
  d->add_option("--in", den.in, "Input CSV")->required();
  d->add_option("--epsilon", den.config.epsilon, "Local covariance bandwidth");
  d->add_option("--delta", den.config.delta, "Chart radius");
  d->add_option("--d", den.config.intrinsic_dim, "Intrinsic dimension");
  d->add_option("--tol", den.tol, "Stopping tolerance on sigma (default 5% of the first sigma)");
  d->add_option("--max-iter", den.config.max_iter, "Maximum rounds");
  d->add_option("--out", den.out, "Denoised CSV")->required();
  d->add_option("--trace-out", den.trace_out, "Trace JSON");
  d->add_flag("--cloud-files", den.cloud_files, "Store trace clouds as CSV files beside the trace");

  InterpolateArgs itp;
  auto* ip = app.add_subcommand("interpolate", "Interpolate new points from a denoising trace");
  ip->add_option("--trace-in", itp.trace_in, "Trace JSON")->required();
  ip->add_option("--k", itp.k, "Points per chart");
  ip->add_option("--seed", itp.seed, "Sampling seed");
  ip->add_option("--out", itp.out, "Interpolated CSV")->required();
  ip->add_option("--charts-out", itp.charts_out, "Source chart index per row");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Geometric RMSE against a reference cloud");
  e->add_option("--in", ev.in, "Evaluated CSV")->required();
  e->add_option("--ref", ev.ref, "Reference CSV")->required();
  e->add_option("--distances-out", ev.distances_out, "Per-point distances CSV");

  EstimateArgs est;
  auto* s = app.add_subcommand("estimate-dim", "Estimate the intrinsic dimension");
  s->add_option("--in", est.in, "Input CSV")->required();
  s->add_option("--eps-dm", est.options.eps_dm, "Diffusion-map bandwidth");
  s->add_option("--embed-dims", est.options.embed_dims, "Embedding dimensions")->delimiter(',');
  s->add_option("--eps-grid", est.options.eps_grid, "Local bandwidths (default 0.3 + 0.1 j per dimension)")
      ->delimiter(',');
  s->add_flag("!--unscaled", est.options.scale_by_sqrt_n, "Use unit-norm diffusion coordinates");
  s->add_option("--gap-floor", est.options.gap_floor, "Eigenvalues below this fraction of the first form the flat tail");
  s->add_option("--profile-out", est.profile_out, "Mean-eigenvalue profile CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    app.exit(ex, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInput;
  }

  if (threads > 0) set_thread_count(threads);
  try {
    if (*g) cmd_generate(gen, out);
    if (*d) cmd_denoise(den, out);
    if (*ip) cmd_interpolate(itp, out);
    if (*e) cmd_evaluate(ev, out);
    if (*s) cmd_estimate_dim(est, out);
  } catch (const InputError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& ex) {
    err << "numerical failure: " << ex.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& ex) {
    err << "failure: " << ex.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace mrgap
