#include "mrgap/denoiser.hpp"
#include "mrgap/evaluation.hpp"
#include "mrgap/interpolator.hpp"
#include "mrgap/parallel.hpp"
#include "mrgap/spectral_dim.hpp"
#include "mrgap/trace_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace mrgap;

namespace {

PointCloud to_cloud(const RowMatrix& points) { return PointCloud(points); }

py::list cloud_list(const std::vector<PointCloud>& clouds) {
  py::list out;
  for (const auto& c : clouds) out.append(c.matrix());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Manifold reconstruction from noisy samples";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("set_thread_count", &set_thread_count, py::arg("n"));
  m.def("thread_count", &thread_count);

  py::class_<GpHyperParams>(m, "GpHyperParams")
      .def(py::init([](double a, double rho, double sigma) { return GpHyperParams{a, rho, sigma}; }), py::arg("A"),
           py::arg("rho"), py::arg("sigma"))
      .def_readwrite("A", &GpHyperParams::A)
      .def_readwrite("rho", &GpHyperParams::rho)
      .def_readwrite("sigma", &GpHyperParams::sigma)
      .def("__repr__", [](const GpHyperParams& h) {
        return "GpHyperParams(A=" + std::to_string(h.A) + ", rho=" + std::to_string(h.rho) +
               ", sigma=" + std::to_string(h.sigma) + ")";
      });

  m.def("load_csv", [](const std::filesystem::path& p) { return load_csv(p).matrix(); }, py::arg("path"));
  m.def("save_csv", [](const RowMatrix& pts, const std::filesystem::path& p) { save_csv(to_cloud(pts), p); },
        py::arg("points"), py::arg("path"));

  m.def("gen_cassini", [](std::size_t n, std::uint64_t seed) { return gen_cassini(n, seed).matrix(); }, py::arg("n"),
        py::arg("seed"));
  m.def("gen_torus", [](std::size_t n, std::uint64_t seed) { return gen_torus(n, seed).matrix(); }, py::arg("n"),
        py::arg("seed"));
  m.def(
      "gen_ellipsoid",
      [](std::size_t n, std::size_t dim, std::uint64_t seed) {
        const EllipsoidSample s = gen_ellipsoid_embedded(n, dim, seed);
        return py::make_tuple(s.cloud.matrix(), Matrix(s.rotation), s.first_slot);
      },
      py::arg("n"), py::arg("ambient_dim") = 30, py::arg("seed") = 0);
  m.def("gen_circle", [](std::size_t n, std::size_t dim, double r, std::uint64_t seed) {
    return gen_circle(n, dim, r, seed).matrix();
  }, py::arg("n"), py::arg("ambient_dim") = 3, py::arg("radius") = 1.0, py::arg("seed") = 0);
  m.def("gen_plane", [](std::size_t n, std::size_t dim, std::uint64_t seed) { return gen_plane(n, dim, seed).matrix(); },
        py::arg("n"), py::arg("ambient_dim") = 3, py::arg("seed") = 0);
  m.def("add_gaussian_noise", [](const RowMatrix& pts, double sigma, std::uint64_t seed) {
    return add_gaussian_noise(to_cloud(pts), {sigma, seed}).matrix();
  }, py::arg("points"), py::arg("sigma"), py::arg("seed"));

  m.def("local_covariance", [](const RowMatrix& pts, std::size_t k, double eps) {
    return local_covariance(to_cloud(pts), k, eps);
  }, py::arg("points"), py::arg("k"), py::arg("epsilon"));
  m.def(
      "local_frame",
      [](const RowMatrix& pts, std::size_t k, double eps, std::size_t d) {
        const LocalFrame f = local_frame(to_cloud(pts), k, eps, d);
        return py::make_tuple(f.basis, f.eigenvalues);
      },
      py::arg("points"), py::arg("k"), py::arg("epsilon"), py::arg("d"),
      "Returns (basis, eigenvalues), eigenvalues in nonincreasing order.");

  m.def(
      "gp_predict",
      [](const Matrix& w, const Matrix& z, const Matrix& u, const GpHyperParams& h) {
        const PredictiveGaussian p = predictive(w, z, u, h);
        return py::make_tuple(p.mean, p.covariance);
      },
      py::arg("train_w"), py::arg("train_z"), py::arg("test_u"), py::arg("hyper"));
  m.def("log_marginal", [](const Matrix& w, const Matrix& z, const GpHyperParams& h) { return log_marginal(w, z, h); },
        py::arg("train_w"), py::arg("train_z"), py::arg("hyper"));
  m.def("log_marginal_gradient",
        [](const Matrix& w, const Matrix& z, const GpHyperParams& h) { return log_marginal_gradient(w, z, h); },
        py::arg("train_w"), py::arg("train_z"), py::arg("hyper"),
        "Gradient in (log A, log rho, log sigma).");

  py::class_<StoredTrace>(m, "Trace")
      .def_property_readonly("clouds", [](const StoredTrace& t) { return cloud_list(t.trace.clouds); })
      .def_property_readonly("hypers", [](const StoredTrace& t) { return t.trace.hypers; })
      .def_property_readonly("sigma_history", [](const StoredTrace& t) { return t.trace.sigma_history; })
      .def_property_readonly("objectives", [](const StoredTrace& t) { return t.trace.objectives; })
      .def_property_readonly("variances", [](const StoredTrace& t) { return t.trace.variances; })
      .def_property_readonly("rounds", [](const StoredTrace& t) { return t.trace.rounds(); })
      .def_property_readonly("denoised", [](const StoredTrace& t) { return t.trace.denoised().matrix(); })
      .def("save", [](const StoredTrace& t, const std::filesystem::path& p) { save_trace(t, p); }, py::arg("path"));

  m.def(
      "denoise",
      [](const RowMatrix& pts, double epsilon, double delta, std::size_t d, std::size_t max_iter,
         std::optional<double> sigma_tol) {
        DenoiseConfig c;
        c.epsilon = epsilon;
        c.delta = delta;
        c.intrinsic_dim = d;
        c.max_iter = max_iter;
        c.sigma_tol = sigma_tol;
        py::gil_scoped_release release;
        return StoredTrace{c, denoise(to_cloud(pts), c)};
      },
      py::arg("points"), py::arg("epsilon"), py::arg("delta"), py::arg("d"), py::arg("max_iter") = 2,
      py::arg("sigma_tol") = py::none());
  m.def("load_trace", &load_trace, py::arg("path"));
  m.def(
      "interpolate",
      [](const StoredTrace& t, std::size_t k, std::uint64_t seed) {
        InterpolationResult r;
        {
          py::gil_scoped_release release;
          r = interpolate(t.trace, t.config, k, seed);
        }
        return py::make_tuple(r.points.matrix(), r.source_chart);
      },
      py::arg("trace"), py::arg("k"), py::arg("seed") = 0,
      "Returns (points, source_chart).");

  m.def("grmse", [](const RowMatrix& a, const RowMatrix& b) { return grmse(to_cloud(a), to_cloud(b)).value; },
        py::arg("points"), py::arg("reference"));

  m.def(
      "estimate_dimension",
      [](const RowMatrix& pts, double eps_dm, std::vector<std::size_t> embed_dims, std::vector<double> eps_grid,
         double gap_floor) {
        DimensionOptions o;
        o.eps_dm = eps_dm;
        o.embed_dims = std::move(embed_dims);
        o.eps_grid = std::move(eps_grid);
        o.gap_floor = gap_floor;
        const DimensionProfile p = estimate_dimension(to_cloud(pts), o);
        py::list entries;
        for (const auto& e : p.entries)
          entries.append(py::dict(py::arg("embed_dim") = e.embed_dim, py::arg("epsilon") = e.epsilon,
                                  py::arg("lambda_bar") = e.lambda_bar, py::arg("vote") = e.vote));
        return py::make_tuple(p.estimated_dim, entries);
      },
      py::arg("points"), py::arg("eps_dm") = 2.0, py::arg("embed_dims") = std::vector<std::size_t>{3, 4, 5, 6},
      py::arg("eps_grid") = std::vector<double>{}, py::arg("gap_floor") = kDefaultGapFloor,
      "Returns (estimated_dim, per-entry profiles).");
}
