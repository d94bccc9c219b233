#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "niep/cli.hpp"
#include "niep/guo.hpp"
#include "niep/io.hpp"
#include "niep/search.hpp"

namespace py = pybind11;

namespace {

niep::SearchConfig config(std::uint64_t seed, int restarts, int max_iters) {
  niep::SearchConfig cfg;
  cfg.rng_seed = seed;
  cfg.restarts = restarts;
  cfg.max_iters = max_iters;
  cfg.validate();
  return cfg;
}

std::string search_json(const niep::SearchResult& r) {
  niep::Json j = niep::to_json(r.verdict);
  j["best_objective"] = r.best_objective;
  j["restarts_used"] = r.restarts_used;
  j["iterations"] = r.iterations;
  return j.dump();
}

}  // namespace

PYBIND11_MODULE(_niep, m) {
  m.doc() = "Nonnegative inverse eigenvalue toolkit (native part)";

  // Translators run last-registered first, so the base class goes first.
  auto base = py::register_exception<niep::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<niep::InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<niep::ConstraintViolation>(m, "ConstraintViolation", base.ptr());

  m.def("sorted_spectrum", [](std::vector<double> v) { return niep::make_spectrum(std::move(v)).values(); });
  m.def("elementary_coeffs", [](std::vector<double> v) { return niep::elementary_coeffs(niep::make_spectrum(v)); });
  m.def("char_coeffs", [](const Eigen::MatrixXd& a) { return niep::char_coeffs(niep::SquareMatrix(a)); });
  m.def("eigenvalues", [](const Eigen::MatrixXd& a) { return niep::eigenvalues(niep::SquareMatrix(a)); });
  m.def("power_sums", [](std::vector<double> v, int k) { return niep::power_sums(niep::make_spectrum(v), k); });

  m.def("check_json", [](std::vector<double> v, int moments) {
    const niep::Spectrum s = niep::make_spectrum(std::move(v));
    niep::Json j = niep::Json::array();
    for (const auto& r : niep::check_necessary(s, moments))
      j.push_back({{"kind", niep::to_string(r.kind)}, {"order", r.order}, {"passed", r.passed}, {"slack", r.slack}});
    return j.dump();
  }, py::arg("spectrum"), py::arg("moments") = niep::kDefaultMomentDepth);

  m.def("partition_prover_json", [](std::vector<double> v) {
    return niep::to_json(niep::partition_prover(niep::make_spectrum(std::move(v)))).dump();
  });
  m.def("companion_json", [](std::vector<double> v) {
    return niep::to_json(niep::companion_realizer(niep::make_spectrum(std::move(v)))).dump();
  });

  m.def("realize_json", [](std::vector<double> v, bool symmetric, std::uint64_t seed, int restarts, int max_iters) {
    const niep::Spectrum s = niep::make_spectrum(std::move(v));
    const niep::SearchConfig cfg = config(seed, restarts, max_iters);
    py::gil_scoped_release release;
    return search_json(symmetric ? niep::find_symmetric_realization(s, cfg) : niep::find_realization(s, cfg));
  });

  m.def("verify_certificate_json", [](const std::string& text, double tol) {
    const auto cert = niep::certificate_from_json(niep::Json::parse(text));
    return niep::check_certificate(cert, niep::VerifyOptions{tol, niep::kClampWindow}).ok;
  });

  m.def("perturb_json", [](const std::string& text, std::vector<double> eps) {
    const auto cert = niep::certificate_from_json(niep::Json::parse(text));
    return niep::to_json(niep::corollary1_step(cert, eps)).dump();
  });

  m.def("estimate_json", [](std::vector<double> tail, bool symmetric, double resolution, std::uint64_t seed,
                            int restarts, int max_iters) {
    const niep::SearchConfig cfg = config(seed, restarts, max_iters);
    niep::GuoOptions opts;
    opts.resolution = resolution;
    const niep::Tail t(std::move(tail));
    py::gil_scoped_release release;
    const auto e = symmetric ? niep::estimate_gs(t, cfg, opts) : niep::estimate_g(t, cfg, opts);
    return niep::to_json(e).dump();
  });

  m.def("objective", [](const std::string& kind, std::vector<double> params, std::vector<double> spectrum) {
    const auto k = kind == "coefficient" ? niep::ObjectiveKind::Coefficient : niep::ObjectiveKind::Conjugation;
    const niep::Spectrum s = niep::make_spectrum(std::move(spectrum));
    return std::make_pair(niep::objective_value(k, params, s), niep::objective_gradient(k, params, s));
  });

  m.def("run_cli", [](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = niep::run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });

  m.attr("__version__") = niep::kToolVersion;
}
