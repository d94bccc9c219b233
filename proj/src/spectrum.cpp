#include "niep/spectrum.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

namespace niep {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput(std::string(what) + ": non-finite entry");
  }
}

}  // namespace

Spectrum make_spectrum(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("spectrum: empty input");
  require_finite(values, "spectrum");
  std::sort(values.begin(), values.end(), std::greater<>());
  return Spectrum(std::move(values));
}

Tail::Tail(std::vector<double> values) : values_(std::move(values)) {
  require_finite(values_, "tail");
}

Spectrum Tail::with_perron(double t) const {
  std::vector<double> v;
  v.reserve(values_.size() + 1);
  v.push_back(t);
  v.insert(v.end(), values_.begin(), values_.end());
  return make_spectrum(std::move(v));
}

SquareMatrix::SquareMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw InvalidInput("matrix: not square");
  if (!m_.allFinite()) throw InvalidInput("matrix: non-finite entry");
}

SquareMatrix SquareMatrix::zero(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return SquareMatrix(Eigen::MatrixXd::Zero(k, k));
}

SquareMatrix SquareMatrix::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return SquareMatrix(Eigen::MatrixXd::Identity(k, k));
}

SquareMatrix SquareMatrix::diagonal(std::span<const double> d) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.size()),
                                            static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
  return SquareMatrix(std::move(m));
}

SquareMatrix SquareMatrix::from_row_major(std::size_t n, std::span<const double> entries) {
  if (entries.size() != n * n) throw InvalidInput("matrix: expected n*n row-major entries");
  const auto k = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) m(i, j) = entries[static_cast<std::size_t>(i * k + j)];
  return SquareMatrix(std::move(m));
}

std::vector<double> SquareMatrix::row_major() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m_.size()));
  for (Eigen::Index i = 0; i < m_.rows(); ++i)
    for (Eigen::Index j = 0; j < m_.cols(); ++j) out.push_back(m_(i, j));
  return out;
}

bool SquareMatrix::is_symmetric(double tol) const {
  if (m_.size() == 0) return true;
  return (m_ - m_.transpose()).cwiseAbs().maxCoeff() <= tol;
}

CoeffVector elementary_coeffs(const Spectrum& spectrum) {
  // Multiply out prod (x - lambda_i); poly[k] is the coefficient of x^{m-k}.
  std::vector<double> poly{1.0};
  for (double lambda : spectrum.values()) {
    poly.push_back(0.0);
    for (std::size_t k = poly.size() - 1; k > 0; --k) poly[k] -= lambda * poly[k - 1];
  }
  return CoeffVector(poly.begin() + 1, poly.end());
}

FaddeevLeVerrier faddeev_leverrier(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  FaddeevLeVerrier out;
  out.coeffs.resize(static_cast<std::size_t>(n));
  out.adjugate.reserve(static_cast<std::size_t>(n));
  Eigen::MatrixXd adj = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    out.adjugate.push_back(adj);
    const Eigen::MatrixXd an = a * adj;
    const double ck = -an.trace() / static_cast<double>(k);
    out.coeffs[static_cast<std::size_t>(k - 1)] = ck;
    if (k < n) {
      adj = an;
      adj.diagonal().array() += ck;
    }
  }
  return out;
}

CoeffVector char_coeffs(const SquareMatrix& a) { return faddeev_leverrier(a.eigen()).coeffs; }

void sort_eigenvalues(std::vector<std::complex<double>>& values) {
  std::sort(values.begin(), values.end(), [](const auto& x, const auto& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
}

std::vector<std::complex<double>> eigenvalues(const SquareMatrix& a) {
  if (a.n() == 0) return {};
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a.eigen(), /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw EigenSolverError("eigenvalues: QR iteration did not converge");
  const auto& ev = solver.eigenvalues();
  std::vector<std::complex<double>> out(ev.data(), ev.data() + ev.size());
  sort_eigenvalues(out);
  return out;
}

std::complex<double> evaluate_monic(const CoeffVector& coeffs, std::complex<double> z) {
  std::complex<double> acc = 1.0;
  for (double c : coeffs) acc = acc * z + c;
  return acc;
}

double spectral_radius(const Spectrum& spectrum) {
  double r = 0.0;
  for (double v : spectrum.values()) r = std::max(r, std::abs(v));
  return r;
}

std::vector<double> power_sums(const Spectrum& spectrum, int count) {
  if (count < 1) throw InvalidInput("power_sums: count must be >= 1");
  std::vector<double> sums(static_cast<std::size_t>(count), 0.0);
  for (double v : spectrum.values()) {
    double p = 1.0;
    for (auto& s : sums) {
      p *= v;
      s += p;
    }
  }
  return sums;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("l1_distance: length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

double l1_distance(const Spectrum& a, const Spectrum& b) { return l1_distance(a.values(), b.values()); }
double l1_distance(const Tail& a, const Tail& b) { return l1_distance(a.values(), b.values()); }

std::string to_string(std::span<const double> values) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    auto res = std::to_chars(buf, buf + sizeof buf, values[i]);
    out.append(buf, res.ptr);
  }
  return out;
}

std::string to_string(const Spectrum& spectrum) { return to_string(spectrum.values()); }

}  // namespace niep
