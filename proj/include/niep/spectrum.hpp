// Spectra, tails, matrices and the coefficient machinery shared by every
// other part of the library.
//
// Conventions:
//   * A Spectrum is stored in non-increasing order; entry 0 is the Perron slot.
//   * Characteristic polynomials are monic: x^n + c_1 x^{n-1} + ... + c_n.
//     `elementary_coeffs` returns the same layout for prod (x - lambda_i), so
//     a matrix A has spectrum L exactly when char_coeffs(A) == elementary_coeffs(L).

#ifndef NIEP_SPECTRUM_HPP
#define NIEP_SPECTRUM_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace niep {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: empty spectra, non-finite entries, length mismatches.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// The eigensolver did not converge.
class EigenSolverError : public Error {
 public:
  using Error::Error;
};

/// A configured work budget was exceeded before the computation could start.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Ordered real n-tuple, values[0] >= values[1] >= ... >= values[n-1].
class Spectrum {
 public:
  Spectrum() = default;

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> tail() const {
    return std::span<const double>(values_).subspan(1);
  }
  double perron() const { return values_.front(); }

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  explicit Spectrum(std::vector<double> sorted) : values_(std::move(sorted)) {}
  friend Spectrum make_spectrum(std::vector<double> values);

  std::vector<double> values_;
};

/// Sorts `values` into non-increasing order. Throws InvalidInput on empty
/// input or non-finite entries.
Spectrum make_spectrum(std::vector<double> values);

/// The fixed part (lambda_2, ..., lambda_n) of a spectrum whose Perron entry
/// varies. Unordered; entries must be finite.
class Tail {
 public:
  Tail() = default;
  explicit Tail(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  /// (t, tail...) sorted into a Spectrum.
  Spectrum with_perron(double t) const;

  friend bool operator==(const Tail&, const Tail&) = default;

 private:
  std::vector<double> values_;
};

/// Dense square real matrix with finite entries.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(Eigen::MatrixXd m);
  static SquareMatrix zero(std::size_t n);
  static SquareMatrix identity(std::size_t n);
  static SquareMatrix diagonal(std::span<const double> d);
  /// Row-major construction, entries.size() must equal n*n.
  static SquareMatrix from_row_major(std::size_t n, std::span<const double> entries);

  std::size_t n() const { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& eigen() const { return m_; }
  std::vector<double> row_major() const;

  bool is_nonnegative() const { return m_.size() == 0 || m_.minCoeff() >= 0.0; }
  bool is_symmetric(double tol) const;

  friend bool operator==(const SquareMatrix& a, const SquareMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  Eigen::MatrixXd m_;
};

/// Coefficients c_1..c_n of a monic degree-n polynomial (leading 1 omitted).
using CoeffVector = std::vector<double>;

CoeffVector elementary_coeffs(const Spectrum& spectrum);

/// Faddeev-LeVerrier. Entries of the result follow the monic convention above.
CoeffVector char_coeffs(const SquareMatrix& a);

/// Faddeev-LeVerrier with the adjugate coefficient matrices kept:
/// adj(xI - A) = sum_{k=0}^{n-1} x^{n-1-k} N_k, and d c_k / d A = -N_{k-1}^T.
struct FaddeevLeVerrier {
  CoeffVector coeffs;
  std::vector<Eigen::MatrixXd> adjugate;  // N_0 .. N_{n-1}
};
FaddeevLeVerrier faddeev_leverrier(const Eigen::MatrixXd& a);

/// Eigenvalues with multiplicity, sorted by descending real part then
/// descending imaginary part. Throws EigenSolverError on non-convergence.
std::vector<std::complex<double>> eigenvalues(const SquareMatrix& a);

/// In-place sort used by `eigenvalues`.
void sort_eigenvalues(std::vector<std::complex<double>>& values);

/// Evaluates the monic polynomial with the given coefficients at z.
std::complex<double> evaluate_monic(const CoeffVector& coeffs, std::complex<double> z);

double spectral_radius(const Spectrum& spectrum);

/// p_k = sum_i lambda_i^k for k = 1..count.
std::vector<double> power_sums(const Spectrum& spectrum, int count);

double l1_distance(std::span<const double> a, std::span<const double> b);
double l1_distance(const Spectrum& a, const Spectrum& b);
double l1_distance(const Tail& a, const Tail& b);

/// Shortest decimal text that parses back to the same doubles, comma-joined.
std::string to_string(std::span<const double> values);
std::string to_string(const Spectrum& spectrum);

}  // namespace niep

#endif  // NIEP_SPECTRUM_HPP
