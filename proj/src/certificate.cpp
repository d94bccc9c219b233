#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>

#include "niep/conditions.hpp"

namespace niep {

const char* to_string(DeductionRule rule) {
  switch (rule) {
    case DeductionRule::DirectMatrix: return "DirectMatrix";
    case DeductionRule::Corollary1: return "Corollary1";
    case DeductionRule::PerronRaise: return "PerronRaise";
    case DeductionRule::CompanionConstruction: return "CompanionConstruction";
    case DeductionRule::ZeroBase: return "ZeroBase";
  }
  return "?";
}

DeductionRule deduction_rule_from_string(const std::string& name) {
  for (auto r : {DeductionRule::DirectMatrix, DeductionRule::Corollary1, DeductionRule::PerronRaise,
                 DeductionRule::CompanionConstruction, DeductionRule::ZeroBase}) {
    if (name == to_string(r)) return r;
  }
  throw InvalidInput("unknown deduction rule: " + name);
}

std::string fingerprint(std::span<const double> values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : niep::to_string(values)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

bool is_root(DeductionRule rule) {
  return rule == DeductionRule::DirectMatrix || rule == DeductionRule::CompanionConstruction ||
         rule == DeductionRule::ZeroBase;
}

VerifyReport fail(VerifyReport r, std::string reason) {
  r.ok = false;
  r.reason = std::move(reason);
  return r;
}

VerifyReport check_matrix(const RealizationCertificate& cert, const VerifyOptions& opts) {
  VerifyReport report;
  const Spectrum& target = cert.spectrum;
  const std::size_t n = target.size();
  Eigen::MatrixXd a = cert.matrix->eigen();

  const double most_negative = a.size() ? a.minCoeff() : 0.0;
  if (most_negative < -opts.clamp_window) return fail(report, "negative entry " + std::to_string(most_negative));
  if (most_negative < 0.0) {
    report.clamped = -most_negative;
    a = a.cwiseMax(0.0);
  }
  if (cert.symmetric && !SquareMatrix(a).is_symmetric(1e-12)) return fail(report, "matrix is not symmetric");

  std::vector<std::complex<double>> computed;
  try {
    computed = eigenvalues(SquareMatrix(a));
  } catch (const EigenSolverError& e) {
    return fail(report, e.what());
  }

  // Targets that coincide form one group; each group is matched against the
  // centroid of the computed eigenvalues in the same sorted slots. The centroid
  // of an eigenvalue cluster is well conditioned even when the individual
  // members of a defective cluster are not.
  const double scale = std::max(1.0, spectral_radius(target));
  const double group_gap = 1e-12 * scale;
  bool eigen_ok = true;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    while (hi < n && target[hi - 1] - target[hi] <= group_gap) ++hi;
    const std::size_t m = hi - lo;
    std::complex<double> centroid = 0.0;
    double target_mean = 0.0;
    double spread = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      centroid += computed[k];
      target_mean += target[k];
      spread = std::max(spread, std::abs(computed[k] - target[k]));
    }
    centroid /= static_cast<double>(m);
    target_mean /= static_cast<double>(m);
    const double deviation = std::abs(centroid - target_mean);
    report.eigen_residual = std::max(report.eigen_residual, deviation);
    report.eigen_spread = std::max(report.eigen_spread, spread);
    const double spread_bound =
        m == 1 ? opts.tol : 2.0 * scale * std::pow(static_cast<double>(n) * opts.tol, 1.0 / static_cast<double>(m));
    if (deviation > opts.tol || spread > spread_bound) eigen_ok = false;
    lo = hi;
  }

  const CoeffVector have = char_coeffs(SquareMatrix(a));
  const CoeffVector want = elementary_coeffs(target);
  for (std::size_t i = 0; i < n; ++i) {
    const double err = std::abs(have[i] - want[i]) / std::pow(scale, static_cast<double>(i + 1));
    report.coeff_residual = std::max(report.coeff_residual, err);
  }

  if (!eigen_ok) return fail(report, "eigenvalues do not match the spectrum");
  if (report.coeff_residual > opts.tol * static_cast<double>(n))
    return fail(report, "characteristic coefficients do not match");
  report.ok = true;
  return report;
}

}  // namespace

Spectrum apply_step(const Spectrum& base, const DeductionStep& step) {
  if (is_root(step.rule)) throw InvalidInput("apply_step: root steps start a chain");
  if (step.base != base.values()) throw InvalidInput("apply_step: step does not start from this spectrum");
  if (!step.base_hash.empty() && step.base_hash != fingerprint(base.values()))
    throw InvalidInput("apply_step: base hash mismatch");
  const std::size_t n = base.size();
  std::vector<double> next = base.values();

  if (step.rule == DeductionRule::Corollary1) {
    if (step.parameters.size() != n) throw InvalidInput("corollary1: epsilon length mismatch");
    double mass = 0.0;
    for (std::size_t i = 1; i < n; ++i) mass += std::abs(step.parameters[i]);
    if (std::abs(step.parameters[0] - mass) > kDeductionTol) {
      char msg[160];
      std::snprintf(msg, sizeof msg, "corollary1: eps_1 = %.17g but sum_{i>=2} |eps_i| = %.17g",
                    step.parameters[0], mass);
      throw ConstraintViolation(msg, mass);
    }
    for (std::size_t i = 0; i < n; ++i) next[i] += step.parameters[i];
    return make_spectrum(std::move(next));
  }

  // PerronRaise
  if (step.parameters.size() != 1) throw InvalidInput("perron raise: expected a single delta");
  const double delta = step.parameters[0];
  if (!(delta >= 0.0)) throw ConstraintViolation("perron raise: delta must be >= 0", 0.0);
  double tail_max = 0.0;
  for (std::size_t i = 1; i < n; ++i) tail_max = std::max(tail_max, std::abs(base[i]));
  if (base.perron() < tail_max - kDeductionTol * std::max(1.0, tail_max))
    throw ConstraintViolation("perron raise: Perron slot is below the largest tail modulus", tail_max);
  next[0] += delta;
  return make_spectrum(std::move(next));
}

VerifyReport check_certificate(const RealizationCertificate& cert, const VerifyOptions& opts) {
  if (cert.matrix) {
    if (cert.matrix->n() != cert.spectrum.size())
      throw InvalidInput("certificate: matrix dimension does not match spectrum length");
    return check_matrix(cert, opts);
  }

  VerifyReport report;
  if (cert.symmetric) return fail(report, "deduction certificates cannot claim symmetry");
  if (!cert.origin || !cert.origin->matrix) return fail(report, "deduction without a matrix origin");
  const auto& origin = *cert.origin;
  report = check_certificate(origin, opts);
  if (!report) return fail(report, "origin does not verify: " + report.reason);

  const auto& chain = cert.provenance;
  const auto& prefix = origin.provenance;
  if (chain.size() <= prefix.size() || !std::equal(prefix.begin(), prefix.end(), chain.begin()))
    return fail(report, "provenance does not extend the origin's chain");
  Spectrum current = origin.spectrum;
  try {
    for (std::size_t i = prefix.size(); i < chain.size(); ++i) current = apply_step(current, chain[i]);
  } catch (const Error& e) {
    return fail(report, std::string("replay failed: ") + e.what());
  }
  if (current.size() != cert.spectrum.size()) throw InvalidInput("certificate: chain changes the dimension");
  if (current != cert.spectrum) return fail(report, "replayed chain ends at a different spectrum");
  report.ok = true;
  return report;
}

bool verify_certificate(RealizationCertificate& cert, double tol) {
  VerifyOptions opts;
  opts.tol = tol;
  const VerifyReport report = check_certificate(cert, opts);
  if (!report) return false;
  if (cert.matrix && report.clamped > 0.0) cert.matrix = SquareMatrix(cert.matrix->eigen().cwiseMax(0.0));
  cert.residual = report.eigen_residual;
  return true;
}

RealizationCertificate zero_certificate(std::size_t n) {
  if (n == 0) throw InvalidInput("zero_certificate: n must be positive");
  RealizationCertificate cert;
  cert.spectrum = make_spectrum(std::vector<double>(n, 0.0));
  cert.matrix = SquareMatrix::zero(n);
  cert.symmetric = true;
  cert.provenance.push_back({DeductionRule::ZeroBase, {}, {}, fingerprint(cert.matrix->row_major())});
  return cert;
}

RealizationCertificate matrix_certificate(const Spectrum& spectrum, SquareMatrix matrix, DeductionRule rule,
                                          bool symmetric) {
  RealizationCertificate cert;
  cert.spectrum = spectrum;
  cert.symmetric = symmetric;
  cert.provenance.push_back({rule, {}, {}, fingerprint(matrix.row_major())});
  cert.matrix = std::move(matrix);
  return cert;
}

Verdict companion_realizer(const Spectrum& spectrum, const VerifyOptions& opts) {
  CoeffVector a = elementary_coeffs(spectrum);
  const std::size_t n = a.size();
  const double scale = std::max(1.0, spectral_radius(spectrum));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] <= 0.0) continue;
    if (a[i] > 1e-12 * std::pow(scale, static_cast<double>(i + 1))) return Verdict::unknown();
    a[i] = 0.0;
  }
  const auto k = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) c(0, j) = -a[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 1; i < k; ++i) c(i, i - 1) = 1.0;
  // -0.0 entries would read as negative in serialized form
  c = c.cwiseMax(0.0);

  auto cert = matrix_certificate(spectrum, SquareMatrix(c), DeductionRule::CompanionConstruction, n == 1);
  const auto report = check_certificate(cert, opts);
  if (!report) return Verdict::unknown();
  cert.residual = report.eigen_residual;
  return Verdict::realizable(std::move(cert));
}

// ---------------------------------------------------------------------------

namespace {

void require_certified(const RealizationCertificate& base) {
  const auto report = check_certificate(base);
  if (!report) throw InvalidInput("base is not certified: " + report.reason);
}

RealizationCertificate derive(const RealizationCertificate& base, DeductionStep step) {
  RealizationCertificate out;
  out.spectrum = apply_step(base.spectrum, step);
  out.residual = base.residual;
  out.provenance = base.provenance;
  out.provenance.push_back(std::move(step));
  out.origin = base.matrix ? std::make_shared<const RealizationCertificate>(base) : base.origin;
  return out;
}

// An offset e with fl(from + e) == to whenever one exists near to - from.
double exact_offset(double from, double to) {
  double e = to - from;
  for (int guard = 0; guard < 8 && from + e != to; ++guard) e = std::nextafter(e, from + e < to ? 1e300 : -1e300);
  return from + e == to ? e : to - from;
}

}  // namespace

RealizationCertificate corollary1_step(const RealizationCertificate& base, std::span<const double> eps) {
  if (eps.size() != base.spectrum.size()) throw InvalidInput("corollary1: epsilon length mismatch");
  require_certified(base);
  DeductionStep step{DeductionRule::Corollary1, std::vector<double>(eps.begin(), eps.end()),
                     base.spectrum.values(), fingerprint(base.spectrum.values())};
  return derive(base, std::move(step));
}

RealizationCertificate perron_raise(const RealizationCertificate& base, double delta) {
  DeductionStep step{DeductionRule::PerronRaise, {delta}, base.spectrum.values(),
                     fingerprint(base.spectrum.values())};
  // Validate before the (more expensive) base check so constraint errors win.
  const Spectrum raised = apply_step(base.spectrum, step);
  require_certified(base);

  if (base.matrix) {
    const Eigen::MatrixXd& a = base.matrix->eigen();
    const double scale = std::max(1.0, spectral_radius(base.spectrum));
    const Eigen::VectorXd rows = a.rowwise().sum();
    const bool constant_rows = (rows.array() - base.spectrum.perron()).abs().maxCoeff() <= 1e-9 * scale;
    if (constant_rows) {
      // Brauer: A e = lambda_1 e, so A + (delta/n) e e^T only moves lambda_1.
      const double n = static_cast<double>(a.rows());
      RealizationCertificate out;
      out.spectrum = raised;
      out.matrix = SquareMatrix((a.array() + delta / n).matrix());
      out.symmetric = base.symmetric;
      out.provenance = base.provenance;
      out.provenance.push_back(step);
      const auto report = check_certificate(out);
      if (report) {
        out.residual = report.eigen_residual;
        return out;
      }
    }
  }
  return derive(base, std::move(step));
}

bool reachable(const Spectrum& base, const Spectrum& target) {
  if (base.size() != target.size()) throw InvalidInput("reachable: length mismatch");
  double mass = 0.0;
  for (std::size_t i = 1; i < base.size(); ++i) mass += std::abs(target[i] - base[i]);
  return target.perron() - base.perron() >= mass - kDeductionTol;
}

std::optional<RealizationCertificate> reach(const RealizationCertificate& base, const Spectrum& target) {
  if (!reachable(base.spectrum, target)) return std::nullopt;
  const std::size_t n = target.size();
  std::vector<double> eps(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    eps[i] = exact_offset(base.spectrum[i], target[i]);
    eps[0] += std::abs(eps[i]);
  }
  // Stay inside the tolerance window but never overshoot the target Perron value.
  const double gap = target.perron() - base.spectrum.perron();
  if (eps[0] > gap) eps[0] = gap;

  RealizationCertificate out = base;
  if (std::any_of(eps.begin(), eps.end(), [](double e) { return e != 0.0; })) out = corollary1_step(base, eps);

  const double delta = exact_offset(out.spectrum.perron(), target.perron());
  if (delta > 0.0) out = perron_raise(out, delta);
  return out;
}

}  // namespace niep
