// Exact reasoning about realizability: necessary conditions, the Frobenius
// block-partition prover, certificate verification, the companion-matrix
// realizer and the perturbation calculus that derives new certified spectra
// from old ones.

#ifndef NIEP_CONDITIONS_HPP
#define NIEP_CONDITIONS_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "niep/spectrum.hpp"

namespace niep {

inline constexpr double kCertificateTol = 1e-8;
inline constexpr double kClampWindow = 1e-12;
inline constexpr double kDeductionTol = 1e-12;
inline constexpr double kConditionTol = 1e-9;
inline constexpr int kDefaultMomentDepth = 4;

/// A perturbation violated its defining constraint (eps_1 != sum |eps_i|,
/// negative raise, Perron slot below the tail).
class ConstraintViolation : public Error {
 public:
  ConstraintViolation(const std::string& what, double required)
      : Error(what), required_(required) {}
  /// The value the violated quantity needed to take (e.g. the required eps_1).
  double required() const { return required_; }

 private:
  double required_;
};

// ---------------------------------------------------------------------------
// Certificates

enum class DeductionRule { DirectMatrix, Corollary1, PerronRaise, CompanionConstruction, ZeroBase };

const char* to_string(DeductionRule rule);
DeductionRule deduction_rule_from_string(const std::string& name);

struct DeductionStep {
  DeductionRule rule = DeductionRule::DirectMatrix;
  std::vector<double> parameters;  // eps vector, {delta}, or empty for roots
  std::vector<double> base;        // spectrum the step starts from; empty for roots
  std::string base_hash;

  friend bool operator==(const DeductionStep&, const DeductionStep&) = default;
};

/// Witness that `spectrum` is realizable: either an explicit nonnegative
/// matrix, or a deduction chain starting at a matrix-bearing `origin`.
struct RealizationCertificate {
  Spectrum spectrum;
  std::optional<SquareMatrix> matrix;
  bool symmetric = false;
  double residual = 0.0;
  std::vector<DeductionStep> provenance;
  std::shared_ptr<const RealizationCertificate> origin;

  bool is_deduction() const { return !matrix.has_value(); }
};

/// 16-hex-digit FNV-1a digest of the canonical text of `values`.
std::string fingerprint(std::span<const double> values);

struct VerifyOptions {
  double tol = kCertificateTol;
  double clamp_window = kClampWindow;
};

struct VerifyReport {
  bool ok = false;
  /// Largest distance between a target eigenvalue group and the centroid of
  /// the computed eigenvalues matched to it (plain entrywise distance for
  /// simple eigenvalues).
  double eigen_residual = 0.0;
  /// max_i |c_i(A) - a_i(L)| / max(1, rho)^i.
  double coeff_residual = 0.0;
  /// Largest distance of a single computed eigenvalue from its target.
  double eigen_spread = 0.0;
  /// Magnitude of the most negative entry that was clamped to zero.
  double clamped = 0.0;
  std::string reason;

  explicit operator bool() const { return ok; }
};

/// Checks a certificate without modifying it. Matrix certificates need
/// entrywise nonnegativity (after clamping entries above -clamp_window),
/// eigenvalues matching the spectrum and characteristic coefficients matching
/// the elementary coefficients. Deduction certificates replay their chain
/// from the verified origin. Throws InvalidInput on dimension mismatch.
VerifyReport check_certificate(const RealizationCertificate& cert, const VerifyOptions& opts = {});

/// As check_certificate; on success clamps the stored matrix and refreshes
/// `residual`.
bool verify_certificate(RealizationCertificate& cert, double tol = kCertificateTol);

/// The zero matrix certifying the zero spectrum of size n.
RealizationCertificate zero_certificate(std::size_t n);

/// Wraps a search- or construction-produced matrix as a root certificate.
RealizationCertificate matrix_certificate(const Spectrum& spectrum, SquareMatrix matrix,
                                          DeductionRule rule, bool symmetric);

// ---------------------------------------------------------------------------
// Verdicts and proofs

enum class ProofKind { PerronViolation, TraceViolation, PowerSumViolation, JLLViolation, PartitionExhaustion };

const char* to_string(ProofKind kind);
ProofKind proof_kind_from_string(const std::string& name);

struct FailedPart {
  std::vector<double> values;
  std::string reason;
};

struct PartitionTrace {
  std::size_t parts_examined = 0;
  std::size_t remainders_exhausted = 0;
  std::vector<FailedPart> failed_parts;  // first `trace_limit` rejected parts
  bool truncated = false;
};

struct NonRealizabilityProof {
  ProofKind kind = ProofKind::PerronViolation;
  Spectrum spectrum;
  int moment_depth = kDefaultMomentDepth;
  int order = 0;       // k of p_k, or m of the moment inequality; 0 otherwise
  double slack = 0.0;  // negative: the size of the violation
  std::string detail;
  PartitionTrace trace;
};

/// Re-runs the check named by the proof on the stored spectrum and confirms
/// it still fails.
bool recheck_proof(const NonRealizabilityProof& proof, double tol = kConditionTol);

enum class VerdictTag { Realizable, NotRealizable, Unknown };
const char* to_string(VerdictTag tag);

class Verdict {
 public:
  static Verdict realizable(RealizationCertificate cert);
  static Verdict not_realizable(NonRealizabilityProof proof);
  static Verdict unknown();

  VerdictTag tag() const { return tag_; }
  bool is_realizable() const { return tag_ == VerdictTag::Realizable; }
  bool is_not_realizable() const { return tag_ == VerdictTag::NotRealizable; }
  bool is_unknown() const { return tag_ == VerdictTag::Unknown; }

  const RealizationCertificate& witness() const;
  RealizationCertificate& witness();
  const NonRealizabilityProof& proof() const;

 private:
  VerdictTag tag_ = VerdictTag::Unknown;
  std::optional<RealizationCertificate> witness_;
  std::optional<NonRealizabilityProof> proof_;
};

// ---------------------------------------------------------------------------
// Necessary conditions

struct ConditionResult {
  ProofKind kind = ProofKind::PerronViolation;
  int order = 0;
  bool applicable = true;
  bool passed = true;
  double slack = 0.0;
};

/// (a) lambda_1 >= |lambda_i|; (b) p_k >= 0 for k = 1..K;
/// (c) p_1^m <= n^{m-1} p_m for m = 2..K (applicable when p_1 >= 0).
/// A condition fails only when violated by more than tol times its natural
/// scale. Passing everything does not imply realizability.
std::vector<ConditionResult> check_necessary(const Spectrum& spectrum, int moment_depth = kDefaultMomentDepth,
                                             double tol = kConditionTol);

/// The first failed condition of check_necessary as a proof, if any.
std::optional<NonRealizabilityProof> necessary_violation(const Spectrum& spectrum,
                                                         int moment_depth = kDefaultMomentDepth,
                                                         double tol = kConditionTol);

struct PartitionOptions {
  int moment_depth = kDefaultMomentDepth;
  std::size_t max_size = 12;
  double tol = kConditionTol;
  std::size_t trace_limit = 64;
};

/// Sound (never complete) non-realizability prover. The spectrum of a
/// nonnegative matrix is the union of the spectra of the irreducible blocks
/// of its Frobenius normal form; a part can be such a block only if it is {0}
/// or its maximum is a positive simple Perron root, -rho occurs at most once
/// and the necessary conditions hold. Returns NotRealizable when no multiset
/// partition consists of viable parts, Unknown otherwise.
/// Throws BudgetExceeded when the spectrum is larger than max_size.
Verdict partition_prover(const Spectrum& spectrum, const PartitionOptions& opts = {});

/// Companion matrix of prod(x - lambda_i); Realizable iff it is nonnegative
/// and verifies, Unknown otherwise.
Verdict companion_realizer(const Spectrum& spectrum, const VerifyOptions& opts = {});

// ---------------------------------------------------------------------------
// Perturbation calculus

/// (lambda_1 + eps_1, ..., lambda_n + eps_n) with eps_1 = sum_{i>=2} |eps_i|,
/// applied to the base spectrum in its stored order. The result is re-sorted
/// and carries no matrix. Throws ConstraintViolation if eps_1 is off by more
/// than kDeductionTol, InvalidInput if the base does not verify or lengths differ.
RealizationCertificate corollary1_step(const RealizationCertificate& base, std::span<const double> eps);

/// Raises the Perron entry by delta >= 0. When the base carries a matrix with
/// constant row sums lambda_1, the raised matrix A + (delta/n) e e^T is stored
/// (same spectrum apart from lambda_1 + delta); otherwise the result is a
/// deduction. Throws ConstraintViolation on delta < 0 or when the Perron slot
/// is below the largest tail modulus.
RealizationCertificate perron_raise(const RealizationCertificate& base, double delta);

/// target_1 - base_1 >= sum_{i>=2} |target_i - base_i| - kDeductionTol.
bool reachable(const Spectrum& base, const Spectrum& target);

/// One Corollary-1 step followed by one Perron raise, when `reachable`.
std::optional<RealizationCertificate> reach(const RealizationCertificate& base, const Spectrum& target);

/// Applies a single non-root deduction step to `base`, validating it.
Spectrum apply_step(const Spectrum& base, const DeductionStep& step);

}  // namespace niep

#endif  // NIEP_CONDITIONS_HPP
