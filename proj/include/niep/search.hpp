// Numerical realization search.
//
// General case: minimize F(B) = sum_i w_i (c_i(A) - a_i(L))^2 with w_i = rho^{-2i}
// over A = B (.) B, optionally row-normalized so that A e = rho e holds for
// every iterate. Symmetric case: minimize G(U) = sum_ij min((U^T D U)_ij, 0)^2
// over orthogonal U given as an ordered product of Givens rotations.
//
// Restarts run in fixed-size batches; the first batch containing a verified
// success decides the result (smallest objective, then lowest restart index),
// so results do not depend on the number of worker threads.

#ifndef NIEP_SEARCH_HPP
#define NIEP_SEARCH_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "niep/conditions.hpp"
#include "niep/spectrum.hpp"

namespace niep {

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

struct IterateSnapshot {
  int restart = 0;
  int iteration = 0;
  double objective = 0.0;
  const Eigen::MatrixXd* matrix = nullptr;
};

struct SearchConfig {
  int restarts = 64;
  int max_iters = 2000;
  double objective_tol = 1e-16;
  double initial_damping = 1e-3;
  int polish_iters = 60;
  std::uint64_t rng_seed = 20240101;
  bool use_row_sum_slice = true;
  double box_bound = 1.0;
  /// Largest negative entry the symmetric search may clamp to zero.
  double clamp_limit = 1e-10;
  double certificate_tol = kCertificateTol;
  unsigned threads = 0;  // 0: hardware concurrency
  int batch = 8;
  /// Per-iteration hook. Invoked concurrently when threads > 1.
  std::function<void(const IterateSnapshot&)> observer;

  /// Throws InvalidConfig on non-positive budgets or tolerances.
  void validate() const;
};

struct SearchResult {
  Verdict verdict;
  double best_objective = std::numeric_limits<double>::infinity();
  int restarts_used = 0;
  double wall_time = 0.0;
  long iterations = 0;
  /// Smallest negative entry clamped away (symmetric search only).
  double clamped = 0.0;
};

/// Necessary conditions first (a violation gives NotRealizable immediately),
/// then multi-start search. `warm_start`, when given, seeds restart 0.
SearchResult find_realization(const Spectrum& spectrum, const SearchConfig& cfg,
                              const SquareMatrix* warm_start = nullptr);

/// Symmetric analogue; restart 0 starts from U = I.
SearchResult find_symmetric_realization(const Spectrum& spectrum, const SearchConfig& cfg);

struct LiftOptions {
  /// Largest allowed l1 gap between consecutive samples.
  double max_step = 1.0;
  bool warm_start = true;
};

struct LiftResult {
  std::vector<RealizationCertificate> certificates;
  /// Index of the first sample whose solve failed, if any.
  std::optional<std::size_t> failed_index;
  /// Largest max-norm difference between consecutive certificate matrices.
  double max_jump = 0.0;
  long total_iterations = 0;
  int total_restarts = 0;
};

/// Certifies samples[0] from scratch and warm-starts each following solve from
/// the previous matrix. A previous matrix that already certifies the next
/// sample is reused unchanged.
LiftResult curve_lift(const std::vector<Spectrum>& samples, const SearchConfig& cfg, const LiftOptions& opts = {});

// ---------------------------------------------------------------------------
// Objectives, exposed for diagnostics and gradient checks.

enum class ObjectiveKind { Coefficient, Conjugation };

/// Matrix A produced by coefficient-search parameters (n*n values, row-major).
Eigen::MatrixXd coefficient_matrix(std::span<const double> params, const Spectrum& spectrum, bool row_sum_slice = true,
                                   double box_bound = 1.0);

/// Ordered product of Givens rotations G(0,1) G(0,2) ... G(n-2,n-1).
Eigen::MatrixXd orthogonal_from_angles(std::span<const double> angles, std::size_t n);

double objective_value(ObjectiveKind kind, std::span<const double> params, const Spectrum& spectrum,
                       bool row_sum_slice = true);

/// Analytic gradient of objective_value.
std::vector<double> objective_gradient(ObjectiveKind kind, std::span<const double> params, const Spectrum& spectrum,
                                       bool row_sum_slice = true);

}  // namespace niep

#endif  // NIEP_SEARCH_HPP
