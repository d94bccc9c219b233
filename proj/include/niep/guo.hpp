// Estimates of the threshold functions
//   g(tail)   = inf { t : (t + d, tail) realizable for every d >= 0 }
//   g_s(tail) = the same with symmetric realizations,
// with certified bounds, a heuristic bracket and audits of their continuity
// and of the closedness of the realizable set.

#ifndef NIEP_GUO_HPP
#define NIEP_GUO_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "niep/conditions.hpp"
#include "niep/search.hpp"
#include "niep/spectrum.hpp"

namespace niep {

inline constexpr double kDefaultResolution = 0.01;

/// One oracle call of the bisection.
struct Probe {
  double t = 0.0;
  VerdictTag verdict = VerdictTag::Unknown;
  /// necessary, companion, partition, search, symmetric-search or reach
  std::string method;
  /// Best search objective, 0 for exact methods.
  double objective = 0.0;
};

struct GuoOptions {
  double resolution = kDefaultResolution;
  /// Oracle calls allowed after the initial bounds; exceeding it truncates.
  int max_probes = 40;
  /// Symmetric case: geometric growth of the trial upper bound and its cap
  /// as a multiple of sum |tail_i|.
  double expand_factor = 1.5;
  double expand_cap = 10.0;
  /// For g_s: a finished estimate of g for the same tail. Its certified lower
  /// bound transfers since symmetric realizations are realizations.
  const struct GuoEstimate* general = nullptr;
  /// For g: a finished estimate of g_s whose witness also bounds g.
  const struct GuoEstimate* symmetric_hint = nullptr;
};

struct GuoEstimate {
  Tail tail;
  bool symmetric = false;
  /// No realization exists with a Perron entry below this value.
  double certified_lower = 0.0;
  /// upper_witness certifies (certified_upper, tail).
  double certified_upper = 0.0;
  /// Heuristic: largest t at which no realization was found (not a proof).
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double resolution = kDefaultResolution;
  RealizationCertificate upper_witness;
  std::vector<Probe> probes;
  /// How certified_lower was obtained: closed-form, a proof kind, or general-estimate.
  std::string lower_method = "closed-form";
  bool budget_truncated = false;

  /// Number of probes that ran a numerical search.
  std::size_t search_probes() const;
};

struct CertifiedBounds {
  double lower = 0.0;
  double upper = 0.0;
  RealizationCertificate witness;
};

/// lower = max(max |tail_i|, -sum tail_i, 0); upper = sum |tail_i| witnessed
/// by the companion matrix when it is nonnegative and by the perturbation
/// deduction from the zero spectrum otherwise. Symmetric bounds need a
/// symmetric witness and are produced by estimate_gs instead.
CertifiedBounds certified_bounds(const Tail& tail);

/// Bisection on the Perron entry with exact checks (necessary conditions,
/// companion matrix, partition prover) ahead of the numerical search.
/// Throws InvalidInput on an empty tail or non-positive resolution.
GuoEstimate estimate_g(const Tail& tail, const SearchConfig& cfg, const GuoOptions& opts = {});

/// Symmetric analogue; the upper bound starts at sum |tail_i| and grows
/// geometrically until a symmetric witness is found.
GuoEstimate estimate_gs(const Tail& tail, const SearchConfig& cfg, const GuoOptions& opts = {});

// ---------------------------------------------------------------------------
// Audits

struct LipschitzAudit {
  /// Estimates after tightening; witnesses follow any lowered upper bound.
  std::vector<GuoEstimate> estimates;
  /// max |upper_i - upper_j| / l1(tail_i, tail_j) over pairs at positive distance.
  double modulus_before = 0.0;
  double modulus_after = 0.0;
  /// Largest upper_j - (upper_i + l1) after tightening; <= 0 when the bound holds.
  double worst_slack = 0.0;
  std::size_t tightened = 0;
  bool holds = false;
};

/// Lowers every upper bound to min_i(upper_i + l1(tail_i, tail_j)) through a
/// certified deduction, then checks the transferred inequality for all pairs.
/// Throws InvalidInput on length mismatch or differing resolutions.
LipschitzAudit lipschitz_audit(const std::vector<Tail>& tails, std::vector<GuoEstimate> estimates);

struct ClosednessOptions {
  /// The last l1 gap to the limit must be at most this value.
  double threshold = 0.1;
  SearchConfig search;
  bool symmetric = false;
};

struct ClosednessAudit {
  std::vector<double> gaps;
  bool limit_certified = false;
  std::string method;
  std::optional<RealizationCertificate> limit_witness;
  /// min_k (perron_k + l1(tail_k, tail)): upper bound on g(limit tail)
  /// transferred from the sequence.
  double transferred_upper = 0.0;
  /// Closed-form certified lower bound of g(limit tail).
  double lower_bound = 0.0;
  /// limit_1 >= lower_bound and transferred_upper >= lower_bound.
  bool inequality_holds = false;
};

/// Every element of `sequence` must verify and carry the limit's dimension.
/// Throws InvalidInput when the sequence does not approach the limit.
ClosednessAudit closedness_audit(const std::vector<RealizationCertificate>& sequence, const Spectrum& limit,
                                 const ClosednessOptions& opts = {});

}  // namespace niep

#endif  // NIEP_GUO_HPP
