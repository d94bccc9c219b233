#include "niep/guo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace niep {

std::size_t GuoEstimate::search_probes() const {
  return static_cast<std::size_t>(std::count_if(probes.begin(), probes.end(), [](const Probe& p) {
    return p.method == "search" || p.method == "symmetric-search";
  }));
}

namespace {

struct TailSums {
  double max_abs = 0.0;
  double sum = 0.0;
  double abs_sum = 0.0;
};

TailSums tail_sums(std::span<const double> tail) {
  TailSums s;
  for (double v : tail) {
    s.max_abs = std::max(s.max_abs, std::abs(v));
    s.sum += v;
    s.abs_sum += std::abs(v);
  }
  return s;
}

double closed_form_lower(std::span<const double> tail) {
  const TailSums s = tail_sums(tail);
  return std::max({s.max_abs, -s.sum, 0.0});
}

void validate(const Tail& tail, const GuoOptions& opts) {
  if (tail.size() == 0) throw InvalidInput("empty tail");
  if (!(opts.resolution > 0.0) || !std::isfinite(opts.resolution))
    throw InvalidInput("resolution must be positive");
  if (opts.max_probes < 0) throw InvalidInput("max_probes must be non-negative");
}

using Oracle = std::function<Probe(double t, std::optional<RealizationCertificate>& witness,
                                   std::optional<NonRealizabilityProof>& proof)>;

std::optional<NonRealizabilityProof> exact_refutation(const Spectrum& s, std::string& method) {
  if (auto proof = necessary_violation(s)) {
    method = "necessary";
    return proof;
  }
  if (s.size() <= PartitionOptions{}.max_size) {
    Verdict v = partition_prover(s);
    if (v.is_not_realizable()) {
      method = "partition";
      return v.proof();
    }
  }
  return std::nullopt;
}

Probe general_probe(const Tail& tail, double t, const SearchConfig& cfg, std::optional<RealizationCertificate>& witness,
                    std::optional<NonRealizabilityProof>& proof) {
  const Spectrum s = tail.with_perron(t);
  Probe p{t, VerdictTag::Unknown, "", 0.0};
  if (auto nr = exact_refutation(s, p.method)) {
    p.verdict = VerdictTag::NotRealizable;
    proof = std::move(nr);
    return p;
  }
  if (Verdict v = companion_realizer(s); v.is_realizable()) {
    p.verdict = VerdictTag::Realizable;
    p.method = "companion";
    witness = std::move(v.witness());
    return p;
  }
  SearchResult res = find_realization(s, cfg);
  p.method = "search";
  p.objective = res.best_objective;
  p.verdict = res.verdict.tag();
  if (res.verdict.is_realizable()) witness = std::move(res.verdict.witness());
  return p;
}

Probe symmetric_probe(const Tail& tail, double t, const SearchConfig& cfg,
                      std::optional<RealizationCertificate>& witness, std::optional<NonRealizabilityProof>& proof) {
  const Spectrum s = tail.with_perron(t);
  Probe p{t, VerdictTag::Unknown, "", 0.0};
  if (auto nr = exact_refutation(s, p.method)) {
    p.verdict = VerdictTag::NotRealizable;
    proof = std::move(nr);
    return p;
  }
  SearchResult res = find_symmetric_realization(s, cfg);
  p.method = "symmetric-search";
  p.objective = res.best_objective;
  p.verdict = res.verdict.tag();
  if (res.verdict.is_realizable()) witness = std::move(res.verdict.witness());
  return p;
}

// A refutation at t also refutes every smaller Perron entry: realizable
// Perron values form an up-set.
void record_refutation(GuoEstimate& est, double t, const NonRealizabilityProof& proof) {
  if (t > est.certified_lower) {
    est.certified_lower = t;
    est.lower_method = to_string(proof.kind);
  }
}

void bisect(GuoEstimate& est, const GuoOptions& opts, int used, const Oracle& oracle) {
  double lo = est.certified_lower;
  double hi = est.certified_upper;
  while (hi - lo > opts.resolution) {
    if (used >= opts.max_probes) {
      est.budget_truncated = true;
      break;
    }
    const double t = lo + 0.5 * (hi - lo);
    std::optional<RealizationCertificate> witness;
    std::optional<NonRealizabilityProof> proof;
    est.probes.push_back(oracle(t, witness, proof));
    ++used;
    if (witness) {
      hi = t;
      est.certified_upper = t;
      est.upper_witness = std::move(*witness);
    } else {
      lo = t;
      if (proof) record_refutation(est, t, *proof);
    }
  }
  est.bracket_lo = std::max(lo, est.certified_lower);
  est.bracket_hi = est.certified_upper;
}

}  // namespace

CertifiedBounds certified_bounds(const Tail& tail) {
  if (tail.size() == 0) throw InvalidInput("empty tail");
  const TailSums s = tail_sums(tail.values());
  CertifiedBounds b;
  b.lower = std::max({s.max_abs, -s.sum, 0.0});
  b.upper = s.abs_sum;
  const Spectrum top = tail.with_perron(b.upper);
  if (Verdict v = companion_realizer(top); v.is_realizable()) {
    b.witness = std::move(v.witness());
    return b;
  }
  auto deduced = reach(zero_certificate(top.size()), top);
  if (!deduced) throw Error("zero-base deduction unexpectedly failed");
  b.witness = std::move(*deduced);
  return b;
}

GuoEstimate estimate_g(const Tail& tail, const SearchConfig& cfg, const GuoOptions& opts) {
  validate(tail, opts);
  cfg.validate();
  GuoEstimate est;
  est.tail = tail;
  est.resolution = opts.resolution;
  CertifiedBounds b = certified_bounds(tail);
  est.certified_lower = b.lower;
  est.certified_upper = b.upper;
  est.upper_witness = std::move(b.witness);

  if (const GuoEstimate* hint = opts.symmetric_hint) {
    if (!(hint->tail == tail)) throw InvalidInput("symmetric hint is for a different tail");
    if (hint->certified_upper < est.certified_upper && check_certificate(hint->upper_witness)) {
      est.certified_upper = hint->certified_upper;
      est.upper_witness = hint->upper_witness;
    }
  }

  bisect(est, opts, 0, [&](double t, auto& witness, auto& proof) {
    return general_probe(tail, t, cfg, witness, proof);
  });
  return est;
}

GuoEstimate estimate_gs(const Tail& tail, const SearchConfig& cfg, const GuoOptions& opts) {
  validate(tail, opts);
  cfg.validate();
  GuoEstimate est;
  est.tail = tail;
  est.symmetric = true;
  est.resolution = opts.resolution;
  est.certified_lower = closed_form_lower(tail.values());
  if (const GuoEstimate* general = opts.general) {
    if (!(general->tail == tail)) throw InvalidInput("general estimate is for a different tail");
    if (general->certified_lower > est.certified_lower) {
      est.certified_lower = general->certified_lower;
      est.lower_method = "general-estimate";
    }
  }

  auto oracle = [&](double t, std::optional<RealizationCertificate>& witness,
                    std::optional<NonRealizabilityProof>& proof) {
    return symmetric_probe(tail, t, cfg, witness, proof);
  };

  const double abs_sum = tail_sums(tail.values()).abs_sum;
  int used = 0;
  bool found = false;
  if (abs_sum == 0.0) {
    est.certified_upper = 0.0;
    est.upper_witness = zero_certificate(tail.size() + 1);
    est.upper_witness.symmetric = true;
    found = true;
  }
  for (double t = std::max(abs_sum, est.certified_lower); !found && t <= opts.expand_cap * abs_sum;
       t *= opts.expand_factor) {
    if (used >= opts.max_probes) break;
    std::optional<RealizationCertificate> witness;
    std::optional<NonRealizabilityProof> proof;
    est.probes.push_back(oracle(t, witness, proof));
    ++used;
    if (witness) {
      est.certified_upper = t;
      est.upper_witness = std::move(*witness);
      found = true;
    } else if (proof) {
      record_refutation(est, t, *proof);
    }
  }
  if (!found) {
    est.certified_upper = std::numeric_limits<double>::infinity();
    est.bracket_lo = est.certified_lower;
    est.bracket_hi = est.certified_upper;
    est.budget_truncated = true;
    return est;
  }
  bisect(est, opts, used, oracle);
  return est;
}

// ---------------------------------------------------------------------------

namespace {

double modulus(const std::vector<Tail>& tails, const std::vector<GuoEstimate>& est) {
  double m = 0.0;
  for (std::size_t i = 0; i < tails.size(); ++i)
    for (std::size_t j = i + 1; j < tails.size(); ++j) {
      const double d = l1_distance(tails[i], tails[j]);
      if (d > 0.0) m = std::max(m, std::abs(est[i].certified_upper - est[j].certified_upper) / d);
    }
  return m;
}

}  // namespace

LipschitzAudit lipschitz_audit(const std::vector<Tail>& tails, std::vector<GuoEstimate> estimates) {
  if (tails.size() != estimates.size()) throw InvalidInput("lipschitz_audit: tails and estimates differ in count");
  for (std::size_t i = 0; i < tails.size(); ++i) {
    if (!(estimates[i].tail == tails[i])) throw InvalidInput("lipschitz_audit: estimate does not match its tail");
    if (estimates[i].symmetric) throw InvalidInput("lipschitz_audit: symmetric estimates cannot be tightened");
    if (estimates[i].resolution != estimates[0].resolution) throw InvalidInput("lipschitz_audit: resolution mismatch");
    if (tails[i].size() != tails[0].size()) throw InvalidInput("lipschitz_audit: tails differ in length");
  }

  LipschitzAudit audit;
  audit.modulus_before = modulus(tails, estimates);

  // Repeat until no bound moves so that the final inequalities hold in
  // floating point, not only up to rounding.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t j = 0; j < tails.size(); ++j)
      for (std::size_t i = 0; i < tails.size(); ++i) {
        if (i == j) continue;
        const double candidate = estimates[i].certified_upper + l1_distance(tails[i], tails[j]);
        if (!(candidate < estimates[j].certified_upper)) continue;
        auto deduced = reach(estimates[i].upper_witness, tails[j].with_perron(candidate));
        if (!deduced) continue;
        estimates[j].certified_upper = candidate;
        estimates[j].bracket_hi = candidate;
        estimates[j].bracket_lo = std::min(estimates[j].bracket_lo, candidate);
        estimates[j].upper_witness = std::move(*deduced);
        ++audit.tightened;
        changed = true;
      }
  }

  audit.worst_slack = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tails.size(); ++i)
    for (std::size_t j = 0; j < tails.size(); ++j) {
      if (i == j) continue;
      const double bound = estimates[i].certified_upper + l1_distance(tails[i], tails[j]);
      audit.worst_slack = std::max(audit.worst_slack, estimates[j].certified_upper - bound);
    }
  if (tails.size() < 2) audit.worst_slack = 0.0;
  audit.modulus_after = modulus(tails, estimates);
  audit.holds = audit.worst_slack <= 0.0;
  audit.estimates = std::move(estimates);
  return audit;
}

ClosednessAudit closedness_audit(const std::vector<RealizationCertificate>& sequence, const Spectrum& limit,
                                 const ClosednessOptions& opts) {
  if (sequence.empty()) throw InvalidInput("closedness_audit: empty sequence");
  for (const auto& c : sequence) {
    if (c.spectrum.size() != limit.size()) throw InvalidInput("closedness_audit: dimension mismatch");
    if (!check_certificate(c)) throw InvalidInput("closedness_audit: sequence element does not verify");
  }

  ClosednessAudit audit;
  for (const auto& c : sequence) audit.gaps.push_back(l1_distance(c.spectrum, limit));
  if (audit.gaps.back() > opts.threshold || audit.gaps.back() > audit.gaps.front())
    throw InvalidInput("closedness_audit: sequence does not approach the limit");

  const std::vector<double> limit_tail(limit.tail().begin(), limit.tail().end());
  audit.lower_bound = limit.size() > 1 ? closed_form_lower(limit_tail) : 0.0;
  audit.transferred_upper = std::numeric_limits<double>::infinity();
  for (const auto& c : sequence) {
    const std::vector<double> tail(c.spectrum.tail().begin(), c.spectrum.tail().end());
    double gap = 0.0;
    for (std::size_t i = 0; i < tail.size(); ++i) gap += std::abs(tail[i] - limit_tail[i]);
    audit.transferred_upper = std::min(audit.transferred_upper, c.spectrum.perron() + gap);
  }
  audit.inequality_holds = limit.perron() >= audit.lower_bound - kDeductionTol &&
                           audit.transferred_upper >= audit.lower_bound - kDeductionTol;

  auto accept = [&](RealizationCertificate cert, const char* method) {
    if (opts.symmetric && !cert.symmetric) return false;
    if (!check_certificate(cert)) return false;
    audit.limit_witness = std::move(cert);
    audit.method = method;
    audit.limit_certified = true;
    return true;
  };

  for (const auto& c : sequence)
    if (c.spectrum == limit && accept(c, "sequence")) return audit;
  if (!opts.symmetric) {
    if (Verdict v = companion_realizer(limit); v.is_realizable() && accept(std::move(v.witness()), "companion"))
      return audit;
    for (auto it = sequence.rbegin(); it != sequence.rend(); ++it)
      if (auto r = reach(*it, limit); r && accept(std::move(*r), "reach")) return audit;
    if (auto r = reach(zero_certificate(limit.size()), limit); r && accept(std::move(*r), "zero-base")) return audit;
  }

  const SquareMatrix* warm = nullptr;
  for (auto it = sequence.rbegin(); it != sequence.rend() && !warm; ++it)
    if (it->matrix) warm = &*it->matrix;
  SearchResult res = opts.symmetric ? find_symmetric_realization(limit, opts.search)
                                    : find_realization(limit, opts.search, warm);
  if (res.verdict.is_realizable()) accept(std::move(res.verdict.witness()), "search");
  return audit;
}

}  // namespace niep
