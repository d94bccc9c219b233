#include "niep/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace niep {

const char* to_string(ProofKind kind) {
  switch (kind) {
    case ProofKind::PerronViolation: return "PerronViolation";
    case ProofKind::TraceViolation: return "TraceViolation";
    case ProofKind::PowerSumViolation: return "PowerSumViolation";
    case ProofKind::JLLViolation: return "JLLViolation";
    case ProofKind::PartitionExhaustion: return "PartitionExhaustion";
  }
  return "?";
}

ProofKind proof_kind_from_string(const std::string& name) {
  for (auto k : {ProofKind::PerronViolation, ProofKind::TraceViolation, ProofKind::PowerSumViolation,
                 ProofKind::JLLViolation, ProofKind::PartitionExhaustion}) {
    if (name == to_string(k)) return k;
  }
  throw InvalidInput("unknown proof kind: " + name);
}

const char* to_string(VerdictTag tag) {
  switch (tag) {
    case VerdictTag::Realizable: return "Realizable";
    case VerdictTag::NotRealizable: return "NotRealizable";
    case VerdictTag::Unknown: return "Unknown";
  }
  return "?";
}

Verdict Verdict::realizable(RealizationCertificate cert) {
  Verdict v;
  v.tag_ = VerdictTag::Realizable;
  v.witness_ = std::move(cert);
  return v;
}

Verdict Verdict::not_realizable(NonRealizabilityProof proof) {
  Verdict v;
  v.tag_ = VerdictTag::NotRealizable;
  v.proof_ = std::move(proof);
  return v;
}

Verdict Verdict::unknown() { return Verdict{}; }

const RealizationCertificate& Verdict::witness() const {
  if (!witness_) throw std::logic_error("verdict has no witness");
  return *witness_;
}

RealizationCertificate& Verdict::witness() {
  if (!witness_) throw std::logic_error("verdict has no witness");
  return *witness_;
}

const NonRealizabilityProof& Verdict::proof() const {
  if (!proof_) throw std::logic_error("verdict has no proof");
  return *proof_;
}

// ---------------------------------------------------------------------------

std::vector<ConditionResult> check_necessary(const Spectrum& spectrum, int moment_depth, double tol) {
  if (moment_depth < 1) throw InvalidInput("check_necessary: moment depth must be >= 1");
  const auto n = static_cast<double>(spectrum.size());
  const double scale = std::max(1.0, spectral_radius(spectrum));
  std::vector<ConditionResult> out;

  ConditionResult perron;
  perron.kind = ProofKind::PerronViolation;
  perron.slack = spectrum.perron() - spectral_radius(spectrum);
  perron.passed = perron.slack >= -tol * scale;
  out.push_back(perron);

  const auto p = power_sums(spectrum, moment_depth);
  for (int k = 1; k <= moment_depth; ++k) {
    ConditionResult r;
    r.kind = k == 1 ? ProofKind::TraceViolation : ProofKind::PowerSumViolation;
    r.order = k;
    r.slack = p[static_cast<std::size_t>(k - 1)];
    r.passed = r.slack >= -tol * n * std::pow(scale, k);
    out.push_back(r);
  }

  for (int m = 2; m <= moment_depth; ++m) {
    ConditionResult r;
    r.kind = ProofKind::JLLViolation;
    r.order = m;
    r.applicable = p[0] >= 0.0;
    if (r.applicable) {
      r.slack = std::pow(n, m - 1) * p[static_cast<std::size_t>(m - 1)] - std::pow(p[0], m);
      r.passed = r.slack >= -tol * std::pow(n * scale, m);
    }
    out.push_back(r);
  }
  return out;
}

std::optional<NonRealizabilityProof> necessary_violation(const Spectrum& spectrum, int moment_depth, double tol) {
  for (const auto& r : check_necessary(spectrum, moment_depth, tol)) {
    if (r.passed) continue;
    NonRealizabilityProof proof;
    proof.kind = r.kind;
    proof.spectrum = spectrum;
    proof.moment_depth = moment_depth;
    proof.order = r.order;
    proof.slack = r.slack;
    switch (r.kind) {
      case ProofKind::PerronViolation:
        proof.detail = "lambda_1 < max_i |lambda_i|";
        break;
      case ProofKind::TraceViolation:
        proof.detail = "p_1 = trace < 0";
        break;
      case ProofKind::PowerSumViolation:
        proof.detail = "p_" + std::to_string(r.order) + " < 0";
        break;
      case ProofKind::JLLViolation:
        proof.detail = "p_1^" + std::to_string(r.order) + " > n^" + std::to_string(r.order - 1) + " p_" +
                       std::to_string(r.order);
        break;
      case ProofKind::PartitionExhaustion:
        break;
    }
    return proof;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Partition prover

namespace {

/// Reason a multiset (sorted non-increasing) cannot be the spectrum of an
/// irreducible nonnegative matrix, or nullopt when it passes every test.
std::optional<std::string> part_rejection(const std::vector<double>& part, int depth, double tol) {
  if (part.size() == 1 && part[0] == 0.0) return std::nullopt;
  const double top = part.front();
  if (!(top > 0.0)) return "nonpositive Perron root";
  const auto copies = [&](double v) { return std::count(part.begin(), part.end(), v); };
  if (copies(top) != 1) return "Perron root not simple";
  if (copies(-top) > 1) return "-rho repeated";
  const Spectrum s = make_spectrum(part);
  for (const auto& r : check_necessary(s, depth, tol)) {
    if (r.passed) continue;
    switch (r.kind) {
      case ProofKind::PerronViolation: return "Perron dominance";
      case ProofKind::TraceViolation: return "trace";
      case ProofKind::PowerSumViolation: return "p_" + std::to_string(r.order) + " < 0";
      case ProofKind::JLLViolation: return "moment inequality m=" + std::to_string(r.order);
      case ProofKind::PartitionExhaustion: break;
    }
  }
  return std::nullopt;
}

class PartitionSearch {
 public:
  PartitionSearch(const Spectrum& s, const PartitionOptions& opts) : opts_(opts) {
    for (double v : s.values()) {
      if (!values_.empty() && values_.back() == v) {
        ++counts_.back();
      } else {
        values_.push_back(v);
        counts_.push_back(1);
      }
    }
  }

  bool viable_partition_exists() { return solve(counts_); }
  PartitionTrace& trace() { return trace_; }

 private:
  using Counts = std::vector<int>;

  bool solve(const Counts& rem) {
    const auto first = std::find_if(rem.begin(), rem.end(), [](int c) { return c > 0; });
    if (first == rem.end()) return true;
    if (exhausted_.count(rem)) return false;

    const auto lead = static_cast<std::size_t>(first - rem.begin());
    const double top = values_[lead];
    Counts part(rem.size(), 0);
    part[lead] = 1;
    bool found = false;
    if (top == 0.0) {
      found = try_part(rem, part);
    } else if (top > 0.0) {
      found = extend(rem, part, lead + 1);
    }
    if (!found) {
      exhausted_.insert(rem);
      ++trace_.remainders_exhausted;
    }
    return found;
  }

  // Chooses how many copies of values_[j..] join the part led by values_[lead].
  bool extend(const Counts& rem, Counts& part, std::size_t j) {
    if (j == values_.size()) return try_part(rem, part);
    const double top = values_[std::find_if(part.begin(), part.end(), [](int c) { return c > 0; }) - part.begin()];
    int max_take = rem[j];
    const double v = values_[j];
    if (std::abs(v) > top + opts_.tol * std::max(1.0, top)) max_take = 0;  // would break Perron dominance
    if (v == -top) max_take = std::min(max_take, 1);
    for (int take = max_take; take >= 0; --take) {
      part[j] = take;
      if (extend(rem, part, j + 1)) {
        part[j] = 0;
        return true;
      }
    }
    part[j] = 0;
    return false;
  }

  bool try_part(const Counts& rem, const Counts& part) {
    ++trace_.parts_examined;
    auto it = viable_.find(part);
    if (it == viable_.end()) {
      std::vector<double> members;
      for (std::size_t j = 0; j < part.size(); ++j)
        for (int c = 0; c < part[j]; ++c) members.push_back(values_[j]);
      const auto reason = part_rejection(members, opts_.moment_depth, opts_.tol);
      it = viable_.emplace(part, !reason.has_value()).first;
      if (reason) {
        if (trace_.failed_parts.size() < opts_.trace_limit) {
          trace_.failed_parts.push_back({members, *reason});
        } else {
          trace_.truncated = true;
        }
      }
    }
    if (!it->second) return false;
    Counts next = rem;
    for (std::size_t j = 0; j < rem.size(); ++j) next[j] -= part[j];
    return solve(next);
  }

  PartitionOptions opts_;
  std::vector<double> values_;
  Counts counts_;
  std::map<Counts, bool> viable_;
  std::set<Counts> exhausted_;
  PartitionTrace trace_;
};

}  // namespace

Verdict partition_prover(const Spectrum& spectrum, const PartitionOptions& opts) {
  if (spectrum.size() > opts.max_size) {
    throw BudgetExceeded("partition_prover: spectrum of size " + std::to_string(spectrum.size()) +
                         " exceeds the enumeration budget of " + std::to_string(opts.max_size));
  }
  PartitionSearch search(spectrum, opts);
  if (search.viable_partition_exists()) return Verdict::unknown();

  NonRealizabilityProof proof;
  proof.kind = ProofKind::PartitionExhaustion;
  proof.spectrum = spectrum;
  proof.moment_depth = opts.moment_depth;
  proof.trace = std::move(search.trace());
  proof.detail =
      "no multiset partition into irreducible-block candidates; parts holding a positive Perron root more than "
      "once are excluded by simplicity of the Perron root";
  return Verdict::not_realizable(std::move(proof));
}

bool recheck_proof(const NonRealizabilityProof& proof, double tol) {
  if (proof.spectrum.size() == 0) return false;
  if (proof.kind == ProofKind::PartitionExhaustion) {
    PartitionOptions opts;
    opts.moment_depth = proof.moment_depth;
    opts.tol = tol;
    opts.max_size = std::max(opts.max_size, proof.spectrum.size());
    if (!partition_prover(proof.spectrum, opts).is_not_realizable()) return false;
    return std::all_of(proof.trace.failed_parts.begin(), proof.trace.failed_parts.end(), [&](const FailedPart& p) {
      return part_rejection(p.values, proof.moment_depth, tol).has_value();
    });
  }
  for (const auto& r : check_necessary(proof.spectrum, proof.moment_depth, tol)) {
    if (r.kind == proof.kind && r.order == proof.order) return !r.passed;
  }
  return false;
}

}  // namespace niep
