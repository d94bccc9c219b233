// End-to-end reproduction of the (3,3,-2,-2,-2) counterexample: the spectrum
// is not realizable, (3 + t, 3, -2, -2, -2) is for some t < 1, and a small
// perturbation sigma of the latter is realizable with distinct entries while
// (heuristically) not symmetrically realizable.

#ifndef NIEP_EXAMPLE1_HPP
#define NIEP_EXAMPLE1_HPP

#include <optional>
#include <string>
#include <vector>

#include "niep/guo.hpp"
#include "niep/io.hpp"

namespace niep {

struct Example1Options {
  SearchConfig search;
  double resolution = kDefaultResolution;
  std::optional<int> k;
  bool skip_search = false;
};

struct Example1Step {
  int index = 0;
  std::string title;
  bool ok = false;
  bool skipped = false;
  /// false: the step's outcome is heuristic evidence only.
  bool certified = true;
  std::vector<std::string> lines;
};

struct Example1Report {
  std::vector<Example1Step> steps;
  /// First failed step among 1..5, 0 when all passed.
  int failed_step = 0;

  std::optional<NonRealizabilityProof> base_proof;
  std::optional<RealizationCertificate> general_witness;
  std::optional<RealizationCertificate> symmetric_witness;
  std::optional<GuoEstimate> g;
  std::optional<GuoEstimate> gs;
  CertifiedBounds initial_bounds;
  double t_hat = 0.0;
  int k = 0;
  std::optional<RealizationCertificate> sigma;
  std::optional<RealizationCertificate> sigma_matrix;
  std::vector<double> tail_sigma_signs;
  std::vector<double> tail_printed_signs;
  bool sigma_symmetric_found = false;
  double sigma_symmetric_objective = 0.0;

  Json to_json() const;
  std::string text() const;
};

Example1Report run_example1(const Example1Options& opts);

}  // namespace niep

#endif  // NIEP_EXAMPLE1_HPP
