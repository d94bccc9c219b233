#include "niep/example1.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace niep {

namespace {

std::string num(double v) { return to_string(std::span<const double>(&v, 1)); }

Example1Step& open_step(Example1Report& r, int index, std::string title, bool certified = true) {
  Example1Step s;
  s.index = index;
  s.title = std::move(title);
  s.certified = certified;
  r.steps.push_back(std::move(s));
  return r.steps.back();
}

void close_step(Example1Report& r, Example1Step& s, bool ok) {
  s.ok = ok;
  if (!ok && r.failed_step == 0 && s.index <= 5) r.failed_step = s.index;
}

}  // namespace

Example1Report run_example1(const Example1Options& opts) {
  Example1Report r;
  const Tail tail({3, -2, -2, -2});

  // 1. (3,3,-2,-2,-2) is not realizable.
  {
    auto& s = open_step(r, 1, "prove (3,3,-2,-2,-2) is not realizable");
    Verdict v = partition_prover(make_spectrum({3, 3, -2, -2, -2}));
    const bool ok = v.is_not_realizable() && recheck_proof(v.proof());
    if (v.is_not_realizable()) {
      r.base_proof = v.proof();
      s.lines.push_back(std::string("proof: ") + to_string(v.proof().kind) + ", " +
                        std::to_string(v.proof().trace.parts_examined) + " parts examined [certified]");
    } else {
      s.lines.push_back(std::string("prover returned ") + to_string(v.tag()));
    }
    close_step(r, s, ok);
  }

  r.initial_bounds = certified_bounds(tail);
  if (opts.skip_search) {
    auto& s = open_step(r, 2, "initial bounds for g(3,-2,-2,-2)");
    s.lines.push_back("certified lower " + num(r.initial_bounds.lower) + ", certified upper " +
                      num(r.initial_bounds.upper) + " [certified]");
    close_step(r, s, true);
    for (int i = 3; i <= 6; ++i) {
      auto& skipped = open_step(r, i, "skipped (--skip-search)");
      skipped.skipped = true;
      skipped.ok = true;
    }
    return r;
  }

  // 2. (4,3,-2,-2,-2) realizable, and symmetrically so.
  {
    auto& s = open_step(r, 2, "certify (4,3,-2,-2,-2) as realizable and symmetrically realizable");
    const Spectrum target = make_spectrum({4, 3, -2, -2, -2});
    SearchResult gen = find_realization(target, opts.search);
    SearchResult sym = find_symmetric_realization(target, opts.search);
    if (gen.verdict.is_realizable()) {
      r.general_witness = gen.verdict.witness();
      s.lines.push_back("nonnegative witness, residual " + num(gen.verdict.witness().residual) + " [certified]");
    } else {
      s.lines.push_back("no nonnegative witness found, best objective " + num(gen.best_objective));
    }
    if (sym.verdict.is_realizable()) {
      r.symmetric_witness = sym.verdict.witness();
      s.lines.push_back("symmetric witness, residual " + num(sym.verdict.witness().residual) +
                        ", clamped " + num(sym.clamped) + " [certified]");
    } else {
      s.lines.push_back("no symmetric witness found, best objective " + num(sym.best_objective));
    }
    close_step(r, s, gen.verdict.is_realizable() && sym.verdict.is_realizable());
  }

  // 3. g(3,-2,-2,-2) < 4.
  GuoOptions gopts;
  gopts.resolution = opts.resolution;
  {
    auto& s = open_step(r, 3, "estimate g(3,-2,-2,-2)");
    r.g = estimate_g(tail, opts.search, gopts);
    const GuoEstimate& g = *r.g;
    r.t_hat = g.certified_upper - 3.0;
    s.lines.push_back("certified lower " + num(g.certified_lower) + " (" + g.lower_method + ") [certified]");
    s.lines.push_back("certified upper " + num(g.certified_upper) + " [certified]");
    s.lines.push_back("bracket lo " + num(g.bracket_lo) + " [heuristic: search failure is not proof]");
    s.lines.push_back("t_hat = " + num(r.t_hat) + ": (3 + t_hat, 3, -2, -2, -2) certified realizable [certified]");
    close_step(r, s, g.certified_upper < 4.0 && r.t_hat < 1.0 && check_certificate(g.upper_witness).ok);
  }

  // 4. g_s(3,-2,-2,-2) near 4.
  {
    auto& s = open_step(r, 4, "estimate g_s(3,-2,-2,-2)");
    gopts.general = &*r.g;
    r.gs = estimate_gs(tail, opts.search, gopts);
    const GuoEstimate& gs = *r.gs;
    s.lines.push_back("certified upper " + num(gs.certified_upper) + " [certified]");
    s.lines.push_back("bracket lo " + num(gs.bracket_lo) + " [heuristic]");
    const bool near_four = gs.bracket_lo <= 4.0 && gs.certified_upper >= 4.0 && gs.certified_upper <= 4.0 + 2 * opts.resolution;
    s.lines.push_back(std::string("consistent with g_s = 4: ") + (near_four ? "yes" : "no") + " [heuristic]");
    const bool ok = std::isfinite(gs.certified_upper) && !gs.budget_truncated && check_certificate(gs.upper_witness).ok;
    close_step(r, s, ok);
  }

  // 5. sigma = base + eps with eps = (7,1,1,2,3)/k.
  {
    auto& s = open_step(r, 5, "build and certify sigma");
    const double one_minus = 1.0 - r.t_hat;
    // Leaves room for the step-6 comparison 3 + t_hat + 7/k < 4 - 7/k.
    r.k = opts.k ? *opts.k : std::max(1, static_cast<int>(std::ceil(21.0 / std::max(one_minus, 1e-3))));
    const double k = r.k;
    r.tail_sigma_signs = {3 + 1 / k, -2 + 1 / k, -2 + 2 / k, -2 + 3 / k};
    r.tail_printed_signs = {3 + 1 / k, -2 + 1 / k, -2 - 2 / k, -2 + 3 / k};
    s.lines.push_back("k = " + std::to_string(r.k));
    s.lines.push_back("tail with sigma's signs: (" + to_string(r.tail_sigma_signs) + "), l1 gap " +
                      num(l1_distance(tail.values(), r.tail_sigma_signs)));
    s.lines.push_back("tail with the alternative sign on the third entry: (" + to_string(r.tail_printed_signs) +
                      "), l1 gap " + num(l1_distance(tail.values(), r.tail_printed_signs)) +
                      "; proceeding with sigma's signs");
    bool ok = r.k >= 1;
    try {
      const std::vector<double> eps = {7 / k, 1 / k, 1 / k, 2 / k, 3 / k};
      r.sigma = corollary1_step(r.g->upper_witness, eps);
      const auto& v = r.sigma->spectrum.values();
      const bool distinct = std::adjacent_find(v.begin(), v.end()) == v.end();
      const bool below_four = r.sigma->spectrum.perron() < 4.0;
      const bool verifies = check_certificate(*r.sigma).ok;
      s.lines.push_back("sigma = (" + to_string(r.sigma->spectrum) + ")");
      s.lines.push_back(std::string("Perron entry below 4: ") + (below_four ? "yes" : "no") + " [certified]");
      s.lines.push_back(std::string("pairwise distinct: ") + (distinct ? "yes" : "no") + " [certified]");
      s.lines.push_back(std::string("deduction certificate verifies: ") + (verifies ? "yes" : "no") + " [certified]");
      ok = ok && distinct && below_four && verifies;

      const SquareMatrix* warm = r.g->upper_witness.matrix ? &*r.g->upper_witness.matrix : nullptr;
      SearchResult m = find_realization(r.sigma->spectrum, opts.search, warm);
      if (m.verdict.is_realizable()) {
        r.sigma_matrix = m.verdict.witness();
        s.lines.push_back("explicit matrix for sigma, residual " + num(m.verdict.witness().residual) + " [certified]");
      } else {
        s.lines.push_back("no explicit matrix found for sigma (the deduction certificate stands)");
      }
    } catch (const Error& e) {
      s.lines.push_back(std::string("failed: ") + e.what());
      ok = false;
    }
    close_step(r, s, ok);
  }

  // 6. Heuristic evidence that sigma is not symmetrically realizable.
  {
    auto& s = open_step(r, 6, "evidence that sigma is not symmetrically realizable", false);
    if (r.sigma) {
      SearchResult sym = find_symmetric_realization(r.sigma->spectrum, opts.search);
      r.sigma_symmetric_found = sym.verdict.is_realizable();
      r.sigma_symmetric_objective = sym.best_objective;
      s.lines.push_back(std::string("symmetric search at sigma: ") + to_string(sym.verdict.tag()) +
                        ", best objective " + num(sym.best_objective) + " [heuristic, not a proof]");
      const double gap = 7.0 / r.k;
      const double transfer = r.gs->bracket_lo - gap;
      s.lines.push_back("if g_s were 1-Lipschitz: g_s(sigma tail) >= " + num(r.gs->bracket_lo) + " - " + num(gap) +
                        " = " + num(transfer) + " vs sigma_1 = " + num(r.sigma->spectrum.perron()) +
                        (transfer > r.sigma->spectrum.perron() ? " (consistent)" : " (inconclusive)") +
                        " [heuristic, not a proof]");
    } else {
      s.skipped = true;
      s.lines.push_back("no sigma available");
    }
    s.ok = true;
  }
  return r;
}

Json Example1Report::to_json() const {
  Json j;
  Json steps_json = Json::array();
  for (const auto& s : steps)
    steps_json.push_back(Json{{"index", s.index},
                              {"title", s.title},
                              {"ok", s.ok},
                              {"skipped", s.skipped},
                              {"certified", s.certified},
                              {"lines", s.lines}});
  j["steps"] = std::move(steps_json);
  j["failed_step"] = failed_step;
  if (base_proof) j["base_proof"] = niep::to_json(*base_proof);
  j["initial_bounds"] = Json{{"lower", initial_bounds.lower}, {"upper", initial_bounds.upper}};
  if (general_witness) j["general_witness"] = niep::to_json(*general_witness);
  if (symmetric_witness) j["symmetric_witness"] = niep::to_json(*symmetric_witness);
  if (g) j["g_estimate"] = niep::to_json(*g);
  if (gs) j["gs_estimate"] = niep::to_json(*gs);
  if (g) {
    j["t_hat"] = t_hat;
    j["k"] = k;
    j["tail_sigma_signs"] = tail_sigma_signs;
    j["tail_alternative_signs"] = tail_printed_signs;
  }
  if (sigma) j["sigma"] = niep::to_json(*sigma);
  if (sigma_matrix) j["sigma_matrix"] = niep::to_json(*sigma_matrix);
  if (sigma) {
    j["sigma_symmetric_search"] =
        Json{{"found", sigma_symmetric_found}, {"best_objective", sigma_symmetric_objective}, {"certified", false}};
  }
  return j;
}

std::string Example1Report::text() const {
  std::ostringstream os;
  for (const auto& s : steps) {
    os << "[" << s.index << "] " << s.title << ": " << (s.skipped ? "skipped" : s.ok ? "ok" : "FAILED")
       << (s.certified ? "" : " (heuristic)") << '\n';
    for (const auto& l : s.lines) os << "    " << l << '\n';
  }
  os << (failed_step == 0 ? "all required steps succeeded" : "step " + std::to_string(failed_step) + " failed")
     << '\n';
  return os.str();
}

}  // namespace niep
