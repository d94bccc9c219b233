#include "niep/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <CLI11.hpp>

#include "niep/example1.hpp"
#include "niep/guo.hpp"
#include "niep/io.hpp"
#include "niep/search.hpp"

namespace niep {

namespace {

std::string num(double v) { return to_string(std::span<const double>(&v, 1)); }

struct Common {
  std::uint64_t seed = SearchConfig{}.rng_seed;
  int restarts = SearchConfig{}.restarts;
  int max_iters = SearchConfig{}.max_iters;
  double tol = kCertificateTol;
  unsigned threads = 0;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "RNG seed for every search");
  sub->add_option("--restarts", c.restarts, "search restarts per solve");
  sub->add_option("--max-iters", c.max_iters, "iterations per restart");
  sub->add_option("--tol", c.tol, "certificate tolerance");
  sub->add_option("--threads", c.threads, "worker threads (0: all cores)");
  sub->add_option("--out", c.out, "output file (directory for example1)");
}

SearchConfig make_config(const Common& c) {
  SearchConfig cfg;
  cfg.rng_seed = c.seed;
  cfg.restarts = c.restarts;
  cfg.max_iters = c.max_iters;
  cfg.certificate_tol = c.tol;
  cfg.threads = c.threads;
  cfg.validate();
  return cfg;
}

RunManifest make_manifest(const std::string& command, const Common& c) {
  RunManifest m;
  m.command = command;
  m.seed = c.seed;
  m.parameters = {{"restarts", std::to_string(c.restarts)},
                  {"max-iters", std::to_string(c.max_iters)},
                  {"tol", num(c.tol)}};
  m.start();
  return m;
}

void emit(Json j, RunManifest& m, const Common& c, std::ostream& out) {
  m.finish();
  j["manifest"] = to_json(m);
  const std::string text = j.dump(2) + "\n";
  if (!c.out.empty()) write_atomic(c.out, text);
  out << text;
}

// ---------------------------------------------------------------------------
// Shared exact-then-numerical classification.

struct Stage {
  std::string name;
  VerdictTag verdict;
  double objective = 0.0;
};

struct Classification {
  Verdict verdict;
  std::string method = "none";
  std::optional<double> objective;
  std::vector<Stage> stages;
};

Classification classify(const Spectrum& s, bool search, bool symmetric, const SearchConfig& cfg, int moments) {
  Classification c;
  if (auto proof = necessary_violation(s, moments)) {
    c.stages.push_back({"necessary", VerdictTag::NotRealizable});
    c.verdict = Verdict::not_realizable(std::move(*proof));
    c.method = "necessary";
    return c;
  }
  c.stages.push_back({"necessary", VerdictTag::Unknown});
  if (!symmetric || s.size() == 1) {
    Verdict v = companion_realizer(s);
    c.stages.push_back({"companion", v.tag()});
    if (v.is_realizable()) {
      if (symmetric) v.witness().symmetric = true;
      c.verdict = std::move(v);
      c.method = "companion";
      return c;
    }
  }
  if (s.size() <= PartitionOptions{}.max_size) {
    PartitionOptions po;
    po.moment_depth = moments;
    Verdict v = partition_prover(s, po);
    c.stages.push_back({"partition", v.tag()});
    if (v.is_not_realizable()) {
      c.verdict = std::move(v);
      c.method = "partition";
      return c;
    }
  }
  if (search) {
    SearchResult r = symmetric ? find_symmetric_realization(s, cfg) : find_realization(s, cfg);
    c.stages.push_back({symmetric ? "symmetric-search" : "search", r.verdict.tag(), r.best_objective});
    c.objective = r.best_objective;
    c.method = symmetric ? "symmetric-search" : "search";
    c.verdict = std::move(r.verdict);
  }
  return c;
}

int exit_for(const Verdict& v) {
  switch (v.tag()) {
    case VerdictTag::Realizable: return kExitRealizable;
    case VerdictTag::NotRealizable: return kExitNotRealizable;
    case VerdictTag::Unknown: return kExitUnknown;
  }
  return kExitInternal;
}

// ---------------------------------------------------------------------------

int cmd_check(const std::string& text, int moments, bool search, bool symmetric, const Common& c,
              std::ostream& out) {
  const Spectrum s = parse_spectrum(text);
  if (moments < 1) throw InvalidConfig("moment depth must be positive");
  const SearchConfig cfg = make_config(c);
  RunManifest m = make_manifest("check", c);
  m.parameters.emplace_back("spectrum", to_string(s));
  m.parameters.emplace_back("moments", std::to_string(moments));
  m.parameters.emplace_back("search", search ? "true" : "false");
  m.parameters.emplace_back("symmetric", symmetric ? "true" : "false");

  const auto started = std::chrono::steady_clock::now();
  Classification cl = classify(s, search, symmetric, cfg, moments);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  Json j;
  j["spectrum"] = s.values();
  j["symmetric"] = symmetric;
  Json conds = Json::array();
  for (const auto& r : check_necessary(s, moments))
    conds.push_back(Json{{"kind", to_string(r.kind)},
                         {"order", r.order},
                         {"applicable", r.applicable},
                         {"passed", r.passed},
                         {"slack", r.slack}});
  j["conditions"] = std::move(conds);
  Json stages = Json::array();
  for (const auto& st : cl.stages) {
    Json sj{{"stage", st.name}, {"verdict", to_string(st.verdict)}};
    if (st.name.find("search") != std::string::npos) sj["objective"] = st.objective;
    stages.push_back(std::move(sj));
  }
  j["stages"] = std::move(stages);
  j["method"] = cl.method;
  const Json verdict = to_json(cl.verdict);
  for (auto it = verdict.begin(); it != verdict.end(); ++it) j[it.key()] = *it;
  j["elapsed_seconds"] = elapsed;
  emit(std::move(j), m, c, out);
  return exit_for(cl.verdict);
}

int cmd_realize(const std::string& text, bool symmetric, const Common& c, std::ostream& out) {
  const Spectrum s = parse_spectrum(text);
  const SearchConfig cfg = make_config(c);
  RunManifest m = make_manifest("realize", c);
  m.parameters.emplace_back("spectrum", to_string(s));
  m.parameters.emplace_back("symmetric", symmetric ? "true" : "false");

  SearchResult r = symmetric ? find_symmetric_realization(s, cfg) : find_realization(s, cfg);
  Json search{{"best_objective", r.best_objective},
              {"restarts_used", r.restarts_used},
              {"iterations", r.iterations},
              {"wall_time", r.wall_time}};
  if (symmetric) search["clamped"] = r.clamped;
  Json j;
  if (r.verdict.is_realizable()) {
    j = to_json(r.verdict.witness());
  } else {
    j = to_json(r.verdict);
    j["spectrum"] = s.values();
  }
  j["search"] = std::move(search);
  emit(std::move(j), m, c, out);
  return exit_for(r.verdict);
}

int cmd_guo(const std::string& text, bool symmetric, double resolution, int max_probes, const Common& c,
            std::ostream& out) {
  const Tail tail(parse_values(text));
  const SearchConfig cfg = make_config(c);
  if (!(resolution > 0.0)) throw InvalidConfig("resolution must be positive");
  if (max_probes < 0) throw InvalidConfig("max-probes must be non-negative");
  RunManifest m = make_manifest("guo", c);
  m.parameters.emplace_back("tail", to_string(tail.values()));
  m.parameters.emplace_back("symmetric", symmetric ? "true" : "false");
  m.parameters.emplace_back("resolution", num(resolution));
  m.parameters.emplace_back("max-probes", std::to_string(max_probes));

  GuoOptions opts;
  opts.resolution = resolution;
  opts.max_probes = max_probes;
  const GuoEstimate e = symmetric ? estimate_gs(tail, cfg, opts) : estimate_g(tail, cfg, opts);
  Json j = to_json(e);
  j["labels"] = Json{{"certified_lower", "certified"},
                     {"certified_upper", "certified"},
                     {"bracket.lo", "heuristic: largest t where search failed, not a proof"}};
  j["search_probes"] = e.search_probes();
  emit(std::move(j), m, c, out);
  return e.budget_truncated ? kExitTruncated : kExitRealizable;
}

int cmd_perturb(const std::string& path, const std::string& eps_text, std::optional<double> raise, const Common& c,
                std::ostream& out) {
  if (eps_text.empty() && !raise) throw InvalidInput("perturb needs an epsilon list, --raise, or both");
  const std::string content = read_file(path);
  Json base_json;
  try {
    base_json = Json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("cannot parse ") + path + ": " + e.what());
  }
  RealizationCertificate base = certificate_from_json(base_json);
  const VerifyReport report = check_certificate(base, VerifyOptions{c.tol, kClampWindow});
  if (!report) throw ConstraintViolation("base certificate does not verify: " + report.reason, 0.0);

  RunManifest m = make_manifest("perturb", c);
  m.inputs.emplace_back(path, digest(content));
  RealizationCertificate result = base;
  if (!eps_text.empty()) {
    const std::vector<double> eps = parse_values(eps_text);
    m.parameters.emplace_back("epsilon", to_string(eps));
    result = corollary1_step(result, eps);
  }
  if (raise) {
    m.parameters.emplace_back("raise", num(*raise));
    result = perron_raise(result, *raise);
  }
  emit(to_json(result), m, c, out);
  return kExitRealizable;
}

// ---------------------------------------------------------------------------

struct Axis {
  double lo = 0.0, hi = 0.0;
  int steps = 1;
  double at(int i) const { return steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1); }
};

Axis parse_axis(const std::string& text, int steps, const char* name) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InvalidInput(std::string("--") + name + " expects lo:hi");
  Axis a;
  a.lo = parse_values(text.substr(0, colon)).at(0);
  a.hi = parse_values(text.substr(colon + 1)).at(0);
  if (a.hi < a.lo) throw InvalidInput(std::string("--") + name + ": hi below lo");
  if (a.lo == a.hi) {
    a.steps = 1;
  } else {
    if (steps < 2) throw InvalidInput("--steps must be at least 2");
    a.steps = steps;
  }
  return a;
}

int cmd_scan(const std::string& templ, const std::string& xr, const std::string& yr, int steps, bool search,
             bool symmetric, int moments, const Common& c, std::ostream& out) {
  std::vector<std::optional<double>> slots;
  int free_count = 0;
  std::stringstream ss(templ);
  for (std::string tok; std::getline(ss, tok, ',');) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), [](unsigned char ch) { return std::isspace(ch); }), tok.end());
    if (tok.empty()) throw InvalidInput("malformed template: empty entry");
    const bool numeric = std::isdigit(static_cast<unsigned char>(tok.back())) || tok.back() == '.';
    if (numeric) {
      slots.emplace_back(parse_values(tok).at(0));
    } else {
      if (tok.find_first_not_of("abcdefghijklmnopqrstuvwxyz_") != std::string::npos)
        throw InvalidInput("malformed template entry '" + tok + "'");
      slots.emplace_back(std::nullopt);
      ++free_count;
    }
  }
  if (free_count < 1 || free_count > 2) throw InvalidInput("template needs one or two free slots");
  if (xr.empty()) throw InvalidInput("--x range is required");
  if (free_count == 2 && yr.empty()) throw InvalidInput("--y range is required for two free slots");
  if (free_count == 1 && !yr.empty()) throw InvalidInput("--y given but the template has one free slot");
  const Axis ax = parse_axis(xr, steps, "x");
  const Axis ay = free_count == 2 ? parse_axis(yr, steps, "y") : Axis{};
  const SearchConfig cfg = make_config(c);

  RunManifest m = make_manifest("scan", c);
  m.parameters.emplace_back("template", templ);
  m.parameters.emplace_back("x", xr);
  if (free_count == 2) m.parameters.emplace_back("y", yr);
  m.parameters.emplace_back("steps", std::to_string(steps));
  m.parameters.emplace_back("search", search ? "true" : "false");
  m.parameters.emplace_back("symmetric", symmetric ? "true" : "false");
  m.parameters.emplace_back("moments", std::to_string(moments));

  std::ostringstream csv;
  csv << manifest_comment(m) << "x,y,verdict,method,objective\n";
  for (int i = 0; i < ax.steps; ++i) {
    for (int k = 0; k < ay.steps; ++k) {
      const double x = ax.at(i), y = ay.at(k);
      std::vector<double> values;
      int seen = 0;
      for (const auto& s : slots) values.push_back(s ? *s : (seen++ == 0 ? x : y));
      const Classification cl = classify(make_spectrum(values), search, symmetric, cfg, moments);
      csv << num(x) << ',' << (free_count == 2 ? num(y) : "") << ',' << to_string(cl.verdict.tag()) << ','
          << cl.method << ',' << (cl.objective ? num(*cl.objective) : cl.method == "none" ? "" : "0") << '\n';
    }
  }
  if (!c.out.empty()) write_atomic(c.out, csv.str());
  out << csv.str();
  return 0;
}

int cmd_lift(const std::vector<std::string>& spectra, const std::string& from, const std::string& to, int steps,
             const std::string& limit_text, double max_step, bool cold, const Common& c, std::ostream& out) {
  std::vector<Spectrum> samples;
  for (const auto& s : spectra) samples.push_back(parse_spectrum(s));
  if (!from.empty() || !to.empty()) {
    if (from.empty() || to.empty()) throw InvalidInput("--from and --to go together");
    if (steps < 2) throw InvalidInput("--steps must be at least 2");
    const auto a = parse_values(from), b = parse_values(to);
    if (a.size() != b.size()) throw InvalidInput("--from and --to differ in length");
    for (int i = 0; i < steps; ++i) {
      std::vector<double> v(a.size());
      const double w = static_cast<double>(i) / (steps - 1);
      for (std::size_t k = 0; k < a.size(); ++k) v[k] = i == steps - 1 ? b[k] : a[k] + w * (b[k] - a[k]);
      samples.push_back(make_spectrum(v));
    }
  }
  if (samples.empty()) throw InvalidInput("lift needs spectra or --from/--to");
  const SearchConfig cfg = make_config(c);
  RunManifest m = make_manifest("lift", c);
  m.parameters.emplace_back("samples", std::to_string(samples.size()));
  if (!from.empty()) {
    m.parameters.emplace_back("from", from);
    m.parameters.emplace_back("to", to);
  }
  if (!limit_text.empty()) m.parameters.emplace_back("limit", limit_text);
  m.parameters.emplace_back("warm-start", cold ? "false" : "true");

  LiftOptions lo;
  lo.max_step = max_step;
  lo.warm_start = !cold;
  const LiftResult r = curve_lift(samples, cfg, lo);
  Json j;
  Json certs = Json::array();
  for (const auto& cert : r.certificates) certs.push_back(to_json(cert));
  j["samples"] = samples.size();
  j["certified"] = r.certificates.size();
  j["failed_index"] = r.failed_index ? Json(*r.failed_index) : Json(nullptr);
  j["max_jump"] = r.max_jump;
  j["total_iterations"] = r.total_iterations;
  j["total_restarts"] = r.total_restarts;
  j["certificates"] = std::move(certs);
  bool ok = !r.failed_index;
  if (!limit_text.empty()) {
    ClosednessOptions co;
    co.search = cfg;
    const ClosednessAudit a = closedness_audit(r.certificates, parse_spectrum(limit_text), co);
    j["closedness"] = Json{{"limit", parse_spectrum(limit_text).values()},
                           {"gaps", a.gaps},
                           {"limit_certified", a.limit_certified},
                           {"method", a.method},
                           {"transferred_upper", a.transferred_upper},
                           {"lower_bound", a.lower_bound},
                           {"inequality_holds", a.inequality_holds}};
    if (a.limit_witness) j["closedness"]["witness"] = to_json(*a.limit_witness);
    ok = ok && a.limit_certified;
  }
  emit(std::move(j), m, c, out);
  return ok ? kExitRealizable : kExitUnknown;
}

int cmd_example1(std::optional<int> k, bool skip_search, double resolution, const Common& c, std::ostream& out) {
  Example1Options opts;
  opts.search = make_config(c);
  opts.k = k;
  opts.skip_search = skip_search;
  if (!(resolution > 0.0)) throw InvalidConfig("resolution must be positive");
  if (k && *k < 1) throw InvalidConfig("--k must be positive");
  opts.resolution = resolution;
  RunManifest m = make_manifest("example1", c);
  m.parameters.emplace_back("resolution", num(resolution));
  m.parameters.emplace_back("skip-search", skip_search ? "true" : "false");
  if (k) m.parameters.emplace_back("k", std::to_string(*k));

  const Example1Report report = run_example1(opts);
  out << report.text();
  if (!c.out.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec) throw IoError("cannot create directory " + c.out);
    if (report.sigma) {
      const std::string text = to_json(*report.sigma).dump(2) + "\n";
      const std::string path = (fs::path(c.out) / "sigma.json").string();
      write_atomic(path, text);
      m.outputs.emplace_back(path, digest(text));
    }
    Json j = report.to_json();
    m.finish();
    j["manifest"] = to_json(m);
    write_atomic((fs::path(c.out) / "report.json").string(), j.dump(2) + "\n");
  }
  return report.failed_step == 0 ? kExitRealizable : kExitExampleStep + report.failed_step;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonnegative inverse eigenvalue toolkit", "niep"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common common;
  std::string spectrum_text, eps_text, path, templ, xr, yr, from, to, limit;
  std::vector<std::string> spectra;
  bool search = false, symmetric = false, skip_search = false, cold = false;
  int moments = kDefaultMomentDepth, max_probes = GuoOptions{}.max_probes, steps = 21;
  double resolution = kDefaultResolution, max_step = 1.0;
  std::optional<double> raise;
  std::optional<int> k;

  auto* check = app.add_subcommand("check", "exact checks, then optional search");
  check->add_option("spectrum", spectrum_text, "comma-separated values")->required();
  check->add_option("--moments", moments, "moment depth of the necessary conditions");
  check->add_flag("--search", search, "run the numerical search when exact checks are inconclusive");
  check->add_flag("--symmetric", symmetric, "ask for a symmetric realization");
  add_common(check, common);

  auto* realize = app.add_subcommand("realize", "search for a realizing matrix");
  realize->add_option("spectrum", spectrum_text)->required();
  realize->add_flag("--symmetric", symmetric);
  add_common(realize, common);

  auto* guo = app.add_subcommand("guo", "estimate g (or g_s) of a tail");
  guo->add_option("tail", spectrum_text)->required();
  guo->add_flag("--symmetric", symmetric);
  guo->add_option("--resolution", resolution);
  guo->add_option("--max-probes", max_probes);
  add_common(guo, common);

  auto* perturb = app.add_subcommand("perturb", "derive a certificate by perturbation");
  perturb->add_option("base", path, "base certificate file")->required();
  perturb->add_option("epsilon", eps_text, "eps_1,...,eps_n with eps_1 = sum |eps_i|");
  perturb->add_option("--raise", raise, "raise the Perron entry by this amount");
  add_common(perturb, common);

  auto* scan = app.add_subcommand("scan", "classify a grid of spectra");
  scan->add_option("template", templ, "values with one or two named free slots, e.g. x,y,-2,-2,-2")->required();
  scan->add_option("--x", xr, "lo:hi for the first free slot");
  scan->add_option("--y", yr, "lo:hi for the second free slot");
  scan->add_option("--steps", steps, "grid points per axis");
  scan->add_option("--moments", moments);
  scan->add_flag("--search", search);
  scan->add_flag("--symmetric", symmetric);
  add_common(scan, common);

  auto* lift = app.add_subcommand("lift", "certify a path of spectra with warm starts");
  lift->add_option("spectra", spectra, "spectra along the path");
  lift->add_option("--from", from);
  lift->add_option("--to", to);
  lift->add_option("--steps", steps);
  lift->add_option("--limit", limit, "audit closedness at this limit");
  lift->add_option("--max-step", max_step, "largest l1 gap between samples");
  lift->add_flag("--cold", cold, "disable warm starts");
  add_common(lift, common);

  auto* ex1 = app.add_subcommand("example1", "reproduce the (3,3,-2,-2,-2) counterexample");
  ex1->add_option("--k", k, "perturbation size 1/k");
  ex1->add_option("--resolution", resolution);
  ex1->add_flag("--skip-search", skip_search, "exact steps and bounds only");
  add_common(ex1, common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*check) return cmd_check(spectrum_text, moments, search, symmetric, common, out);
    if (*realize) return cmd_realize(spectrum_text, symmetric, common, out);
    if (*guo) return cmd_guo(spectrum_text, symmetric, resolution, max_probes, common, out);
    if (*perturb) return cmd_perturb(path, eps_text, raise, common, out);
    if (*scan) return cmd_scan(templ, xr, yr, steps, search, symmetric, moments, common, out);
    if (*lift) return cmd_lift(spectra, from, to, steps, limit, max_step, cold, common, out);
    if (*ex1) return cmd_example1(k, skip_search, resolution, common, out);
  } catch (const ConstraintViolation& e) {
    err << "error: " << e.what() << " (required: " << num(e.required()) << ")\n";
    return kExitConstraint;
  } catch (const InvalidConfig& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace niep
