#include "niep/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace niep {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view s, std::string_view whole) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidInput("cannot parse '" + std::string(s) + "' in '" + std::string(whole) + "'");
  return v;
}

}  // namespace

std::vector<double> parse_values(std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) throw InvalidInput("empty value list");
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string_view item = text.substr(start, comma - start);
    const std::size_t slash = item.find('/');
    double v;
    if (slash == std::string_view::npos) {
      v = parse_real(item, text);
    } else {
      const double den = parse_real(item.substr(slash + 1), text);
      if (den == 0.0) throw InvalidInput("zero denominator in '" + std::string(text) + "'");
      v = parse_real(item.substr(0, slash), text) / den;
    }
    if (!std::isfinite(v)) throw InvalidInput("non-finite value in '" + std::string(text) + "'");
    out.push_back(v);
    start = comma + 1;
  }
  return out;
}

Spectrum parse_spectrum(std::string_view text) { return make_spectrum(parse_values(text)); }

std::string digest(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------

std::string timestamp_now() {
  std::time_t t;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) {
    t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::start() { started = timestamp_now(); }
void RunManifest::finish() { finished = timestamp_now(); }

namespace {

Json pairs_to_json(const std::vector<std::pair<std::string, std::string>>& pairs) {
  Json j = Json::object();
  for (const auto& [k, v] : pairs) j[k] = v;
  return j;
}

std::vector<std::pair<std::string, std::string>> pairs_from_json(const Json& j) {
  std::vector<std::pair<std::string, std::string>> out;
  for (auto it = j.begin(); it != j.end(); ++it) out.emplace_back(it.key(), it.value().get<std::string>());
  return out;
}

}  // namespace

Json to_json(const RunManifest& m) {
  Json j;
  j["command"] = m.command;
  j["parameters"] = pairs_to_json(m.parameters);
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["inputs"] = pairs_to_json(m.inputs);
  j["outputs"] = pairs_to_json(m.outputs);
  return j;
}

RunManifest manifest_from_json(const Json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.parameters = pairs_from_json(j.at("parameters"));
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.at("version").get<std::string>();
    m.started = j.value("started", "");
    m.finished = j.value("finished", "");
    if (j.contains("inputs")) m.inputs = pairs_from_json(j.at("inputs"));
    if (j.contains("outputs")) m.outputs = pairs_from_json(j.at("outputs"));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::string manifest_comment(const RunManifest& m) {
  std::ostringstream os;
  os << "# command: " << m.command << '\n';
  os << "# version: " << m.version << '\n';
  os << "# seed: " << m.seed << '\n';
  for (const auto& [k, v] : m.parameters) os << "# param " << k << ": " << v << '\n';
  for (const auto& [k, v] : m.inputs) os << "# input " << k << ": " << v << '\n';
  os << "# started: " << m.started << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------

Json to_json(const RealizationCertificate& cert) {
  Json j;
  j["n"] = cert.spectrum.size();
  j["spectrum"] = cert.spectrum.values();
  if (cert.matrix) j["matrix"] = cert.matrix->row_major();
  j["symmetric"] = cert.symmetric;
  j["residual"] = cert.residual;
  Json prov = Json::array();
  for (const auto& step : cert.provenance) {
    Json s;
    s["rule"] = to_string(step.rule);
    s["parameters"] = step.parameters;
    s["base"] = step.base;
    s["base-hash"] = step.base_hash;
    prov.push_back(std::move(s));
  }
  j["provenance"] = std::move(prov);
  if (cert.origin) j["origin"] = to_json(*cert.origin);
  return j;
}

RealizationCertificate certificate_from_json(const Json& j) {
  RealizationCertificate c;
  try {
    const auto n = j.at("n").get<std::size_t>();
    c.spectrum = make_spectrum(j.at("spectrum").get<std::vector<double>>());
    if (c.spectrum.size() != n) throw InvalidInput("certificate: n does not match the spectrum length");
    if (!std::is_sorted(c.spectrum.values().begin(), c.spectrum.values().end(), std::greater<>()) ||
        c.spectrum.values() != j.at("spectrum").get<std::vector<double>>())
      throw InvalidInput("certificate: spectrum must be in non-increasing order");
    if (j.contains("matrix") && !j.at("matrix").is_null()) {
      const auto entries = j.at("matrix").get<std::vector<double>>();
      if (entries.size() != n * n) throw InvalidInput("certificate: matrix must have n*n entries");
      c.matrix = SquareMatrix::from_row_major(n, entries);
    }
    c.symmetric = j.at("symmetric").get<bool>();
    c.residual = j.at("residual").get<double>();
    for (const auto& s : j.at("provenance")) {
      DeductionStep step;
      step.rule = deduction_rule_from_string(s.at("rule").get<std::string>());
      step.parameters = s.at("parameters").get<std::vector<double>>();
      step.base = s.value("base", std::vector<double>{});
      step.base_hash = s.at("base-hash").get<std::string>();
      c.provenance.push_back(std::move(step));
    }
    if (j.contains("origin") && !j.at("origin").is_null())
      c.origin = std::make_shared<const RealizationCertificate>(certificate_from_json(j.at("origin")));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed certificate: ") + e.what());
  }
  return c;
}

Json to_json(const NonRealizabilityProof& proof) {
  Json j;
  j["kind"] = to_string(proof.kind);
  j["spectrum"] = proof.spectrum.values();
  j["moment_depth"] = proof.moment_depth;
  j["order"] = proof.order;
  j["slack"] = proof.slack;
  j["detail"] = proof.detail;
  if (proof.kind == ProofKind::PartitionExhaustion) {
    Json t;
    t["parts_examined"] = proof.trace.parts_examined;
    t["remainders_exhausted"] = proof.trace.remainders_exhausted;
    Json parts = Json::array();
    for (const auto& p : proof.trace.failed_parts) parts.push_back(Json{{"values", p.values}, {"reason", p.reason}});
    t["failed_parts"] = std::move(parts);
    t["truncated"] = proof.trace.truncated;
    j["trace"] = std::move(t);
  }
  return j;
}

NonRealizabilityProof proof_from_json(const Json& j) {
  NonRealizabilityProof p;
  try {
    p.kind = proof_kind_from_string(j.at("kind").get<std::string>());
    p.spectrum = make_spectrum(j.at("spectrum").get<std::vector<double>>());
    p.moment_depth = j.at("moment_depth").get<int>();
    p.order = j.at("order").get<int>();
    p.slack = j.at("slack").get<double>();
    p.detail = j.value("detail", "");
    if (j.contains("trace")) {
      const Json& t = j.at("trace");
      p.trace.parts_examined = t.at("parts_examined").get<std::size_t>();
      p.trace.remainders_exhausted = t.at("remainders_exhausted").get<std::size_t>();
      for (const auto& f : t.at("failed_parts"))
        p.trace.failed_parts.push_back({f.at("values").get<std::vector<double>>(), f.at("reason").get<std::string>()});
      p.trace.truncated = t.at("truncated").get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed proof: ") + e.what());
  }
  return p;
}

Json to_json(const Verdict& v) {
  Json j;
  j["verdict"] = to_string(v.tag());
  if (v.is_realizable()) j["witness"] = to_json(v.witness());
  if (v.is_not_realizable()) j["proof"] = to_json(v.proof());
  return j;
}

Json to_json(const Probe& p) {
  return Json{{"t", p.t}, {"verdict", to_string(p.verdict)}, {"method", p.method}, {"objective", p.objective}};
}

Json to_json(const GuoEstimate& e) {
  Json j;
  j["tail"] = e.tail.values();
  j["symmetric"] = e.symmetric;
  j["certified_lower"] = e.certified_lower;
  j["lower_method"] = e.lower_method;
  j["certified_upper"] = std::isfinite(e.certified_upper) ? Json(e.certified_upper) : Json(nullptr);
  j["bracket"] = Json{{"lo", e.bracket_lo},
                      {"hi", std::isfinite(e.bracket_hi) ? Json(e.bracket_hi) : Json(nullptr)},
                      {"lo_certified", false}};
  j["resolution"] = e.resolution;
  j["budget_truncated"] = e.budget_truncated;
  Json probes = Json::array();
  for (const auto& p : e.probes) probes.push_back(to_json(p));
  j["probes"] = std::move(probes);
  if (std::isfinite(e.certified_upper)) j["witness"] = to_json(e.upper_witness);
  return j;
}

GuoEstimate estimate_from_json(const Json& j) {
  GuoEstimate e;
  try {
    e.tail = Tail(j.at("tail").get<std::vector<double>>());
    e.symmetric = j.at("symmetric").get<bool>();
    e.certified_lower = j.at("certified_lower").get<double>();
    e.lower_method = j.value("lower_method", "closed-form");
    const auto inf = std::numeric_limits<double>::infinity();
    e.certified_upper = j.at("certified_upper").is_null() ? inf : j.at("certified_upper").get<double>();
    e.bracket_lo = j.at("bracket").at("lo").get<double>();
    e.bracket_hi = j.at("bracket").at("hi").is_null() ? inf : j.at("bracket").at("hi").get<double>();
    e.resolution = j.at("resolution").get<double>();
    e.budget_truncated = j.value("budget_truncated", false);
    for (const auto& p : j.at("probes"))
      e.probes.push_back({p.at("t").get<double>(), p.at("verdict").get<std::string>() == "Realizable"
                                                         ? VerdictTag::Realizable
                                                         : p.at("verdict").get<std::string>() == "NotRealizable"
                                                               ? VerdictTag::NotRealizable
                                                               : VerdictTag::Unknown,
                          p.at("method").get<std::string>(), p.at("objective").get<double>()});
    if (j.contains("witness")) e.upper_witness = certificate_from_json(j.at("witness"));
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidInput(std::string("malformed estimate: ") + ex.what());
  }
  return e;
}

// ---------------------------------------------------------------------------

void write_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace niep
