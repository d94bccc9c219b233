// Text and JSON formats: spectrum parsing, certificates, verdicts, estimates
// and run manifests.

#ifndef NIEP_IO_HPP
#define NIEP_IO_HPP

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "niep/conditions.hpp"
#include "niep/guo.hpp"
#include "niep/search.hpp"

namespace niep {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.3.0";

/// Comma-separated reals; entries may be fractions such as 7/40.
/// Throws InvalidInput on anything else.
std::vector<double> parse_values(std::string_view text);
Spectrum parse_spectrum(std::string_view text);

/// 16-hex-digit FNV-1a digest of raw bytes.
std::string digest(std::string_view bytes);

struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::uint64_t seed = 0;
  std::string version = kToolVersion;
  std::string started;
  std::string finished;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, digest
  std::vector<std::pair<std::string, std::string>> outputs;  // path, digest

  /// Sets `started`; SOURCE_DATE_EPOCH, when set, replaces the clock.
  void start();
  void finish();
};

/// ISO-8601 UTC time; honors SOURCE_DATE_EPOCH.
std::string timestamp_now();

Json to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);
/// "# key: value" lines for CSV headers.
std::string manifest_comment(const RunManifest& m);

Json to_json(const RealizationCertificate& cert);
/// Throws InvalidInput on schema violations. Does not verify.
RealizationCertificate certificate_from_json(const Json& j);

Json to_json(const NonRealizabilityProof& proof);
NonRealizabilityProof proof_from_json(const Json& j);

Json to_json(const Verdict& v);

Json to_json(const Probe& p);
Json to_json(const GuoEstimate& e);
GuoEstimate estimate_from_json(const Json& j);

/// Writes to a temporary sibling and renames it into place.
/// Throws IoError on failure.
void write_atomic(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace niep

#endif  // NIEP_IO_HPP
