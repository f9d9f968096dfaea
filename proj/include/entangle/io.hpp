#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "entangle/activation.hpp"
#include "entangle/filters.hpp"
#include "entangle/types.hpp"

namespace entangle {

// ---- Matrix / operator JSON ------------------------------------------------
//
// Matrices serialize as {"rows", "cols", "re", "im"} with re/im row-major;
// operators additionally carry "factors": [{"label", "dim"}, ...].  Density
// operator files may attach an optional entanglement-fraction certificate
// {"e_bound": {"value", "kind"}}.  Readers reject length/dimension
// mismatches.

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json density_to_json(const DensityOperator& rho);
DensityOperator density_from_json(const nlohmann::json& j);

nlohmann::json filter_pair_to_json(const LocalFilterPair& f);
LocalFilterPair filter_pair_from_json(const nlohmann::json& j);

nlohmann::json seesaw_result_to_json(const SeesawResult& r,
                                     const SeesawConfig& cfg);

// Density file helpers; read returns the optional embedded certificate too.
void write_density_file(const std::string& path, const DensityOperator& rho,
                        const std::optional<ECertificate>& cert = {});
DensityOperator read_density_file(const std::string& path,
                                  std::optional<ECertificate>* cert = nullptr);

// ---- State specs -----------------------------------------------------------
//
// CLI state addressing: "kind=werner,d=3,mu=0.8".  Kinds: max_entangled(d),
// werner(d, mu), isotropic(d, f), product_basis|product(d[, i, j]),
// gadget(d, m, f[, w]), sigma_alpha(alpha), file(path).

struct StateSpec {
  std::string kind;
  std::map<std::string, std::string> params;

  static StateSpec parse(const std::string& text);
  std::string canonical() const;
};

// Build the state addressed by a spec.  For "gadget" the family certificate
// is returned through `cert` when non-null; for "file" any embedded
// certificate is surfaced the same way.
DensityOperator build_state(const StateSpec& spec,
                            std::optional<ECertificate>* cert = nullptr);

// ---- Run manifests and reports ----------------------------------------------

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;  // full flag echo
  std::uint64_t seed = 0;
  int threads = 0;
  std::map<std::string, std::string> input_digests;  // path -> sha256
  double wall_clock_seconds = 0.0;
};

nlohmann::json manifest_to_json(const RunManifest& m);

// SHA-256 of a file's bytes, hex-encoded.
std::string sha256_file(const std::string& path);

// Flat CSV projection of a JSON report: one header row and one value row of
// the scalar leaves (objects flattened to dotted paths; arrays skipped).
std::string report_to_csv(const nlohmann::json& report);

}  // namespace entangle
