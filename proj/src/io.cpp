#include "entangle/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "entangle/errors.hpp"
#include "entangle/states.hpp"
#include "entangle/tensor.hpp"
#include "entangle/version.hpp"

namespace entangle {

namespace {

using nlohmann::json;

double require_number(const json& j, const char* what) {
  if (!j.is_number()) {
    throw ArgumentError(std::string("expected a number for ") + what);
  }
  return j.get<double>();
}

long require_count(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long>() < 1) {
    throw ArgumentError(std::string("expected a positive integer for ") +
                        what);
  }
  return j.get<long>();
}

std::vector<double> require_array(const json& j, const char* what,
                                  std::size_t n) {
  if (!j.is_array() || j.size() != n) {
    throw ArgumentError(std::string(what) +
                        " must be an array matching rows*cols");
  }
  std::vector<double> out;
  out.reserve(n);
  for (const auto& v : j) out.push_back(require_number(v, what));
  return out;
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> re, im;
  re.reserve(m.size());
  im.reserve(m.size());
  for (long r = 0; r < m.rows(); ++r) {
    for (long c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_object()) throw ArgumentError("matrix JSON must be an object");
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("re") ||
      !j.contains("im")) {
    throw ArgumentError("matrix JSON needs rows, cols, re and im");
  }
  const long rows = require_count(j["rows"], "rows");
  const long cols = require_count(j["cols"], "cols");
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  const std::vector<double> re = require_array(j["re"], "re", n);
  const std::vector<double> im = require_array(j["im"], "im", n);
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      const std::size_t k = static_cast<std::size_t>(r) * cols + c;
      m(r, c) = Complex(re[k], im[k]);
    }
  }
  if (!m.allFinite()) throw ArgumentError("matrix entries must be finite");
  return m;
}

json density_to_json(const DensityOperator& rho) {
  json j = matrix_to_json(rho.mat);
  json factors = json::array();
  for (const auto& f : rho.factors) {
    factors.push_back({{"label", f.label}, {"dim", f.dim}});
  }
  j["factors"] = std::move(factors);
  return j;
}

DensityOperator density_from_json(const json& j) {
  Matrix m = matrix_from_json(j);
  if (!j.contains("factors") || !j["factors"].is_array() ||
      j["factors"].empty()) {
    throw ArgumentError("density JSON needs a nonempty factors array");
  }
  Factorization f;
  for (const auto& jf : j["factors"]) {
    if (!jf.is_object() || !jf.contains("label") || !jf.contains("dim") ||
        !jf["label"].is_string()) {
      throw ArgumentError("each factor needs a label and a dim");
    }
    f.push_back({jf["label"].get<std::string>(),
                 static_cast<int>(require_count(jf["dim"], "factor dim"))});
  }
  return DensityOperator::checked(std::move(m), std::move(f));
}

json filter_pair_to_json(const LocalFilterPair& f) {
  json j;
  j["a"] = matrix_to_json(f.a);
  j["b"] = matrix_to_json(f.b);
  j["d"] = f.d;
  return j;
}

LocalFilterPair filter_pair_from_json(const json& j) {
  if (!j.is_object() || !j.contains("a") || !j.contains("b")) {
    throw ArgumentError("filter JSON needs matrices a and b");
  }
  LocalFilterPair f;
  f.a = matrix_from_json(j["a"]);
  f.b = matrix_from_json(j["b"]);
  f.d = j.contains("d") ? static_cast<int>(require_count(j["d"], "d"))
                        : static_cast<int>(f.a.rows());
  return f;
}

json seesaw_result_to_json(const SeesawResult& r, const SeesawConfig& cfg) {
  json j;
  j["e_lower"] = r.e_lower;
  j["success_probability"] = r.success_probability;
  j["trace_of_filtered"] = r.trace_of_filtered;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["objective_trace"] = r.objective_trace;
  j["best_filter"] = filter_pair_to_json(r.best_filter);
  j["config"] = {{"restarts", cfg.restarts},
                 {"max_iterations", cfg.max_iterations},
                 {"tolerance", cfg.tolerance},
                 {"regularization", cfg.regularization},
                 {"seed", cfg.seed}};
  return j;
}

void write_density_file(const std::string& path, const DensityOperator& rho,
                        const std::optional<ECertificate>& cert) {
  json j = density_to_json(rho);
  if (cert) {
    j["e_bound"] = {{"value", cert->value},
                    {"kind", to_string(cert->kind)},
                    {"note", cert->note}};
  }
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out.good()) throw NumericError("failed writing '" + path + "'");
}

DensityOperator read_density_file(const std::string& path,
                                  std::optional<ECertificate>* cert) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ArgumentError("invalid JSON in '" + path + "': " + e.what());
  }
  if (cert) {
    cert->reset();
    if (j.contains("e_bound")) {
      const json& b = j["e_bound"];
      if (!b.is_object() || !b.contains("value") || !b.contains("kind") ||
          !b["kind"].is_string()) {
        throw ArgumentError("e_bound needs a value and a kind");
      }
      ECertificate c;
      c.value = require_number(b["value"], "e_bound.value");
      const std::string kind = b["kind"].get<std::string>();
      if (kind == "separable-floor") {
        c.kind = ECertificate::Kind::separable_floor;
      } else if (kind == "analytic-family") {
        c.kind = ECertificate::Kind::analytic_family;
      } else {
        throw ArgumentError("unknown e_bound kind '" + kind + "'");
      }
      if (b.contains("note") && b["note"].is_string()) {
        c.note = b["note"].get<std::string>();
      }
      *cert = std::move(c);
    }
  }
  return density_from_json(j);
}

// ---- State specs -------------------------------------------------------------

StateSpec StateSpec::parse(const std::string& text) {
  StateSpec spec;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError("state spec items must look like key=value: '" +
                          item + "'");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key.empty() || value.empty()) {
      throw ArgumentError("empty key or value in state spec item '" + item +
                          "'");
    }
    if (key == "kind") {
      spec.kind = value;
    } else if (!spec.params.emplace(key, value).second) {
      throw ArgumentError("duplicate key '" + key + "' in state spec");
    }
  }
  if (spec.kind.empty()) {
    throw ArgumentError("state spec needs a kind (e.g. kind=werner,d=3)");
  }
  return spec;
}

std::string StateSpec::canonical() const {
  std::ostringstream os;
  os << "kind=" << kind;
  for (const auto& [k, v] : params) os << "," << k << "=" << v;
  return os.str();
}

namespace {

double spec_number(const StateSpec& s, const std::string& key) {
  const auto it = s.params.find(key);
  if (it == s.params.end()) {
    throw ArgumentError("state spec '" + s.kind + "' needs parameter '" +
                        key + "'");
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size() || !std::isfinite(v)) {
      throw std::invalid_argument("trailing characters");
    }
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("parameter '" + key + "' must be a number, got '" +
                        it->second + "'");
  }
}

int spec_int(const StateSpec& s, const std::string& key) {
  const double v = spec_number(s, key);
  const int i = static_cast<int>(std::lround(v));
  if (std::abs(v - i) > 1e-12) {
    throw ArgumentError("parameter '" + key + "' must be an integer");
  }
  return i;
}

int spec_int_or(const StateSpec& s, const std::string& key, int fallback) {
  return s.params.count(key) ? spec_int(s, key) : fallback;
}

void reject_unknown(const StateSpec& s,
                    const std::vector<std::string>& allowed) {
  for (const auto& [k, v] : s.params) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || k == a;
    if (!ok) {
      throw ArgumentError("unknown parameter '" + k + "' for state kind '" +
                          s.kind + "'");
    }
  }
}

}  // namespace

DensityOperator build_state(const StateSpec& spec,
                            std::optional<ECertificate>* cert) {
  if (cert) cert->reset();
  if (spec.kind == "max_entangled") {
    reject_unknown(spec, {"d"});
    return max_entangled(spec_int(spec, "d"));
  }
  if (spec.kind == "werner") {
    reject_unknown(spec, {"d", "mu"});
    return werner({spec_number(spec, "mu"), spec_int(spec, "d")});
  }
  if (spec.kind == "isotropic") {
    reject_unknown(spec, {"d", "f"});
    return isotropic(spec_number(spec, "f"), spec_int(spec, "d"));
  }
  if (spec.kind == "product" || spec.kind == "product_basis") {
    reject_unknown(spec, {"d", "i", "j"});
    const int d = spec_int(spec, "d");
    if (d < 2) throw ArgumentError("local dimension must be at least 2");
    const int i = spec_int_or(spec, "i", d - 1);
    const int j = spec_int_or(spec, "j", d - 1);
    if (i < 0 || i >= d || j < 0 || j >= d) {
      throw ArgumentError("basis indices must lie in [0, d)");
    }
    Matrix m = Matrix::Zero(static_cast<long>(d) * d,
                            static_cast<long>(d) * d);
    const long idx = static_cast<long>(i) * d + j;
    m(idx, idx) = 1.0;
    return DensityOperator::trusted(std::move(m), {{"A", d}, {"B", d}},
                                    /*normalized=*/true);
  }
  if (spec.kind == "gadget") {
    reject_unknown(spec, {"d", "m", "f", "w"});
    const double w =
        spec.params.count("w") ? spec_number(spec, "w") : 0.5;
    CertifiedState s = gadget_family_state(spec_number(spec, "f"),
                                           spec_int(spec, "d"),
                                           spec_int(spec, "m"), w);
    if (cert) *cert = s.cert;
    return s.rho;
  }
  if (spec.kind == "sigma_alpha") {
    reject_unknown(spec, {"alpha"});
    return sigma_alpha(spec_number(spec, "alpha"));
  }
  if (spec.kind == "file") {
    reject_unknown(spec, {"path"});
    const auto it = spec.params.find("path");
    if (it == spec.params.end()) {
      throw ArgumentError("state spec 'file' needs parameter 'path'");
    }
    return read_density_file(it->second, cert);
  }
  throw ArgumentError("unknown state kind '" + spec.kind + "'");
}

// ---- Run manifests and reports -----------------------------------------------

json manifest_to_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["toolkit_version"] = kVersion;
  j["input_digests"] = m.input_digests;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  return j;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw NumericError("digest context allocation failed");
  if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw NumericError("digest initialization failed");
  }
  char buf[1 << 15];
  while (in.good()) {
    in.read(buf, sizeof(buf));
    const std::streamsize n = in.gcount();
    if (n > 0 && EVP_DigestUpdate(ctx, buf, static_cast<size_t>(n)) != 1) {
      EVP_MD_CTX_free(ctx);
      throw NumericError("digest update failed");
    }
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw NumericError("digest finalization failed");
  }
  EVP_MD_CTX_free(ctx);
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    char b[3];
    std::snprintf(b, sizeof(b), "%02x", digest[i]);
    hex += b;
  }
  return hex;
}

namespace {

void collect_scalars(const json& j, const std::string& prefix,
                     std::vector<std::pair<std::string, std::string>>* out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      collect_scalars(value, prefix.empty() ? key : prefix + "." + key, out);
    }
    return;
  }
  if (j.is_array()) return;  // arrays have no flat projection
  std::string text;
  if (j.is_string()) {
    text = j.get<std::string>();
  } else {
    text = j.dump();
  }
  out->emplace_back(prefix, std::move(text));
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string report_to_csv(const json& report) {
  std::vector<std::pair<std::string, std::string>> cells;
  collect_scalars(report, "", &cells);
  std::ostringstream header, row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) {
      header << ",";
      row << ",";
    }
    header << csv_escape(cells[i].first);
    row << csv_escape(cells[i].second);
  }
  return header.str() + "\n" + row.str() + "\n";
}

}  // namespace entangle
