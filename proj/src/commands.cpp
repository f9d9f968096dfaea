#include "entangle/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/SVD>
#include <json.hpp>

#include "entangle/activation.hpp"
#include "entangle/errors.hpp"
#include "entangle/filters.hpp"
#include "entangle/io.hpp"
#include "entangle/parallel.hpp"
#include "entangle/rng.hpp"
#include "entangle/states.hpp"
#include "entangle/teleport.hpp"
#include "entangle/tensor.hpp"
#include "entangle/types.hpp"

namespace entangle {

namespace {

using nlohmann::json;

std::string fmt(double v) { return json(v).dump(); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

struct CommonOpts {
  std::uint64_t seed = 12345;
  int threads = 0;
  std::string out_path;
  std::string csv_path;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "random seed")
        ->envname("ENTANGLE_SEED");
    cmd->add_option("--threads", threads,
                    "worker thread cap (0 = hardware)");
    cmd->add_option("--out", out_path, "write the JSON report to this file");
    cmd->add_option("--csv", csv_path,
                    "write a flat CSV projection of the report");
  }

  void apply() const {
    if (threads < 0) throw ArgumentError("thread cap must be nonnegative");
    set_max_threads(threads);
  }

  void echo(std::map<std::string, std::string>* config) const {
    (*config)["seed"] = fmt(seed);
    (*config)["threads"] = fmt(threads);
    if (!out_path.empty()) (*config)["out"] = out_path;
    if (!csv_path.empty()) (*config)["csv"] = csv_path;
  }
};

// Track input files so their digests land in the manifest.
void digest_state_inputs(const StateSpec& spec,
                         std::map<std::string, std::string>* digests) {
  if (spec.kind == "file") {
    const auto it = spec.params.find("path");
    if (it != spec.params.end()) {
      (*digests)[it->second] = sha256_file(it->second);
    }
  }
}

// Emit the final report: stdout always, then optional --out / --csv files.
void emit_report(const CommonOpts& opts, const std::string& command,
                 std::map<std::string, std::string> config,
                 std::map<std::string, std::string> digests,
                 double wall_seconds, json result) {
  RunManifest manifest;
  manifest.command = command;
  manifest.config = std::move(config);
  manifest.seed = opts.seed;
  manifest.threads = max_threads();
  manifest.input_digests = std::move(digests);
  manifest.wall_clock_seconds = wall_seconds;

  json report;
  report["manifest"] = manifest_to_json(manifest);
  report["result"] = std::move(result);

  std::cout << report.dump(2) << "\n";
  if (!opts.out_path.empty()) {
    std::ofstream out(opts.out_path);
    if (!out) {
      throw ArgumentError("cannot open '" + opts.out_path + "' for writing");
    }
    out << report.dump(2) << "\n";
  }
  if (!opts.csv_path.empty()) {
    std::ofstream out(opts.csv_path);
    if (!out) {
      throw ArgumentError("cannot open '" + opts.csv_path + "' for writing");
    }
    out << report_to_csv(report);
  }
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

// ---- edist -------------------------------------------------------------------

struct EdistArgs {
  CommonOpts common;
  std::string state_text;
  int d = 2;
  int restarts = 64;
  int iterations = 500;
  double tolerance = 1e-9;
};

int run_edist(const EdistArgs& args) {
  Stopwatch watch;
  args.common.apply();
  const StateSpec spec = StateSpec::parse(args.state_text);
  std::map<std::string, std::string> digests;
  digest_state_inputs(spec, &digests);
  const DensityOperator rho = build_state(spec);

  SeesawConfig cfg;
  cfg.restarts = args.restarts;
  cfg.max_iterations = args.iterations;
  cfg.tolerance = args.tolerance;
  cfg.seed = args.common.seed;
  const SeesawResult r = e_d_seesaw(rho, args.d, cfg);

  json result;
  result["state"] = spec.canonical();
  result["d"] = args.d;
  result["e_lower"] = r.e_lower;
  result["f_d"] = f_d_from_e(r.e_lower, args.d);
  result["seesaw"] = seesaw_result_to_json(r, cfg);

  std::map<std::string, std::string> config;
  config["state"] = spec.canonical();
  config["d"] = fmt(args.d);
  config["restarts"] = fmt(args.restarts);
  config["iterations"] = fmt(args.iterations);
  config["tolerance"] = fmt(args.tolerance);
  args.common.echo(&config);
  emit_report(args.common, "edist", std::move(config), std::move(digests),
              watch.seconds(), std::move(result));
  return 0;
}

// ---- activate ------------------------------------------------------------------

struct ActivateArgs {
  CommonOpts common;
  std::string sigma_text;
  double lambda = 0.0;
  int d = 2;
  std::string family = "gadget";
  std::vector<double> inner_f;
  std::vector<double> noise_bias;
  int restarts = 8;
  int iterations = 200;
};

int run_activate(const ActivateArgs& args) {
  Stopwatch watch;
  args.common.apply();
  const StateSpec spec = StateSpec::parse(args.sigma_text);
  std::map<std::string, std::string> digests;
  digest_state_inputs(spec, &digests);
  const DensityOperator sigma = build_state(spec);

  FamilySpec family;
  if (args.family == "gadget") {
    family.kind = FamilySpec::Kind::flag_gadget;
  } else if (args.family == "floor") {
    family.kind = FamilySpec::Kind::separable_floor;
  } else {
    throw ArgumentError("family must be 'gadget' or 'floor'");
  }
  family.inner_fidelities = args.inner_f;
  family.noise_biases = args.noise_bias;

  ActivationBudget budget;
  budget.joint_seesaw.restarts = args.restarts;
  budget.joint_seesaw.max_iterations = args.iterations;
  budget.joint_seesaw.tolerance = 1e-8;
  budget.joint_seesaw.seed = args.common.seed;
  budget.sigma_seesaw.restarts = std::max(args.restarts, 16);
  budget.sigma_seesaw.max_iterations = args.iterations;
  budget.sigma_seesaw.seed = args.common.seed;

  const ActivationOutcome outcome =
      run_activation_experiment(sigma, args.lambda, args.d, family, budget);

  json result;
  result["sigma"] = spec.canonical();
  result["lambda"] = args.lambda;
  result["d"] = args.d;
  result["family"] = args.family;
  result["found"] = outcome.found;
  result["min_condition_value"] = outcome.min_condition_value;
  result["message"] = outcome.message;
  if (outcome.instance) {
    const ActivationInstance& inst = *outcome.instance;
    json ji;
    ji["condition_value"] = inst.condition_value;
    ji["e_rho_bound"] = {{"value", inst.e_rho_bound.value},
                         {"kind", to_string(inst.e_rho_bound.kind)},
                         {"note", inst.e_rho_bound.note}};
    ji["e_joint_lower"] =
        seesaw_result_to_json(inst.e_joint_lower, budget.joint_seesaw);
    ji["rho"] = density_to_json(inst.rho);
    ji["sigma"] = density_to_json(inst.sigma);
    result["instance"] = std::move(ji);
  }

  std::map<std::string, std::string> config;
  config["sigma"] = spec.canonical();
  config["lambda"] = fmt(args.lambda);
  config["d"] = fmt(args.d);
  config["family"] = args.family;
  for (std::size_t i = 0; i < args.inner_f.size(); ++i) {
    config["inner_f." + std::to_string(i)] = fmt(args.inner_f[i]);
  }
  config["restarts"] = fmt(args.restarts);
  config["iterations"] = fmt(args.iterations);
  args.common.echo(&config);
  emit_report(args.common, "activate", std::move(config), std::move(digests),
              watch.seconds(), std::move(result));
  return outcome.found ? 0 : 2;
}

// ---- witness -------------------------------------------------------------------

struct WitnessArgs {
  CommonOpts common;
  std::string rho_path;
  std::string sigma_path;
  double lambda = 0.0;
  int d = 2;
  int samples = 10000;
};

int run_witness(const WitnessArgs& args) {
  Stopwatch watch;
  args.common.apply();
  std::map<std::string, std::string> digests;
  digests[args.rho_path] = sha256_file(args.rho_path);

  std::optional<ECertificate> cert;
  CertifiedState certified;
  certified.rho = read_density_file(args.rho_path, &cert);
  if (!cert) {
    throw PreconditionError(
        "the rho file must embed an e_bound certificate (value and kind)");
  }
  certified.cert = *cert;

  const WitnessOperator w = witness_from_rho(certified, args.lambda, args.d);
  const double min_products =
      witness_min_over_products(w, args.samples, args.common.seed);

  json result;
  result["lambda"] = args.lambda;
  result["d"] = args.d;
  result["provenance"] = w.provenance;
  result["e_bound"] = {{"value", certified.cert.value},
                       {"kind", to_string(certified.cert.kind)}};
  result["min_over_products"] = min_products;
  result["samples"] = args.samples;
  result["witness"] = matrix_to_json(w.w);

  if (!args.sigma_path.empty()) {
    digests[args.sigma_path] = sha256_file(args.sigma_path);
    const DensityOperator sigma = read_density_file(args.sigma_path);
    const double value = witness_value(w, sigma);
    result["sigma_value"] = value;
    result["detected"] = value < 0.0;
  }

  std::map<std::string, std::string> config;
  config["rho"] = args.rho_path;
  if (!args.sigma_path.empty()) config["sigma"] = args.sigma_path;
  config["lambda"] = fmt(args.lambda);
  config["d"] = fmt(args.d);
  config["samples"] = fmt(args.samples);
  args.common.echo(&config);
  emit_report(args.common, "witness", std::move(config), std::move(digests),
              watch.seconds(), std::move(result));
  return 0;
}

// ---- teleport-sim ----------------------------------------------------------------

struct TeleportArgs {
  CommonOpts common;
  std::string resource_text;
  int samples = 20000;
  std::string mode = "standard";
  int restarts = 32;
  int iterations = 300;
};

int run_teleport(const TeleportArgs& args) {
  Stopwatch watch;
  args.common.apply();
  const StateSpec spec = StateSpec::parse(args.resource_text);
  std::map<std::string, std::string> digests;
  digest_state_inputs(spec, &digests);
  DensityOperator resource = build_state(spec);
  if (resource.factors.size() != 2 ||
      resource.factors[0].dim != resource.factors[1].dim) {
    throw ArgumentError("resource must be a d (x) d two-factor state");
  }
  const int d = resource.factors[0].dim;
  const double tr = resource.trace_real();
  if (!(tr > 0.0)) throw ArgumentError("resource must have positive trace");
  resource.mat /= tr;
  resource.normalized = true;

  TeleportConfig cfg;
  cfg.d = d;
  cfg.n_samples = args.samples;
  cfg.seed = args.common.seed;

  json result;
  result["resource"] = spec.canonical();
  result["mode"] = args.mode;
  result["d"] = d;
  result["n_samples"] = args.samples;

  if (args.mode == "standard") {
    const McEstimate est = average_fidelity_mc(resource, cfg);
    result["mean"] = est.mean;
    result["standard_error"] = est.standard_error;
  } else if (args.mode == "conclusive") {
    SeesawConfig scfg;
    scfg.restarts = args.restarts;
    scfg.max_iterations = args.iterations;
    scfg.seed = args.common.seed;
    const SeesawResult r = e_d_seesaw(resource, d, scfg);
    const McEstimate est = conclusive_fidelity_mc(resource, r.best_filter, cfg);
    result["mean"] = est.mean;
    result["standard_error"] = est.standard_error;
    result["predicted"] = f_d_from_e(r.e_lower, d);
    result["e_lower"] = r.e_lower;
    result["success_probability"] = r.success_probability;
    result["filter"] = filter_pair_to_json(r.best_filter);
  } else {
    throw ArgumentError("mode must be 'standard' or 'conclusive'");
  }

  std::map<std::string, std::string> config;
  config["resource"] = spec.canonical();
  config["samples"] = fmt(args.samples);
  config["mode"] = args.mode;
  if (args.mode == "conclusive") {
    config["restarts"] = fmt(args.restarts);
    config["iterations"] = fmt(args.iterations);
  }
  args.common.echo(&config);
  emit_report(args.common, "teleport-sim", std::move(config),
              std::move(digests), watch.seconds(), std::move(result));
  return 0;
}

// ---- lemma-check -----------------------------------------------------------------

struct LemmaArgs {
  CommonOpts common;
  int d = 2;
  double lambda = 0.6;
  int trials = 10000;
};

int run_lemma_check(const LemmaArgs& args) {
  Stopwatch watch;
  args.common.apply();
  if (args.trials < 1) throw ArgumentError("trials must be positive");

  // positive control: the identity map leaves the gap at exactly zero
  SeparableMapSpec identity_map;
  identity_map.terms.push_back(
      {Matrix::Identity(args.d, args.d), Matrix::Identity(args.d, args.d),
       args.d});
  const LemmaProbeResult control = lemma_probe(identity_map, args.lambda,
                                               args.d);

  const int chunk = 256;
  const int n_chunks = (args.trials + chunk - 1) / chunk;
  std::vector<int> counter_counts(n_chunks, 0);
  std::vector<int> psd_counts(n_chunks, 0);
  const double gap_tol = 1e-6 * args.d * args.d;
  parallel_for(n_chunks, [&](long c) {
    Rng rng(args.common.seed, static_cast<std::uint64_t>(c));
    const int lo = static_cast<int>(c) * chunk;
    const int hi = std::min(args.trials, lo + chunk);
    for (int t = lo; t < hi; ++t) {
      SeparableMapSpec map;
      if (t % 8 == 0) {
        // boundary case: a local unitary pair (u, conj u) fixes the identity
        // and phi_d alike, so its gap operator vanishes; these are the only
        // maps whose gap can be PSD, and they keep the PSD branch exercised
        const Matrix u = haar_random_unitary(args.d, rng);
        map.terms.push_back({u, Matrix(u.conjugate()), args.d});
        const LemmaProbeResult probe = lemma_probe(map, args.lambda, args.d);
        if (probe.psd_holds) {
          ++psd_counts[c];
          if (std::abs(probe.trace_gap) > gap_tol) ++counter_counts[c];
        }
        continue;
      }
      const int n_terms = 1 + static_cast<int>(rng.integer(3));
      for (int k = 0; k < n_terms; ++k) {
        Matrix a(args.d, args.d), b(args.d, args.d);
        for (int r = 0; r < args.d; ++r) {
          for (int s = 0; s < args.d; ++s) {
            a(r, s) = rng.complex_normal();
            b(r, s) = rng.complex_normal();
          }
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> sa((Eigen::MatrixXcd(a)));
        Eigen::JacobiSVD<Eigen::MatrixXcd> sb((Eigen::MatrixXcd(b)));
        const double na = sa.singularValues()[0];
        const double nb = sb.singularValues()[0];
        if (!(na > 0.0) || !(nb > 0.0)) continue;
        map.terms.push_back({Matrix(a / na), Matrix(b / nb), args.d});
      }
      if (map.terms.empty()) continue;
      const LemmaProbeResult probe = lemma_probe(map, args.lambda, args.d);
      if (probe.psd_holds) {
        ++psd_counts[c];
        if (std::abs(probe.trace_gap) > gap_tol) ++counter_counts[c];
      }
    }
  });
  int counterexamples = 0, psd_cases = 0;
  for (int c = 0; c < n_chunks; ++c) {
    counterexamples += counter_counts[c];
    psd_cases += psd_counts[c];
  }

  json result;
  result["d"] = args.d;
  result["lambda"] = args.lambda;
  result["trials"] = args.trials;
  result["counterexamples"] = counterexamples;
  result["psd_cases"] = psd_cases;
  result["control"] = {{"psd_holds", control.psd_holds},
                       {"trace_gap", control.trace_gap},
                       {"min_eigenvalue", control.min_eigenvalue}};

  std::map<std::string, std::string> config;
  config["d"] = fmt(args.d);
  config["lambda"] = fmt(args.lambda);
  config["trials"] = fmt(args.trials);
  args.common.echo(&config);
  emit_report(args.common, "lemma-check", std::move(config), {},
              watch.seconds(), std::move(result));
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{
      "entangle: single-copy entanglement fraction, conclusive "
      "teleportation fidelity, and activation experiments"};
  app.require_subcommand(1);

  EdistArgs edist;
  CLI::App* cmd_edist = app.add_subcommand(
      "edist", "maximize the d-dimensional entanglement fraction by seesaw");
  cmd_edist->add_option("--state", edist.state_text,
                        "state spec, e.g. kind=werner,d=2,mu=0.8")
      ->required();
  cmd_edist->add_option("--d", edist.d, "target local dimension")->required();
  cmd_edist->add_option("--restarts", edist.restarts, "seesaw restarts");
  cmd_edist->add_option("--iterations", edist.iterations,
                        "max seesaw iterations");
  cmd_edist->add_option("--tolerance", edist.tolerance,
                        "seesaw convergence tolerance");
  edist.common.add_to(cmd_edist);

  ActivateArgs activate;
  CLI::App* cmd_activate = app.add_subcommand(
      "activate", "scan a certified family for an activation instance");
  cmd_activate->add_option("--sigma", activate.sigma_text, "sigma state spec")
      ->required();
  cmd_activate->add_option("--lambda", activate.lambda, "fidelity threshold")
      ->required();
  cmd_activate->add_option("--d", activate.d, "target local dimension")
      ->required();
  cmd_activate->add_option("--family", activate.family,
                           "rho family: gadget | floor");
  cmd_activate->add_option("--inner-f", activate.inner_f,
                           "gadget inner fidelities to scan");
  cmd_activate->add_option("--noise-bias", activate.noise_bias,
                           "gadget |10><10| noise weights to scan");
  cmd_activate->add_option("--restarts", activate.restarts,
                           "joint seesaw restarts");
  cmd_activate->add_option("--iterations", activate.iterations,
                           "max seesaw iterations");
  activate.common.add_to(cmd_activate);

  WitnessArgs witness;
  CLI::App* cmd_witness = app.add_subcommand(
      "witness", "build the activation witness of a certified rho file");
  cmd_witness->add_option("--rho", witness.rho_path,
                          "density JSON file with embedded e_bound")
      ->required();
  cmd_witness->add_option("--lambda", witness.lambda, "fidelity threshold")
      ->required();
  cmd_witness->add_option("--d", witness.d, "target local dimension")
      ->required();
  cmd_witness->add_option("--sigma", witness.sigma_path,
                          "density JSON file to test against the witness");
  cmd_witness->add_option("--samples", witness.samples,
                          "product-state samples for the positivity probe");
  witness.common.add_to(cmd_witness);

  TeleportArgs teleport;
  CLI::App* cmd_teleport = app.add_subcommand(
      "teleport-sim", "Monte Carlo teleportation fidelity");
  cmd_teleport->add_option("--resource", teleport.resource_text,
                           "resource state spec")
      ->required();
  cmd_teleport->add_option("--samples", teleport.samples,
                           "Monte Carlo samples");
  cmd_teleport->add_option("--mode", teleport.mode,
                           "standard | conclusive");
  cmd_teleport->add_option("--restarts", teleport.restarts,
                           "seesaw restarts (conclusive mode)");
  cmd_teleport->add_option("--iterations", teleport.iterations,
                           "max seesaw iterations (conclusive mode)");
  teleport.common.add_to(cmd_teleport);

  LemmaArgs lemma;
  CLI::App* cmd_lemma = app.add_subcommand(
      "lemma-check", "probe the separable-map gap operator for PSD "
                     "counterexamples");
  cmd_lemma->add_option("--d", lemma.d, "local dimension")->required();
  cmd_lemma->add_option("--lambda", lemma.lambda, "fidelity threshold")
      ->required();
  cmd_lemma->add_option("--trials", lemma.trials, "random maps to test");
  lemma.common.add_to(cmd_lemma);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_edist->parsed()) return run_edist(edist);
    if (cmd_activate->parsed()) return run_activate(activate);
    if (cmd_witness->parsed()) return run_witness(witness);
    if (cmd_teleport->parsed()) return run_teleport(teleport);
    if (cmd_lemma->parsed()) return run_lemma_check(lemma);
    std::cerr << "error: no subcommand selected\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace entangle
