// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// fails.  Tolerances are pinned here, next to the checks they govern.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "entangle/activation.hpp"
#include "entangle/errors.hpp"
#include "entangle/filters.hpp"
#include "entangle/rng.hpp"
#include "entangle/states.hpp"
#include "entangle/teleport.hpp"
#include "entangle/tensor.hpp"
#include "entangle/types.hpp"

namespace {

using namespace entangle;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw Failure(detail);
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

SeesawConfig seesaw_budget(std::uint64_t seed, int restarts, int iterations) {
  SeesawConfig cfg;
  cfg.restarts = restarts;
  cfg.max_iterations = iterations;
  cfg.seed = seed;
  return cfg;
}

DensityOperator basis_product(int d) {
  Matrix m = Matrix::Zero(static_cast<long>(d) * d, static_cast<long>(d) * d);
  m(static_cast<long>(d) * d - 1, static_cast<long>(d) * d - 1) = 1.0;
  return DensityOperator::trusted(std::move(m), {{"A", d}, {"B", d}}, true);
}

DensityOperator tilted_pure(double theta) {
  Vector v = Vector::Zero(4);
  v[0] = std::cos(theta);
  v[3] = std::sin(theta);
  return DensityOperator::trusted(Matrix(v * v.adjoint()),
                                  {{"A", 2}, {"B", 2}}, true);
}

Matrix ginibre(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.complex_normal();
  }
  return m;
}

// 1. Separable states carry fraction exactly 1/d, for d = 2, 3, 4.
void criterion_1() {
  constexpr double kTol = 1e-6;
  Rng rng(901);
  for (int d : {2, 3, 4}) {
    const SeesawConfig cfg = seesaw_budget(90 + d, 8, 150);
    const double floor = 1.0 / d;
    const double e_prod = e_d_seesaw(basis_product(d), d, cfg).e_lower;
    require(std::abs(e_prod - floor) <= kTol,
            "product state at d = " + std::to_string(d) + ": " + num(e_prod));
    const DensityOperator sep = sample_separable(d, d, 4, rng);
    const double e_sep = e_d_seesaw(sep, d, cfg).e_lower;
    require(std::abs(e_sep - floor) <= kTol,
            "separable mixture at d = " + std::to_string(d) + ": " +
                num(e_sep));
  }
}

// 2. Maximally entangled states have fraction 1 and conclusive fidelity 1.
void criterion_2() {
  constexpr double kTol = 1e-6;
  for (int d : {2, 3}) {
    const SeesawConfig cfg = seesaw_budget(920 + d, 8, 200);
    const double e = e_d_seesaw(max_entangled(d), d, cfg).e_lower;
    require(std::abs(e - 1.0) <= kTol,
            "fraction at d = " + std::to_string(d) + ": " + num(e));
    const double f = f_d_from_e(std::min(e, 1.0), d);
    require(std::abs(f - 1.0) <= kTol,
            "fidelity at d = " + std::to_string(d) + ": " + num(f));
  }
}

// 3. Tilted pure states: the balancing filter reaches fidelity 1 exactly and
//    the seesaw gets at least 0.999 on its own.
void criterion_3() {
  constexpr double kOracleTol = 1e-10;
  constexpr double kSeesawFloor = 0.999;
  int idx = 0;
  for (double theta : {M_PI / 12.0, M_PI / 6.0, M_PI / 4.0}) {
    const DensityOperator rho = tilted_pure(theta);
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = std::tan(theta);
    a(1, 1) = 1.0;
    const FilteredState fs =
        apply_filter(rho, LocalFilterPair{a, Matrix::Identity(2, 2), 2});
    const double oracle = fidelity_with_phid(fs.state, 2);
    require(std::abs(oracle - 1.0) <= kOracleTol,
            "balancing filter at theta index " + std::to_string(idx) + ": " +
                num(oracle));
    const SeesawConfig cfg = seesaw_budget(930 + idx, 12, 200);
    const double e = e_d_seesaw(rho, 2, cfg).e_lower;
    require(e >= kSeesawFloor,
            "seesaw at theta index " + std::to_string(idx) + ": " + num(e));
    ++idx;
  }
}

// 4. Conclusive Monte Carlo fidelity with the stored best filter matches
//    (1 + d e)/(1 + d) within 3 standard errors on five reference states.
void criterion_4() {
  const std::vector<std::pair<std::string, DensityOperator>> states = {
      {"max_entangled", max_entangled(2)},
      {"werner mu=0.75", werner({0.75, 2})},
      {"werner mu=0.9", werner({0.9, 2})},
      {"tilted pure", tilted_pure(M_PI / 6.0)},
      {"product", basis_product(2)},
  };
  const SeesawConfig cfg = seesaw_budget(940, 24, 400);
  TeleportConfig mc;
  mc.d = 2;
  mc.n_samples = 20000;
  mc.seed = 944;
  for (const auto& [name, rho] : states) {
    const FidelityRelationReport rep =
        verify_fidelity_relation(rho, 2, cfg, mc);
    require(rep.consistent,
            name + ": mc " + num(rep.mc.mean) + " vs predicted " +
                num(rep.predicted) + " (se " + num(rep.mc.standard_error) +
                ")");
  }
}

// 5. Werner states flip from ppt to npt exactly at mu = 1/2.
void criterion_5() {
  for (int d : {2, 3}) {
    for (int k = 0; k <= 20; ++k) {
      const double mu = 0.05 * k;
      const PptResult p = ppt_check(werner({mu, d}), {"A"});
      const bool expected = mu <= 0.5 + 1e-12;
      require(p.is_ppt == expected,
              "d = " + std::to_string(d) + ", mu = " + num(mu) +
                  ": is_ppt = " + (p.is_ppt ? "true" : "false"));
    }
  }
}

// 6. The activation filter's contraction identity holds with positive z on
//    50 random instances at local dimensions (2, 2, 2).
void criterion_6() {
  constexpr double kTol = 1e-10;
  Rng rng(906);
  for (int trial = 0; trial < 50; ++trial) {
    const DensityOperator rho = DensityOperator::trusted(
        random_density_matrix(16, rng),
        {{"A2", 2}, {"A3", 2}, {"B2", 2}, {"B3", 2}}, true);
    const DensityOperator sigma = DensityOperator::trusted(
        random_density_matrix(4, rng), {{"A1", 2}, {"B1", 2}}, true);
    const IdentityCheckResult r = activation_identity_check(rho, sigma, 2);
    require(r.max_residual < kTol && r.z > 0.0,
            "trial " + std::to_string(trial) + ": residual " +
                num(r.max_residual) + ", z " + num(r.z));
  }
}

// 7. Gap-operator probe: 1e4 random separable maps at d = 2 and thresholds
//    {0.5, 0.6, 0.9} produce no psd gap with a nonzero trace.  Every 8th map
//    is a local unitary pair, which sits exactly on the psd boundary, so the
//    psd branch is exercised.
void criterion_7() {
  constexpr double kGapTol = 1e-6;
  const double lambdas[3] = {0.5, 0.6, 0.9};
  Rng rng(907);
  int psd_cases = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double lambda = lambdas[trial % 3];
    SeparableMapSpec map;
    if (trial % 8 == 0) {
      const Matrix u = haar_random_unitary(2, rng);
      map.terms.push_back({u, Matrix(u.conjugate()), 2});
    } else {
      const int n_terms = 1 + static_cast<int>(rng.integer(3));
      for (int k = 0; k < n_terms; ++k) {
        Matrix a = ginibre(2, 2, rng);
        Matrix b = ginibre(2, 2, rng);
        Eigen::JacobiSVD<Eigen::MatrixXcd> sa{Eigen::MatrixXcd(a)};
        Eigen::JacobiSVD<Eigen::MatrixXcd> sb{Eigen::MatrixXcd(b)};
        const double na = sa.singularValues()[0];
        const double nb = sb.singularValues()[0];
        if (!(na > 0.0) || !(nb > 0.0)) continue;
        map.terms.push_back({Matrix(a / na), Matrix(b / nb), 2});
      }
      if (map.terms.empty()) continue;
    }
    const LemmaProbeResult r = lemma_probe(map, lambda, 2);
    if (r.psd_holds) {
      ++psd_cases;
      require(std::abs(r.trace_gap) <= kGapTol,
              "trial " + std::to_string(trial) + ": psd gap with trace " +
                  num(r.trace_gap));
    }
  }
  require(psd_cases >= 10000 / 8,
          "psd branch undersampled: " + std::to_string(psd_cases));
}

// 8. Local filtering never raises the werner parameter: 1e3 random filters
//    at mu in {0.6, 0.8, 1.0} and d in {2, 3}.
void criterion_8() {
  constexpr double kTol = 1e-9;
  Rng rng(908);
  for (int d : {2, 3}) {
    for (double mu : {0.6, 0.8, 1.0}) {
      int done = 0;
      for (int trial = 0; trial < 1000; ++trial) {
        SeparableMapSpec map;
        map.terms.push_back({ginibre(d, d, rng), ginibre(d, d, rng), d});
        MuProbeResult r;
        try {
          r = werner_mu_monotonicity_probe(mu, d, map);
        } catch (const FilterAnnihilationError&) {
          continue;
        }
        require(r.mu_prime <= mu + kTol,
                "d = " + std::to_string(d) + ", mu = " + num(mu) +
                    ": filtered to " + num(r.mu_prime));
        ++done;
      }
      require(done >= 900, "too many annihilated filters at d = " +
                               std::to_string(d) + ", mu = " + num(mu));
    }
  }
}

// 9. The shipped activation demo: certificate at most lambda, negative
//    indicator, joint seesaw clearing lambda by 1e-3, the stored filter
//    re-verified through the public path, and no separable sigma activating.
void criterion_9() {
  constexpr double kLambda = 0.8;
  constexpr double kJointMargin = 1e-3;
  constexpr double kSepTol = 1e-10;

  ActivationBudget budget;
  budget.joint_seesaw.restarts = 8;
  budget.joint_seesaw.max_iterations = 200;
  budget.joint_seesaw.tolerance = 1e-8;
  budget.joint_seesaw.seed = 12345;

  FamilySpec family;
  family.kind = FamilySpec::Kind::flag_gadget;
  family.inner_fidelities = {0.7};

  const DensityOperator sigma = isotropic(0.9, 2, "A1", "B1");
  const ActivationOutcome out =
      run_activation_experiment(sigma, kLambda, 2, family, budget);
  require(out.found && out.instance.has_value(), "no instance found");
  const ActivationInstance& inst = *out.instance;
  require(inst.e_rho_bound.value <= kLambda + 1e-12,
          "certificate " + num(inst.e_rho_bound.value) + " above lambda");
  require(inst.condition_value < 0.0,
          "indicator " + num(inst.condition_value) + " not negative");
  require(inst.e_joint_lower.e_lower > kLambda + kJointMargin,
          "joint bound " + num(inst.e_joint_lower.e_lower) +
              " does not clear lambda");

  const DensityOperator joint = permute_factors(
      tensor_product(DensityOperator::trusted(sigma.mat,
                                              {{"A1", 2}, {"B1", 2}},
                                              sigma.normalized),
                     inst.rho),
      {"A1", "A2", "A3", "B1", "B2", "B3"});
  const FilteredState fs = apply_filter(joint, inst.e_joint_lower.best_filter);
  const double replay = fidelity_with_phid(fs.state, 2);
  require(std::abs(replay - inst.e_joint_lower.e_lower) < 1e-8,
          "stored filter replays to " + num(replay) + " instead of " +
              num(inst.e_joint_lower.e_lower));

  Rng rng(909);
  for (int trial = 0; trial < 100; ++trial) {
    const DensityOperator sep = sample_separable(2, 2, 4, rng);
    const double cond = activation_condition(inst.rho, sep, kLambda, 2);
    require(cond >= -kSepTol, "separable sigma " + std::to_string(trial) +
                                  " reaches indicator " + num(cond));
  }
}

// 10. The reachable fraction is scale invariant, monotone under local
//     filtering and under ancilla discarding, and stays inside [1/d, 1].
void criterion_10() {
  constexpr double kScaleTol = 1e-9;
  constexpr double kMargin = 2e-4;
  constexpr double kRangeTol = 1e-9;
  Rng rng(910);
  const SeesawConfig cfg = seesaw_budget(9101, 8, 150);

  // scale invariance
  {
    Matrix m = random_density_matrix(4, rng);
    const DensityOperator rho =
        DensityOperator::trusted(std::move(m), {{"A", 2}, {"B", 2}}, true);
    const double base = e_d_seesaw(rho, 2, cfg).e_lower;
    for (double tau : {0.1, 3.7}) {
      DensityOperator scaled = rho;
      scaled.mat *= tau;
      scaled.normalized = false;
      const double e = e_d_seesaw(scaled, 2, cfg).e_lower;
      require(std::abs(e - base) <= kScaleTol,
              "scaling by " + num(tau) + " moved the fraction by " +
                  num(e - base));
    }
  }

  // filtering monotonicity, warm-started so restart luck cannot break it
  int checked = 0;
  for (int trial = 0; trial < 15; ++trial) {
    const DensityOperator rho = DensityOperator::trusted(
        random_density_matrix(4, rng, 2), {{"A", 2}, {"B", 2}}, true);
    const Matrix fa = ginibre(2, 2, rng);
    const Matrix fb = ginibre(2, 2, rng);
    FilteredState fs;
    try {
      fs = apply_filter(rho, LocalFilterPair{fa, fb, 2});
    } catch (const FilterAnnihilationError&) {
      continue;
    }
    const SeesawResult after = e_d_seesaw(fs.normalized(), 2, cfg);
    const LocalFilterPair composed{Matrix(after.best_filter.a * fa),
                                   Matrix(after.best_filter.b * fb), 2};
    const SeesawResult before = e_d_seesaw(rho, 2, cfg, {composed});
    require(after.e_lower <= before.e_lower + kMargin,
            "filtering raised the fraction by " +
                num(after.e_lower - before.e_lower));
    ++checked;
  }
  require(checked >= 10, "too many annihilated filters");

  // discard monotonicity: appending an ancilla pair cannot lower it
  for (int trial = 0; trial < 5; ++trial) {
    const DensityOperator rho = DensityOperator::trusted(
        random_density_matrix(4, rng, 2), {{"A1", 2}, {"B1", 2}}, true);
    const SeesawResult base = e_d_seesaw(rho, 2, cfg);
    Matrix anc = random_density_matrix(4, rng);
    const DensityOperator extended = tensor_product(
        rho, DensityOperator::trusted(std::move(anc), {{"A2", 2}, {"B2", 2}},
                                      true));
    const DensityOperator anc_state = partial_trace(extended, {"A2", "B2"});
    long best_idx = 0;
    double best_diag = -1.0;
    for (long q = 0; q < 4; ++q) {
      if (anc_state.mat(q, q).real() > best_diag) {
        best_diag = anc_state.mat(q, q).real();
        best_idx = q;
      }
    }
    const long ya = best_idx / 2, yb = best_idx % 2;
    Matrix ea = Matrix::Zero(2, 4), eb = Matrix::Zero(2, 4);
    for (int i = 0; i < 2; ++i) {
      for (int s = 0; s < 2; ++s) {
        ea(i, s * 2 + ya) = base.best_filter.a(i, s);
        eb(i, s * 2 + yb) = base.best_filter.b(i, s);
      }
    }
    const SeesawResult ext =
        e_d_seesaw(extended, 2, cfg, {LocalFilterPair{ea, eb, 2}});
    require(ext.e_lower >= base.e_lower - kMargin,
            "discarding an ancilla lowered the fraction by " +
                num(base.e_lower - ext.e_lower));
  }

  // range
  for (int trial = 0; trial < 20; ++trial) {
    const DensityOperator rho = DensityOperator::trusted(
        random_density_matrix(4, rng), {{"A", 2}, {"B", 2}}, true);
    const double e = e_d_seesaw(rho, 2, seesaw_budget(9102, 6, 100)).e_lower;
    require(e >= 0.5 - kRangeTol && e <= 1.0 + kRangeTol,
            "d = 2 fraction " + num(e) + " out of range");
  }
  for (int trial = 0; trial < 5; ++trial) {
    const DensityOperator rho = DensityOperator::trusted(
        random_density_matrix(9, rng), {{"A", 3}, {"B", 3}}, true);
    const double e = e_d_seesaw(rho, 3, seesaw_budget(9103, 6, 100)).e_lower;
    require(e >= 1.0 / 3.0 - kRangeTol && e <= 1.0 + kRangeTol,
            "d = 3 fraction " + num(e) + " out of range");
  }
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    void (*fn)();
  };
  const std::vector<Entry> entries = {
      {1, "separable states sit on the 1/d floor", criterion_1},
      {2, "maximally entangled states reach fraction and fidelity one",
       criterion_2},
      {3, "procrustean filtering recovers tilted pure states", criterion_3},
      {4, "conclusive fidelity matches the filtered-fraction prediction",
       criterion_4},
      {5, "werner states cross the ppt boundary at mu = 1/2", criterion_5},
      {6, "the activation contraction identity holds", criterion_6},
      {7, "the separable-map gap operator admits no counterexamples",
       criterion_7},
      {8, "local filtering never raises the werner parameter", criterion_8},
      {9, "the shipped activation demo activates and certifies", criterion_9},
      {10, "the reachable fraction is a monotone bounded invariant",
       criterion_10},
  };

  bool all_ok = true;
  for (const Entry& entry : entries) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      entry.fn();
    } catch (const std::exception& ex) {
      ok = false;
      detail = ex.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::ostringstream line;
    line << (ok ? "[PASS]" : "[FAIL]") << " criterion " << entry.id << ": "
         << entry.name << " (" << num(secs) << " s)";
    if (!detail.empty()) line << " - " << detail;
    std::cout << line.str() << std::endl;
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
