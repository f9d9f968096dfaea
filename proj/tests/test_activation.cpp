#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "entangle/activation.hpp"
#include "entangle/errors.hpp"
#include "entangle/filters.hpp"
#include "entangle/rng.hpp"
#include "entangle/states.hpp"
#include "entangle/tensor.hpp"
#include "support.hpp"

using namespace entangle;
using testing::ginibre;
using testing::max_abs_diff;
using testing::random_bipartite;

namespace {

DensityOperator random_rho_on(int m_a, int m_b, int d, Rng& rng) {
  Matrix mat =
      random_density_matrix(m_a * d * m_b * d, rng);
  return DensityOperator::trusted(
      std::move(mat), {{"A2", m_a}, {"A3", d}, {"B2", m_b}, {"B3", d}},
      true);
}

Matrix contracted(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const double top = svd.singularValues()(0);
  return top > 0 ? Matrix(m / top) : m;
}

}  // namespace

TEST_CASE("activation filter is a coisometry onto C^d") {
  for (int m : {1, 2, 3}) {
    for (int d : {2, 3}) {
      const LocalFilterPair f = activation_filter(m, m, d);
      REQUIRE(f.a.rows() == d);
      REQUIRE(f.a.cols() == static_cast<long>(m) * m * d);
      REQUIRE(f.b.rows() == d);
      // rows are orthonormal: the filter has full rank d
      CHECK(max_abs_diff(Matrix(f.a * f.a.adjoint()),
                         Matrix::Identity(d, d)) < 1e-14);
      CHECK(max_abs_diff(Matrix(f.b * f.b.adjoint()),
                         Matrix::Identity(d, d)) < 1e-14);
    }
  }
  CHECK_THROWS_AS(activation_filter(0, 1, 2), ArgumentError);
  CHECK_THROWS_AS(activation_filter(1, 1, 1), ArgumentError);
}

TEST_CASE("contraction identity holds on random inputs") {
  Rng rng(70);
  for (int trial = 0; trial < 50; ++trial) {
    const DensityOperator rho = random_rho_on(2, 2, 2, rng);
    const DensityOperator sigma = random_bipartite(2, 2, rng);
    const IdentityCheckResult res = activation_identity_check(rho, sigma, 2);
    CHECK(res.z == 0.25);
    CHECK(res.max_residual < 1e-12);
  }
  for (int trial = 0; trial < 5; ++trial) {
    const DensityOperator rho = random_rho_on(3, 3, 3, rng);
    const DensityOperator sigma = random_bipartite(3, 3, rng);
    const IdentityCheckResult res = activation_identity_check(rho, sigma, 3);
    CHECK(res.z == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(res.max_residual < 1e-12);
  }
  // maximally mixed sigma
  const DensityOperator rho = random_rho_on(2, 2, 2, rng);
  const DensityOperator sigma = DensityOperator::trusted(
      Matrix(Matrix::Identity(4, 4) / 4.0), {{"A1", 2}, {"B1", 2}}, true);
  CHECK(activation_identity_check(rho, sigma, 2).max_residual < 1e-12);
}

TEST_CASE("activation indicator has the expected closed form on products") {
  Rng rng(71);
  const int d = 2;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix eta_m = random_density_matrix(4, rng);
    const Matrix eta_copy = eta_m;
    const DensityOperator eta = DensityOperator::trusted(
        std::move(eta_m), {{"A2", 2}, {"B2", 2}}, true);
    const DensityOperator mixed = DensityOperator::trusted(
        Matrix(Matrix::Identity(4, 4) / 4.0), {{"A3", d}, {"B3", d}}, true);
    const DensityOperator rho = permute_factors(
        tensor_product(eta, mixed), {"A2", "A3", "B2", "B3"});
    const DensityOperator sigma = random_bipartite(2, 2, rng);
    const double lambda = 0.5 + 0.4 * rng.uniform();
    const double got = activation_condition(rho, sigma, lambda, d);
    const double overlap =
        (eta_copy * sigma.mat.transpose()).trace().real();
    CHECK(std::abs(got - overlap * (lambda - 1.0 / (d * d))) < 1e-12);
  }
}

TEST_CASE("witness construction demands a certificate below lambda") {
  const CertifiedState hot = gadget_family_state(0.9, 2, 2);
  CHECK_THROWS_AS(witness_from_rho(hot, 0.5, 2), PreconditionError);
  CHECK(std::string(to_string(hot.cert.kind)) == "analytic-family");
  CHECK(std::string(to_string(ECertificate::Kind::separable_floor)) ==
        "separable-floor");
}

TEST_CASE("witness value agrees with the activation indicator") {
  Rng rng(72);
  const double lambda = 0.8;
  const CertifiedState gadget = gadget_family_state(0.7, 2, 2);
  CHECK(gadget.cert.value == doctest::Approx(0.7).epsilon(1e-15));
  const WitnessOperator w = witness_from_rho(gadget, lambda, 2);
  CHECK(max_abs_diff(w.w, Matrix(w.w.adjoint())) < 1e-12);
  CHECK(w.lambda == lambda);
  for (int trial = 0; trial < 25; ++trial) {
    const DensityOperator sigma = random_bipartite(2, 2, rng);
    CHECK(std::abs(witness_value(w, sigma) -
                   activation_condition(gadget.rho, sigma, lambda, 2)) <
          1e-10);
  }
}

TEST_CASE("witness is nonnegative on products yet detects the target") {
  Rng rng(73);
  const WitnessOperator w =
      witness_from_rho(gadget_family_state(0.7, 2, 2), 0.8, 2);
  CHECK(witness_min_over_products(w, 20000, 74) >= -1e-9);
  for (int trial = 0; trial < 500; ++trial) {
    const DensityOperator sep = sample_separable(2, 2, 4, rng);
    CHECK(witness_value(w, sep) >= -1e-10);
  }
  const DensityOperator target = isotropic(0.9, 2, "A1", "B1");
  CHECK(witness_value(w, target) < -0.04);
}

TEST_CASE("gadget certificates match the seesaw estimate") {
  SeesawConfig cfg;
  cfg.restarts = 24;
  cfg.max_iterations = 300;
  cfg.seed = 75;

  const CertifiedState g2 = gadget_family_state(0.7, 2, 2);
  CHECK(g2.cert.value == doctest::Approx(0.7).epsilon(1e-15));
  const double e2 = e_d_seesaw(g2.rho, 2, cfg).e_lower;
  CHECK(e2 <= g2.cert.value + 1e-3);
  CHECK(e2 >= g2.cert.value - 1e-3);

  // biased noise: the optimum balances the two weights first
  const CertifiedState gb = gadget_family_state(0.6, 2, 2, 0.2);
  const double cert_b = 0.6 / (0.6 + 2.0 * 0.4 * std::sqrt(0.2 * 0.8));
  CHECK(gb.cert.value == doctest::Approx(cert_b).epsilon(1e-14));
  const double eb = e_d_seesaw(gb.rho, 2, cfg).e_lower;
  CHECK(eb <= gb.cert.value + 2e-3);
  CHECK(eb >= gb.cert.value - 2e-3);

  // below the floor the certificate saturates at 1/d
  const CertifiedState low = gadget_family_state(0.2, 2, 2);
  CHECK(low.cert.value == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(gadget_family_state(0.35, 3, 3), ArgumentError);
  CHECK_THROWS_AS(gadget_family_state(0.5, 4, 2), ArgumentError);
  CHECK_THROWS_AS(gadget_family_state(1.5, 2, 2), ArgumentError);
  CHECK_THROWS_AS(gadget_family_state(0.5, 2, 0), ArgumentError);
  CHECK_THROWS_AS(gadget_family_state(0.5, 2, 2, -0.1), ArgumentError);
  CHECK_THROWS_AS(gadget_family_state(0.5, 2, 2, 1.1), ArgumentError);
}

TEST_CASE("separable floor states sit exactly on the floor") {
  Rng rng(76);
  const Matrix g = ginibre(2, 2, rng);
  const Matrix h = ginibre(2, 2, rng);
  const CertifiedState s = separable_floor_state(g, h);
  CHECK(s.cert.value == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.cert.kind == ECertificate::Kind::separable_floor);
  REQUIRE(s.rho.factors.size() == 4);

  SeesawConfig cfg;
  cfg.restarts = 12;
  cfg.max_iterations = 200;
  cfg.seed = 77;
  const double e = e_d_seesaw(s.rho, 2, cfg).e_lower;
  CHECK(std::abs(e - 0.5) < 1e-6);

  CHECK_THROWS_AS(separable_floor_state(Matrix::Zero(2, 2), h),
                  ArgumentError);
  CHECK_THROWS_AS(separable_floor_state(ginibre(2, 3, rng), h),
                  ArgumentError);
}

TEST_CASE("sigma_alpha family: trace, ppt boundary, validation") {
  for (double alpha : {2.0, 3.0, 4.0}) {
    const DensityOperator s = sigma_alpha(alpha);
    CHECK(std::abs(s.mat.trace().real() - 1.0) < 1e-12);
    CHECK(ppt_check(s, {"A1"}).is_ppt);
  }
  CHECK_FALSE(ppt_check(sigma_alpha(4.7), {"A1"}).is_ppt);
  CHECK_THROWS_AS(sigma_alpha(1.9), ArgumentError);
  CHECK_THROWS_AS(sigma_alpha(5.1), ArgumentError);
}

TEST_CASE("free entanglement activates the flag family") {
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
      run_activation_experiment(sigma, 0.8, 2, family, budget);
  REQUIRE(out.found);
  REQUIRE(out.instance.has_value());
  const ActivationInstance& inst = *out.instance;
  CHECK(inst.e_rho_bound.value == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(inst.condition_value < -0.04);
  // analytic value of the activation-filtered overlap
  const double expected = 0.63 / (0.7 * (0.9 + 0.1 / 3.0) + 0.02);
  CHECK(inst.e_joint_lower.e_lower >=
        expected - 1e-9);
  CHECK(inst.e_joint_lower.e_lower > 0.8 + 0.1);

  // the reported filter reproduces the bound through the public path
  const DensityOperator joint = permute_factors(
      tensor_product(DensityOperator::trusted(sigma.mat,
                                              {{"A1", 2}, {"B1", 2}},
                                              sigma.normalized),
                     inst.rho),
      {"A1", "A2", "A3", "B1", "B2", "B3"});
  const FilteredState fs =
      apply_filter(joint, inst.e_joint_lower.best_filter);
  CHECK(std::abs(fidelity_with_phid(fs.state, 2) -
                 inst.e_joint_lower.e_lower) < 1e-8);
}

// For PPT sigma the indicator can reach zero but never drop below it on this
// family: each 2x2 partial-transpose minor of sigma caps the coherence the
// filtered signal can collect at the geometric mean of the noise couplings,
// so e_act <= cert with equality exactly at minor saturation.  sigma_alpha(4)
// saturates every minor, and the bias w = 1/5 balances the couplings, so the
// indicator vanishes there identically in the inner fidelity.
TEST_CASE("ppt sigma_alpha sits exactly on the activation boundary") {
  const DensityOperator edge = sigma_alpha(4.0);
  REQUIRE(ppt_check(edge, {"A1"}).is_ppt);

  double min_cond = std::numeric_limits<double>::infinity();
  for (double f : {0.4, 0.5, 0.6, 0.7}) {
    for (double w : {0.1, 0.2, 0.35, 0.5}) {
      const CertifiedState cand = gadget_family_state(f, 2, 3, w);
      const double cond =
          activation_condition(cand.rho, edge, cand.cert.value, 2);
      CHECK(cond >= -1e-12);
      min_cond = std::min(min_cond, cond);
      // knife edge whenever the fidelity branch dominates the 1/2 floor
      if (w == 0.2 && f >= 4.0 / 9.0) CHECK(std::abs(cond) < 1e-12);
    }
  }
  CHECK(min_cond < 1e-12);  // the boundary is actually attained

  // strictly inside the PPT cone the slack is strict
  const CertifiedState cand = gadget_family_state(0.5, 2, 3, 0.2);
  const double slack =
      activation_condition(cand.rho, sigma_alpha(3.5), cand.cert.value, 2);
  CHECK(slack > 0.0);
}

TEST_CASE("npt sigma_alpha activates the biased flag family") {
  ActivationBudget budget;
  budget.joint_seesaw.restarts = 6;
  budget.joint_seesaw.max_iterations = 200;
  budget.joint_seesaw.tolerance = 1e-8;
  budget.joint_seesaw.seed = 12345;

  FamilySpec family;
  family.kind = FamilySpec::Kind::flag_gadget;
  family.inner_fidelities = {0.5};
  family.noise_biases = {0.1};

  const DensityOperator sigma = sigma_alpha(4.7);
  REQUIRE_FALSE(ppt_check(sigma, {"A1"}).is_ppt);
  const ActivationOutcome out =
      run_activation_experiment(sigma, 0.67, 2, family, budget);
  REQUIRE(out.found);
  const ActivationInstance& inst = *out.instance;
  CHECK(inst.e_rho_bound.value == doctest::Approx(0.625).epsilon(1e-14));
  CHECK(inst.condition_value < -1e-4);
  // analytic value of the activation-filtered overlap: 2F / (2F + 0.74 (1-F))
  CHECK(inst.e_joint_lower.e_lower >= 1.0 / 1.37 - 1e-9);

  // the reported filter reproduces the bound through the public path
  const DensityOperator joint = permute_factors(
      tensor_product(DensityOperator::trusted(sigma.mat,
                                              {{"A1", 3}, {"B1", 3}},
                                              sigma.normalized),
                     inst.rho, 1024),
      {"A1", "A2", "A3", "B1", "B2", "B3"});
  const FilteredState fs =
      apply_filter(joint, inst.e_joint_lower.best_filter);
  CHECK(std::abs(fidelity_with_phid(fs.state, 2) -
                 inst.e_joint_lower.e_lower) < 1e-8);
}

TEST_CASE("separable-floor family activates against free entanglement") {
  ActivationBudget budget;
  budget.joint_seesaw.restarts = 8;
  budget.joint_seesaw.max_iterations = 200;
  budget.joint_seesaw.seed = 12345;
  budget.sigma_seesaw.restarts = 16;
  budget.sigma_seesaw.max_iterations = 300;
  budget.sigma_seesaw.seed = 12345;

  FamilySpec family;
  family.kind = FamilySpec::Kind::separable_floor;

  const ActivationOutcome hit = run_activation_experiment(
      max_entangled(2, "A1", "B1"), 0.6, 2, family, budget);
  REQUIRE(hit.found);
  CHECK(hit.instance->e_rho_bound.kind ==
        ECertificate::Kind::separable_floor);
  CHECK(hit.instance->condition_value < 0.0);
  CHECK(hit.instance->e_joint_lower.e_lower > 0.6);

  // a product sigma has nothing to activate with
  Vector v = Vector::Zero(4);
  v[0] = 1.0;
  const DensityOperator product = DensityOperator::trusted(
      Matrix(v * v.adjoint()), {{"A1", 2}, {"B1", 2}}, true);
  const ActivationOutcome miss =
      run_activation_experiment(product, 0.6, 2, family, budget);
  CHECK_FALSE(miss.found);
  CHECK(miss.min_condition_value >= -1e-9);
  CHECK_FALSE(miss.message.empty());

  // and so does the gadget scan
  FamilySpec gadget;
  gadget.kind = FamilySpec::Kind::flag_gadget;
  const ActivationOutcome miss2 =
      run_activation_experiment(product, 0.6, 2, gadget, budget);
  CHECK_FALSE(miss2.found);
  CHECK(miss2.min_condition_value >= -1e-9);

  CHECK_THROWS_AS(run_activation_experiment(product, 0.3, 2, family, budget),
                  ArgumentError);
}

TEST_CASE("gap operator probe: identity control and random separable maps") {
  SeparableMapSpec id;
  id.terms.push_back(
      {Matrix::Identity(2, 2), Matrix::Identity(2, 2), 2});
  const LemmaProbeResult control = lemma_probe(id, 0.75, 2);
  CHECK(control.psd_holds);
  CHECK(control.trace_gap == 0.0);
  CHECK(std::abs(control.min_eigenvalue) < 1e-15);

  CHECK_THROWS_AS(lemma_probe(id, 0.2, 2), ArgumentError);
  CHECK_THROWS_AS(lemma_probe(id, 1.0, 2), ArgumentError);

  Rng rng(78);
  int counterexamples = 0;
  int psd_cases = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    SeparableMapSpec map;
    const int n_terms = 1 + static_cast<int>(rng.integer(3));
    for (int k = 0; k < n_terms; ++k) {
      map.terms.push_back(
          {contracted(ginibre(2, 2, rng)), contracted(ginibre(2, 2, rng)),
           2});
    }
    const double lambda = (trial % 2 == 0) ? 0.5 : 0.75;
    const LemmaProbeResult r = lemma_probe(map, lambda, 2);
    if (r.psd_holds) {
      ++psd_cases;
      CHECK(std::abs(r.trace_gap) <= 1e-6 * 4);
      if (std::abs(r.trace_gap) > 1e-6 * 4) ++counterexamples;
    }
  }
  CHECK(counterexamples == 0);
}

TEST_CASE("filtered Werner states never gain entanglement") {
  SeparableMapSpec id;
  id.terms.push_back(
      {Matrix::Identity(2, 2), Matrix::Identity(2, 2), 2});
  const MuProbeResult fixed = werner_mu_monotonicity_probe(0.8, 2, id);
  CHECK(fixed.flag);
  CHECK(fixed.mu_prime == doctest::Approx(0.8).epsilon(1e-12));

  Rng rng(79);
  for (double mu : {0.0, 0.8}) {
    for (int trial = 0; trial < 1000; ++trial) {
      SeparableMapSpec map;
      const int n_terms = 1 + static_cast<int>(rng.integer(2));
      for (int k = 0; k < n_terms; ++k) {
        map.terms.push_back({ginibre(2, 2, rng), ginibre(2, 2, rng), 2});
      }
      MuProbeResult r;
      try {
        r = werner_mu_monotonicity_probe(mu, 2, map);
      } catch (const FilterAnnihilationError&) {
        continue;
      }
      CHECK(r.flag);
      CHECK(std::max(r.mu_prime, 0.5) <= std::max(mu, 0.5) + 1e-9);
    }
  }
}
