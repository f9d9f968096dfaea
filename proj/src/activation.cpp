#include "entangle/activation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "entangle/errors.hpp"
#include "entangle/parallel.hpp"
#include "entangle/states.hpp"
#include "entangle/tensor.hpp"

namespace entangle {

namespace {

// Validate the (A2, A3, B2, B3) shape of a rho-side state and return
// (dim A2, dim B2); A3 and B3 must both be C^d.
std::pair<int, int> rho_side_dims(const DensityOperator& rho, int d) {
  if (rho.factors.size() != 4) {
    throw ArgumentError("rho must have four factors (A2, A3, B2, B3)");
  }
  if (rho.factors[1].dim != d || rho.factors[3].dim != d) {
    throw ArgumentError("the second and fourth factors of rho must be C^d");
  }
  return {rho.factors[0].dim, rho.factors[2].dim};
}

void check_sigma_dims(const DensityOperator& sigma, int ma, int mb) {
  if (sigma.factors.size() != 2) {
    throw ArgumentError("sigma must have two factors (A1, B1)");
  }
  if (sigma.factors[0].dim != ma || sigma.factors[1].dim != mb) {
    throw ArgumentError("sigma dimensions must match (dim A2, dim B2)");
  }
}

// kron(op_12, op_33) laid out on [A2, B2, A3, B3], permuted to the canonical
// rho order [A2, A3, B2, B3].
Matrix interleave_with_rho(const Matrix& op_12, const Matrix& op_33, int ma,
                           int mb, int d) {
  const long dim = static_cast<long>(ma) * mb * d * d;
  Matrix x = tensor_product(op_12, op_33,
                            std::max(dim, kDefaultMaxDimension));
  const Factorization f = {
      {"A2", ma}, {"B2", mb}, {"A3", d}, {"B3", d}};
  return permute_factors(x, f, {"A2", "A3", "B2", "B3"});
}

Matrix lambda_minus_phi(double lambda, int d) {
  const DensityOperator phi = max_entangled(d);
  return lambda * Matrix::Identity(phi.dim(), phi.dim()) - phi.mat;
}

std::string relabel_note(const Factorization& f) {
  std::ostringstream os;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) os << " (x) ";
    os << f[i].label << ":" << f[i].dim;
  }
  return os.str();
}

}  // namespace

const char* to_string(ECertificate::Kind kind) {
  switch (kind) {
    case ECertificate::Kind::separable_floor:
      return "separable-floor";
    case ECertificate::Kind::analytic_family:
      return "analytic-family";
  }
  return "unknown";
}

LocalFilterPair activation_filter(int dim_a1, int dim_b1, int d) {
  if (dim_a1 < 1 || dim_b1 < 1 || d < 2) {
    throw ArgumentError("dimensions must be positive and d at least 2");
  }
  // row index i on C^d, column index (a1, a2, a3) row-major
  auto build = [d](int m) {
    Matrix f = Matrix::Zero(d, static_cast<long>(m) * m * d);
    const double amp = 1.0 / std::sqrt(static_cast<double>(m));
    for (int i = 0; i < d; ++i) {
      for (int a = 0; a < m; ++a) {
        f(i, (static_cast<long>(a) * m + a) * d + i) = amp;
      }
    }
    return f;
  };
  return LocalFilterPair{build(dim_a1), build(dim_b1), d};
}

IdentityCheckResult activation_identity_check(const DensityOperator& rho,
                                              const DensityOperator& sigma,
                                              int d) {
  const auto [ma, mb] = rho_side_dims(rho, d);
  check_sigma_dims(sigma, ma, mb);

  // LHS: filter the joint state with the activation pair.
  DensityOperator sigma1 = DensityOperator::trusted(
      sigma.mat, {{"A1", ma}, {"B1", mb}}, sigma.normalized);
  DensityOperator rho2 = DensityOperator::trusted(
      rho.mat, {{"A2", ma}, {"A3", d}, {"B2", mb}, {"B3", d}},
      rho.normalized);
  const long joint_dim = sigma1.dim() * rho2.dim();
  DensityOperator joint = tensor_product(
      sigma1, rho2, std::max(joint_dim, kDefaultMaxDimension));
  joint = permute_factors(joint, {"A1", "A2", "A3", "B1", "B2", "B3"});
  const FilteredState lhs =
      apply_filter(joint, activation_filter(ma, mb, d));

  // RHS: tr_{A2,B2}[rho (sigma^T (x) I)] on (A3, B3).
  const Matrix st = sigma.mat.transpose();
  const Matrix x = interleave_with_rho(
      st, Matrix::Identity(static_cast<long>(d) * d, static_cast<long>(d) * d),
      ma, mb, d);
  const Matrix rhs = partial_trace(Matrix(rho2.mat * x), rho2.factors,
                                   {"A3", "B3"});

  IdentityCheckResult out;
  out.z = 1.0 / (static_cast<double>(ma) * mb);
  out.max_residual =
      (lhs.state.mat - out.z * rhs).cwiseAbs().maxCoeff();
  return out;
}

double activation_condition(const DensityOperator& rho,
                            const DensityOperator& sigma, double lambda,
                            int d) {
  if (d < 2) throw ArgumentError("local dimension must be at least 2");
  const auto [ma, mb] = rho_side_dims(rho, d);
  check_sigma_dims(sigma, ma, mb);
  const Matrix st = sigma.mat.transpose();
  const Matrix x = interleave_with_rho(st, lambda_minus_phi(lambda, d), ma,
                                       mb, d);
  return (rho.mat * x).trace().real();
}

WitnessOperator witness_from_rho(const CertifiedState& rho, double lambda,
                                 int d) {
  if (d < 2) throw ArgumentError("local dimension must be at least 2");
  if (lambda < 1.0 / d || lambda >= 1.0) {
    throw ArgumentError("lambda must lie in [1/d, 1)");
  }
  if (!(rho.cert.value <= lambda)) {
    throw PreconditionError(
        "certificate bound exceeds lambda; the witness construction needs "
        "e_d(rho) <= lambda");
  }
  const auto [ma, mb] = rho_side_dims(rho.rho, d);

  const Matrix i12 = Matrix::Identity(static_cast<long>(ma) * mb,
                                      static_cast<long>(ma) * mb);
  const Matrix e = interleave_with_rho(i12, lambda_minus_phi(lambda, d), ma,
                                       mb, d);
  const Factorization f = {
      {"A2", ma}, {"A3", d}, {"B2", mb}, {"B3", d}};
  Matrix w = partial_trace(Matrix(rho.rho.mat * e), f, {"A2", "B2"});
  w = 0.5 * (w + Matrix(w.adjoint()));

  WitnessOperator out;
  out.w = std::move(w);
  out.factors = {{"A1", ma}, {"B1", mb}};
  out.lambda = lambda;
  out.d = d;
  std::ostringstream prov;
  prov << "tr_{A3,B3}[rho (I (x) (lambda I - phi_d))] with lambda=" << lambda
       << ", d=" << d << ", rho certified " << to_string(rho.cert.kind)
       << " <= " << rho.cert.value << " on " << relabel_note(rho.rho.factors);
  out.provenance = prov.str();
  return out;
}

double witness_min_over_products(const WitnessOperator& w, int n_samples,
                                 std::uint64_t seed) {
  if (n_samples < 1) throw ArgumentError("sample count must be positive");
  if (w.factors.size() != 2) {
    throw ArgumentError("witness must act on two factors");
  }
  const int da = w.factors[0].dim;
  const int db = w.factors[1].dim;
  const int chunk = 1024;
  const int n_chunks = (n_samples + chunk - 1) / chunk;
  std::vector<double> mins(n_chunks,
                           std::numeric_limits<double>::infinity());
  parallel_for(n_chunks, [&](long c) {
    Rng rng(seed, static_cast<std::uint64_t>(c));
    const int lo = static_cast<int>(c) * chunk;
    const int hi = std::min(n_samples, lo + chunk);
    double m = std::numeric_limits<double>::infinity();
    for (int i = lo; i < hi; ++i) {
      const Vector a = haar_random_pure(da, rng);
      const Vector b = haar_random_pure(db, rng);
      Vector ab(static_cast<long>(da) * db);
      for (int r = 0; r < da; ++r) {
        ab.segment(static_cast<long>(r) * db, db) = a[r] * b;
      }
      m = std::min(m, (ab.adjoint() * w.w * ab)(0, 0).real());
    }
    mins[c] = m;
  });
  return *std::min_element(mins.begin(), mins.end());
}

double witness_value(const WitnessOperator& w, const DensityOperator& sigma) {
  if (sigma.dim() != w.w.rows()) {
    throw ArgumentError("sigma dimension does not match the witness");
  }
  return (w.w * sigma.mat.transpose()).trace().real();
}

CertifiedState gadget_family_state(double f_inner, int d, int m,
                                   double noise_bias) {
  if (d != 2) {
    throw ArgumentError(
        "the flag family certificate is only established for d = 2");
  }
  if (m < 1) throw ArgumentError("flag dimension must be positive");
  if (f_inner < 0.0 || f_inner > 1.0) {
    throw ArgumentError("inner fidelity must lie in [0, 1]");
  }
  if (noise_bias < 0.0 || noise_bias > 1.0) {
    throw ArgumentError("noise bias must lie in [0, 1]");
  }

  // inner state on C^2 (x) C^2
  const DensityOperator phi = max_entangled(d);
  Matrix inner = f_inner * phi.mat;
  inner(1, 1) += (1.0 - f_inner) * (1.0 - noise_bias);  // |01><01|
  inner(2, 2) += (1.0 - f_inner) * noise_bias;          // |10><10|

  const long side = static_cast<long>(m) * d;
  const long dim = side * side;
  Matrix mat = Matrix::Zero(dim, dim);
  for (int c = 0; c < m; ++c) {
    Matrix jc = Matrix::Zero(side, d);
    for (int u = 0; u < d; ++u) {
      jc((static_cast<long>((c - u) % m + m) % m) * d + u, u) = 1.0;
    }
    const Matrix j2 = tensor_product(jc, jc, std::max(dim, kDefaultMaxDimension));
    mat += j2 * inner * j2.adjoint();
  }
  mat /= static_cast<double>(m);

  // Balancing the two noise weights with an invertible local filter leaves a
  // Bell-diagonal state; its largest Bell weight is the exact optimum.
  const double s = 2.0 * std::sqrt(noise_bias * (1.0 - noise_bias));
  const double cert =
      f_inner > 0.0
          ? std::max(0.5, f_inner / (f_inner + (1.0 - f_inner) * s))
          : 0.5;

  CertifiedState out;
  out.rho = DensityOperator::trusted(
      std::move(mat), {{"A2", m}, {"A3", d}, {"B2", m}, {"B3", d}},
      /*normalized=*/true);
  out.cert.kind = ECertificate::Kind::analytic_family;
  out.cert.value = cert;
  std::ostringstream note;
  note << "flag family, inner fidelity " << f_inner << ", noise bias "
       << noise_bias << ", m=" << m
       << "; bound max(1/2, f / (f + 2 (1-f) sqrt(w (1-w)))) per "
          "docs/activation_families.md";
  out.cert.note = note.str();
  return out;
}

CertifiedState separable_floor_state(const Matrix& g, const Matrix& h) {
  if (g.size() < 1 || h.size() < 1 || !g.allFinite() || !h.allFinite()) {
    throw ArgumentError("generator matrices must be nonempty and finite");
  }
  if (g.cols() != h.cols()) {
    throw ArgumentError("generators must share the local dimension d");
  }
  if (g.cols() < 2) throw ArgumentError("local dimension must be at least 2");
  const double gn = g.norm();
  const double hn = h.norm();
  if (!(gn > 0.0) || !(hn > 0.0)) {
    throw ArgumentError("generator matrices must be nonzero");
  }

  auto vec = [](const Matrix& m, double n) {
    Vector v(m.size());
    for (long r = 0; r < m.rows(); ++r) {
      for (long c = 0; c < m.cols(); ++c) v[r * m.cols() + c] = m(r, c) / n;
    }
    return v;
  };
  const Vector vg = vec(g, gn);
  const Vector vh = vec(h, hn);
  Vector v(vg.size() * vh.size());
  for (long i = 0; i < vg.size(); ++i) {
    v.segment(i * vh.size(), vh.size()) = vg[i] * vh;
  }
  Matrix mat = v * v.adjoint();

  CertifiedState out;
  out.rho = DensityOperator::trusted(
      std::move(mat),
      {{"A2", static_cast<int>(g.rows())}, {"A3", static_cast<int>(g.cols())},
       {"B2", static_cast<int>(h.rows())}, {"B3", static_cast<int>(h.cols())}},
      /*normalized=*/true);
  out.cert.kind = ECertificate::Kind::separable_floor;
  out.cert.value = 1.0 / g.cols();
  out.cert.note =
      "pure product state across the A|B cut: the fraction sits at the "
      "floor 1/d exactly";
  return out;
}

DensityOperator sigma_alpha(double alpha, const std::string& la,
                            const std::string& lb) {
  if (alpha < 2.0 || alpha > 5.0) {
    throw ArgumentError("alpha must lie in [2, 5]");
  }
  const DensityOperator phi = max_entangled(3, la, lb);
  Matrix mat = (2.0 / 7.0) * phi.mat;
  auto bump = [&mat](int i, int j, double w) {
    const long idx = static_cast<long>(i) * 3 + j;
    mat(idx, idx) += w / 3.0;
  };
  const double wp = alpha / 7.0;
  const double wm = (5.0 - alpha) / 7.0;
  bump(0, 1, wp);
  bump(1, 2, wp);
  bump(2, 0, wp);
  bump(1, 0, wm);
  bump(2, 1, wm);
  bump(0, 2, wm);
  return DensityOperator::trusted(std::move(mat), {{la, 3}, {lb, 3}},
                                  /*normalized=*/true);
}

DensityOperator sample_separable(int dim_a, int dim_b, int max_terms,
                                 Rng& rng) {
  if (dim_a < 1 || dim_b < 1 || max_terms < 1) {
    throw ArgumentError("dimensions and term count must be positive");
  }
  const int k = 1 + static_cast<int>(rng.integer(max_terms));
  std::vector<double> w(k);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    w[i] = rng.uniform() + 1e-12;
    total += w[i];
  }
  const long dim = static_cast<long>(dim_a) * dim_b;
  Matrix mat = Matrix::Zero(dim, dim);
  for (int i = 0; i < k; ++i) {
    const Vector a = haar_random_pure(dim_a, rng);
    const Vector b = haar_random_pure(dim_b, rng);
    Vector ab(dim);
    for (int r = 0; r < dim_a; ++r) {
      ab.segment(static_cast<long>(r) * dim_b, dim_b) = a[r] * b;
    }
    mat += (w[i] / total) * (ab * ab.adjoint());
  }
  return DensityOperator::trusted(std::move(mat),
                                  {{"A1", dim_a}, {"B1", dim_b}},
                                  /*normalized=*/true);
}

namespace {

// Assemble and verify one candidate instance; returns it when the joint
// seesaw clears lambda.
std::optional<ActivationInstance> verify_candidate(
    const CertifiedState& cand, const DensityOperator& sigma, double lambda,
    int d, double condition, const ActivationBudget& budget) {
  const auto [ma, mb] = rho_side_dims(cand.rho, d);
  DensityOperator sigma1 = DensityOperator::trusted(
      sigma.mat, {{"A1", ma}, {"B1", mb}}, sigma.normalized);
  const long joint_dim = sigma1.dim() * cand.rho.dim();
  DensityOperator joint = tensor_product(
      sigma1, cand.rho, std::max(joint_dim, kDefaultMaxDimension));
  joint = permute_factors(joint, {"A1", "A2", "A3", "B1", "B2", "B3"});

  const SeesawResult joint_seesaw = e_d_seesaw(
      joint, d, budget.joint_seesaw, {activation_filter(ma, mb, d)});
  if (!(joint_seesaw.e_lower > lambda)) return std::nullopt;

  ActivationInstance inst;
  inst.rho = cand.rho;
  inst.sigma = sigma;
  inst.lambda = lambda;
  inst.d = d;
  inst.e_rho_bound = cand.cert;
  inst.e_joint_lower = joint_seesaw;
  inst.condition_value = condition;
  return inst;
}

}  // namespace

ActivationOutcome run_activation_experiment(const DensityOperator& sigma,
                                            double lambda, int d,
                                            const FamilySpec& family,
                                            const ActivationBudget& budget) {
  if (d < 2) throw ArgumentError("local dimension must be at least 2");
  if (lambda < 1.0 / d || lambda >= 1.0) {
    throw ArgumentError("lambda must lie in [1/d, 1)");
  }
  if (sigma.factors.size() != 2) {
    throw ArgumentError("sigma must have two factors (A1, B1)");
  }
  const int ma = sigma.factors[0].dim;
  const int mb = sigma.factors[1].dim;

  ActivationOutcome out;
  out.min_condition_value = std::numeric_limits<double>::infinity();

  std::vector<CertifiedState> candidates;
  if (family.kind == FamilySpec::Kind::flag_gadget) {
    if (d != 2) {
      throw ArgumentError(
          "the flag family certificate is only established for d = 2");
    }
    if (ma != mb) {
      throw ArgumentError(
          "the flag family needs equal local dimensions on sigma");
    }
    std::vector<double> grid = family.inner_fidelities;
    if (grid.empty()) grid = {lambda, 0.5 * (lambda + 1.0 / d)};
    std::vector<double> biases = family.noise_biases;
    if (biases.empty()) biases = {0.5};
    for (double f : grid) {
      for (double w : biases) {
        CertifiedState cand = gadget_family_state(f, d, ma, w);
        if (cand.cert.value > lambda + 1e-12) continue;  // above lambda
        candidates.push_back(std::move(cand));
      }
    }
    if (candidates.empty()) {
      out.message = "no flag-family member has a certificate below lambda";
      return out;
    }
  } else {
    // Separable floor: seesaw on sigma^T picks the generators.  A filter
    // pair (A, B) reaching fidelity e on sigma^T turns, via G = A', H = B',
    // into a floor state whose activation indicator is z (lambda - e) times
    // the filter weight: negative exactly when e > lambda.
    DensityOperator sigma_t = DensityOperator::trusted(
        sigma.mat.transpose(), {{"A1", ma}, {"B1", mb}}, sigma.normalized);
    const SeesawResult s = e_d_seesaw(sigma_t, d, budget.sigma_seesaw);
    candidates.push_back(separable_floor_state(
        Matrix(s.best_filter.a.adjoint()), Matrix(s.best_filter.b.adjoint())));
  }

  for (const auto& cand : candidates) {
    const double cond = activation_condition(cand.rho, sigma, lambda, d);
    out.min_condition_value = std::min(out.min_condition_value, cond);
    if (cond >= 0.0) continue;
    auto inst = verify_candidate(cand, sigma, lambda, d, cond, budget);
    if (inst) {
      out.found = true;
      out.instance = std::move(inst);
      std::ostringstream msg;
      msg << "activation instance found: condition " << cond
          << ", joint lower bound " << out.instance->e_joint_lower.e_lower
          << " > lambda " << lambda;
      out.message = msg.str();
      return out;
    }
  }
  std::ostringstream msg;
  msg << "no activation found; minimum indicator value "
      << out.min_condition_value << " (negative values admit activation)";
  out.message = msg.str();
  return out;
}

LemmaProbeResult lemma_probe(const SeparableMapSpec& map, double lambda,
                             int d) {
  if (d < 2) throw ArgumentError("local dimension must be at least 2");
  if (lambda < 1.0 / d || lambda >= 1.0) {
    throw ArgumentError("lambda must lie in [1/d, 1)");
  }
  if (map.terms.empty()) {
    throw ArgumentError("separable map must have at least one term");
  }
  for (const auto& t : map.terms) {
    if (t.a.rows() != d || t.a.cols() != d || t.b.rows() != d ||
        t.b.cols() != d) {
      throw ArgumentError("probe map terms must be d x d");
    }
  }
  const Matrix k = lambda_minus_phi(lambda, d);
  Matrix omega_k = Matrix::Zero(k.rows(), k.cols());
  for (const auto& t : map.terms) {
    const Matrix ab = tensor_product(t.a, t.b);
    omega_k += ab * k * ab.adjoint();
  }
  Matrix z = k - omega_k;
  z = 0.5 * (z + Matrix(z.adjoint()));

  LemmaProbeResult out;
  const Eigensystem es = hermitian_eigensystem(z);
  out.min_eigenvalue = es.values[es.values.size() - 1];
  out.psd_holds = out.min_eigenvalue >= -1e-9;
  out.trace_gap = z.trace().real();
  return out;
}

MuProbeResult werner_mu_monotonicity_probe(double mu, int d,
                                           const SeparableMapSpec& map) {
  if (map.terms.empty()) {
    throw ArgumentError("separable map must have at least one term");
  }
  for (const auto& t : map.terms) {
    if (t.a.rows() != d || t.a.cols() != d || t.b.rows() != d ||
        t.b.cols() != d) {
      throw ArgumentError("probe map terms must be d x d");
    }
  }
  const DensityOperator omega = werner({mu, d});
  const FilteredState filtered = apply_filter(omega, map);
  const DensityOperator back = filtered.normalized();
  const Matrix pa = antisymmetric_projector(d);
  MuProbeResult out;
  out.mu_prime = (back.mat * pa).trace().real();
  out.flag = std::max(out.mu_prime, 0.5) <= std::max(mu, 0.5) + 1e-9;
  return out;
}

}  // namespace entangle
