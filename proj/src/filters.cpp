#include "entangle/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/SVD>

#include "entangle/errors.hpp"
#include "entangle/parallel.hpp"
#include "entangle/rng.hpp"
#include "entangle/states.hpp"
#include "entangle/tensor.hpp"

namespace entangle {

namespace {

double operator_norm(const Matrix& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd((Eigen::MatrixXcd(m)));
  return svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
}

// A bipartite view of a state: side A first, side B second.
struct Grouped {
  Matrix mat;
  long na = 0;
  long nb = 0;
};

// Two-factor states split (first | second); otherwise factors whose labels
// start with 'A' form side A and those starting with 'B' side B, keeping the
// original relative order within each side.
Grouped group_bipartite(const DensityOperator& rho) {
  Grouped g;
  if (rho.factors.size() < 2) {
    throw ArgumentError("state must have at least two factors");
  }
  if (rho.factors.size() == 2) {
    g.mat = rho.mat;
    g.na = rho.factors[0].dim;
    g.nb = rho.factors[1].dim;
    return g;
  }
  std::vector<std::string> order_a, order_b;
  long na = 1, nb = 1;
  for (const auto& f : rho.factors) {
    if (!f.label.empty() && f.label[0] == 'A') {
      order_a.push_back(f.label);
      na *= f.dim;
    } else if (!f.label.empty() && f.label[0] == 'B') {
      order_b.push_back(f.label);
      nb *= f.dim;
    } else {
      throw ArgumentError(
          "cannot infer the bipartition: factor labels must start with 'A' "
          "or 'B' (or pass a two-factor state)");
    }
  }
  if (order_a.empty() || order_b.empty()) {
    throw ArgumentError("both sides of the bipartition must be nonempty");
  }
  std::vector<std::string> order = order_a;
  order.insert(order.end(), order_b.begin(), order_b.end());
  g.mat = permute_factors(rho.mat, rho.factors, order);
  g.na = na;
  g.nb = nb;
  return g;
}

void check_pair_shapes(const Grouped& g, const LocalFilterPair& f) {
  if (f.a.size() < 1 || f.b.size() < 1) {
    throw ArgumentError("filter matrices must be nonempty");
  }
  if (!f.a.allFinite() || !f.b.allFinite()) {
    throw ArgumentError("filter matrices must be finite");
  }
  if (f.a.cols() != g.na || f.b.cols() != g.nb) {
    throw ArgumentError("filter column counts must match the party dimensions");
  }
}

// (A (x) B) rho (A (x) B)' on the grouped matrix, without forming the
// Kronecker product: contract side B blockwise, then side A.
Matrix conjugate_pair(const Matrix& grouped, long na, long nb, const Matrix& a,
                      const Matrix& b) {
  const long ra = a.rows();
  const long rb = b.rows();
  // side B: blocks indexed by the A digits
  Matrix tmp(na * rb, na * rb);
  for (long s = 0; s < na; ++s) {
    for (long t = 0; t < na; ++t) {
      tmp.block(s * rb, t * rb, rb, rb) =
          b * grouped.block(s * nb, t * nb, nb, nb) * b.adjoint();
    }
  }
  // side A: mix the blocks
  Matrix out = Matrix::Zero(ra * rb, ra * rb);
  for (long i = 0; i < ra; ++i) {
    for (long j = 0; j < ra; ++j) {
      for (long s = 0; s < na; ++s) {
        if (a(i, s) == Complex(0.0, 0.0)) continue;
        for (long t = 0; t < na; ++t) {
          const Complex w = a(i, s) * std::conj(a(j, t));
          if (w == Complex(0.0, 0.0)) continue;
          out.block(i * rb, j * rb, rb, rb) +=
              w * tmp.block(s * rb, t * rb, rb, rb);
        }
      }
    }
  }
  return out;
}

FilteredState finish_filtered(Matrix out, long ra, long rb, double ref_scale) {
  FilteredState fs;
  fs.weight = out.trace().real();
  if (!(fs.weight > 1e-14 * ref_scale)) {
    throw FilterAnnihilationError("filter annihilates the state");
  }
  Matrix sym = 0.5 * (out + Matrix(out.adjoint()));
  fs.state = DensityOperator::trusted(
      std::move(sym),
      {{"A", static_cast<int>(ra)}, {"B", static_cast<int>(rb)}});
  return fs;
}

}  // namespace

DensityOperator FilteredState::normalized() const {
  Matrix m = state.mat / weight;
  return DensityOperator::trusted(std::move(m), state.factors,
                                  /*normalized=*/true);
}

FilteredState apply_filter(const DensityOperator& rho,
                           const LocalFilterPair& f) {
  const Grouped g = group_bipartite(rho);
  check_pair_shapes(g, f);
  Matrix out = conjugate_pair(g.mat, g.na, g.nb, f.a, f.b);
  const double na2 = operator_norm(f.a);
  const double nb2 = operator_norm(f.b);
  const double ref =
      std::abs(rho.trace_real()) * na2 * na2 * nb2 * nb2;
  return finish_filtered(std::move(out), f.a.rows(), f.b.rows(), ref);
}

FilteredState apply_filter(const DensityOperator& rho,
                           const SeparableMapSpec& spec) {
  if (spec.terms.empty()) {
    throw ArgumentError("separable map must have at least one term");
  }
  const Grouped g = group_bipartite(rho);
  const long ra = spec.terms.front().a.rows();
  const long rb = spec.terms.front().b.rows();
  Matrix out = Matrix::Zero(ra * rb, ra * rb);
  double ref = 0.0;
  for (const auto& term : spec.terms) {
    check_pair_shapes(g, term);
    if (term.a.rows() != ra || term.b.rows() != rb) {
      throw ArgumentError("all terms must share the same output dimensions");
    }
    out += conjugate_pair(g.mat, g.na, g.nb, term.a, term.b);
    const double na2 = operator_norm(term.a);
    const double nb2 = operator_norm(term.b);
    ref += na2 * na2 * nb2 * nb2;
  }
  ref *= std::abs(rho.trace_real());
  return finish_filtered(std::move(out), ra, rb, ref);
}

double fidelity_with_phid(const DensityOperator& rho, int d) {
  if (d < 2) throw ArgumentError("local dimension must be at least 2");
  if (rho.factors.size() != 2 || rho.factors[0].dim != d ||
      rho.factors[1].dim != d) {
    throw ArgumentError("state must live on C^d (x) C^d");
  }
  const double tr = rho.trace_real();
  if (!(tr > 0.0)) throw ArgumentError("state must have positive trace");
  const Vector phi = max_entangled_vector(d);
  const double overlap = (phi.adjoint() * rho.mat * phi)(0, 0).real();
  double f = overlap / tr;
  if (f < 0.0 && f > -1e-12) f = 0.0;
  if (f > 1.0 && f < 1.0 + 1e-12) f = 1.0;
  return f;
}

double f_d_from_e(double e, int d) {
  if (d < 2) throw ArgumentError("local dimension must be at least 2");
  const double floor = 1.0 / d;
  if (e < floor - 1e-9 || e > 1.0 + 1e-9) {
    throw ArgumentError("entanglement fraction must lie in [1/d, 1]");
  }
  e = std::clamp(e, floor, 1.0);
  return (1.0 + d * e) / (1.0 + d);
}

namespace {

struct RestartOutcome {
  bool valid = false;
  double value = -1.0;
  LocalFilterPair filter;
  double weight = 0.0;  // output trace on the unit-trace input
  bool converged = false;
  int iterations = 0;
  std::vector<double> objective_trace;
};

Matrix reshape_filter(const Vector& x, long rows, long cols) {
  Matrix a(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long s = 0; s < cols; ++s) a(i, s) = x[i * cols + s];
  }
  return a;
}

Matrix random_filter(long rows, long cols, Rng& rng) {
  Matrix a(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long s = 0; s < cols; ++s) a(i, s) = rng.complex_normal();
  }
  const double n = a.norm();
  return n > 0.0 ? Matrix(a / n) : Matrix::Identity(rows, cols);
}

// Quadratic forms of the A update with B fixed: rho_b is the grouped state
// with B applied to its side, living on (na, d) with composite index s*d + u.
void build_a_step(const Matrix& rho_b, long na, long d, Matrix* num,
                  Matrix* den) {
  const long n = d * na;
  num->resize(n, n);
  for (long a = 0; a < d; ++a) {
    for (long s = 0; s < na; ++s) {
      for (long b = 0; b < d; ++b) {
        for (long t = 0; t < na; ++t) {
          (*num)(a * na + s, b * na + t) = rho_b(t * d + b, s * d + a) /
                                           static_cast<double>(d);
        }
      }
    }
  }
  *num = 0.5 * (*num + Matrix(num->adjoint()));
  // tr over the C^d leg
  Matrix marg = Matrix::Zero(na, na);
  for (long s = 0; s < na; ++s) {
    for (long t = 0; t < na; ++t) {
      Complex acc(0.0, 0.0);
      for (long u = 0; u < d; ++u) acc += rho_b(s * d + u, t * d + u);
      marg(s, t) = acc;
    }
  }
  den->setZero(n, n);
  for (long a = 0; a < d; ++a) {
    den->block(a * na, a * na, na, na) = marg.transpose();
  }
  *den = 0.5 * (*den + Matrix(den->adjoint()));
}

// Quadratic forms of the B update with A fixed: rho_a is the grouped state
// with A applied, living on (d, nb) with composite index i*nb + t.
void build_b_step(const Matrix& rho_a, long nb, long d, Matrix* num,
                  Matrix* den) {
  const long n = d * nb;
  num->resize(n, n);
  for (long a = 0; a < d; ++a) {
    for (long u = 0; u < nb; ++u) {
      for (long b = 0; b < d; ++b) {
        for (long v = 0; v < nb; ++v) {
          (*num)(a * nb + u, b * nb + v) = rho_a(b * nb + v, a * nb + u) /
                                           static_cast<double>(d);
        }
      }
    }
  }
  *num = 0.5 * (*num + Matrix(num->adjoint()));
  Matrix marg = Matrix::Zero(nb, nb);
  for (long u = 0; u < nb; ++u) {
    for (long v = 0; v < nb; ++v) {
      Complex acc(0.0, 0.0);
      for (long i = 0; i < d; ++i) acc += rho_a(i * nb + u, i * nb + v);
      marg(u, v) = acc;
    }
  }
  den->setZero(n, n);
  for (long a = 0; a < d; ++a) {
    den->block(a * nb, a * nb, nb, nb) = marg.transpose();
  }
  *den = 0.5 * (*den + Matrix(den->adjoint()));
}

Matrix apply_b_only(const Matrix& grouped, long na, long nb, const Matrix& b) {
  Matrix out(na * b.rows(), na * b.rows());
  for (long s = 0; s < na; ++s) {
    for (long t = 0; t < na; ++t) {
      out.block(s * b.rows(), t * b.rows(), b.rows(), b.rows()) =
          b * grouped.block(s * nb, t * nb, nb, nb) * b.adjoint();
    }
  }
  return out;
}

Matrix apply_a_only(const Matrix& grouped, long na, long nb, const Matrix& a) {
  const long ra = a.rows();
  Matrix out = Matrix::Zero(ra * nb, ra * nb);
  for (long i = 0; i < ra; ++i) {
    for (long j = 0; j < ra; ++j) {
      for (long s = 0; s < na; ++s) {
        if (a(i, s) == Complex(0.0, 0.0)) continue;
        for (long t = 0; t < na; ++t) {
          const Complex w = a(i, s) * std::conj(a(j, t));
          if (w == Complex(0.0, 0.0)) continue;
          out.block(i * nb, j * nb, nb, nb) +=
              w * grouped.block(s * nb, t * nb, nb, nb);
        }
      }
    }
  }
  return out;
}

// Objective of the grouped problem for an explicit filter pair (used for the
// final certified re-evaluation).
double true_objective(const Matrix& grouped, long na, long nb,
                      const Matrix& a, const Matrix& b, long d,
                      double* weight) {
  const Matrix out = conjugate_pair(grouped, na, nb, a, b);
  const double w = out.trace().real();
  if (weight) *weight = w;
  if (!(w > 0.0)) return -1.0;
  const Vector phi = max_entangled_vector(static_cast<int>(d));
  const double overlap = (phi.adjoint() * out * phi)(0, 0).real();
  return overlap / w;
}

RestartOutcome run_restart(const Matrix& grouped, long na, long nb, long d,
                           const SeesawConfig& cfg, Matrix a0, Matrix b0,
                           Rng reseed_rng) {
  RestartOutcome out;
  const double eps = cfg.regularization;  // grouped state has unit trace
  Matrix a = std::move(a0);
  Matrix b = std::move(b0);
  {
    const double an = a.norm();
    const double bn = b.norm();
    if (!(an > 0.0) || !(bn > 0.0)) return out;
    a /= an;
    b /= bn;
  }

  double prev = -std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 8; ++attempt) {
    bool degenerate = false;
    out.objective_trace.clear();
    out.converged = false;
    prev = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg.max_iterations; ++it) {
      try {
        Matrix rho_b = apply_b_only(grouped, na, nb, b);
        if (!(rho_b.trace().real() > 1e-14)) {
          degenerate = true;
          break;
        }
        Matrix num, den;
        build_a_step(rho_b, na, d, &num, &den);
        const RayleighResult ra = rayleigh_max(num, den, eps);
        a = reshape_filter(ra.x, d, na);

        Matrix rho_a = apply_a_only(grouped, na, nb, a);
        if (!(rho_a.trace().real() > 1e-14)) {
          degenerate = true;
          break;
        }
        build_b_step(rho_a, nb, d, &num, &den);
        const RayleighResult rb = rayleigh_max(num, den, eps);
        b = reshape_filter(rb.x, d, nb);

        out.objective_trace.push_back(rb.value);
        out.iterations = it + 1;
        if (rb.value - prev < cfg.tolerance && it > 0) {
          out.converged = true;
          break;
        }
        prev = rb.value;
      } catch (const ArgumentError&) {
        // an almost-annihilating filter can defeat the solver's tolerance
        // checks before the trace guard trips; treat it as degenerate
        degenerate = true;
        break;
      } catch (const NumericError&) {
        degenerate = true;
        break;
      }
    }
    if (!degenerate) break;
    // Discard the degenerate trajectory and re-seed from this restart's
    // own stream; zero-probability filters are excluded by definition.
    a = random_filter(d, na, reseed_rng);
    b = random_filter(d, nb, reseed_rng);
  }

  double weight = 0.0;
  const double value = true_objective(grouped, na, nb, a, b, d, &weight);
  if (!(weight > 1e-14) || !std::isfinite(value)) return out;
  out.valid = true;
  out.value = value;
  out.weight = weight;
  out.filter = LocalFilterPair{a, b, static_cast<int>(d)};
  return out;
}

}  // namespace

SeesawResult e_d_seesaw(const DensityOperator& rho, int d,
                        const SeesawConfig& cfg,
                        const std::vector<LocalFilterPair>& warm_starts) {
  if (d < 2) throw ArgumentError("local dimension must be at least 2");
  if (cfg.restarts < 1 || cfg.max_iterations < 1 || !(cfg.tolerance > 0.0) ||
      !(cfg.regularization > 0.0)) {
    throw ArgumentError("seesaw configuration values must be positive");
  }
  const double tr = rho.trace_real();
  if (!(tr > 0.0)) throw ArgumentError("state must have positive trace");

  Grouped g = group_bipartite(rho);
  // The objective is scale invariant, so normalize once up front.
  g.mat /= tr;
  const long na = g.na;
  const long nb = g.nb;

  for (const auto& ws : warm_starts) check_pair_shapes(g, ws);

  // Deterministic candidate list: caller warm starts, then the basis-pair
  // floor filter (value exactly 1/d), the identity when shapes allow, and
  // seeded random filters up to the restart budget.
  std::vector<std::pair<Matrix, Matrix>> candidates;
  for (const auto& ws : warm_starts) {
    if (ws.a.rows() != d || ws.b.rows() != d) {
      throw ArgumentError("warm starts must map into C^d");
    }
    candidates.emplace_back(ws.a, ws.b);
  }
  {
    long best = 0;
    double best_diag = -std::numeric_limits<double>::infinity();
    for (long q = 0; q < na * nb; ++q) {
      const double v = g.mat(q, q).real();
      if (v > best_diag) {
        best_diag = v;
        best = q;
      }
    }
    Matrix fa = Matrix::Zero(d, na);
    Matrix fb = Matrix::Zero(d, nb);
    fa(0, best / nb) = 1.0;
    fb(0, best % nb) = 1.0;
    candidates.emplace_back(std::move(fa), std::move(fb));
  }
  if (na == d && nb == d) {
    candidates.emplace_back(Matrix::Identity(d, d), Matrix::Identity(d, d));
  }
  const std::size_t n_restarts =
      std::max<std::size_t>(cfg.restarts, candidates.size());
  for (std::size_t r = candidates.size(); r < n_restarts; ++r) {
    Rng rng(cfg.seed, r);
    candidates.emplace_back(random_filter(d, na, rng),
                            random_filter(d, nb, rng));
  }

  std::vector<RestartOutcome> outcomes(n_restarts);
  parallel_for(static_cast<long>(n_restarts), [&](long r) {
    // Re-seed stream offset by the restart count so fresh draws never repeat
    // an initial candidate.
    outcomes[r] = run_restart(g.mat, na, nb, d, cfg, candidates[r].first,
                              candidates[r].second,
                              Rng(cfg.seed, n_restarts + r));
  });

  int best = -1;
  for (std::size_t r = 0; r < n_restarts; ++r) {
    if (!outcomes[r].valid) continue;
    if (best < 0 || outcomes[r].value > outcomes[best].value) {
      best = static_cast<int>(r);
    }
  }
  if (best < 0) {
    throw NumericError("all seesaw restarts degenerated");
  }
  RestartOutcome& win = outcomes[best];

  SeesawResult result;
  result.best_filter = win.filter;
  result.converged = win.converged;
  result.iterations = win.iterations;
  result.objective_trace = std::move(win.objective_trace);
  result.trace_of_filtered = win.weight;

  // Certify by re-evaluating the stored filter through the public path.
  const FilteredState fs = apply_filter(rho, result.best_filter);
  result.e_lower = fidelity_with_phid(fs.state, d);

  const double na_op = operator_norm(result.best_filter.a);
  const double nb_op = operator_norm(result.best_filter.b);
  double p = (fs.weight / tr) / (na_op * na_op * nb_op * nb_op);
  result.success_probability = std::clamp(p, 0.0, 1.0);
  return result;
}

bool single_term_dominance_check(const DensityOperator& rho,
                                 const SeparableMapSpec& spec, int d) {
  const FilteredState multi = apply_filter(rho, spec);
  const double f_multi = fidelity_with_phid(multi.state, d);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& term : spec.terms) {
    try {
      const FilteredState single = apply_filter(rho, term);
      best = std::max(best, fidelity_with_phid(single.state, d));
    } catch (const FilterAnnihilationError&) {
      // zero-probability terms cannot dominate
    }
  }
  return best >= f_multi - 1e-10;
}

}  // namespace entangle
