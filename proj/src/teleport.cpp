#include "entangle/teleport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "entangle/errors.hpp"
#include "entangle/parallel.hpp"
#include "entangle/rng.hpp"
#include "entangle/tensor.hpp"

namespace entangle {

namespace {

constexpr int kChunk = 4096;

void check_resource(const DensityOperator& resource, int* d_out) {
  if (resource.factors.size() != 2 ||
      resource.factors[0].dim != resource.factors[1].dim) {
    throw ArgumentError("resource must be a d (x) d two-factor state");
  }
  if (std::abs(resource.trace_real() - 1.0) > 1e-9) {
    throw ArgumentError("resource must be normalized");
  }
  *d_out = resource.factors[0].dim;
}

// Unnormalized post-measurement state of the B side for outcome (a, b):
// (1/d) sum_{s,s'} v_s conj(v_{s'}) rho[(s,.),(s',.)] with v = W_ab' psi.
Matrix outcome_state(const Matrix& rho, int d, const Vector& v) {
  Matrix m = Matrix::Zero(d, d);
  for (int s = 0; s < d; ++s) {
    for (int t = 0; t < d; ++t) {
      const Complex w = v[s] * std::conj(v[t]);
      if (w == Complex(0.0, 0.0)) continue;
      m += w * rho.block(static_cast<long>(s) * d, static_cast<long>(t) * d,
                         d, d);
    }
  }
  return m / static_cast<double>(d);
}

double teleport_fidelity_once(const Matrix& rho, int d, const Vector& psi,
                              const std::vector<Matrix>& weyl,
                              double* trace_out) {
  double f = 0.0;
  double tr = 0.0;
  for (const Matrix& w : weyl) {
    const Vector v = w.adjoint() * psi;
    const Matrix m = outcome_state(rho, d, v);
    // correction W then overlap with psi: <psi| W m W' |psi> = u' m u
    f += (v.adjoint() * m * v)(0, 0).real();
    tr += m.trace().real();
  }
  if (trace_out) *trace_out = tr;
  return f;
}

McEstimate run_mc(const DensityOperator& resource, const TeleportConfig& cfg) {
  int d = 0;
  check_resource(resource, &d);
  if (cfg.d != d) {
    throw ArgumentError("configured dimension does not match the resource");
  }
  if (cfg.n_samples < 1) throw ArgumentError("sample count must be positive");

  std::vector<Matrix> weyl;
  weyl.reserve(static_cast<std::size_t>(d) * d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) weyl.push_back(weyl_operator(d, a, b));
  }

  const int n_chunks = (cfg.n_samples + kChunk - 1) / kChunk;
  std::vector<double> sums(n_chunks, 0.0);
  std::vector<double> sq_sums(n_chunks, 0.0);
  parallel_for(n_chunks, [&](long c) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(c));
    const int lo = static_cast<int>(c) * kChunk;
    const int hi = std::min(cfg.n_samples, lo + kChunk);
    double s = 0.0, s2 = 0.0;
    for (int i = lo; i < hi; ++i) {
      const Vector psi = haar_random_pure(d, rng);
      const double f =
          teleport_fidelity_once(resource.mat, d, psi, weyl, nullptr);
      s += f;
      s2 += f * f;
    }
    sums[c] = s;
    sq_sums[c] = s2;
  });

  double total = 0.0, total_sq = 0.0;
  for (int c = 0; c < n_chunks; ++c) {
    total += sums[c];
    total_sq += sq_sums[c];
  }
  McEstimate out;
  out.n_samples = cfg.n_samples;
  const double n = static_cast<double>(cfg.n_samples);
  out.mean = total / n;
  if (cfg.n_samples > 1) {
    const double var = std::max(0.0, total_sq - n * out.mean * out.mean);
    out.standard_error = std::sqrt(var / (n * (n - 1.0)));
  }
  return out;
}

}  // namespace

Matrix weyl_operator(int d, int a, int b) {
  if (d < 2) throw ArgumentError("local dimension must be at least 2");
  if (a < 0 || a >= d || b < 0 || b >= d) {
    throw ArgumentError("shift and phase indices must lie in [0, d)");
  }
  Matrix w = Matrix::Zero(d, d);
  for (int s = 0; s < d; ++s) {
    const double arg = 2.0 * std::numbers::pi * b * s / d;
    w((s + a) % d, s) = Complex(std::cos(arg), std::sin(arg));
  }
  return w;
}

Vector bell_vector(int d, int a, int b) {
  const Matrix w = weyl_operator(d, a, b);
  Vector v = Vector::Zero(static_cast<long>(d) * d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (int s = 0; s < d; ++s) {
    for (int r = 0; r < d; ++r) {
      v[static_cast<long>(r) * d + s] = amp * w(r, s);
    }
  }
  return v;
}

DensityOperator standard_teleport(const DensityOperator& resource,
                                  const Vector& psi_in) {
  int d = 0;
  check_resource(resource, &d);
  if (psi_in.size() != d) {
    throw ArgumentError("input dimension does not match the resource");
  }
  if (std::abs(psi_in.norm() - 1.0) > 1e-10) {
    throw ArgumentError("input state must be normalized");
  }
  Matrix out = Matrix::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      const Matrix w = weyl_operator(d, a, b);
      const Vector v = w.adjoint() * psi_in;
      out += w * outcome_state(resource.mat, d, v) * w.adjoint();
    }
  }
  const bool unit = std::abs(out.trace().real() - 1.0) <= 1e-10;
  return DensityOperator::trusted(std::move(out), {{"B", d}}, unit);
}

McEstimate average_fidelity_mc(const DensityOperator& resource,
                               const TeleportConfig& cfg) {
  return run_mc(resource, cfg);
}

McEstimate conclusive_fidelity_mc(const DensityOperator& resource,
                                  const LocalFilterPair& filter,
                                  const TeleportConfig& cfg) {
  int d = 0;
  check_resource(resource, &d);
  const FilteredState filtered = apply_filter(resource, filter);
  if (filtered.state.dim() != static_cast<long>(d) * d) {
    throw ArgumentError("filter must map the resource back to C^d (x) C^d");
  }
  return run_mc(filtered.normalized(), cfg);
}

FidelityRelationReport verify_fidelity_relation(
    const DensityOperator& rho, int d, const SeesawConfig& seesaw_cfg,
    const TeleportConfig& mc_cfg) {
  FidelityRelationReport report;
  report.seesaw = e_d_seesaw(rho, d, seesaw_cfg);

  DensityOperator unit = rho;
  const double tr = rho.trace_real();
  if (!(tr > 0.0)) throw ArgumentError("state must have positive trace");
  unit.mat /= tr;
  unit.normalized = true;

  const FilteredState filtered =
      apply_filter(unit, report.seesaw.best_filter);
  report.filter_fidelity = fidelity_with_phid(filtered.state, d);
  report.predicted = f_d_from_e(report.filter_fidelity, d);
  report.mc = conclusive_fidelity_mc(unit, report.seesaw.best_filter, mc_cfg);

  const double slack = 3.0 * report.mc.standard_error + 1e-3;
  report.consistent = report.mc.mean >= report.predicted - slack &&
                      report.mc.mean <= 1.0 + 1e-12 &&
                      std::abs(report.mc.mean - report.predicted) <= slack;
  return report;
}

}  // namespace entangle
