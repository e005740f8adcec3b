#include "avfc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "avfc/parallel.hpp"

namespace avfc::oracle {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr int kMaxAscentIterations = 200000;
constexpr int kMinAscentIterations = 2000;
constexpr int kStallWindow = 50;

double weighted_sum(std::span<const double> v, const QuantizedGains& q) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += q.atoms[k].prob * v[k];
  return s;
}

double weighted_g2_sum(std::span<const double> v, const QuantizedGains& q) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double g = q.atoms[k].gain;
    s += q.atoms[k].prob * g * g * v[k];
  }
  return s;
}

// Effective noise u = psi + sigma2 at which a / (u (u + a)) equals the
// price c; root of c u^2 + c a u - a = 0.
double noise_level(double a, double c) {
  if (a <= 0.0) return 0.0;
  return 2.0 * a / (c * a + std::sqrt(c * c * a * a + 4.0 * c * a));
}

void jammer_response(std::span<const double> signal, double c, double sigma2,
                     std::vector<double>& psi) {
  for (std::size_t k = 0; k < signal.size(); ++k) {
    psi[k] = std::max(0.0, noise_level(signal[k], c) - sigma2);
  }
}

// Projection onto {x >= 0, sum w x <= budget}: x = |y - tau|^+ with the
// smallest feasible tau >= 0, found exactly by sorting.
std::vector<double> project_budget(std::span<const double> y, const QuantizedGains& q,
                                   double budget) {
  std::vector<double> x(y.size());
  double used = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    x[k] = std::max(0.0, y[k]);
    used += q.atoms[k].prob * x[k];
  }
  if (used <= budget) return x;

  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return y[i] > y[j]; });
  double wy = 0.0;
  double w = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    wy += q.atoms[order[j]].prob * y[order[j]];
    w += q.atoms[order[j]].prob;
    tau = (wy - budget) / w;
    const double next = j + 1 < order.size() ? y[order[j + 1]] : -INFINITY;
    if (tau >= next) break;
  }
  tau = std::max(tau, 0.0);
  for (std::size_t k = 0; k < y.size(); ++k) x[k] = std::max(0.0, y[k] - tau);
  return x;
}

double weighted_norm(std::span<const double> v, const QuantizedGains& q) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += q.atoms[k].prob * v[k] * v[k];
  return std::sqrt(s);
}

}  // namespace

void DiscreteInstance::validate() const {
  params.validate();
  if (atoms.atoms.empty()) throw ConfigError("instance needs at least one atom");
  double total = 0.0;
  for (const auto& a : atoms.atoms) {
    if (!(a.prob > 0.0) || !(a.gain >= 0.0)) throw ConfigError("invalid atom");
    total += a.prob;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw ConfigError("atom probabilities must sum to 1");
}

double objective(std::span<const double> phi, std::span<const double> psi,
                 const DiscreteInstance& inst) {
  double v = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double g = inst.atoms.atoms[k].gain;
    v += inst.atoms.atoms[k].prob * 0.5 *
         std::log2(1.0 + g * g * phi[k] / (psi[k] + inst.params.sigma2));
  }
  return v;
}

InnerSolution oracle_inner_min(std::span<const double> phi, const DiscreteInstance& inst,
                               double tol) {
  const auto& q = inst.atoms;
  const double sigma2 = inst.params.sigma2;
  const double budget = inst.params.Lambda;
  if (phi.size() != q.size()) throw ConfigError("phi length does not match atom count");

  std::vector<double> signal(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double g = q.atoms[k].gain;
    signal[k] = g * g * std::max(0.0, phi[k]);
  }
  InnerSolution out;
  out.psi.assign(phi.size(), 0.0);

  // Price above which every atom is left alone.
  double c_hi = 0.0;
  for (double a : signal) {
    if (a > 0.0) c_hi = std::max(c_hi, a / (sigma2 * (sigma2 + a)));
  }
  if (c_hi == 0.0) {
    out.value = 0.0;
    return out;
  }
  double c_lo = c_hi;
  for (int it = 0; it < 400; ++it) {
    c_lo *= 0.25;
    jammer_response(signal, c_lo, sigma2, out.psi);
    if (weighted_sum(out.psi, q) >= budget) break;
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = c_hi > 4.0 * c_lo ? std::sqrt(c_lo * c_hi) : 0.5 * (c_lo + c_hi);
    if (mid <= c_lo || mid >= c_hi) break;
    jammer_response(signal, mid, sigma2, out.psi);
    const double used = weighted_sum(out.psi, q);
    if (used > budget) {
      c_lo = mid;
    } else {
      c_hi = mid;
    }
    if (std::fabs(used - budget) <= tol * budget) break;
  }
  // c_hi is on the feasible side.
  jammer_response(signal, c_hi, sigma2, out.psi);
  out.multiplier = c_hi / (2.0 * kLn2);
  out.value = objective(phi, out.psi, inst);
  return out;
}

std::vector<double> supergradient(std::span<const double> phi, const InnerSolution& inner,
                                  const DiscreteInstance& inst) {
  std::vector<double> d(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double g2 = inst.atoms.atoms[k].gain * inst.atoms.atoms[k].gain;
    d[k] = inst.atoms.atoms[k].prob * g2 /
           (2.0 * kLn2 * (inner.psi[k] + inst.params.sigma2 + g2 * phi[k]));
  }
  return d;
}

std::vector<double> project(std::span<const double> y, const DiscreteInstance& inst,
                            bool constrain_g2phi) {
  const auto& q = inst.atoms;
  const double P = inst.params.P;
  auto x = project_budget(y, q, P);
  if (!constrain_g2phi || weighted_g2_sum(x, q) >= inst.params.Lambda) return x;

  // Shift along g^2 until the lower constraint holds; the projected
  // E[g^2 phi] is nondecreasing in the shift.
  std::vector<double> shifted(y.size());
  auto at = [&](double rho) {
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double g = q.atoms[k].gain;
      shifted[k] = y[k] + rho * g * g;
    }
    return project_budget(shifted, q, P);
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && weighted_g2_sum(at(hi), q) < inst.params.Lambda; ++it) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (weighted_g2_sum(at(mid), q) < inst.params.Lambda) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return at(hi);
}

MaxMinSolution oracle_maxmin(const DiscreteInstance& inst, bool constrain_g2phi, double tol) {
  inst.validate();
  const auto& q = inst.atoms;
  const double P = inst.params.P;
  if (constrain_g2phi && q.max_gain() * q.max_gain() * P < inst.params.Lambda) {
    throw SolverError("infeasible/symmetrizable");
  }
  const std::size_t K = q.size();
  std::vector<double> phi = project(std::vector<double>(K, P), inst, constrain_g2phi);

  MaxMinSolution best;
  best.value = -1.0;
  std::vector<double> best_history;
  std::vector<double> step(K);
  std::vector<double> direction(K);
  const double a = 0.1 * P;
  int t = 0;
  for (; t < kMaxAscentIterations; ++t) {
    const auto inner = oracle_inner_min(phi, inst);
    if (inner.value > best.value) {
      best.value = inner.value;
      best.phi = phi;
      best.psi = inner.psi;
    }
    best_history.push_back(best.value);
    if (t >= std::max(kMinAscentIterations, kStallWindow) &&
        best.value - best_history[t - kStallWindow] < tol) {
      break;
    }
    // Ascent direction per unit probability mass. The step length is
    // measured along the feasible set: the direction is normalized by the
    // weighted norm of its projected (tangential) part, so an active
    // constraint does not stall progress along its face.
    const auto grad = supergradient(phi, inner, inst);
    for (std::size_t k = 0; k < K; ++k) direction[k] = grad[k] / q.atoms[k].prob;
    const double full = weighted_norm(direction, q);
    if (full == 0.0) break;
    const double probe = 1e-6 * P / full;
    for (std::size_t k = 0; k < K; ++k) step[k] = phi[k] + probe * direction[k];
    auto moved = project(step, inst, constrain_g2phi);
    for (std::size_t k = 0; k < K; ++k) moved[k] -= phi[k];
    const double tangential = weighted_norm(moved, q) / probe;
    if (!(tangential > 1e-12 * full)) break;  // stationary
    const double alpha = a / (1.0 + t / 50.0) / tangential;
    for (std::size_t k = 0; k < K; ++k) step[k] = phi[k] + alpha * direction[k];
    phi = project(step, inst, constrain_g2phi);
  }
  best.iterations = t;
  return best;
}

double oracle_grid(const DiscreteInstance& inst, double resolution) {
  inst.validate();
  const auto& q = inst.atoms;
  const std::size_t K = q.size();
  if (K > 3) throw ConfigError("grid oracle limited to 3 atoms");
  if (!(resolution > 0.0 && resolution <= 1.0)) throw ConfigError("resolution must be in (0, 1]");
  const auto steps = static_cast<long>(std::llround(1.0 / resolution));
  const double P = inst.params.P;

  // Fractions s_k of the budget, phi_k = s_k P / w_k, on the face sum s = 1.
  auto value_at = [&](long i, long j) {
    std::vector<double> phi(K, 0.0);
    const double s[3] = {static_cast<double>(i) / steps, static_cast<double>(j) / steps,
                         static_cast<double>(steps - i - j) / steps};
    if (K == 1) {
      phi[0] = P / q.atoms[0].prob;
    } else if (K == 2) {
      phi[0] = s[0] * P / q.atoms[0].prob;
      phi[1] = (1.0 - s[0]) * P / q.atoms[1].prob;
    } else {
      for (std::size_t k = 0; k < 3; ++k) phi[k] = s[k] * P / q.atoms[k].prob;
    }
    return oracle_inner_min(phi, inst).value;
  };

  if (K == 1) return value_at(steps, 0);
  const auto rows = static_cast<std::size_t>(steps + 1);
  std::vector<double> row_best(rows, 0.0);
  parallel_for(rows, worker_count(), [&](std::size_t row) {
    const auto i = static_cast<long>(row);
    double m = 0.0;
    if (K == 2) {
      m = value_at(i, 0);
    } else {
      for (long j = 0; i + j <= steps; ++j) m = std::max(m, value_at(i, j));
    }
    row_best[row] = m;
  });
  return *std::max_element(row_best.begin(), row_best.end());
}

}  // namespace avfc::oracle
