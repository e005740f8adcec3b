#include "avfc/solvers.hpp"

#include <cmath>
#include <limits>

namespace avfc {

MultiplierSolution solve_monotone(const std::function<double(double)>& f, double target,
                                  std::pair<double, double> bracket_hint, double tol) {
  auto [lo, hi] = bracket_hint;
  if (!(lo > 0.0 && hi > lo && std::isfinite(hi))) {
    throw ConfigError("bracket hint must satisfy 0 < lo < hi < inf");
  }
  if (!(tol > 0.0)) throw ConfigError("solver tolerance must be positive");

  double flo = f(lo);
  double fhi = f(hi);
  MultiplierSolution out;
  auto done = [&](double lambda, double value) {
    out.lambda = lambda;
    out.residual = value - target;
    return std::fabs(out.residual) <= tol;
  };
  if (done(lo, flo) || done(hi, fhi)) return out;

  int doublings = 0;
  for (;;) {
    const double fmin = std::min(flo, fhi);
    const double fmax = std::max(flo, fhi);
    if (target >= fmin && target <= fmax && flo != fhi) break;
    if (++doublings > kMaxDoublings) throw SolverError("target unattainable");
    const bool increasing = fhi > flo;
    const bool decreasing = fhi < flo;
    const bool go_up = (increasing && target > fhi) || (decreasing && target < fhi);
    const bool go_down = (increasing && target < flo) || (decreasing && target > flo);
    if (go_up) {
      lo = hi;
      flo = fhi;
      hi *= 2.0;
      fhi = f(hi);
    } else if (go_down) {
      hi = lo;
      fhi = flo;
      lo *= 0.5;
      flo = f(lo);
    } else {
      // Flat so far: widen both ends.
      lo *= 0.5;
      hi *= 2.0;
      flo = f(lo);
      fhi = f(hi);
    }
    if (!std::isfinite(flo) || !std::isfinite(fhi)) throw SolverError("target unattainable");
    if (done(lo, flo) || done(hi, fhi)) return out;
  }

  const double sign = fhi > flo ? 1.0 : -1.0;
  double best = std::fabs(flo - target) < std::fabs(fhi - target) ? lo : hi;
  double best_res = std::min(std::fabs(flo - target), std::fabs(fhi - target));
  for (out.iterations = 1; out.iterations <= kMaxBisections; ++out.iterations) {
    const double mid = hi > 4.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (done(mid, fm)) return out;
    if (std::fabs(fm - target) < best_res) {
      best = mid;
      best_res = std::fabs(fm - target);
    }
    if (sign * (fm - target) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.iterations = std::min(out.iterations, kMaxBisections);
  out.lambda = best;
  out.residual = f(best) - target;
  return out;
}

double phi_star_tx(double g, double lambda, const ChannelParams& params) {
  if (g <= 0.0) return 0.0;
  return std::max(0.0, lambda - (params.Lambda + params.sigma2) / (g * g));
}

double psi_star_jam(double g, double lambda, const ChannelParams& params) {
  if (g <= 0.0) return 0.0;
  const double a = g * g * params.P;
  const double b = 2.0 * a / lambda;
  // sqrt(a^2 + b) - a without cancellation.
  const double root_excess = b / (std::sqrt(a * a + b) + a);
  return std::max(0.0, 0.5 * (root_excess - 2.0 * params.sigma2));
}

double psi_star_jam_onset(double lambda, const ChannelParams& params) {
  const double s4 = params.sigma2 * params.sigma2;
  const double slack = 2.0 / lambda - 4.0 * params.sigma2;
  if (slack <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(4.0 * s4 / (params.P * slack));
}

PowerPair phi_psi_star_joint(double g, double l1, double l2, double l3, double sigma2) {
  if (g <= 0.0) return {};
  const double g2 = g * g;
  const double mu = l1 - g2 * l3;
  if (!(mu > 0.0)) throw SolverError("effective transmit price must be positive");
  if (l2 > 0.0) {
    const double psi = g2 / (2.0 * g2 * l2 + 2.0 * mu) - sigma2;
    if (psi > 0.0) {
      const double phi = g2 * l2 / (2.0 * mu * (g2 * l2 + mu));
      return {phi, psi};
    }
  } else {
    const double psi = g2 / (2.0 * mu) - sigma2;
    if (psi > 0.0) return {0.0, psi};
  }
  return {std::max(0.0, 1.0 / (2.0 * mu) - sigma2 / g2), 0.0};
}

}  // namespace avfc
