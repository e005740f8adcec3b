#pragma once

#include <functional>
#include <utility>

#include "avfc/params.hpp"

namespace avfc {

struct MultiplierSolution {
  double lambda = 0.0;
  double residual = 0.0;  // f(lambda) - target
  int iterations = 0;
};

// Multipliers of the coupled max-min systems. l3 prices the constraint
// E[G^2 phi(G)] >= Lambda and is zero when that constraint is slack.
struct JointMultipliers {
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double residual = 0.0;  // largest relative constraint residual
  int iterations = 0;
};

inline constexpr int kMaxBisections = 200;
inline constexpr int kMaxDoublings = 120;

// Solves f(lambda) = target for lambda > 0, f monotone (either direction).
// The bracket is widened geometrically from `bracket_hint`, then bisected
// until |f - target| <= tol or the bracket collapses. Throws
// SolverError("target unattainable") if widening fails.
MultiplierSolution solve_monotone(const std::function<double(double)>& f, double target,
                                  std::pair<double, double> bracket_hint, double tol);

// Water-filling level |lambda - (Lambda + sigma2)/g^2|^+; 0 at g = 0.
double phi_star_tx(double g, double lambda, const ChannelParams& params);

// Jammer's gain-adaptive power against constant transmit power P: the
// positive root of the stationarity quadratic, clipped at zero.
double psi_star_jam(double g, double lambda, const ChannelParams& params);

// Smallest gain at which psi_star_jam is positive (+inf if none).
double psi_star_jam_onset(double lambda, const ChannelParams& params);

struct PowerPair {
  double phi = 0.0;
  double psi = 0.0;
};

// Per-gain saddle point of the Lagrangian
//   1/2 ln(1 + g^2 phi/(psi + sigma2)) - (l1 - g^2 l3) phi + l2 psi.
// Where the jammer is active this is the closed form
//   phi = 1/(2 mu (1 + mu/(g^2 l2))),  psi = g^2/(2 g^2 l2 + 2 mu) - sigma2,
// with mu = l1 - g^2 l3 > 0. Where that psi would be negative the jammer
// stays silent and phi water-fills against sigma2 alone. g = 0 gives (0, 0);
// l2 = 0 returns the l2 -> 0+ limit.
PowerPair phi_psi_star_joint(double g, double l1, double l2, double l3, double sigma2);

}  // namespace avfc
