#pragma once

#include <span>
#include <vector>

#include "avfc/fading.hpp"
#include "avfc/params.hpp"

// Brute-force max-min over allocation vectors on a finite gain grid. Shares
// nothing with the closed-form optimizers beyond arithmetic, so it can be
// used to check them.
namespace avfc::oracle {

struct DiscreteInstance {
  QuantizedGains atoms;
  ChannelParams params;

  void validate() const;
};

struct InnerSolution {
  std::vector<double> psi;
  double value = 0.0;       // bits
  double multiplier = 0.0;  // price of jammer power, per bit
};

struct MaxMinSolution {
  std::vector<double> phi;
  std::vector<double> psi;
  double value = 0.0;
  int iterations = 0;
};

// Objective sum_k w_k 1/2 log2(1 + g_k^2 phi_k / (psi_k + sigma2)).
double objective(std::span<const double> phi, std::span<const double> psi,
                 const DiscreteInstance& inst);

// Exact minimization over psi >= 0 with sum_k w_k psi_k <= Lambda.
InnerSolution oracle_inner_min(std::span<const double> phi, const DiscreteInstance& inst,
                               double tol = 1e-15);

// d V / d phi_k (including the weight w_k) at the inner minimizer.
std::vector<double> supergradient(std::span<const double> phi, const InnerSolution& inner,
                                  const DiscreteInstance& inst);

// Weighted Euclidean projection onto {phi >= 0, sum w phi <= P} and, when
// `constrain_g2phi`, also {sum w g^2 phi >= Lambda}.
std::vector<double> project(std::span<const double> y, const DiscreteInstance& inst,
                            bool constrain_g2phi);

// Projected supergradient ascent on V(phi) = min_psi objective.
MaxMinSolution oracle_maxmin(const DiscreteInstance& inst, bool constrain_g2phi,
                             double tol = 1e-10);

// Exhaustive search over the budget simplex at step `resolution` (K <= 3).
double oracle_grid(const DiscreteInstance& inst, double resolution);

}  // namespace avfc::oracle
