#include "avfc/capacity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace avfc {

namespace {

constexpr std::array<std::string_view, 5> kConfigNames = {"UU", "TX_KNOWS", "JAM_KNOWS",
                                                          "BOTH_KNOW", "NC"};

void validate_inputs(const ChannelParams& params, const CapacityOptions& options) {
  params.validate();
  if (options.cells < 1) throw ConfigError("quantization_cells must be >= 1");
  if (!(options.tol > 0.0) || !(options.quad_tol > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
}

CapacityResult make_result(KnowledgeConfig config) {
  CapacityResult r;
  r.config = config;
  return r;
}

AllocationPolicy policy_from_cells(std::shared_ptr<const QuantizedGains> q,
                                   const std::function<double(double)>& f,
                                   const FadingModel& model, double budget,
                                   MultiplierSolution solution,
                                   std::span<const double> breakpoints) {
  AllocationPolicy p;
  p.values = cell_means(f, model, *q, breakpoints);
  p.atoms = std::move(q);
  p.budget = budget;
  p.multipliers = solution;
  return p;
}

// Coupled max-min on a finite gain grid. Given (l1, l2, l3) each atom takes
// the saddle point of its Lagrangian; the multipliers are found by nested
// bisection, innermost on l1 (E phi = P), then l2 (E psi = Lambda), then l3
// (E G^2 phi = Lambda).
class GridSaddle {
 public:
  struct Sums {
    double phi = 0.0;
    double psi = 0.0;
    double g2phi = 0.0;
  };

  GridSaddle(const QuantizedGains& q, const ChannelParams& params, double tol)
      : q_(q), params_(params), tol_(tol) {
    const double gmax = q.max_gain();
    gmax2_ = gmax * gmax;
    if (!(gmax2_ > 0.0)) throw SolverError("all gains are zero");
  }

  Sums sums(double l1, double l2, double l3) const {
    Sums s;
    for (const auto& a : q_.atoms) {
      const auto pp = phi_psi_star_joint(a.gain, l1, l2, l3, params_.sigma2);
      s.phi += a.prob * pp.phi;
      s.psi += a.prob * pp.psi;
      s.g2phi += a.prob * a.gain * a.gain * pp.phi;
    }
    return s;
  }

  // l1 such that E phi = P, for fixed (l2, l3).
  double solve_l1(double l2, double l3, int& iterations) const {
    const double base = gmax2_ * l3;
    auto f = [&](double t) { return sums(base + t, l2, l3).phi; };
    const auto sol = solve_monotone(f, params_.P, {0.25 / params_.P, 1.0 / params_.P},
                                    1e-3 * tol_ * params_.P);
    iterations += sol.iterations;
    return base + sol.lambda;
  }

  // (l1, l2) such that E phi = P and E psi = Lambda, for fixed l3.
  std::pair<double, double> solve_l1_l2(double l3, int& iterations) const {
    const double noise = params_.Lambda + params_.sigma2;
    auto f = [&](double l2) { return sums(solve_l1(l2, l3, iterations), l2, l3).psi; };
    const auto sol =
        solve_monotone(f, params_.Lambda, {0.1 / noise, 1.0 / noise}, 1e-1 * tol_ * params_.Lambda);
    iterations += sol.iterations;
    return {solve_l1(sol.lambda, l3, iterations), sol.lambda};
  }

  JointMultipliers solve_nc() const {
    JointMultipliers m;
    std::tie(m.l1, m.l2) = solve_l1_l2(0.0, m.iterations);
    m.residual = residual(m, false);
    return m;
  }

  JointMultipliers solve_constrained() const {
    JointMultipliers m;
    auto f = [&](double l3) {
      const auto [l1, l2] = solve_l1_l2(l3, m.iterations);
      return sums(l1, l2, l3).g2phi;
    };
    const double scale = 1.0 / (params_.P * gmax2_);
    const auto sol = solve_monotone(f, params_.Lambda, {1e-2 * scale, 1e-1 * scale},
                                    10.0 * tol_ * params_.Lambda);
    m.iterations += sol.iterations;
    m.l3 = sol.lambda;
    std::tie(m.l1, m.l2) = solve_l1_l2(m.l3, m.iterations);
    m.residual = residual(m, true);
    return m;
  }

  double residual(const JointMultipliers& m, bool with_l3) const {
    const auto s = sums(m.l1, m.l2, m.l3);
    double r = std::max(std::fabs(s.phi - params_.P) / params_.P,
                        std::fabs(s.psi - params_.Lambda) / params_.Lambda);
    if (with_l3) r = std::max(r, std::fabs(s.g2phi - params_.Lambda) / params_.Lambda);
    return r;
  }

  double g2phi(const JointMultipliers& m) const { return sums(m.l1, m.l2, m.l3).g2phi; }

  void fill(const JointMultipliers& m, std::shared_ptr<const QuantizedGains> q,
            CapacityResult& r) const {
    AllocationPolicy phi;
    AllocationPolicy psi;
    double value = 0.0;
    for (const auto& a : q_.atoms) {
      const auto pp = phi_psi_star_joint(a.gain, m.l1, m.l2, m.l3, params_.sigma2);
      phi.values.push_back(pp.phi);
      psi.values.push_back(pp.psi);
      value += a.prob *
               gaussian_capacity(a.gain * a.gain * pp.phi / (pp.psi + params_.sigma2));
    }
    phi.atoms = q;
    psi.atoms = q;
    phi.budget = params_.P;
    psi.budget = params_.Lambda;
    phi.multipliers = m;
    psi.multipliers = m;
    r.value_bits = std::max(0.0, value);
    r.phi = std::move(phi);
    r.psi = std::move(psi);
    r.diagnostics["lambda1"] = m.l1;
    r.diagnostics["lambda2"] = m.l2;
    r.diagnostics["lambda3"] = m.l3;
    r.diagnostics["residual"] = m.residual;
    r.diagnostics["iterations"] = m.iterations;
  }

 private:
  const QuantizedGains& q_;
  ChannelParams params_;
  double tol_;
  double gmax2_ = 0.0;
};

void check_residual(const JointMultipliers& m, double tol) {
  // The nested solves stop at machine precision; anything looser than the
  // documented joint tolerance means the system did not converge.
  if (!(m.residual <= std::max(1e-8, tol))) {
    throw SolverError("multiplier system did not converge (residual " +
                      std::to_string(m.residual) + ")");
  }
}

}  // namespace

std::string_view to_string(KnowledgeConfig config) {
  return kConfigNames[static_cast<std::size_t>(config)];
}

KnowledgeConfig parse_knowledge_config(std::string_view name) {
  for (std::size_t i = 0; i < kConfigNames.size(); ++i) {
    if (kConfigNames[i] == name) return static_cast<KnowledgeConfig>(i);
  }
  throw ConfigError("unknown knowledge config: " + std::string(name));
}

double AllocationPolicy::mean() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) sum += atoms->atoms[k].prob * values[k];
  return sum;
}

CapacityResult cap_uu(const ChannelParams& params, const FadingModel& model,
                      const CapacityOptions& options) {
  validate_inputs(params, options);
  auto r = make_result(KnowledgeConfig::UU);
  const double snr = params.P / (params.Lambda + params.sigma2);
  r.value_bits = expect([snr](double g) { return gaussian_capacity(g * g * snr); }, model,
                        options.quad_tol);
  r.value_bits = std::max(0.0, r.value_bits);
  return r;
}

CapacityResult cap_tx_knows(const ChannelParams& params, const FadingModel& model,
                            const CapacityOptions& options) {
  validate_inputs(params, options);
  auto r = make_result(KnowledgeConfig::TxKnows);
  const double noise = params.Lambda + params.sigma2;
  const double qtol = options.quad_tol * params.P;
  auto mean_power = [&](double lambda) {
    const double kink = std::sqrt(noise / lambda);
    return expect([&](double g) { return phi_star_tx(g, lambda, params); }, model, qtol,
                  std::span<const double>(&kink, 1));
  };
  const auto sol = solve_monotone(mean_power, params.P, {params.P, 2.0 * params.P},
                                  options.tol * params.P);
  const double lambda = sol.lambda;
  const double kink = std::sqrt(noise / lambda);
  const std::span<const double> kinks(&kink, 1);
  r.value_bits = expect(
      [&](double g) { return gaussian_capacity(g * g * phi_star_tx(g, lambda, params) / noise); },
      model, options.quad_tol, kinks);
  r.value_bits = std::max(0.0, r.value_bits);

  auto q = std::make_shared<const QuantizedGains>(quantize(model, options.cells));
  r.phi = policy_from_cells(
      q, [&](double g) { return phi_star_tx(g, lambda, params); }, model, params.P, sol, kinks);
  r.diagnostics["lambda"] = lambda;
  r.diagnostics["residual"] = sol.residual / params.P;
  r.diagnostics["iterations"] = sol.iterations;
  r.diagnostics["nu"] = q->nu;
  return r;
}

CapacityResult cap_jam_knows(const ChannelParams& params, const FadingModel& model,
                             const CapacityOptions& options) {
  validate_inputs(params, options);
  auto r = make_result(KnowledgeConfig::JamKnows);
  const double threshold = model.second_moment() * params.P;
  r.diagnostics["E_G2_P"] = threshold;
  if (threshold <= params.Lambda) {
    r.symmetrized = true;
    r.value_bits = 0.0;
    return r;
  }
  const double qtol = options.quad_tol * params.Lambda;
  auto mean_power = [&](double lambda) {
    const double onset = psi_star_jam_onset(lambda, params);
    return expect([&](double g) { return psi_star_jam(g, lambda, params); }, model, qtol,
                  std::span<const double>(&onset, 1));
  };
  const double scale = 1.0 / (params.P + params.Lambda + params.sigma2);
  const auto sol = solve_monotone(mean_power, params.Lambda, {scale, 2.0 * scale},
                                  options.tol * params.Lambda);
  const double lambda = sol.lambda;
  const double onset = psi_star_jam_onset(lambda, params);
  const std::span<const double> kinks(&onset, 1);
  r.value_bits = expect(
      [&](double g) {
        return gaussian_capacity(g * g * params.P /
                                 (psi_star_jam(g, lambda, params) + params.sigma2));
      },
      model, options.quad_tol, kinks);
  r.value_bits = std::max(0.0, r.value_bits);

  auto q = std::make_shared<const QuantizedGains>(quantize(model, options.cells));
  r.psi = policy_from_cells(
      q, [&](double g) { return psi_star_jam(g, lambda, params); }, model, params.Lambda, sol,
      kinks);
  r.diagnostics["lambda"] = lambda;
  r.diagnostics["residual"] = sol.residual / params.Lambda;
  r.diagnostics["iterations"] = sol.iterations;
  r.diagnostics["nu"] = q->nu;
  return r;
}

CapacityResult cap_both_know(const ChannelParams& params, const FadingModel& model,
                             const CapacityOptions& options) {
  validate_inputs(params, options);
  auto r = make_result(KnowledgeConfig::BothKnow);
  auto q = std::make_shared<const QuantizedGains>(quantize(model, options.cells));
  const double support_max = model.hi();
  const double grid_sup = params.P * q->max_gain() * q->max_gain();
  const bool unbounded = model.unbounded_support();
  r.diagnostics["sup_g2phi"] = params.P * support_max * support_max;
  r.diagnostics["grid_sup_g2phi"] = grid_sup;
  r.diagnostics["unbounded_support"] = unbounded ? 1.0 : 0.0;
  r.diagnostics["nu"] = q->nu;
  r.diagnostics["lambda3_active"] = 0.0;

  if (!unbounded && params.P * support_max * support_max <= params.Lambda) {
    r.symmetrized = true;
    r.value_bits = 0.0;
    return r;
  }
  if (grid_sup <= params.Lambda) {
    throw SolverError("quantization grid too coarse: P * max atom^2 <= Lambda; raise "
                      "quantization_cells");
  }

  GridSaddle saddle(*q, params, options.tol);
  auto m = saddle.solve_nc();
  if (saddle.g2phi(m) < params.Lambda * (1.0 - options.tol)) {
    m = saddle.solve_constrained();
    r.diagnostics["lambda3_active"] = 1.0;
  }
  check_residual(m, options.tol);
  saddle.fill(m, q, r);
  return r;
}

CapacityResult cap_nc(const ChannelParams& params, const FadingModel& model,
                      const CapacityOptions& options) {
  validate_inputs(params, options);
  auto r = make_result(KnowledgeConfig::NC);
  auto q = std::make_shared<const QuantizedGains>(quantize(model, options.cells));
  r.diagnostics["nu"] = q->nu;
  GridSaddle saddle(*q, params, options.tol);
  const auto m = saddle.solve_nc();
  check_residual(m, options.tol);
  saddle.fill(m, q, r);
  return r;
}

double gavc_reference(const ChannelParams& params) {
  params.validate();
  if (params.Lambda >= params.P) return 0.0;
  return gaussian_capacity(params.P / (params.Lambda + params.sigma2));
}

CapacityResult compute(KnowledgeConfig config, const ChannelParams& params,
                       const FadingModel& model, const CapacityOptions& options) {
  switch (config) {
    case KnowledgeConfig::UU:
      return cap_uu(params, model, options);
    case KnowledgeConfig::TxKnows:
      return cap_tx_knows(params, model, options);
    case KnowledgeConfig::JamKnows:
      return cap_jam_knows(params, model, options);
    case KnowledgeConfig::BothKnow:
      return cap_both_know(params, model, options);
    case KnowledgeConfig::NC:
      return cap_nc(params, model, options);
  }
  throw ConfigError("unknown knowledge config");
}

}  // namespace avfc
