#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "avfc/fading.hpp"
#include "avfc/params.hpp"
#include "avfc/solvers.hpp"

namespace avfc {

// Who, besides the receiver, knows the gains. Causal and non-causal variants
// that share a capacity formula share a value.
enum class KnowledgeConfig {
  UU,        // neither
  TxKnows,   // NU, CU
  JamKnows,  // UN, UC
  BothKnow,  // NN, CC, CN
  NC,        // transmitter non-causally, jammer causally
};

inline constexpr KnowledgeConfig kAllConfigs[] = {
    KnowledgeConfig::UU, KnowledgeConfig::TxKnows, KnowledgeConfig::JamKnows,
    KnowledgeConfig::BothKnow, KnowledgeConfig::NC};

std::string_view to_string(KnowledgeConfig config);
KnowledgeConfig parse_knowledge_config(std::string_view name);

// Per-gain power function tabulated on the atoms of a quantized gain law.
struct AllocationPolicy {
  std::shared_ptr<const QuantizedGains> atoms;
  std::vector<double> values;
  double budget = 0.0;
  std::variant<MultiplierSolution, JointMultipliers> multipliers;

  double at(double g) const { return values[atoms->cell_of(g)]; }
  double mean() const;
};

struct CapacityResult {
  double value_bits = 0.0;
  KnowledgeConfig config = KnowledgeConfig::UU;
  std::optional<AllocationPolicy> phi;
  std::optional<AllocationPolicy> psi;
  bool symmetrized = false;
  std::map<std::string, double> diagnostics;
};

struct CapacityOptions {
  int cells = 256;            // grid for the coupled max-min systems and policies
  double tol = 1e-11;         // constraint residual, relative to its budget
  double quad_tol = 1e-12;    // quadrature error, relative to the budget
};

// No gain knowledge: E[C(G^2 P / (Lambda + sigma2))].
CapacityResult cap_uu(const ChannelParams& params, const FadingModel& model,
                      const CapacityOptions& options = {});

// Transmitter knows the gains: water-filling against Lambda + sigma2.
CapacityResult cap_tx_knows(const ChannelParams& params, const FadingModel& model,
                            const CapacityOptions& options = {});

// Jammer knows the gains. Zero (symmetrized) when E[G^2] P <= Lambda.
CapacityResult cap_jam_knows(const ChannelParams& params, const FadingModel& model,
                             const CapacityOptions& options = {});

// Both know the gains. Zero when sup_phi E[G^2 phi(G)] <= Lambda; models
// with unbounded support are never symmetrizable.
CapacityResult cap_both_know(const ChannelParams& params, const FadingModel& model,
                             const CapacityOptions& options = {});

// Transmitter knows non-causally, jammer causally: plain max-min, never zero.
CapacityResult cap_nc(const ChannelParams& params, const FadingModel& model,
                      const CapacityOptions& options = {});

// Gaussian AVC without fading.
double gavc_reference(const ChannelParams& params);

CapacityResult compute(KnowledgeConfig config, const ChannelParams& params,
                       const FadingModel& model, const CapacityOptions& options = {});

// 1/2 log2(1 + x).
inline double gaussian_capacity(double snr) { return 0.5 * std::log2(1.0 + snr); }

}  // namespace avfc
