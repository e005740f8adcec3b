#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avfc/capacity.hpp"
#include "avfc/fading.hpp"
#include "avfc/params.hpp"

namespace avfc::sim {

inline constexpr std::size_t kMaxBlocklength = 4096;
inline constexpr std::size_t kMaxMessages = std::size_t{1} << 16;
inline constexpr double kDefaultGamma = 0.05;

// Deterministic 64-bit mix of a seed and a stream index (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Messages for blocklength n at `rate_bits`: round(2^(n R)).
std::size_t message_count(std::size_t n, double rate_bits);

// N x n i.i.d. N(0, 1 - gamma) codebook, row-major.
class Codebook {
 public:
  static Codebook generate(std::size_t n, double rate_bits, double gamma, std::uint64_t seed);

  std::size_t blocklength() const { return n_; }
  std::size_t messages() const { return messages_; }
  double rate_bits() const { return rate_bits_; }
  double gamma() const { return gamma_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const double> codeword(std::size_t m) const;

 private:
  std::size_t n_ = 0;
  std::size_t messages_ = 0;
  double rate_bits_ = 0.0;
  double gamma_ = kDefaultGamma;
  std::uint64_t seed_ = 0;
  std::vector<double> entries_;
};

// Per-gain power: a constant or a policy tabulated on quantized gains.
struct PowerProfile {
  double constant = 0.0;
  std::optional<AllocationPolicy> table;

  static PowerProfile flat(double power) { return {power, std::nullopt}; }
  static PowerProfile from(AllocationPolicy policy) { return {0.0, std::move(policy)}; }

  double at(double g) const { return table ? table->at(g) : constant; }
  // E[G^2 power(G)] under the tabulated atoms, or E[G^2] * constant.
  double mean_g2_power(const FadingModel& model) const;
};

// None leaves only receiver noise (baseline and testing aid).
enum class AdversaryKind { IidGaussian, GainAdaptive, Mimic, None };

std::string_view to_string(AdversaryKind kind);
AdversaryKind parse_adversary(std::string_view name);

struct SimConfig {
  ChannelParams params;
  FadingModel model = FadingModel::rayleigh(1.0);
  KnowledgeConfig config = KnowledgeConfig::UU;
  PowerProfile phi = PowerProfile::flat(1.0);
  AdversaryKind adversary = AdversaryKind::IidGaussian;
  std::optional<PowerProfile> psi;  // required by GainAdaptive
  std::size_t trials = 1;
  std::size_t n = 256;
  double rate_bits = 0.0;
  std::uint64_t seed = 0;
  double gamma = kDefaultGamma;
  bool noiseless = false;  // drop the receiver noise (testing aid)

  void validate() const;
};

struct SimReport {
  std::size_t trials = 0;
  std::size_t errors = 0;
  double error_rate = 0.0;
  double wilson_halfwidth_95 = 0.0;
  double avg_tx_power = 0.0;
  double avg_jam_power = 0.0;
  std::vector<std::string> warnings;
};

// Half-width of the 95% Wilson score interval for `errors` out of `trials`.
double wilson_halfwidth(std::size_t errors, std::size_t trials);

struct Encoded {
  std::vector<double> signal;
  bool clamped = false;
};

// sqrt(phi(g_i)) x_i(m), or all zeros if its energy exceeds n P.
Encoded encode(std::size_t m, std::span<const double> gains, const PowerProfile& phi, double P,
               const Codebook& cb);

// I.i.d. N(0, Lambda - gamma), all zeros if its energy exceeds n Lambda.
std::vector<double> jam_iid(std::size_t n, const ChannelParams& params, double gamma,
                            std::uint64_t seed);

// Independent N(0, psi(g_i)) coordinates.
std::vector<double> jam_gain_adaptive(std::span<const double> gains, const PowerProfile& psi,
                                      std::uint64_t seed);

// g_i sqrt(phi(g_i)) x_i(mtilde): the waveform message mtilde would produce
// at the receiver.
std::vector<double> jam_mimic(std::span<const double> gains, const Codebook& cb,
                              std::size_t mtilde, const PowerProfile& phi);

// argmin_m ||y - g o sqrt(phi(g)) o x(m)||^2, lowest index on ties.
std::size_t decode_md(std::span<const double> y, std::span<const double> gains,
                      const PowerProfile& phi, const Codebook& cb);

SimReport run_trials(const SimConfig& cfg, unsigned workers = 1);

}  // namespace avfc::sim
