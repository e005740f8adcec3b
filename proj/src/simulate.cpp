#include "avfc/simulate.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "avfc/parallel.hpp"

namespace avfc::sim {

namespace {

constexpr std::array<std::string_view, 4> kAdversaryNames = {"iid", "gain_adaptive", "mimic",
                                                              "none"};

double energy(std::span<const double> v) {
  double e = 0.0;
  for (double x : v) e += x * x;
  return e;
}

struct TrialOutcome {
  bool error = false;
  bool tx_clamped = false;
  bool jam_clamped = false;
  double tx_power = 0.0;
  double jam_power = 0.0;
};

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::size_t message_count(std::size_t n, double rate_bits) {
  const double bits = static_cast<double>(n) * rate_bits;
  if (!(bits >= 0.0) || bits > 62.0) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(std::llround(std::exp2(bits)));
}

Codebook Codebook::generate(std::size_t n, double rate_bits, double gamma, std::uint64_t seed) {
  if (n < 1 || n > kMaxBlocklength) {
    throw ConfigError("blocklength must be in [1, " + std::to_string(kMaxBlocklength) + "]");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in (0, 1)");
  const auto N = message_count(n, rate_bits);
  if (N < 2) throw ConfigError("codebook needs at least 2 messages");
  if (N > kMaxMessages) {
    std::ostringstream msg;
    msg << "codebook too large: 2^(n R) = 2^" << static_cast<double>(n) * rate_bits
        << " exceeds the 2^16 message cap";
    throw ConfigError(msg.str());
  }
  Codebook cb;
  cb.n_ = n;
  cb.messages_ = N;
  cb.rate_bits_ = rate_bits;
  cb.gamma_ = gamma;
  cb.seed_ = seed;
  cb.entries_.resize(N * n);
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(1.0 - gamma));
  // Codewords with energy above n are redrawn, so a constant-power
  // transmitter never trips the clamp in encode().
  const auto limit = static_cast<double>(n);
  for (std::size_t m = 0; m < N; ++m) {
    const std::span<double> row(cb.entries_.data() + m * n, n);
    do {
      for (auto& x : row) x = normal(engine);
    } while (energy(row) > limit);
  }
  return cb;
}

std::span<const double> Codebook::codeword(std::size_t m) const {
  if (m >= messages_) throw ConfigError("message index out of range");
  return {entries_.data() + m * n_, n_};
}

double PowerProfile::mean_g2_power(const FadingModel& model) const {
  if (!table) return model.second_moment() * constant;
  double s = 0.0;
  for (std::size_t k = 0; k < table->values.size(); ++k) {
    const auto& a = table->atoms->atoms[k];
    s += a.prob * a.gain * a.gain * table->values[k];
  }
  return s;
}

std::string_view to_string(AdversaryKind kind) {
  return kAdversaryNames[static_cast<std::size_t>(kind)];
}

AdversaryKind parse_adversary(std::string_view name) {
  for (std::size_t i = 0; i < kAdversaryNames.size(); ++i) {
    if (kAdversaryNames[i] == name) return static_cast<AdversaryKind>(i);
  }
  throw ConfigError("unknown adversary: " + std::string(name));
}

void SimConfig::validate() const {
  params.validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (n < 1 || n > kMaxBlocklength) throw ConfigError("blocklength out of range");
  if (adversary == AdversaryKind::Mimic && config != KnowledgeConfig::JamKnows &&
      config != KnowledgeConfig::BothKnow) {
    throw ConfigError("mimic adversary requires JAM_KNOWS or BOTH_KNOW");
  }
  if (adversary == AdversaryKind::GainAdaptive && !psi) {
    throw ConfigError("gain_adaptive adversary requires a psi policy");
  }
  if (adversary == AdversaryKind::IidGaussian && !(params.Lambda > gamma)) {
    throw ConfigError("iid jammer needs Lambda > gamma");
  }
}

double wilson_halfwidth(std::size_t errors, std::size_t trials) {
  if (trials == 0) return 0.0;
  constexpr double z = 1.959963984540054;
  const double t = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / t;
  return z / (1.0 + z * z / t) * std::sqrt(p * (1.0 - p) / t + z * z / (4.0 * t * t));
}

Encoded encode(std::size_t m, std::span<const double> gains, const PowerProfile& phi, double P,
               const Codebook& cb) {
  const auto x = cb.codeword(m);
  if (gains.size() != x.size()) throw ConfigError("gain sequence length mismatch");
  Encoded out;
  out.signal.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.signal[i] = std::sqrt(phi.at(gains[i])) * x[i];
  }
  if (energy(out.signal) > static_cast<double>(x.size()) * P) {
    std::fill(out.signal.begin(), out.signal.end(), 0.0);
    out.clamped = true;
  }
  return out;
}

std::vector<double> jam_iid(std::size_t n, const ChannelParams& params, double gamma,
                            std::uint64_t seed) {
  if (!(params.Lambda > gamma)) throw ConfigError("iid jammer needs Lambda > gamma");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(params.Lambda - gamma));
  std::vector<double> s(n);
  for (auto& v : s) v = normal(engine);
  if (energy(s) > static_cast<double>(n) * params.Lambda) std::fill(s.begin(), s.end(), 0.0);
  return s;
}

std::vector<double> jam_gain_adaptive(std::span<const double> gains, const PowerProfile& psi,
                                      std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> s(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) {
    s[i] = std::sqrt(psi.at(gains[i])) * normal(engine);
  }
  return s;
}

std::vector<double> jam_mimic(std::span<const double> gains, const Codebook& cb,
                              std::size_t mtilde, const PowerProfile& phi) {
  const auto x = cb.codeword(mtilde);
  if (gains.size() != x.size()) throw ConfigError("gain sequence length mismatch");
  std::vector<double> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    s[i] = gains[i] * std::sqrt(phi.at(gains[i])) * x[i];
  }
  return s;
}

std::size_t decode_md(std::span<const double> y, std::span<const double> gains,
                      const PowerProfile& phi, const Codebook& cb) {
  const std::size_t n = cb.blocklength();
  if (y.size() != n || gains.size() != n) throw ConfigError("decoder input length mismatch");
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = gains[i] * std::sqrt(phi.at(gains[i]));

  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < cb.messages(); ++m) {
    const auto x = cb.codeword(m);
    double d = 0.0;
    for (std::size_t i = 0; i < n && d < best_dist; ++i) {
      const double r = y[i] - h[i] * x[i];
      d += r * r;
    }
    if (d < best_dist) {
      best_dist = d;
      best = m;
    }
  }
  return best;
}

SimReport run_trials(const SimConfig& cfg, unsigned workers) {
  cfg.validate();
  const auto cb = Codebook::generate(cfg.n, cfg.rate_bits, cfg.gamma, derive_seed(cfg.seed, 0));
  const std::size_t N = cb.messages();
  const std::size_t n = cfg.n;

  std::optional<PowerProfile> psi;
  if (cfg.adversary == AdversaryKind::GainAdaptive) {
    // Same backoff as the iid jammer: expected power Lambda - gamma.
    psi = *cfg.psi;
    const double scale = std::max(0.0, 1.0 - cfg.gamma / cfg.params.Lambda);
    psi->constant *= scale;
    if (psi->table) {
      for (auto& v : psi->table->values) v *= scale;
    }
  }

  std::vector<TrialOutcome> outcomes(cfg.trials);
  parallel_for(cfg.trials, workers, [&](std::size_t t) {
    const auto trial_seed = derive_seed(cfg.seed, t + 1);
    std::mt19937_64 engine(derive_seed(trial_seed, 0));
    std::uniform_int_distribution<std::size_t> pick(0, N - 1);
    std::normal_distribution<double> noise(0.0, std::sqrt(cfg.params.sigma2));

    const auto gains = sample_gains(cfg.model, n, derive_seed(trial_seed, 1));
    const std::size_t m = pick(engine);
    const auto tx = encode(m, gains, cfg.phi, cfg.params.P, cb);

    std::vector<double> s;
    auto& out = outcomes[t];
    switch (cfg.adversary) {
      case AdversaryKind::IidGaussian:
        s = jam_iid(n, cfg.params, cfg.gamma, derive_seed(trial_seed, 2));
        out.jam_clamped = energy(s) == 0.0;
        break;
      case AdversaryKind::GainAdaptive:
        s = jam_gain_adaptive(gains, *psi, derive_seed(trial_seed, 2));
        break;
      case AdversaryKind::Mimic:
        s = jam_mimic(gains, cb, pick(engine), cfg.phi);
        break;
      case AdversaryKind::None:
        s.assign(n, 0.0);
        break;
    }

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = gains[i] * tx.signal[i] + s[i] + (cfg.noiseless ? 0.0 : noise(engine));
    }
    out.error = decode_md(y, gains, cfg.phi, cb) != m;
    out.tx_clamped = tx.clamped;
    out.tx_power = energy(tx.signal) / static_cast<double>(n);
    out.jam_power = energy(s) / static_cast<double>(n);
  });

  SimReport report;
  report.trials = cfg.trials;
  std::size_t tx_clamps = 0;
  std::size_t jam_clamps = 0;
  double tx_power = 0.0;
  double jam_power = 0.0;
  for (const auto& o : outcomes) {
    report.errors += o.error ? 1 : 0;
    tx_clamps += o.tx_clamped ? 1 : 0;
    jam_clamps += o.jam_clamped ? 1 : 0;
    tx_power += o.tx_power;
    jam_power += o.jam_power;
  }
  const auto trials = static_cast<double>(cfg.trials);
  report.error_rate = static_cast<double>(report.errors) / trials;
  report.wilson_halfwidth_95 = wilson_halfwidth(report.errors, cfg.trials);
  report.avg_tx_power = tx_power / trials;
  report.avg_jam_power = jam_power / trials;

  if (tx_clamps > 0) {
    report.warnings.push_back("transmitter power clamp fired in " + std::to_string(tx_clamps) +
                              " trials");
  }
  if (jam_clamps > 0) {
    report.warnings.push_back("iid jammer power clamp fired in " + std::to_string(jam_clamps) +
                              " trials");
  }
  if (cfg.adversary == AdversaryKind::Mimic &&
      cfg.phi.mean_g2_power(cfg.model) >= cfg.params.Lambda) {
    report.warnings.push_back(
        "mimic adversary deployed outside the symmetrizable regime (E[G^2 phi] >= Lambda)");
  }
  return report;
}

}  // namespace avfc::sim
