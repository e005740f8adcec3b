#include "avfc/fading.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "avfc/params.hpp"

namespace avfc {

namespace {

using Rule = boost::math::quadrature::gauss<double, 20>;

constexpr int kMaxDoublings = 14;
constexpr int kCdfPanels = 512;

struct Panels {
  double value = 0.0;
  double magnitude = 0.0;  // same rule applied to |h|
};

// Composite rule with `panels` equal panels on [a, b].
Panels composite(const std::function<double(double)>& h, double a, double b, int panels) {
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  const double width = (b - a) / panels;
  Panels sum;
  for (int i = 0; i < panels; ++i) {
    const double left = a + i * width;
    const double right = (i + 1 == panels) ? b : left + width;
    const double c = 0.5 * (left + right);
    const double r = 0.5 * (right - left);
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] == 0.0) {
        const double v = h(c);
        sum.value += r * w[j] * v;
        sum.magnitude += r * w[j] * std::fabs(v);
        continue;
      }
      const double lo = h(c - r * x[j]);
      const double hi = h(c + r * x[j]);
      sum.value += r * w[j] * (lo + hi);
      sum.magnitude += r * w[j] * (std::fabs(lo) + std::fabs(hi));
    }
  }
  return sum;
}

// Both the integral and the integral of |h| must settle: a principal value
// that converges by cancellation is still a divergent expectation.
double integrate_segment(const std::function<double(double)>& h, double a, double b,
                         double tol) {
  if (!(b > a)) return 0.0;
  auto previous = composite(h, a, b, 1);
  int panels = 1;
  for (int k = 0; k < kMaxDoublings; ++k) {
    panels *= 2;
    const auto current = composite(h, a, b, panels);
    if (!std::isfinite(current.magnitude)) break;
    // |h| has kinks wherever h changes sign, so its check is looser; a
    // divergent integral grows by a fixed fraction per doubling.
    if (std::fabs(current.value - previous.value) <=
            std::max(tol, 1e-15 * current.magnitude) &&
        std::fabs(current.magnitude - previous.magnitude) <=
            std::max(tol, 1e-6 * current.magnitude)) {
      return current.value;
    }
    previous = current;
  }
  throw SolverError("expectation diverged");
}

// Sorted, deduplicated split points strictly inside (a, b), with a and b.
std::vector<double> segment_points(double a, double b, std::span<const double> extra,
                                   std::span<const double> kinks) {
  std::vector<double> pts{a, b};
  for (double x : extra) {
    if (x > a && x < b && std::isfinite(x)) pts.push_back(x);
  }
  for (double x : kinks) {
    if (x > a && x < b) pts.push_back(x);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double uniform01(std::mt19937_64& engine) {
  return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

double rayleigh_raw_cdf(double g, double scale) {
  return -std::expm1(-g * g / (2.0 * scale * scale));
}

}  // namespace

void ChannelParams::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!ok(P)) throw ConfigError("P must be finite and positive");
  if (!ok(Lambda)) throw ConfigError("Lambda must be finite and positive");
  if (!ok(sigma2)) throw ConfigError("sigma2 must be finite and positive");
}

FadingModel::FadingModel(Kind kind) : kind_(std::move(kind)) {}

FadingModel FadingModel::rayleigh(double scale) {
  if (!(std::isfinite(scale) && scale > 0.0)) {
    throw ConfigError("rayleigh scale must be finite and positive");
  }
  FadingModel m{Rayleigh{scale}};
  m.lo_ = 0.0;
  m.hi_ = scale * std::sqrt(-2.0 * std::log(kTailMass));
  m.norm_ = 1.0 - kTailMass;
  m.mean_ = scale * std::sqrt(M_PI / 2.0);
  m.second_moment_ = 2.0 * scale * scale;
  return m;
}

FadingModel FadingModel::discrete(std::vector<GainAtom> atoms) {
  if (atoms.empty()) throw ConfigError("discrete model needs at least one atom");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(std::isfinite(a.gain) && a.gain >= 0.0)) {
      throw ConfigError("discrete gains must be finite and nonnegative");
    }
    if (!(std::isfinite(a.prob) && a.prob > 0.0)) {
      throw ConfigError("discrete probabilities must be positive");
    }
    total += a.prob;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw ConfigError("discrete probabilities must sum to 1");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const GainAtom& x, const GainAtom& y) { return x.gain < y.gain; });
  // Merge repeated gains.
  std::vector<GainAtom> merged;
  for (const auto& a : atoms) {
    if (!merged.empty() && merged.back().gain == a.gain) {
      merged.back().prob += a.prob;
    } else {
      merged.push_back(a);
    }
  }
  FadingModel m{Discrete{std::move(merged)}};
  const auto& d = std::get<Discrete>(m.kind_);
  m.lo_ = d.atoms.front().gain;
  m.hi_ = d.atoms.back().gain;
  for (const auto& a : d.atoms) {
    m.mean_ += a.prob * a.gain;
    m.second_moment_ += a.prob * a.gain * a.gain;
  }
  return m;
}

FadingModel FadingModel::density(std::function<double(double)> pdf, double lo, double hi) {
  if (!pdf) throw ConfigError("density model needs a pdf");
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo >= 0.0 && hi > lo)) {
    throw ConfigError("density support must satisfy 0 <= lo < hi < inf");
  }
  FadingModel m{TruncatedDensity{std::move(pdf), lo, hi, {}}};
  m.init_density();
  return m;
}

FadingModel FadingModel::tabulated(double lo, double hi, std::vector<double> pdf_values) {
  if (pdf_values.size() < 2) throw ConfigError("tabulated density needs >= 2 values");
  for (double v : pdf_values) {
    if (!(std::isfinite(v) && v >= 0.0)) {
      throw ConfigError("tabulated density values must be finite and nonnegative");
    }
  }
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo >= 0.0 && hi > lo)) {
    throw ConfigError("density support must satisfy 0 <= lo < hi < inf");
  }
  auto table = pdf_values;
  const double step = (hi - lo) / static_cast<double>(table.size() - 1);
  auto pdf = [table, lo, step](double g) {
    const double t = (g - lo) / step;
    if (t <= 0.0) return table.front();
    const auto last = static_cast<double>(table.size() - 1);
    if (t >= last) return table.back();
    const auto i = static_cast<std::size_t>(t);
    const double frac = t - static_cast<double>(i);
    return table[i] + frac * (table[i + 1] - table[i]);
  };
  FadingModel m{TruncatedDensity{pdf, lo, hi, std::move(pdf_values)}};
  for (std::size_t i = 1; i + 1 < table.size(); ++i) {
    m.kinks_.push_back(lo + static_cast<double>(i) * step);
  }
  m.init_density();
  return m;
}

FadingModel FadingModel::uniform(double lo, double hi) {
  return tabulated(lo, hi, {1.0, 1.0});
}

void FadingModel::init_density() {
  const auto& d = std::get<TruncatedDensity>(kind_);
  lo_ = d.lo;
  hi_ = d.hi;
  norm_ = 1.0;
  const auto pts = segment_points(lo_, hi_, {}, kinks_);
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    mass += integrate_segment(d.pdf, pts[i], pts[i + 1], 1e-15);
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw ConfigError("density must have positive finite mass");
  }
  norm_ = mass;

  grid_.resize(kCdfPanels + 1);
  cum_.assign(kCdfPanels + 1, 0.0);
  for (int i = 0; i <= kCdfPanels; ++i) {
    grid_[i] = lo_ + (hi_ - lo_) * i / kCdfPanels;
  }
  grid_.back() = hi_;
  const auto one = [](double) { return 1.0; };
  for (int i = 0; i < kCdfPanels; ++i) {
    cum_[i + 1] = cum_[i] + integrate(one, *this, grid_[i], grid_[i + 1], 1e-15);
  }
  const double total = cum_.back();
  for (auto& c : cum_) c /= total;

  mean_ = expect([](double g) { return g; }, *this, 1e-14);
  second_moment_ = expect([](double g) { return g * g; }, *this, 1e-14);
  if (!(variance() > 0.0)) throw ConfigError("density must have positive variance");
}

double FadingModel::mean() const { return mean_; }
double FadingModel::second_moment() const { return second_moment_; }

double FadingModel::pdf(double g) const {
  if (g < lo_ || g > hi_) return 0.0;
  if (const auto* r = std::get_if<Rayleigh>(&kind_)) {
    const double s2 = r->scale * r->scale;
    return g / s2 * std::exp(-g * g / (2.0 * s2)) / norm_;
  }
  if (const auto* d = std::get_if<TruncatedDensity>(&kind_)) {
    return d->pdf(g) / norm_;
  }
  return 0.0;
}

double FadingModel::cdf(double g) const {
  if (g <= lo_) return 0.0;
  if (g >= hi_) return 1.0;
  if (const auto* r = std::get_if<Rayleigh>(&kind_)) {
    return rayleigh_raw_cdf(g, r->scale) / norm_;
  }
  if (const auto* d = std::get_if<Discrete>(&kind_)) {
    double c = 0.0;
    for (const auto& a : d->atoms) {
      if (a.gain <= g) c += a.prob;
    }
    return c;
  }
  auto it = std::upper_bound(grid_.begin(), grid_.end(), g);
  const auto i = static_cast<std::size_t>(std::distance(grid_.begin(), it)) - 1;
  const double partial = integrate([](double) { return 1.0; }, *this, grid_[i], g, 1e-15);
  return std::min(1.0, cum_[i] + partial);
}

double FadingModel::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw ConfigError("quantile level outside [0, 1]");
  if (u == 0.0) return lo_;
  if (u == 1.0) return hi_;
  if (const auto* r = std::get_if<Rayleigh>(&kind_)) {
    return r->scale * std::sqrt(-2.0 * std::log1p(-u * norm_));
  }
  if (const auto* d = std::get_if<Discrete>(&kind_)) {
    double c = 0.0;
    for (const auto& a : d->atoms) {
      c += a.prob;
      if (c >= u) return a.gain;
    }
    return d->atoms.back().gain;
  }
  double a = lo_;
  double b = hi_;
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, hi_); ++it) {
    const double mid = 0.5 * (a + b);
    if (cdf(mid) < u) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

double integrate(const std::function<double(double)>& f, const FadingModel& model, double a,
                 double b, double tol, std::span<const double> breakpoints) {
  if (model.is_discrete()) {
    double sum = 0.0;
    for (const auto& atom : std::get<Discrete>(model.kind()).atoms) {
      if (atom.gain >= a && atom.gain < b) sum += atom.prob * f(atom.gain);
    }
    return sum;
  }
  a = std::max(a, model.lo());
  b = std::min(b, model.hi());
  if (!(b > a)) return 0.0;
  const auto pts = segment_points(a, b, breakpoints, model.kinks());
  const auto segments = static_cast<double>(pts.size() - 1);
  std::function<double(double)> h = [&](double g) { return f(g) * model.pdf(g); };
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    sum += integrate_segment(h, pts[i], pts[i + 1], tol / segments);
  }
  if (!std::isfinite(sum)) throw SolverError("expectation diverged");
  return sum;
}

double expect(const std::function<double(double)>& f, const FadingModel& model, double tol,
              std::span<const double> breakpoints) {
  if (!(tol > 0.0)) throw ConfigError("expectation tolerance must be positive");
  if (model.is_discrete()) {
    double sum = 0.0;
    for (const auto& atom : std::get<Discrete>(model.kind()).atoms) {
      sum += atom.prob * f(atom.gain);
    }
    if (!std::isfinite(sum)) throw SolverError("expectation diverged");
    return sum;
  }
  return integrate(f, model, model.lo(), model.hi(), tol, breakpoints);
}

std::size_t QuantizedGains::cell_of(double g) const {
  if (atoms.size() <= 1) return 0;
  auto first = edges.begin() + 1;
  auto last = edges.end() - 1;
  return static_cast<std::size_t>(std::distance(first, std::upper_bound(first, last, g)));
}

double QuantizedGains::max_gain() const {
  double m = 0.0;
  for (const auto& a : atoms) m = std::max(m, a.gain);
  return m;
}

double QuantizedGains::mean_of(const std::function<double(double)>& f) const {
  double sum = 0.0;
  for (const auto& a : atoms) sum += a.prob * f(a.gain);
  return sum;
}

namespace {

QuantizedGains quantize_discrete(const Discrete& d, int cells) {
  QuantizedGains q;
  const auto& src = d.atoms;
  // Cell index per source atom, by the midpoint of its cumulative mass.
  std::vector<int> cell(src.size());
  double cum = 0.0;
  for (std::size_t j = 0; j < src.size(); ++j) {
    if (static_cast<int>(src.size()) <= cells) {
      cell[j] = static_cast<int>(j);
    } else {
      const double mid = cum + 0.5 * src[j].prob;
      cell[j] = std::min(cells - 1, static_cast<int>(mid * cells));
    }
    cum += src[j].prob;
  }
  q.edges.push_back(src.front().gain);
  std::size_t j = 0;
  while (j < src.size()) {
    std::size_t k = j;
    double mass = 0.0;
    double first = 0.0;
    double second = 0.0;
    while (k < src.size() && cell[k] == cell[j]) {
      mass += src[k].prob;
      first += src[k].prob * src[k].gain;
      second += src[k].prob * src[k].gain * src[k].gain;
      ++k;
    }
    const double mean = first / mass;
    q.atoms.push_back({mean, mass});
    q.nu = std::max(q.nu, std::max(0.0, second / mass - mean * mean));
    if (k < src.size()) q.edges.push_back(0.5 * (src[k - 1].gain + src[k].gain));
    j = k;
  }
  q.edges.push_back(src.back().gain);
  // Renormalize so the probabilities sum to one to rounding.
  double total = 0.0;
  for (const auto& a : q.atoms) total += a.prob;
  for (auto& a : q.atoms) a.prob /= total;
  return q;
}

}  // namespace

QuantizedGains quantize(const FadingModel& model, int cells) {
  if (cells < 1) throw ConfigError("quantize needs at least one cell");
  if (const auto* d = std::get_if<Discrete>(&model.kind())) {
    return quantize_discrete(*d, cells);
  }
  QuantizedGains q;
  q.edges.resize(static_cast<std::size_t>(cells) + 1);
  for (int k = 0; k <= cells; ++k) {
    q.edges[k] = model.quantile(static_cast<double>(k) / cells);
  }
  q.edges.front() = model.lo();
  q.edges.back() = model.hi();
  const double prob = 1.0 / cells;
  for (int k = 0; k < cells; ++k) {
    const double a = q.edges[k];
    const double b = q.edges[k + 1];
    const double mass = integrate([](double) { return 1.0; }, model, a, b);
    const double mean = integrate([](double g) { return g; }, model, a, b) / mass;
    const double var =
        integrate([mean](double g) { return (g - mean) * (g - mean); }, model, a, b) / mass;
    q.atoms.push_back({mean, prob});
    q.nu = std::max(q.nu, var);
  }
  return q;
}

std::vector<double> cell_means(const std::function<double(double)>& f, const FadingModel& model,
                               const QuantizedGains& q, std::span<const double> breakpoints) {
  std::vector<double> out(q.size(), 0.0);
  if (const auto* d = std::get_if<Discrete>(&model.kind())) {
    std::vector<double> mass(q.size(), 0.0);
    for (const auto& a : d->atoms) {
      const auto k = q.cell_of(a.gain);
      out[k] += a.prob * f(a.gain);
      mass[k] += a.prob;
    }
    for (std::size_t k = 0; k < q.size(); ++k) out[k] /= mass[k];
    return out;
  }
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double a = q.edges[k];
    const double b = q.edges[k + 1];
    const double mass = integrate([](double) { return 1.0; }, model, a, b);
    out[k] = integrate(f, model, a, b, 1e-13, breakpoints) / mass;
  }
  return out;
}

std::vector<double> sample_gains(const FadingModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("sample size must be positive");
  std::mt19937_64 engine(seed);
  std::vector<double> out(n);
  if (const auto* r = std::get_if<Rayleigh>(&model.kind())) {
    for (auto& g : out) g = r->scale * std::sqrt(-2.0 * std::log(uniform01(engine)));
    return out;
  }
  for (auto& g : out) g = model.quantile(uniform01(engine));
  return out;
}

}  // namespace avfc
