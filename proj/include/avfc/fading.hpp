#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace avfc {

// Probability mass left beyond the truncation point of unbounded models.
inline constexpr double kTailMass = 1e-16;

struct GainAtom {
  double gain = 0.0;
  double prob = 0.0;

  bool operator==(const GainAtom&) const = default;
};

struct Rayleigh {
  double scale = 1.0;
};

struct Discrete {
  std::vector<GainAtom> atoms;
};

// Density on [lo, hi]. `pdf` need not be normalized. When `table` is
// non-empty the density is the piecewise-linear interpolant of `table` on a
// uniform grid over [lo, hi] and the model can be serialized.
struct TruncatedDensity {
  std::function<double(double)> pdf;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> table;
};

// Distribution of the fast-fading amplitude G >= 0.
class FadingModel {
 public:
  using Kind = std::variant<Rayleigh, Discrete, TruncatedDensity>;

  static FadingModel rayleigh(double scale);
  static FadingModel discrete(std::vector<GainAtom> atoms);
  static FadingModel point_mass(double gain) { return discrete({{gain, 1.0}}); }
  static FadingModel density(std::function<double(double)> pdf, double lo, double hi);
  static FadingModel tabulated(double lo, double hi, std::vector<double> pdf_values);
  static FadingModel uniform(double lo, double hi);

  const Kind& kind() const { return kind_; }
  bool is_discrete() const { return std::holds_alternative<Discrete>(kind_); }
  bool unbounded_support() const { return std::holds_alternative<Rayleigh>(kind_); }

  // Effective support; Rayleigh is cut at its 1 - kTailMass quantile.
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  // Exact moments of the untruncated law where a closed form exists.
  double mean() const;
  double second_moment() const;
  double variance() const { return second_moment() - mean() * mean(); }

  // Density, distribution and quantile functions of the truncated,
  // renormalized law. Only meaningful for continuous kinds.
  double pdf(double g) const;
  double cdf(double g) const;
  double quantile(double u) const;

  // Points where the density itself is not smooth (tabulated nodes).
  std::span<const double> kinks() const { return kinks_; }

 private:
  explicit FadingModel(Kind kind);
  void init_density();

  Kind kind_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double norm_ = 1.0;
  double mean_ = 0.0;
  double second_moment_ = 0.0;
  std::vector<double> grid_;  // cdf anchor points for densities
  std::vector<double> cum_;
  std::vector<double> kinks_;
};

// E[f(G)] over the truncated law with absolute error <= tol. Composite
// Gauss-Legendre with panel doubling; `breakpoints` split the support where
// f has kinks. Throws SolverError("expectation diverged") when the rule does
// not settle.
double expect(const std::function<double(double)>& f, const FadingModel& model,
              double tol = 1e-12, std::span<const double> breakpoints = {});

// Integral of f(g)·pdf(g) over [a, b], same rule as expect().
double integrate(const std::function<double(double)>& f, const FadingModel& model,
                 double a, double b, double tol = 1e-13,
                 std::span<const double> breakpoints = {});

// Finite-support stand-in for G: atom k is the conditional mean of G on the
// cell [edges[k], edges[k+1]).
struct QuantizedGains {
  std::vector<GainAtom> atoms;
  std::vector<double> edges;
  double nu = 0.0;  // largest within-cell conditional variance

  std::size_t size() const { return atoms.size(); }
  std::size_t cell_of(double g) const;
  double max_gain() const;
  // Sum over atoms of prob * f(gain).
  double mean_of(const std::function<double(double)>& f) const;
};

// Equal-probability cells (continuous kinds). Discrete sources are grouped
// by cumulative mass; a source with at most `cells` atoms is returned as is.
QuantizedGains quantize(const FadingModel& model, int cells);

// Per-cell conditional expectations E[f(G) | G in cell k].
std::vector<double> cell_means(const std::function<double(double)>& f,
                               const FadingModel& model, const QuantizedGains& q,
                               std::span<const double> breakpoints = {});

// n i.i.d. draws from the untruncated law.
std::vector<double> sample_gains(const FadingModel& model, std::size_t n, std::uint64_t seed);

}  // namespace avfc
