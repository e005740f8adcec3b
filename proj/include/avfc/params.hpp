#pragma once

#include <stdexcept>
#include <string>

namespace avfc {

// Base of every error thrown by the library. The CLI maps subclasses onto
// exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad parameters, bad model, bad config file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A numerical routine failed to reach its target.
class SolverError : public Error {
 public:
  using Error::Error;
};

// Transmitter power P, jammer power Lambda and noise variance sigma2.
struct ChannelParams {
  double P = 1.0;
  double Lambda = 1.0;
  double sigma2 = 0.25;

  // Throws ConfigError unless all three are finite and strictly positive.
  void validate() const;

  // Uniform rescaling of all three powers. Capacities are invariant under it.
  ChannelParams scaled(double c) const { return {c * P, c * Lambda, c * sigma2}; }

  bool operator==(const ChannelParams&) const = default;
};

}  // namespace avfc
