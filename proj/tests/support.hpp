#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "avfc/fading.hpp"
#include "avfc/params.hpp"

namespace avfc::testing {

// Reference values for Rayleigh(1), P = 1, sigma2 = 0.25, produced by
// tests/fixtures/derive_fixtures.py (mpmath, 30 digits) and frozen here.
inline constexpr double kUU_075 = 0.665739296333987304;
inline constexpr double kUU_100 = 0.582526069991450684;
inline constexpr double kTX_075 = 0.740352986280154706;
inline constexpr double kTX_100 = 0.661102271137639046;
inline constexpr double kJAM_075 = 0.63261813829809216;
inline constexpr double kJAM_100 = 0.548182635083217451;

inline ChannelParams rayleigh_params(double lambda) { return {1.0, lambda, 0.25}; }

inline FadingModel two_atom() { return FadingModel::discrete({{0.5, 0.5}, {2.0, 0.5}}); }

inline bool close_rel(double a, double b, double rel) {
  return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b));
}

// Scratch file removed on destruction.
class TempFile {
 public:
  explicit TempFile(const std::string& stem) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            (stem + "_" + std::to_string(rng()) + ".tmp");
  }
  TempFile(const std::string& stem, const std::string& contents) : TempFile(stem) {
    write(contents);
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  std::string path() const { return path_.string(); }
  void write(const std::string& contents) const { std::ofstream(path_) << contents; }
  std::string read() const {
    std::ifstream in(path_, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

 private:
  std::filesystem::path path_;
};

}  // namespace avfc::testing
