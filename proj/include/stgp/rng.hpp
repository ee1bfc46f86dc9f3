#pragma once

#include <cstdint>
#include <random>

namespace stgp {

/// Per-chain random number source. Every sampler owns exactly one Rng;
/// derived streams (chains, bootstrap replicates) come from derive().
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(split_mix(seed)) {}

  /// Deterministic substream: master seed + stream index -> independent Rng.
  static Rng derive(std::uint64_t master, std::uint64_t stream) {
    return Rng(split_mix(master) ^ split_mix(stream * 0x9e3779b97f4a7c15ULL + 1));
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double exponential(double rate) { return std::exponential_distribution<double>(rate)(eng_); }
  int poisson(double mean) { return std::poisson_distribution<int>(mean)(eng_); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }

  /// Gamma with shape/rate parameterization (density ~ x^{a-1} e^{-rate x}).
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(eng_);
  }

  /// Inverse gamma with shape a and scale b (density ~ x^{-a-1} e^{-b/x}).
  double inverse_gamma(double shape, double scale) {
    return scale / std::gamma_distribution<double>(shape, 1.0)(eng_);
  }

  /// |N(0, scale2)|.
  double half_normal(double scale2);

  /// N(mean, sd^2) conditioned on x >= lower. Robert's exponential
  /// rejection in the far-tail regime, plain rejection otherwise.
  double truncated_normal_lower(double mean, double sd, double lower);

  std::uint64_t next_u64() { return eng_(); }

 private:
  static std::uint64_t split_mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 eng_;
};

}  // namespace stgp
