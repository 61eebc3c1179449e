#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>

namespace cavitydtc {

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream seed for (master seed, cell index, trajectory index). Stable across
/// platforms and independent of scheduling.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell,
                                                  std::uint64_t trajectory) {
  return mix64(mix64(mix64(master) ^ cell) ^ (trajectory + 0x632be59bd9b4e019ULL));
}

/// Portable Gaussian source: mt19937_64 (whose output sequence is fixed by the
/// standard) plus an explicit Box-Muller transform, so draws are identical on
/// every conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform in (0, 1].
  double uniform();
  /// Pair of independent standard normals packed as a complex number.
  std::complex<double> normal_pair();

  [[nodiscard]] std::string serialize() const;
  static Rng deserialize(const std::string& s);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cavitydtc
