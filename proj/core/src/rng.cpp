#include "cavitydtc/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cavitydtc {

double Rng::uniform() {
  // 53 random bits, shifted off zero so log() below is finite.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

std::complex<double> Rng::normal_pair() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

std::string Rng::serialize() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

Rng Rng::deserialize(const std::string& s) {
  Rng r;
  std::istringstream is(s);
  is >> r.engine_;
  if (!is) throw std::runtime_error("Rng: malformed serialized state");
  return r;
}

}  // namespace cavitydtc
