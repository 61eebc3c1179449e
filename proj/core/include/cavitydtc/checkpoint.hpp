#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "cavitydtc/field.hpp"
#include "cavitydtc/rng.hpp"

namespace cavitydtc {

/// Layout (little-endian IEEE doubles, as written by the host):
///   "CDTCCKPT" | u32 version | u64 n_points | f64 time | f64 re(alpha) | f64 im(alpha)
///   | n_points * (f64 re, f64 im) | u64 rng_len | rng_len bytes of RNG state text
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  CField state;
  Rng rng;
};

void write_checkpoint(std::ostream& out, const CField& state, const Rng& rng);
[[nodiscard]] Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const CField& state, const Rng& rng);
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cavitydtc
