#include "cavitydtc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace cavitydtc {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian");

namespace {

constexpr char kMagic[8] = {'C', 'D', 'T', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint64_t kMaxPoints = std::uint64_t{1} << 32;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const CField& state, const Rng& rng) {
  out.write(kMagic, sizeof kMagic);
  put(out, kCheckpointVersion);
  put(out, static_cast<std::uint64_t>(state.psi.size()));
  put(out, state.time);
  put(out, state.alpha.real());
  put(out, state.alpha.imag());
  for (const auto& v : state.psi) {
    put(out, v.real());
    put(out, v.imag());
  }
  const std::string r = rng.serialize();
  put(out, static_cast<std::uint64_t>(r.size()));
  out.write(r.data(), static_cast<std::streamsize>(r.size()));
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto n = get<std::uint64_t>(in);
  if (n > kMaxPoints) throw std::runtime_error("checkpoint: implausible grid size");
  Checkpoint ck;
  ck.state.time = get<double>(in);
  const double are = get<double>(in);
  const double aim = get<double>(in);
  ck.state.alpha = {are, aim};
  ck.state.psi.resize(n);
  for (auto& v : ck.state.psi) {
    const double re = get<double>(in);
    const double im = get<double>(in);
    v = {re, im};
  }
  const auto len = get<std::uint64_t>(in);
  if (len > (1u << 20)) throw std::runtime_error("checkpoint: implausible RNG state size");
  std::string r(len, '\0');
  in.read(r.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  ck.rng = Rng::deserialize(r);
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const CField& state, const Rng& rng) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string());
  write_checkpoint(out, state, rng);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace cavitydtc
