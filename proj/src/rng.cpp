#include "srlab/rng.hpp"

#include <stdexcept>

namespace srlab {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
constexpr std::uint64_t kBlockLimit = std::uint64_t{1} << 48;

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint16_t lane)
    : seed_(seed), stream_id_(stream_id), lane_(lane) {}

void RngStream::refill() {
  if (block_ >= kBlockLimit) {
    throw std::length_error("random stream exhausted");
  }
  const std::uint64_t low = block_ | (static_cast<std::uint64_t>(lane_) << 48);
  const auto out = philox4x32({static_cast<std::uint32_t>(low), static_cast<std::uint32_t>(low >> 32),
                               static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)},
                              {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  available_ = 2;
  ++block_;
}

std::uint64_t RngStream::next_u64() {
  if (available_ == 0) {
    refill();
  }
  return buffer_[2 - available_--];
}

std::uint64_t RngStream::next_bits(int k) {
  if (k < 1 || k > 64) {
    throw std::invalid_argument("next_bits: k must lie in [1, 64]");
  }
  return next_u64() >> (64 - k);
}

double RngStream::next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

RngStream make_stream(std::uint64_t seed, std::uint64_t stream_id) { return RngStream(seed, stream_id); }

std::uint64_t ScriptedBits::next_bits(int k) {
  if (next_ >= draws_.size()) {
    throw std::out_of_range("scripted bit source exhausted");
  }
  const std::uint64_t z = draws_[next_];
  if (k < 64 && (z >> k) != 0) {
    throw std::invalid_argument("scripted draw does not fit in the requested bits");
  }
  ++next_;
  return z;
}

}  // namespace srlab
