#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <span>

namespace srlab {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Counter-based random bit stream identified by (seed, stream_id).
///
/// The seed is the Philox key; the stream id fills the upper half of the
/// counter. Within a stream, a 16-bit lane and a 48-bit block index make up
/// the lower half, so a stream can hand out independent sub-streams via
/// `lane()` without any shared state.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint16_t lane = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// k uniform bits in the low end of the result, 1 <= k <= 64.
  std::uint64_t next_bits(int k);
  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 random bits.
  double next_uniform();

  /// Fresh stream with the same (seed, stream_id) on another lane.
  RngStream lane(std::uint16_t index) const { return RngStream(seed_, stream_id_, index); }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint16_t lane_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

RngStream make_stream(std::uint64_t seed, std::uint64_t stream_id);

/// Replays a fixed list of draws; used to enumerate every outcome of the
/// random bits consumed by a computation.
class ScriptedBits {
 public:
  explicit ScriptedBits(std::span<const std::uint64_t> draws) : draws_(draws) {}

  /// Returns the next scripted draw; its value must fit in k bits.
  std::uint64_t next_bits(int k);
  std::size_t consumed() const { return next_; }

 private:
  std::span<const std::uint64_t> draws_;
  std::size_t next_ = 0;
};

template <typename T>
concept BitSource = requires(T& source, int k) {
  { source.next_bits(k) } -> std::convertible_to<std::uint64_t>;
};

}  // namespace srlab
