#pragma once

#include <array>
#include <cstdint>

namespace toral {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: the same
/// (counter, key) always produces the same four words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream. The master seed is the Philox key; the
/// stream id and substream select a disjoint counter range, so two streams
/// constructed from equal arguments produce equal sequences no matter which
/// thread or in which order they are consumed.
///
/// Counter layout: word 0 = block index, word 1 = substream, words 2..3 =
/// stream id. Each substream holds 2^32 blocks of four 32-bit words.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id,
               std::uint32_t substream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [a, b).
  double uniform(double a, double b);

  /// An independent child stream: same seed, stream id mixed with `child`.
  RandomStream split(std::uint64_t child) const;

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  std::uint32_t substream() const { return substream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint32_t substream_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

/// SplitMix64 finalizer; used to derive child stream ids.
std::uint64_t mix64(std::uint64_t x);

}  // namespace toral
