#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace levylab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit key is the experiment seed and the upper half of the 128-bit
/// counter is a stream id, so stream r of seed s is a pure function of
/// (s, r) and replications can be generated in any order or on any thread.
/// Satisfies UniformRandomBitGenerator with 64-bit output.
class Philox4x32 {
public:
  using result_type = std::uint64_t;
  using block_type = std::array<std::uint32_t, 4>;
  using key_type = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 2) {
      const std::uint64_t c = block_++;
      buf_ = bijection({static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                        static_cast<std::uint32_t>(stream_),
                        static_cast<std::uint32_t>(stream_ >> 32)},
                       key_);
      pos_ = 0;
    }
    const result_type out = (static_cast<result_type>(buf_[2 * pos_ + 1]) << 32) | buf_[2 * pos_];
    ++pos_;
    return out;
  }

  /// The ten-round keyed bijection on a 128-bit counter block.
  static constexpr block_type bijection(block_type ctr, key_type key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

private:
  key_type key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  block_type buf_{};
  int pos_ = 2;
};

/// Uniform draw on the open interval (0, 1) with 53 random bits.
template <typename Engine>
double uniform_open01(Engine& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1p-53;
}

} // namespace levylab
