#pragma once

#include <array>
#include <cstdint>

namespace ellmom {

// Philox 4x32-10 block function. Counter-based: every (key, counter) pair maps
// to four independent 32-bit words, so distinct counters never share output.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// One logical random stream. Streams with the same master seed but different
// substream ids are pairwise non-overlapping by construction: the substream id
// occupies the high counter words and the block index the low ones.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t substream_id);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random mantissa bits.
  double uniform();
  // Uniform on (0, 1], safe to pass through log().
  double uniform_pos();
  double normal();
  // Gamma(shape, scale=1), shape > 0. Marsaglia-Tsang squeeze with the
  // boost trick for shape < 1.
  double gamma(double shape);
  double chi_square(double dof);

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t substream_id() const { return substream_; }

 private:
  void refill();

  std::uint64_t master_;
  std::uint64_t substream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace ellmom
