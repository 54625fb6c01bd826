#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace ebeam {

// Philox4x64-10 block function; bit-compatible with the Random123 reference.
std::array<std::uint64_t, 4> philox4x64_10(std::array<std::uint64_t, 4> ctr,
                                           std::array<std::uint64_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based stream keyed by (seed, stream_id). Block b of the stream is
// philox(ctr = {b, 0, 0, 0}, key = {seed, stream_id}).
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  // Independent child stream; pure function of (seed, stream_id, child).
  RngStream split(std::uint64_t child) const;

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();

  void fill_uniform(std::span<double> out);
  void fill_normal(std::span<double> out);

  // Reposition to the start of block b (4 outputs per block).
  void seek_block(std::uint64_t b);

 private:
  void refill();

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buf_{};
  int pos_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline double u64_to_open01(std::uint64_t u) {
  return (double(u >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace ebeam
