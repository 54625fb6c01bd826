#include "ebeam/rng.hpp"

#include <cmath>

#include "ebeam/constants.hpp"

namespace ebeam {
namespace {

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64_10(std::array<std::uint64_t, 4> ctr,
                                           std::array<std::uint64_t, 2> key) {
  constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL;
  constexpr std::uint64_t M1 = 0xCA5A826395121157ULL;
  constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL;
  constexpr std::uint64_t W1 = 0xBB67AE8584CAA73BULL;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(M0, ctr[0], hi0, lo0);
    mulhilo(M1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream RngStream::split(std::uint64_t child) const {
  return RngStream(seed_, splitmix64(stream_ ^ splitmix64(child + 0x632BE59BD9B4E019ULL)));
}

void RngStream::refill() {
  buf_ = philox4x64_10({block_, 0, 0, 0}, {seed_, stream_});
  ++block_;
  pos_ = 0;
}

std::uint64_t RngStream::next_u64() {
  if (pos_ == 4) refill();
  return buf_[pos_++];
}

double RngStream::uniform() { return u64_to_open01(next_u64()); }

double RngStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double phi = constants::two_pi * uniform();
  spare_ = r * std::sin(phi);
  have_spare_ = true;
  return r * std::cos(phi);
}

double RngStream::exponential() { return -std::log(uniform()); }

void RngStream::fill_uniform(std::span<double> out) {
  std::size_t i = 0;
  while (i < out.size() && pos_ < 4) out[i++] = u64_to_open01(buf_[pos_++]);
  // Four counters per pass: independent multiply chains overlap.
  constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL;
  constexpr std::uint64_t M1 = 0xCA5A826395121157ULL;
  constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL;
  constexpr std::uint64_t W1 = 0xBB67AE8584CAA73BULL;
  for (; i + 16 <= out.size(); i += 16) {
    std::uint64_t c[4][4];
    for (int j = 0; j < 4; ++j) {
      c[j][0] = block_ + std::uint64_t(j);
      c[j][1] = c[j][2] = c[j][3] = 0;
    }
    std::uint64_t k0 = seed_, k1 = stream_;
    for (int round = 0; round < 10; ++round) {
      for (int j = 0; j < 4; ++j) {
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(M0, c[j][0], hi0, lo0);
        mulhilo(M1, c[j][2], hi1, lo1);
        const std::uint64_t n0 = hi1 ^ c[j][1] ^ k0, n2 = hi0 ^ c[j][3] ^ k1;
        c[j][0] = n0;
        c[j][1] = lo1;
        c[j][2] = n2;
        c[j][3] = lo0;
      }
      k0 += W0;
      k1 += W1;
    }
    for (int j = 0; j < 4; ++j)
      for (int q = 0; q < 4; ++q) out[i + 4 * j + q] = u64_to_open01(c[j][q]);
    block_ += 4;
  }
  for (; i < out.size(); ++i) out[i] = uniform();
}

void RngStream::fill_normal(std::span<double> out) {
  for (double& v : out) v = normal();
}

void RngStream::seek_block(std::uint64_t b) {
  block_ = b;
  pos_ = 4;
  have_spare_ = false;
}

}  // namespace ebeam
