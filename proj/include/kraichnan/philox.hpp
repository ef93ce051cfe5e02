// SPDX-License-Identifier: Apache-2.0
//
// Philox4x32-10 counter-based generator (Salmon et al., SC 2011). Each path
// owns a substream keyed by (master_seed, path_index), so the sample sequence
// is a pure function of those two values, independent of thread scheduling.
#ifndef KRAICHNAN_PHILOX_HPP
#define KRAICHNAN_PHILOX_HPP

#include <cmath>
#include <cstdint>

namespace kraichnan {

class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t master_seed, std::uint64_t path_index)
      : key0_(static_cast<std::uint32_t>(master_seed)),
        key1_(static_cast<std::uint32_t>(master_seed >> 32)),
        ctr2_(static_cast<std::uint32_t>(path_index)),
        ctr3_(static_cast<std::uint32_t>(path_index >> 32)) {}

  // uniform double in (0,1)
  double uniform() {
    if (have_ == 0) refill();
    std::uint64_t u = block_[--have_];
    return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
  }

  // standard normal via Box-Muller (fixed draw count per call pair)
  double normal() {
    if (have_normal_) {
      have_normal_ = false;
      return cached_normal_;
    }
    double u1 = uniform(), u2 = uniform();
    double rad = std::sqrt(-2.0 * std::log(u1));
    double ang = 2.0 * M_PI * u2;
    cached_normal_ = rad * std::sin(ang);
    have_normal_ = true;
    return rad * std::cos(ang);
  }

 private:
  static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t* hi, std::uint32_t* lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    *hi = static_cast<std::uint32_t>(p >> 32);
    *lo = static_cast<std::uint32_t>(p);
  }

  void refill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(draw_);
    std::uint32_t c1 = static_cast<std::uint32_t>(draw_ >> 32);
    std::uint32_t c2 = ctr2_, c3 = ctr3_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mulhilo(0xD2511F53u, c0, &hi0, &lo0);
      mulhilo(0xCD9E8D57u, c2, &hi1, &lo1);
      std::uint32_t n0 = hi1 ^ c1 ^ k0;
      std::uint32_t n1 = lo1;
      std::uint32_t n2 = hi0 ^ c3 ^ k1;
      std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    block_[0] = (static_cast<std::uint64_t>(c0) << 32) | c1;
    block_[1] = (static_cast<std::uint64_t>(c2) << 32) | c3;
    have_ = 2;
    ++draw_;
  }

  std::uint32_t key0_, key1_, ctr2_, ctr3_;
  std::uint64_t draw_ = 0;
  std::uint64_t block_[2] = {0, 0};
  int have_ = 0;
  bool have_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace kraichnan

#endif
