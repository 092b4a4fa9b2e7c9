// Counter-keyed random number streams.
//
// Every consumer of randomness in this library derives an independent stream
// from (seed, key1, key2, key3) — e.g. (seed, replication index) in the
// simulation engine, (seed, subset index, block index) in the orthant-
// probability estimator.  Streams are cheap to construct, so work items can
// be processed in any order, by any number of threads, and still produce
// identical results.  The generator is xoshiro256++ seeded through splitmix64,
// both fully specified algorithms, so output does not depend on the standard
// library implementation.

#pragma once

#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

namespace lro {

inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t key1 = 0,
                     std::uint64_t key2 = 0, std::uint64_t key3 = 0) {
    // mix all keys into the splitmix state before expanding to 4 words
    std::uint64_t s = seed;
    s = splitmix64(s) ^ (key1 + 0x9e3779b97f4a7c15ULL);
    s = splitmix64(s) ^ (key2 + 0x7f4a7c15e3779b97ULL);
    s = splitmix64(s) ^ (key3 + 0x1ce4e5b9bf58476dULL);
    for (auto& w : state_) w = splitmix64(s);
    have_spare_ = false;
    spare_ = 0.0;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on [0, 1) with 53 random bits
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller; generates a pair and caches the second
  double standard_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
  bool have_spare_;
  double spare_;
};

// One multinomial draw by per-trial inversion of the category CDF.
// Exact for any probability vector summing to 1; O(n * J).
inline Eigen::VectorXd multinomial_sample(const Eigen::VectorXd& probs, int n,
                                          RngStream& rng) {
  const Eigen::Index J = probs.size();
  if (J == 0) throw std::invalid_argument("multinomial_sample: empty probs");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(J);
  for (int t = 0; t < n; ++t) {
    const double u = rng.uniform01();
    double acc = 0.0;
    Eigen::Index j = 0;
    for (; j < J - 1; ++j) {
      acc += probs[j];
      if (u < acc) break;
    }
    counts[j] += 1.0;
  }
  return counts;
}

}  // namespace lro
