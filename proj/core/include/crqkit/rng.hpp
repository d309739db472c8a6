#pragma once

#include <cstdint>

namespace crqkit::rng {

// SplitMix64 finalizer (Steele, Lea & Flood 2014), used here in counter mode:
// every draw is a pure function of (key, counter). Streams can therefore be
// forked per company / per bootstrap replication and evaluated in any order
// with identical results.
constexpr std::uint64_t mix(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t key, std::uint64_t word) noexcept {
  return mix(key ^ (word * 0xD1342543DE82EF95ull + 0x2545F4914F6CDD1Dull));
}

class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}

  // Independent substream; forking does not disturb this stream's counter.
  Stream fork(std::uint64_t substream) const { return Stream(combine(key_, substream)); }

  std::uint64_t next_u64() { return combine(key_, counter_++); }

  // Uniform draw on the open interval (0, 1).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the inverse-CDF transform.
  double next_gaussian();

  // Unit-mean exponential.
  double next_exponential();

  // Student t with 2 degrees of freedom.
  double next_student_t2();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace crqkit::rng
