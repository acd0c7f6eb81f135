#pragma once

#include <cstdint>
#include <random>

namespace exactml::detail {

// mt19937_64 with an explicit rejection draw; the standard distributions are
// implementation-defined and would make seeded output differ across libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, n); n == 0 means the full 64-bit range.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return engine_();
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    for (;;) {
      const std::uint64_t v = engine_();
      if (v < limit) return v % n;
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace exactml::detail
