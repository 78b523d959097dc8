#pragma once

#include <cstdint>

#include "rgames/streams.hpp"

namespace rgames {

/// Deterministic splitmix64 generator. Draws avoid std distributions so the
/// same seed reproduces the same values on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, n); n >= 1.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  /// Random canonical UPStream with digits < digit_bound.
  UPStream up_stream(std::uint64_t max_prefix, std::uint64_t max_period, std::uint64_t digit_bound) {
    FinSeq pre(below(max_prefix + 1));
    FinSeq per(1 + below(max_period));
    for (auto& d : pre) d = below(digit_bound);
    for (auto& d : per) d = below(digit_bound);
    return UPStream(std::move(pre), std::move(per));
  }

 private:
  std::uint64_t state_;
};

}  // namespace rgames
