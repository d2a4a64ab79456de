#pragma once

#include <cstdint>
#include <string_view>

namespace tradenet {

/// SplitMix64 stream. Child streams are derived from the parent state and a
/// label, so adding a new consumer never perturbs existing ones. Uniform and
/// normal draws are computed here rather than through <random> distributions,
/// whose output is implementation-defined.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Box-Muller, one draw per call).
  double normal();

  SplitRng split(std::string_view label) const;
  SplitRng split(std::uint64_t index) const;

 private:
  std::uint64_t state_;
};

}  // namespace tradenet
