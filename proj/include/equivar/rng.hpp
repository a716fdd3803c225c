// SPDX-License-Identifier: Apache-2.0

#ifndef EQUIVAR_RNG_HPP
#define EQUIVAR_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace equivar {

/// Derives an independent seed from a base seed and a substream name.
/// All randomness in the CLI flows from one seed through named substreams
/// (e.g. "pairs/n=8/trial=17"), so any single case is reproducible in
/// isolation. splitmix64 finalizer over an FNV-1a hash of the name.
std::uint64_t substream_seed(std::uint64_t base, std::string_view name);

/// Deterministic standard-normal stream: mt19937_64 driving Box-Muller with
/// a fixed 53-bit uint-to-double mapping. No implementation-defined
/// distributions, so output is identical across platforms for a given seed.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double operator()();

 private:
  double next_uniform();  // in (0, 1]

  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace equivar

#endif  // EQUIVAR_RNG_HPP
