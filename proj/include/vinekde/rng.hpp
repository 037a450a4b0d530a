#pragma once

#include <cstdint>
#include <random>

#include "vinekde/numerics.hpp"

namespace vinekde {

//! Deterministic random stream. All real-valued transforms are built from raw
//! 64-bit draws so that output is identical across platforms and standard
//! libraries (std::*_distribution is implementation-defined, hence avoided).
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  //! Derive an independent stream for a replicate index.
  static RngStream derive(std::uint64_t seed, std::uint64_t stream) {
    return RngStream(mix64(seed + 0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

  //! Uniform on the open interval (0,1).
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_quantile(uniform01()); }

  double exponential() { return -std::log(uniform01()); }

  std::uint64_t next_u64() { return gen_(); }

private:
  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
};

} // namespace vinekde
