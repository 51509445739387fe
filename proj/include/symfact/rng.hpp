#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "symfact/matcore.hpp"

namespace symfact {

/// Seeded, splittable random stream. A stream is identified by a 64-bit
/// seed plus a label; the same (seed, label) pair yields the same draws on
/// every platform (mt19937_64 output is standardized and the real/normal
/// transforms are implemented here rather than taken from <random>).
class Rng {
public:
  static constexpr std::string_view kVersion = "splitmix-mt19937_64-v1";

  Rng(std::uint64_t seed, std::string_view label);

  /// Independent child stream.
  Rng split(std::string_view label) const;

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& label() const noexcept { return label_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n);
  double normal();
  /// Standard complex Gaussian, E|z|^2 = 1.
  Complex complex_normal();
  Vector complex_vector(std::size_t n);
  Matrix complex_matrix(std::size_t rows, std::size_t cols);
  Matrix real_matrix(std::size_t rows, std::size_t cols);

private:
  std::uint64_t seed_;
  std::string label_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace symfact
