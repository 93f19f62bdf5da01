#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace doma {

// splitmix64 step; advances `state` and returns the next output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derives a child seed from (base, a, b). Used everywhere a trial, cell or
// candidate needs its own stream so that results do not depend on execution
// order. The exact mixing recipe is documented in the README and must not
// change between releases; recorded seeds would otherwise become
// irreproducible.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a,
                              std::uint64_t b = 0) {
  std::uint64_t s = base;
  std::uint64_t h = splitmix64(s);
  s = h ^ (a * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull);
  h = splitmix64(s);
  s = h ^ (b * 0x9E3779B97F4A7C15ull + 0x8CB92BA72F3D8DD7ull);
  return splitmix64(s);
}

// Deterministic random source. The engine (mt19937_64) and every transform
// below are fully specified here, so a given seed produces the same stream on
// every platform; std::normal_distribution and friends are deliberately not
// used because their algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n >= 1. Multiply-shift; the O(2^-64) bias is
  // irrelevant at the sample counts used here.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller; the second deviate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  // Filled row by row (sample-major): the stream layout is part of the
  // reproducibility contract.
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace doma
