#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace intfb {

// Seeded source used by every generator in the library. The uniform mapping
// is written out so that seeded instances are identical across standard
// library implementations (std::uniform_real_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::initializer_list<std::uint64_t> keys);

  // Uniform in [0, 1).
  double canonical() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * canonical(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi);
  Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

}  // namespace intfb
