#ifndef LQGAMES_RNG_HPP
#define LQGAMES_RNG_HPP

#include <cstdint>
#include <vector>

#include "lqgames/linalg.hpp"

namespace lqgames {

// Counter-based stream seeding: every (master seed, path, tag) triple opens an
// independent, reproducible stream, so paths can be generated in any order or
// in parallel with identical results.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t stream_key(std::uint64_t master, std::uint64_t path, std::uint64_t tag);

// Standard-normal generator over a splitmix64 stream (Marsaglia polar method,
// built on explicit 53-bit uniforms; no library distributions involved).
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t key) : state_(key) {}
  NormalStream(std::uint64_t master, std::uint64_t path, std::uint64_t tag)
      : state_(stream_key(master, path, tag)) {}

  double next();
  VectorXd vector(int n);

 private:
  double next_uniform();  // in [0, 1)
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Draws from N(0, cov) through a fixed PSD factor.
class GaussianSampler {
 public:
  explicit GaussianSampler(const MatrixXd& cov) : factor_(psd_factor(cov)) {}
  VectorXd sample(NormalStream& stream) const {
    return factor_ * stream.vector(static_cast<int>(factor_.cols()));
  }
  const MatrixXd& factor() const { return factor_; }

 private:
  MatrixXd factor_;
};

// One path's exogenous randomness: the hidden state and all signal noises.
struct Primitives {
  VectorXd v;                           // hidden state draw
  std::vector<std::vector<VectorXd>> w;  // w[player][stage]
};

}  // namespace lqgames

#endif
