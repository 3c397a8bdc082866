#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace cql {

// Deterministic RNG for every sampling routine in the project. Uniform doubles
// are built from the top 53 bits of the generator output so the stream does
// not depend on distribution internals, and categorical draws use an explicit
// inverse-CDF walk. Gamma draws (for Dirichlet rows) go through the standard
// library; all artifacts are regenerated from seeds by the same binary, which
// is the reproducibility contract.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // probs must sum to ~1; the last index absorbs rounding slack.
  template <typename Row>
  int categorical(const Row& probs, int n) {
    double u = uniform();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return n - 1;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  double gamma(double shape) {
    std::gamma_distribution<double> g(shape, 1.0);
    return g(gen_);
  }

  std::vector<double> dirichlet(int n, double concentration) {
    if (n <= 0 || concentration <= 0.0)
      throw std::invalid_argument("dirichlet: need n > 0 and concentration > 0");
    std::vector<double> x(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      x[i] = gamma(concentration);
      total += x[i];
    }
    if (total <= 0.0) {
      // all-zero draw is astronomically unlikely but would poison the row
      for (int i = 0; i < n; ++i) x[i] = 1.0 / n;
      return x;
    }
    for (int i = 0; i < n; ++i) x[i] /= total;
    return x;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cql
