#ifndef HIERVIS_RNG_HPP
#define HIERVIS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "hiervis/error.hpp"

namespace hiervis {

// Deterministic variate generator. The uniform source is std::mt19937_64,
// whose output sequence is fixed by the standard; every transformation
// (Box-Muller normals, Marsaglia-Tsang gammas) is implemented here instead
// of via std::*_distribution, whose algorithms differ between standard
// libraries. Chain c of a sampler run uses Rng(seed + c).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on (0, 1), endpoints excluded so log() is always finite.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the trigonometric Box-Muller transform, second
  // variate cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Gamma(shape, scale 1), Marsaglia-Tsang squeeze for shape >= 1 with the
  // usual power boost below 1.
  double gamma(double shape) {
    if (!(shape > 0.0)) fail("numeric", "gamma shape must be positive");
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_square(double df) { return 2.0 * gamma(0.5 * df); }

  // Inverse-Gamma(shape, scale): 1/X with X ~ Gamma(shape, rate = scale).
  double inverse_gamma(double shape, double scale) {
    return scale / gamma(shape);
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hiervis

#endif  // HIERVIS_RNG_HPP
