#ifndef HIERVIS_TESTS_CONJUGATE_ORACLE_HPP
#define HIERVIS_TESTS_CONJUGATE_ORACLE_HPP

// Independent closed-form oracle for the known-variance hierarchical model.
// Works through the marginal covariance of y with the random effects
// integrated out, using its own dense linear algebra; it shares no code
// with the sampler it checks.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hiervis/dataset.hpp"
#include "hiervis/linalg2.hpp"

namespace conjugate_oracle {

using DenseMatrix = std::vector<std::vector<double>>;

inline DenseMatrix dense_inverse(DenseMatrix a) {
  const std::size_t n = a.size();
  DenseMatrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-14) {
      throw std::runtime_error("oracle: singular matrix");
    }
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

struct BetaPosterior {
  double mean0 = 0.0, mean1 = 0.0;
  double cov00 = 0.0, cov01 = 0.0, cov11 = 0.0;
};

// Country model with sigma2 and the unit-offset covariance fixed:
//   y = X beta + Z u + e,  Cov(y) = V = sigma2 I + blockdiag(x_i^T S x_j)
//   beta | y ~ N( (S0^-1 + X^T V^-1 X)^-1 (S0^-1 m0 + X^T V^-1 y), ... )
inline BetaPosterior beta_posterior_known_variance(
    const hiervis::Dataset& ds, double sigma2, const hiervis::Mat2& unit_cov,
    const hiervis::Vec2& m0, const hiervis::Mat2& s0) {
  const std::size_t n = ds.size();
  DenseMatrix v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (ds.observations()[i].unit != ds.observations()[j].unit) continue;
      const double ti = ds.time(i), tj = ds.time(j);
      // (1, ti) S (1, tj)^T
      v[i][j] += unit_cov.m00 + unit_cov.m01 * tj + unit_cov.m10 * ti +
                 unit_cov.m11 * ti * tj;
    }
    v[i][i] += sigma2;
  }
  const DenseMatrix vinv = dense_inverse(v);

  // X^T V^-1 X (2x2) and X^T V^-1 y (2), with X = [1 t].
  double a00 = 0, a01 = 0, a11 = 0, b0 = 0, b1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0, row_y = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = vinv[i][j];
      row_sum += w;
      a01 += w * ds.time(j);
      a11 += ds.time(i) * w * ds.time(j);
      row_y += w * ds.observations()[j].value;
    }
    a00 += row_sum;
    b0 += row_y;
    b1 += ds.time(i) * row_y;
  }

  const hiervis::Mat2 s0inv = s0.inverse();
  const double p00 = s0inv.m00 + a00;
  const double p01 = s0inv.m01 + a01;
  const double p11 = s0inv.m11 + a11;
  const double det = p00 * p11 - p01 * p01;
  const double c00 = p11 / det, c01 = -p01 / det, c11 = p00 / det;
  const double r0 = s0inv.m00 * m0.a + s0inv.m01 * m0.b + b0;
  const double r1 = s0inv.m10 * m0.a + s0inv.m11 * m0.b + b1;

  BetaPosterior out;
  out.mean0 = c00 * r0 + c01 * r1;
  out.mean1 = c01 * r0 + c11 * r1;
  out.cov00 = c00;
  out.cov01 = c01;
  out.cov11 = c11;
  return out;
}

}  // namespace conjugate_oracle

#endif
