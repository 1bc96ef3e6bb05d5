#ifndef HIERVIS_LINALG2_HPP
#define HIERVIS_LINALG2_HPP

#include <cmath>

#include "hiervis/error.hpp"
#include "hiervis/rng.hpp"

namespace hiervis {

// All model-level linear algebra is 2-dimensional (intercept, slope), so a
// small fixed-size pair of types replaces a matrix library.

struct Vec2 {
  double a = 0.0;  // intercept component
  double b = 0.0;  // slope component

  Vec2 operator+(const Vec2& o) const { return {a + o.a, b + o.b}; }
  Vec2 operator-(const Vec2& o) const { return {a - o.a, b - o.b}; }
  Vec2 operator*(double s) const { return {a * s, b * s}; }
  Vec2& operator+=(const Vec2& o) {
    a += o.a;
    b += o.b;
    return *this;
  }
  double dot(const Vec2& o) const { return a * o.a + b * o.b; }
};

struct Mat2 {
  double m00 = 0.0, m01 = 0.0, m10 = 0.0, m11 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 diag(double d0, double d1) { return {d0, 0.0, 0.0, d1}; }

  // Symmetric rank-one x * x^T.
  static Mat2 outer(const Vec2& x) {
    return {x.a * x.a, x.a * x.b, x.b * x.a, x.b * x.b};
  }

  Mat2 operator+(const Mat2& o) const {
    return {m00 + o.m00, m01 + o.m01, m10 + o.m10, m11 + o.m11};
  }
  Mat2 operator*(double s) const { return {m00 * s, m01 * s, m10 * s, m11 * s}; }
  Vec2 operator*(const Vec2& v) const {
    return {m00 * v.a + m01 * v.b, m10 * v.a + m11 * v.b};
  }
  Mat2 operator*(const Mat2& o) const {
    return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
            m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
  }

  double det() const { return m00 * m11 - m01 * m10; }
  double trace() const { return m00 + m11; }

  Mat2 inverse() const {
    const double d = det();
    if (d == 0.0 || !std::isfinite(d)) fail("numeric", "singular 2x2 matrix");
    const double inv = 1.0 / d;
    return {m11 * inv, -m01 * inv, -m10 * inv, m00 * inv};
  }

  bool positive_definite() const {
    return m00 > 0.0 && det() > 0.0 && std::isfinite(m00) &&
           std::isfinite(m01) && std::isfinite(m11);
  }
};

// Lower Cholesky factor of a symmetric PD matrix. On failure adds
// 1e-8 * trace * I and retries once before giving up.
inline Mat2 cholesky_lower(const Mat2& m) {
  auto attempt = [](const Mat2& s, Mat2* out) {
    if (!(s.m00 > 0.0)) return false;
    const double l00 = std::sqrt(s.m00);
    const double l10 = s.m10 / l00;
    const double rem = s.m11 - l10 * l10;
    if (!(rem > 0.0)) return false;
    *out = {l00, 0.0, l10, std::sqrt(rem)};
    return true;
  };
  Mat2 l;
  if (attempt(m, &l)) return l;
  const double jitter = 1e-8 * std::abs(m.trace());
  Mat2 bumped = m + Mat2::diag(jitter, jitter);
  if (attempt(bumped, &l)) return l;
  fail("numeric", "matrix not positive definite after jitter retry");
}

// Draw from N(mean, cov), cov symmetric PD.
inline Vec2 mvn2_draw(const Vec2& mean, const Mat2& cov, Rng& rng) {
  const Mat2 l = cholesky_lower(cov);
  const Vec2 z{rng.normal(), rng.normal()};
  return {mean.a + l.m00 * z.a, mean.b + l.m10 * z.a + l.m11 * z.b};
}

// Draw from Wishart(df, scale) by the Bartlett decomposition, then invert:
// result ~ Inverse-Wishart(df, inv(scale_inv)) when given the IW scale
// directly. Caller passes the IW scale Psi; df must exceed 1.
inline Mat2 inverse_wishart_draw(double df, const Mat2& psi, Rng& rng) {
  if (!(df > 1.0)) fail("numeric", "inverse-Wishart df must exceed dim - 1");
  const Mat2 l = cholesky_lower(psi.inverse());  // scale of the Wishart
  Mat2 bartlett{std::sqrt(rng.chi_square(df)), 0.0, rng.normal(),
                std::sqrt(rng.chi_square(df - 1.0))};
  const Mat2 la = l * bartlett;
  // W = la * la^T ~ Wishart(df, psi^{-1}); the draw is W^{-1}.
  Mat2 w{la.m00 * la.m00 + la.m01 * la.m01, la.m00 * la.m10 + la.m01 * la.m11,
         la.m10 * la.m00 + la.m11 * la.m01, la.m10 * la.m10 + la.m11 * la.m11};
  Mat2 out = w.inverse();
  // Exact symmetry keeps the draws-file columns consistent.
  const double off = 0.5 * (out.m01 + out.m10);
  out.m01 = off;
  out.m10 = off;
  return out;
}

}  // namespace hiervis

#endif  // HIERVIS_LINALG2_HPP
