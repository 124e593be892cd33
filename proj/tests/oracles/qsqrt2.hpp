#pragma once

// Exact arithmetic in Q(sqrt 2)[i] for small hand-built 4x4 matrices.

#include <array>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace oracle {

struct Rational {
  std::int64_t n = 0, d = 1;
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1) : n(num), d(den) {
    if (d == 0) throw std::domain_error("zero denominator");
    if (d < 0) n = -n, d = -d;
    const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) n /= g, d /= g;
  }
  double value() const { return double(n) / double(d); }
  friend Rational operator+(Rational a, Rational b) { return {a.n * b.d + b.n * a.d, a.d * b.d}; }
  friend Rational operator-(Rational a, Rational b) { return {a.n * b.d - b.n * a.d, a.d * b.d}; }
  friend Rational operator*(Rational a, Rational b) { return {a.n * b.n, a.d * b.d}; }
  friend bool operator==(Rational a, Rational b) { return a.n == b.n && a.d == b.d; }
};

// a + b sqrt(2)
struct QSqrt2 {
  Rational a, b;
  double value() const { return a.value() + b.value() * 1.41421356237309504880; }
  friend QSqrt2 operator+(QSqrt2 x, QSqrt2 y) { return {x.a + y.a, x.b + y.b}; }
  friend QSqrt2 operator-(QSqrt2 x, QSqrt2 y) { return {x.a - y.a, x.b - y.b}; }
  friend QSqrt2 operator*(QSqrt2 x, QSqrt2 y) {
    return {x.a * y.a + Rational(2) * x.b * y.b, x.a * y.b + x.b * y.a};
  }
};

// re + i im
struct Gauss {
  QSqrt2 re, im;
  std::complex<double> value() const { return {re.value(), im.value()}; }
  friend Gauss operator+(Gauss x, Gauss y) { return {x.re + y.re, x.im + y.im}; }
  friend Gauss operator-(Gauss x, Gauss y) { return {x.re - y.re, x.im - y.im}; }
  friend Gauss operator*(Gauss x, Gauss y) {
    return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
  }
};

using ExactMatrix = std::array<std::array<Gauss, 4>, 4>;

inline Gauss integer(std::int64_t re, std::int64_t im = 0) {
  return {{Rational(re), Rational(0)}, {Rational(im), Rational(0)}};
}

inline ExactMatrix zero() {
  ExactMatrix m;
  for (auto& row : m)
    for (auto& v : row) v = integer(0);
  return m;
}

inline ExactMatrix operator*(const ExactMatrix& x, const ExactMatrix& y) {
  ExactMatrix m = zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) m[i][j] = m[i][j] + x[i][k] * y[k][j];
  return m;
}

inline ExactMatrix operator+(const ExactMatrix& x, const ExactMatrix& y) {
  ExactMatrix m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m[i][j] = x[i][j] + y[i][j];
  return m;
}

inline ExactMatrix scale(Gauss s, const ExactMatrix& x) {
  ExactMatrix m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m[i][j] = s * x[i][j];
  return m;
}

// Standard representation built from integer Pauli entries.
inline ExactMatrix beta() {
  ExactMatrix m = zero();
  m[0][0] = m[1][1] = integer(1);
  m[2][2] = m[3][3] = integer(-1);
  return m;
}

inline ExactMatrix sigma_x() {
  ExactMatrix m = zero();
  m[0][1] = m[1][0] = m[2][3] = m[3][2] = integer(1);
  return m;
}

inline ExactMatrix alpha_y() {
  ExactMatrix m = zero();
  m[0][3] = m[2][1] = integer(0, -1);
  m[1][2] = m[3][0] = integer(0, 1);
  return m;
}

// S_FW,x at p = (0,0,1), m0 = c = 1:
//   Sigma_x/2 - i beta alpha_y / (2 sqrt2) - Sigma_x / (2 sqrt2 (sqrt2 + 1))
// with 1/(2 sqrt2) = sqrt2/4 and 1/(2 sqrt2 (sqrt2+1)) = (2 - sqrt2)/4.
inline ExactMatrix fw_spin_x_at_unit_z() {
  const Gauss half{{Rational(1, 2), Rational(0)}, {Rational(0), Rational(0)}};
  const Gauss neg_i_sqrt2_4{{Rational(0), Rational(0)}, {Rational(0), Rational(-1, 4)}};
  const Gauss proj{{Rational(-1, 2), Rational(1, 4)}, {Rational(0), Rational(0)}};
  return scale(half, sigma_x()) + scale(neg_i_sqrt2_4, beta() * alpha_y()) + scale(proj, sigma_x());
}

}  // namespace oracle
