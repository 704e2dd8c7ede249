#pragma once

// The canonical smooth step sigma: 1 on (-inf, 1], 0 on [2, inf), C-infinity,
// built from g(s) = exp(-1/s). Derivatives come from truncated Taylor jets so
// value and derivatives share one formula.

#include <array>
#include <cmath>

namespace tubed {

/// Truncated Taylor series: c[k] = f^(k)(t0) / k!, k <= 4.
struct Jet {
  static constexpr int kOrder = 4;
  std::array<double, kOrder + 1> c{};

  static Jet constant(double v) {
    Jet j;
    j.c[0] = v;
    return j;
  }
  static Jet variable(double t) {
    Jet j;
    j.c[0] = t;
    j.c[1] = 1.0;
    return j;
  }

  /// f^(k)(t0) = k! c[k].
  double derivative(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f * c[k];
  }
};

inline Jet operator+(Jet a, const Jet& b) {
  for (int k = 0; k <= Jet::kOrder; ++k) a.c[k] += b.c[k];
  return a;
}

inline Jet operator-(Jet a, const Jet& b) {
  for (int k = 0; k <= Jet::kOrder; ++k) a.c[k] -= b.c[k];
  return a;
}

inline Jet operator-(double s, const Jet& b) { return Jet::constant(s) - b; }

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k <= Jet::kOrder; ++k)
    for (int i = 0; i <= k; ++i) r.c[k] += a.c[i] * b.c[k - i];
  return r;
}

/// Requires b.c[0] != 0.
inline Jet operator/(const Jet& a, const Jet& b) {
  Jet q;
  for (int k = 0; k <= Jet::kOrder; ++k) {
    double s = a.c[k];
    for (int j = 1; j <= k; ++j) s -= b.c[j] * q.c[k - j];
    q.c[k] = s / b.c[0];
  }
  return q;
}

/// e = exp(a) via k e_k = sum_j j a_j e_{k-j}.
inline Jet exp(const Jet& a) {
  Jet e;
  e.c[0] = std::exp(a.c[0]);
  for (int k = 1; k <= Jet::kOrder; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a.c[j] * e.c[k - j];
    e.c[k] = s / k;
  }
  return e;
}

namespace detail {

/// g(s) = exp(-1/s) for s > 0; callers only use it for s > 0.
inline Jet bump_g(const Jet& s) { return exp(Jet::constant(0.0) - Jet::constant(1.0) / s); }

}  // namespace detail

/// sigma(t) and its derivatives at t as a jet. Outside (1, 2) sigma is
/// locally constant, so every derivative is exactly zero there.
inline Jet bump_jet(double t) {
  if (!(t > 1.0)) return Jet::constant(1.0);
  if (!(t < 2.0)) return Jet::constant(0.0);
  const Jet x = Jet::variable(t);
  const Jet a = detail::bump_g(2.0 - x);
  const Jet b = detail::bump_g(x - Jet::constant(1.0));
  return a / (a + b);
}

inline double bump(double t) {
  if (!(t > 1.0)) return 1.0;
  if (!(t < 2.0)) return 0.0;
  const double a = std::exp(-1.0 / (2.0 - t));
  const double b = std::exp(-1.0 / (t - 1.0));
  return a / (a + b);
}

/// sigma^(k)(t), k <= 4.
inline double bump_derivative(double t, int k) { return bump_jet(t).derivative(k); }

}  // namespace tubed
