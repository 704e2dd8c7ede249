#pragma once

// Second fundamental form of a surface in codimension m, sampled as m
// symmetric 2x2 matrices in orthonormal tangent and normal frames, and the
// Gauss-formula bound -2 <= K <= 1 under normal curvatures <= 1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "tubed/errors.hpp"
#include "tubed/rng.hpp"

namespace tubed {

struct SffSample {
  std::vector<Eigen::Matrix2d> s;

  int codimension() const { return static_cast<int>(s.size()); }

  void validate() const {
    if (s.empty()) throw PreconditionError("geometry-checks", "SFF sample needs codimension >= 1");
    for (std::size_t k = 0; k < s.size(); ++k)
      if (s[k](0, 1) != s[k](1, 0))
        throw PreconditionError("geometry-checks", "SFF component " + std::to_string(k) + " is not symmetric");
  }

  /// s(u, u) for u = (cos t, sin t).
  Eigen::VectorXd normal_at(double t) const {
    const double c = std::cos(t), d = std::sin(t);
    Eigen::VectorXd out(codimension());
    for (int k = 0; k < codimension(); ++k) out(k) = s[k](0, 0) * c * c + 2.0 * s[k](0, 1) * c * d + s[k](1, 1) * d * d;
    return out;
  }
};

struct GaussTerms {
  /// Mean over the unit circle of s(u, u).
  Eigen::VectorXd h;
  /// Mean over the unit circle of |s(u, u)|^2.
  double h_hat = 0.0;
  /// 3 |h|^2 - 2 h_hat.
  double K = 0.0;
};

/// Closed form: with s = [[a, b], [b, c]], s(u,u) = (a+c)/2 + (a-c)/2 cos 2t
/// + b sin 2t, so h = (a+c)/2 and the mean square adds (a-c)^2/8 + b^2/2.
inline GaussTerms gauss_terms(const SffSample& sff) {
  sff.validate();
  GaussTerms g;
  g.h.resize(sff.codimension());
  for (int k = 0; k < sff.codimension(); ++k) {
    const double a = sff.s[k](0, 0), b = sff.s[k](0, 1), c = sff.s[k](1, 1);
    g.h(k) = 0.5 * (a + c);
    g.h_hat += g.h(k) * g.h(k) + (a - c) * (a - c) / 8.0 + b * b / 2.0;
  }
  g.K = 3.0 * g.h.squaredNorm() - 2.0 * g.h_hat;
  return g;
}

inline double gauss_curvature(const SffSample& sff) { return gauss_terms(sff).K; }

/// The same means by the N-point trapezoid rule on the circle, exact for
/// trigonometric polynomials of degree < N.
inline GaussTerms gauss_terms_quadrature(const SffSample& sff, int N = 1024) {
  sff.validate();
  GaussTerms g;
  g.h = Eigen::VectorXd::Zero(sff.codimension());
  for (int i = 0; i < N; ++i) {
    const Eigen::VectorXd v = sff.normal_at(2.0 * std::numbers::pi * i / N);
    g.h += v;
    g.h_hat += v.squaredNorm();
  }
  g.h /= N;
  g.h_hat /= N;
  g.K = 3.0 * g.h.squaredNorm() - 2.0 * g.h_hat;
  return g;
}

namespace detail {

constexpr double kNormalGridStep = 1e-4;

/// (cos 2t, sin 2t) on the grid t = i * 1e-4 covering [0, pi).
inline const std::vector<std::pair<double, double>>& double_angle_table() {
  static const std::vector<std::pair<double, double>> table = [] {
    std::vector<std::pair<double, double>> t;
    const auto count = static_cast<long long>(std::ceil(std::numbers::pi / kNormalGridStep));
    for (long long i = 0; i < count; ++i) {
      const double a = 2.0 * static_cast<double>(i) * kNormalGridStep;
      t.emplace_back(std::cos(a), std::sin(a));
    }
    return t;
  }();
  return table;
}

}  // namespace detail

/// max over unit u of |s(u, u)|: grid of step 1e-4 on [0, pi) (s(u,u) is
/// even in u), then Brent refinement around the best grid angle.
inline double max_normal_curvature(const SffSample& sff) {
  sff.validate();
  // s_k(u,u) = m_k + p_k cos 2t + q_k sin 2t.
  const int m = sff.codimension();
  std::vector<double> mean(m), pc(m), qs(m);
  for (int k = 0; k < m; ++k) {
    mean[k] = 0.5 * (sff.s[k](0, 0) + sff.s[k](1, 1));
    pc[k] = 0.5 * (sff.s[k](0, 0) - sff.s[k](1, 1));
    qs[k] = sff.s[k](0, 1);
  }
  const auto& table = detail::double_angle_table();
  double best = -1.0;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    double v = 0.0;
    for (int k = 0; k < m; ++k) {
      const double e = mean[k] + pc[k] * table[i].first + qs[k] * table[i].second;
      v += e * e;
    }
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  const double step = detail::kNormalGridStep, best_t = static_cast<double>(best_i) * step;
  const auto neg = [&](double t) { return -sff.normal_at(t).squaredNorm(); };
  const auto refined = boost::math::tools::brent_find_minima(neg, best_t - step, best_t + step, 40);
  return std::sqrt(std::max(best, -refined.second));
}

struct LemmaResult {
  /// max normal curvature <= 1 (up to 1e-12 rounding), the lemma's hypothesis.
  bool applicable = false;
  /// True when inapplicable or K in [-2 - 1e-9, 1 + 1e-9].
  bool passes = true;
  double K = 0.0;
  double max_normal_curvature = 0.0;
};

inline LemmaResult lemma_check(const SffSample& sff) {
  LemmaResult r;
  r.K = gauss_curvature(sff);
  r.max_normal_curvature = max_normal_curvature(sff);
  r.applicable = r.max_normal_curvature <= 1.0 + 1e-12;
  if (r.applicable) r.passes = r.K >= -2.0 - 1e-9 && r.K <= 1.0 + 1e-9;
  return r;
}

struct SweepOptions {
  std::size_t samples = 10'000;
  int max_codim = 3;
  double entry_bound = 1.5;
  std::uint64_t seed = 1;
};

struct SweepReport {
  std::size_t samples = 0;
  std::size_t rejected = 0;
  std::size_t violations = 0;
  double K_min = 0.0;
  double K_max = 0.0;
  /// max |closed form - quadrature| over h, h_hat and K.
  double quadrature_gap = 0.0;
  std::uint64_t seed = 0;
};

/// Rejection sampling of admissible forms: codimension uniform in
/// 1..max_codim, entries uniform in [-bound, bound], kept iff every normal
/// curvature is <= 1.
inline SweepReport lemma_sweep(const SweepOptions& opts = {}) {
  Rng rng(opts.seed);
  SweepReport rep;
  rep.seed = opts.seed;
  rep.K_min = std::numeric_limits<double>::infinity();
  rep.K_max = -std::numeric_limits<double>::infinity();
  while (rep.samples < opts.samples) {
    SffSample sff;
    const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(opts.max_codim)));
    for (int k = 0; k < m; ++k) {
      Eigen::Matrix2d s;
      s(0, 0) = rng.uniform(-opts.entry_bound, opts.entry_bound);
      s(0, 1) = s(1, 0) = rng.uniform(-opts.entry_bound, opts.entry_bound);
      s(1, 1) = rng.uniform(-opts.entry_bound, opts.entry_bound);
      sff.s.push_back(s);
    }
    // Cheap necessary test on eight directions before the full scan.
    bool plausible = true;
    for (int i = 0; i < 8 && plausible; ++i) plausible = sff.normal_at(std::numbers::pi * i / 8.0).norm() <= 1.0;
    if (!plausible) {
      ++rep.rejected;
      continue;
    }
    const LemmaResult r = lemma_check(sff);
    if (!r.applicable) {
      ++rep.rejected;
      continue;
    }
    ++rep.samples;
    if (!r.passes) ++rep.violations;
    rep.K_min = std::min(rep.K_min, r.K);
    rep.K_max = std::max(rep.K_max, r.K);
    const GaussTerms c = gauss_terms(sff), q = gauss_terms_quadrature(sff);
    rep.quadrature_gap = std::max({rep.quadrature_gap, (c.h - q.h).cwiseAbs().maxCoeff(), std::abs(c.h_hat - q.h_hat),
                                   std::abs(c.K - q.K)});
  }
  return rep;
}

}  // namespace tubed
