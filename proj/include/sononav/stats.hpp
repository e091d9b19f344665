#pragma once

// Two-sample statistics for comparing navigation modalities: Welch and pooled
// t-tests, paired t-test, two one-sided tests (TOST) for equivalence, and the
// least symmetric equivalence interval. The Student t CDF is evaluated through
// the regularized incomplete beta function (Lentz continued fraction, relative
// precision target 1e-12 or better).

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sononav/error.hpp"

namespace sononav::stats {

struct MeanSd {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 when n < 2
};

inline MeanSd mean_sd(std::span<const double> values) {
  MeanSd out;
  out.n = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

// ---- distributions -----------------------------------------------------------

namespace detail {

// Continued fraction for I_x(a, b), valid for x < (a + 1) / (a + b + 2).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta parameters must be positive");
  if (std::isnan(x)) return x;
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
inline double student_t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return std::clamp(incomplete_beta(0.5 * df, 0.5, df / (df + t * t)), 0.0, 1.0);
}

/// P(T <= t).
inline double student_t_cdf(double t, double df) {
  if (t == std::numeric_limits<double>::infinity()) return 1.0;
  if (t == -std::numeric_limits<double>::infinity()) return 0.0;
  const double tail = 0.5 * student_t_two_sided(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

/// P(T >= t).
inline double student_t_sf(double t, double df) {
  if (t == std::numeric_limits<double>::infinity()) return 0.0;
  if (t == -std::numeric_limits<double>::infinity()) return 1.0;
  const double tail = 0.5 * student_t_two_sided(t, df);
  return t > 0.0 ? tail : 1.0 - tail;
}

// ---- tests -------------------------------------------------------------------

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

enum class VarianceModel { Welch, Pooled };

namespace detail {

inline void check_sample(std::span<const double> x, const char* name) {
  if (x.size() < 2) throw Error(ErrorCode::InvalidArgument, std::string(name) + " needs at least 2 values");
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, std::string(name) + " has non-finite values");
  }
}

struct Difference {
  double diff = 0.0;  // mean(a) - mean(b)
  double se = 0.0;
  double df = 0.0;
};

inline Difference mean_difference(std::span<const double> a, std::span<const double> b, VarianceModel model) {
  check_sample(a, "sample a");
  check_sample(b, "sample b");
  const MeanSd sa = mean_sd(a), sb = mean_sd(b);
  const double na = static_cast<double>(sa.n), nb = static_cast<double>(sb.n);
  const double va = sa.sd * sa.sd, vb = sb.sd * sb.sd;
  if (va == 0.0 && vb == 0.0) throw Error(ErrorCode::DegenerateVariance, "both samples have zero variance");
  Difference out;
  out.diff = sa.mean - sb.mean;
  if (model == VarianceModel::Welch) {
    const double qa = va / na, qb = vb / nb;
    out.se = std::sqrt(qa + qb);
    out.df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  } else {
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    out.se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    out.df = na + nb - 2.0;
  }
  return out;
}

}  // namespace detail

/// Independent two-sample t-test; Welch (unequal variances) by default.
inline TTestResult welch_t(std::span<const double> a, std::span<const double> b,
                           VarianceModel model = VarianceModel::Welch) {
  const auto d = detail::mean_difference(a, b, model);
  TTestResult r;
  r.t = d.diff / d.se;
  r.df = d.df;
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

/// One-sample t-test on the pairwise differences before[i] - after[i].
inline TTestResult paired_t(std::span<const double> before, std::span<const double> after) {
  if (before.size() != after.size()) throw Error(ErrorCode::LengthMismatch, "paired samples differ in length");
  detail::check_sample(before, "before");
  detail::check_sample(after, "after");
  std::vector<double> diffs(before.size());
  for (std::size_t i = 0; i < before.size(); ++i) diffs[i] = before[i] - after[i];
  const MeanSd s = mean_sd(diffs);
  TTestResult r;
  r.df = static_cast<double>(s.n) - 1.0;
  if (s.sd == 0.0) {
    if (s.mean == 0.0) return TTestResult{0.0, r.df, 1.0};
    throw Error(ErrorCode::DegenerateVariance, "pairwise differences are constant and non-zero");
  }
  r.t = s.mean / (s.sd / std::sqrt(static_cast<double>(s.n)));
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

struct EquivalenceInterval {
  double lower = 0.0;  // Delta_L > 0; the interval is (-lower, upper)
  double upper = 0.0;
};

struct TostResult {
  double delta_lower = 0.0;
  double delta_upper = 0.0;
  double p_lower = 1.0;  // H0: diff <= -delta_lower
  double p_upper = 1.0;  // H0: diff >= delta_upper
  double df = 0.0;
  bool equivalent = false;
};

/// Two one-sided tests on diff = mean(a) - mean(b); equivalent when both
/// null hypotheses are rejected at level alpha.
inline TostResult tost(std::span<const double> a, std::span<const double> b, EquivalenceInterval ei,
                       double alpha = 0.05, VarianceModel model = VarianceModel::Welch) {
  if (!(ei.lower > 0.0) || !(ei.upper > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "equivalence bounds must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be in (0, 1)");
  const auto d = detail::mean_difference(a, b, model);
  TostResult r;
  r.delta_lower = ei.lower;
  r.delta_upper = ei.upper;
  r.df = d.df;
  r.p_lower = student_t_sf((d.diff + ei.lower) / d.se, d.df);
  r.p_upper = student_t_cdf((d.diff - ei.upper) / d.se, d.df);
  r.equivalent = std::max(r.p_lower, r.p_upper) < alpha;
  return r;
}

/// Smallest symmetric Delta for which tost(a, b, (Delta, Delta)) reports
/// equivalence, by bisection over [0, 10 * range(a u b)] to 1e-6 of that scale.
inline double least_equivalence_interval(std::span<const double> a, std::span<const double> b,
                                         double alpha = 0.05, VarianceModel model = VarianceModel::Welch) {
  detail::check_sample(a, "sample a");
  detail::check_sample(b, "sample b");
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const double range = std::max(*amax, *bmax) - std::min(*amin, *bmin);
  const double scale = 10.0 * range;
  auto equivalent = [&](double delta) { return tost(a, b, {delta, delta}, alpha, model).equivalent; };
  if (!(scale > 0.0) || !equivalent(scale)) {
    throw Error(ErrorCode::NonBracketable, "no equivalence within 10x the pooled data range");
  }
  double lo = 0.0, hi = scale;
  const double tol = 1e-6 * scale;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (equivalent(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace sononav::stats
