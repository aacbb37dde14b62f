// Copyright 2026 The lostatsea Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Hypothesis tests used by the report tables: Welch's t, the exact binomial
// test and Pearson's chi-square. Distribution tails come from the regularized
// incomplete beta and gamma functions evaluated with Lentz continued fractions.

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lostatsea/core.hpp"

namespace lostatsea::stats {

enum class Alternative { kTwoSided, kGreater, kLess };
enum class TestMethod { kWelchT, kBinomialExact, kChiSquare };

inline std::string_view to_string(Alternative a) noexcept {
  switch (a) {
    case Alternative::kTwoSided: return "two_sided";
    case Alternative::kGreater: return "greater";
    case Alternative::kLess: return "less";
  }
  return "?";
}

inline std::string_view to_string(TestMethod m) noexcept {
  switch (m) {
    case TestMethod::kWelchT: return "welch_t";
    case TestMethod::kBinomialExact: return "binomial_exact";
    case TestMethod::kChiSquare: return "chi_square";
  }
  return "?";
}

inline Alternative parse_alternative(std::string_view s) {
  if (s == "two_sided") return Alternative::kTwoSided;
  if (s == "greater") return Alternative::kGreater;
  if (s == "less") return Alternative::kLess;
  throw ValidationError("unknown alternative '" + std::string(s) + "'");
}

struct TestResult {
  double statistic = 0.0;
  std::optional<double> degrees_of_freedom;
  double p_value = 1.0;
  TestMethod method = TestMethod::kWelchT;
  Alternative alternative = Alternative::kTwoSided;
};

namespace detail {

inline constexpr int kMaxIterations = 10000;
inline constexpr double kEpsilon = 1e-16;
inline constexpr double kTiny = 1e-300;

inline double clamp_probability(double p) { return std::min(1.0, std::max(0.0, p)); }

// Continued fraction for I_x(a, b), modified Lentz.
inline double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEpsilon) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete_beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Regularized upper incomplete gamma Q(a, x).
inline double incomplete_gamma_upper(double a, double x) {
  if (!(a > 0.0)) throw ValidationError("incomplete_gamma_upper: a must be positive");
  if (x <= 0.0) return 1.0;
  const double log_front = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    // Series for P(a, x).
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 1; n <= detail::kMaxIterations; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * detail::kEpsilon)
        return detail::clamp_probability(1.0 - sum * std::exp(log_front));
    }
    throw Error("incomplete gamma series did not converge");
  }
  double b = x + 1.0 - a;
  double c = 1.0 / detail::kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= detail::kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < detail::kTiny) d = detail::kTiny;
    c = b + an / c;
    if (std::fabs(c) < detail::kTiny) c = detail::kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < detail::kEpsilon) return detail::clamp_probability(std::exp(log_front) * h);
  }
  throw Error("incomplete gamma continued fraction did not converge");
}

/// CDF of Student's t with `df` degrees of freedom.
inline double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("student_t_cdf: df must be positive");
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

inline double chi_square_survival(double statistic, double df) {
  return incomplete_gamma_upper(df / 2.0, statistic / 2.0);
}

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double sd() const { return std::sqrt(variance); }
  double se() const { return n > 0 ? std::sqrt(variance / static_cast<double>(n)) : 0.0; }
};

inline SampleSummary summarize(std::span<const double> xs) {
  SampleSummary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / static_cast<double>(s.n - 1);
  }
  return s;
}

/// Welch's unequal-variance t test of mean(a) against mean(b).
/// kGreater tests mean(a) > mean(b).
inline TestResult welch_t_test(std::span<const double> a, std::span<const double> b,
                               Alternative alternative = Alternative::kTwoSided) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("welch_t_test: each sample needs at least 2 values");
  const auto sa = summarize(a), sb = summarize(b);
  const double va = sa.variance / static_cast<double>(sa.n);
  const double vb = sb.variance / static_cast<double>(sb.n);
  if (va == 0.0 && vb == 0.0) throw ValidationError("welch_t_test: both samples have zero variance");

  const double se2 = va + vb;
  const double t = (sa.mean - sb.mean) / std::sqrt(se2);
  const double df = se2 * se2 / (va * va / static_cast<double>(sa.n - 1) + vb * vb / static_cast<double>(sb.n - 1));

  TestResult r;
  r.method = TestMethod::kWelchT;
  r.alternative = alternative;
  r.statistic = t;
  r.degrees_of_freedom = df;
  switch (alternative) {
    case Alternative::kTwoSided: r.p_value = incomplete_beta(df / 2.0, 0.5, df / (df + t * t)); break;
    case Alternative::kGreater: r.p_value = 1.0 - student_t_cdf(t, df); break;
    case Alternative::kLess: r.p_value = student_t_cdf(t, df); break;
  }
  r.p_value = detail::clamp_probability(r.p_value);
  return r;
}

/// Relative slack when comparing point masses for the two-sided test.
inline constexpr long double kMinlikeSlack = 1.0L + 1e-7L;

inline long double binomial_pmf(int k, int n, double p) {
  if (p == 0.0) return k == 0 ? 1.0L : 0.0L;
  if (p == 1.0) return k == n ? 1.0L : 0.0L;
  const long double log_pmf = std::lgamma(static_cast<long double>(n) + 1) -
                              std::lgamma(static_cast<long double>(k) + 1) -
                              std::lgamma(static_cast<long double>(n - k) + 1) +
                              k * std::log(static_cast<long double>(p)) +
                              (n - k) * std::log1p(-static_cast<long double>(p));
  return std::exp(log_pmf);
}

/// Exact binomial test of k successes in n trials against success rate p0.
/// Two-sided p sums every outcome no more likely than the observed one.
inline TestResult binomial_test_exact(int k, int n, double p0, Alternative alternative = Alternative::kTwoSided) {
  if (n < 0 || k < 0 || k > n) throw ValidationError("binomial_test_exact: need 0 <= k <= n");
  if (!(p0 > 0.0 && p0 < 1.0)) throw ValidationError("binomial_test_exact: p0 must lie in (0, 1)");

  long double p = 0.0L;
  switch (alternative) {
    case Alternative::kLess:
      for (int i = 0; i <= k; ++i) p += binomial_pmf(i, n, p0);
      break;
    case Alternative::kGreater:
      for (int i = k; i <= n; ++i) p += binomial_pmf(i, n, p0);
      break;
    case Alternative::kTwoSided: {
      const long double observed = binomial_pmf(k, n, p0) * kMinlikeSlack;
      for (int i = 0; i <= n; ++i) {
        const long double mass = binomial_pmf(i, n, p0);
        if (mass <= observed) p += mass;
      }
      break;
    }
  }
  TestResult r;
  r.method = TestMethod::kBinomialExact;
  r.alternative = alternative;
  r.statistic = static_cast<double>(k);
  r.p_value = detail::clamp_probability(static_cast<double>(p));
  return r;
}

/// Pearson chi-square test of homogeneity over an R x K count table.
inline TestResult chi_square_test(const std::vector<std::vector<double>>& table, bool yates = false) {
  const std::size_t rows = table.size();
  if (rows < 2) throw ValidationError("chi_square_test: need at least 2 rows");
  const std::size_t cols = table.front().size();
  if (cols < 2) throw ValidationError("chi_square_test: need at least 2 columns");
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (table[i].size() != cols) throw ValidationError("chi_square_test: ragged table");
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = table[i][j];
      if (!(v >= 0.0)) throw ValidationError("chi_square_test: counts must be non-negative");
      row_sum[i] += v;
      col_sum[j] += v;
      total += v;
    }
  }
  for (double s : row_sum)
    if (s == 0.0) throw ValidationError("chi_square_test: zero row marginal");
  for (double s : col_sum)
    if (s == 0.0) throw ValidationError("chi_square_test: zero column marginal");

  const bool correct = yates && rows == 2 && cols == 2;
  double statistic = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double expected = row_sum[i] * col_sum[j] / total;
      double diff = std::fabs(table[i][j] - expected);
      if (correct) diff = std::max(0.0, diff - 0.5);
      statistic += diff * diff / expected;
    }

  TestResult r;
  r.method = TestMethod::kChiSquare;
  r.alternative = Alternative::kTwoSided;
  r.statistic = statistic;
  r.degrees_of_freedom = static_cast<double>((rows - 1) * (cols - 1));
  r.p_value = chi_square_survival(statistic, *r.degrees_of_freedom);
  return r;
}

}  // namespace lostatsea::stats
