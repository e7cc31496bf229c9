#include "mtpeer/stats.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace mtpeer {

namespace {

constexpr double kMaxAbsCorrelation = 1.0 - 1e-15;

double normal_two_sided(double z) {
  boost::math::normal_distribution<double> std_normal;
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(
                                 std_normal, std::abs(z))));
}

// Null distribution of U for sample sizes (n1, n2) without ties, as counts of
// the C(n1+n2, n1) equally likely rank arrangements. counts[u] for u in
// [0, n1*n2].
std::vector<double> mann_whitney_counts(int n1, int n2) {
  // table[j][u] holds counts for (i, j) while sweeping i upward.
  std::vector<std::vector<double>> prev(n2 + 1), cur(n2 + 1);
  for (int j = 0; j <= n2; ++j) prev[j] = {1.0};  // i = 0: U is always 0
  for (int i = 1; i <= n1; ++i) {
    cur[0] = {1.0};
    for (int j = 1; j <= n2; ++j) {
      std::vector<double> c(static_cast<std::size_t>(i * j) + 1, 0.0);
      // Largest observation belongs to x: it beats all j values of y.
      const auto& a = prev[j];
      for (std::size_t u = 0; u < a.size(); ++u) c[u + j] += a[u];
      // Largest observation belongs to y.
      const auto& b = cur[j - 1];
      for (std::size_t u = 0; u < b.size(); ++u) c[u] += b[u];
      cur[j] = std::move(c);
    }
    std::swap(prev, cur);
  }
  return prev[n2];
}

}  // namespace

double fisher_weighted_average(std::span<const WeightedCorrelation> results) {
  if (results.empty()) {
    throw Error(ErrorKind::Domain, "weighted average of no correlations");
  }
  // Terms are summed in sorted order so the input order does not matter.
  std::vector<double> terms;
  std::vector<double> weights;
  for (const auto& [r, w] : results) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::Domain, "correlation weight must be positive");
    }
    if (!(std::abs(r) <= 1.0)) {
      throw Error(ErrorKind::Domain,
                  "correlation " + std::to_string(r) + " outside [-1, 1]");
    }
    double rc = r;
    if (std::abs(r) > kMaxAbsCorrelation) {
      rc = std::copysign(kMaxAbsCorrelation, r);
      warn("correlation " + std::to_string(r) +
           " clamped before Fisher transform");
    }
    terms.push_back(w * std::atanh(rc));
    weights.push_back(w);
  }
  std::sort(terms.begin(), terms.end());
  std::sort(weights.begin(), weights.end());
  const double num = std::accumulate(terms.begin(), terms.end(), 0.0);
  const double den = std::accumulate(weights.begin(), weights.end(), 0.0);
  return std::tanh(num / den);
}

TestResult williams_test(double r1h, double r2h, double r12, int n,
                         int tails) {
  if (n < 4) {
    throw Error(ErrorKind::InsufficientData,
                "Williams test needs n >= 4, got " + std::to_string(n));
  }
  if (tails != 1 && tails != 2) {
    throw Error(ErrorKind::Configuration, "tails must be 1 or 2");
  }
  for (double r : {r1h, r2h, r12}) {
    if (!(std::abs(r) <= 1.0)) {
      throw Error(ErrorKind::Domain, "correlation outside [-1, 1]");
    }
  }
  const double k = 1.0 - r12 * r12 - r1h * r1h - r2h * r2h +
                   2.0 * r12 * r1h * r2h;
  if (!(k > 0.0)) {
    throw Error(ErrorKind::DegenerateInputs,
                "Williams test: correlation matrix is singular (K = " +
                    std::to_string(k) + ")");
  }
  const double nm1 = n - 1.0;
  const double rbar = 0.5 * (r1h + r2h);
  const double one_minus = 1.0 - r12;
  const double t = (r1h - r2h) * std::sqrt(nm1 * (1.0 + r12)) /
                   std::sqrt(2.0 * k * nm1 / (n - 3.0) +
                             rbar * rbar * one_minus * one_minus * one_minus);

  boost::math::students_t_distribution<double> dist(n - 3.0);
  double p = 0.0;
  if (tails == 1) {
    p = boost::math::cdf(boost::math::complement(dist, t));
  } else {
    p = std::min(1.0, 2.0 * boost::math::cdf(
                                boost::math::complement(dist, std::abs(t))));
  }
  return {t, p};
}

double mann_whitney_u(std::span<const double> x, std::span<const double> y) {
  double u = 0.0;
  for (double a : x) {
    for (double b : y) {
      if (a > b) {
        u += 1.0;
      } else if (a == b) {
        u += 0.5;
      }
    }
  }
  return u;
}

TestResult rank_sum_test(std::span<const double> x, std::span<const double> y,
                         int exact_limit) {
  const auto n1 = static_cast<double>(x.size());
  const auto n2 = static_cast<double>(y.size());
  if (x.empty() || y.empty()) {
    throw Error(ErrorKind::InsufficientData, "rank-sum test of an empty sample");
  }

  // Mid-ranks over the pooled sample.
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(x.size() + y.size());
  for (double v : x) pooled.emplace_back(v, 0);
  for (double v : y) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end());

  double rank_sum_x = 0.0;
  double tie_term = 0.0;
  bool has_ties = false;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    const double t = static_cast<double>(j - i);
    const double mid_rank = 0.5 * (static_cast<double>(i + 1 + j));
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second == 0) rank_sum_x += mid_rank;
    }
    if (t > 1) {
      has_ties = true;
      tie_term += t * t * t - t;
    }
    i = j;
  }

  const double n = n1 + n2;
  const double u = rank_sum_x - n1 * (n1 + 1.0) / 2.0;
  const double mu = n1 * n2 / 2.0;
  const double var =
      n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  const double z = var > 0.0 ? (u - mu) / std::sqrt(var) : 0.0;

  if (!has_ties && static_cast<int>(x.size()) <= exact_limit &&
      static_cast<int>(y.size()) <= exact_limit) {
    const auto counts = mann_whitney_counts(static_cast<int>(x.size()),
                                            static_cast<int>(y.size()));
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto u_hi = static_cast<std::size_t>(std::llround(std::max(u, n1 * n2 - u)));
    double upper = 0.0;
    for (std::size_t k = u_hi; k < counts.size(); ++k) upper += counts[k];
    return {z, std::min(1.0, 2.0 * upper / total)};
  }
  if (!(var > 0.0)) return {0.0, 1.0};
  return {z, normal_two_sided(z)};
}

TestResult paired_t_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::Alignment, "paired t-test: samples differ in length");
  }
  if (x.size() < 2) {
    throw Error(ErrorKind::InsufficientData, "paired t-test needs 2 pairs");
  }
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::Map<const Eigen::ArrayXd> xa(x.data(), n);
  Eigen::Map<const Eigen::ArrayXd> ya(y.data(), n);
  const Eigen::ArrayXd d = xa - ya;
  const double mean = d.mean();
  const double ss = (d - mean).square().sum();
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) {
    if (mean == 0.0) return {0.0, 1.0};
    return {std::copysign(std::numeric_limits<double>::infinity(), mean), 0.0};
  }
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t_distribution<double> dist(static_cast<double>(n - 1));
  const double p = std::min(
      1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  return {t, p};
}

}  // namespace mtpeer
