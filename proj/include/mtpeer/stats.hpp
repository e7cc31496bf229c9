#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mtpeer/error.hpp"

namespace mtpeer {

// Dense statistics over Eigen vectors. All functions accept any dense
// expression; the scalar type follows the argument.

/// Median with the mean of the two central values for even sizes.
template <typename Derived>
typename Derived::Scalar median(const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = values.size();
  if (n == 0) throw Error(ErrorKind::Empty, "median of an empty vector");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = values.derived();
  Scalar* data = v.data();
  const Eigen::Index mid = n / 2;
  std::nth_element(data, data + mid, data + n);
  Scalar upper = data[mid];
  if (n % 2 == 1) return upper;
  Scalar lower = *std::max_element(data, data + mid);
  return (lower + upper) / Scalar(2);
}

/// Population standard deviation (divisor n).
template <typename Derived>
typename Derived::Scalar population_stddev(
    const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = values.size();
  if (n == 0) throw Error(ErrorKind::Empty, "stddev of an empty vector");
  const Scalar mean = values.mean();
  return std::sqrt((values.derived().array() - mean).square().sum() /
                   Scalar(n));
}

/// Product-moment correlation. Throws UndefinedCorrelation when either
/// argument has zero variance.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar pearson(const Eigen::DenseBase<DerivedX>& x,
                                  const Eigen::DenseBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  if (x.size() != y.size()) {
    throw Error(ErrorKind::Alignment, "pearson: vectors have lengths " +
                                          std::to_string(x.size()) + " and " +
                                          std::to_string(y.size()));
  }
  if (x.size() < 2) {
    throw Error(ErrorKind::InsufficientData,
                "pearson needs at least 2 points");
  }
  const auto dx = (x.derived().array() - x.mean()).eval();
  const auto dy = (y.derived().array() - y.mean()).eval();
  const Scalar sxx = dx.square().sum();
  const Scalar syy = dy.square().sum();
  if (!(sxx > Scalar(0)) || !(syy > Scalar(0))) {
    throw Error(ErrorKind::UndefinedCorrelation,
                "pearson: zero variance in one argument");
  }
  const Scalar r = (dx * dy).sum() / std::sqrt(sxx * syy);
  return std::clamp(r, Scalar(-1), Scalar(1));
}

// ---------------------------------------------------------------------------

struct WeightedCorrelation {
  double r;
  double weight;
};

/// tanh of the weighted mean of atanh(r). Correlations of magnitude 1 are
/// clamped to 1 - 1e-15 with a warning.
double fisher_weighted_average(std::span<const WeightedCorrelation> results);

struct TestResult {
  double statistic;
  double p_value;
};

/// Williams' test for two dependent correlations r1h and r2h that share the
/// variable h, where r12 correlates the two competing variables.
/// `tails` is 1 (H1: r1h > r2h) or 2.
TestResult williams_test(double r1h, double r2h, double r12, int n,
                         int tails = 1);

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) test of x against y.
/// The statistic is the normal deviate z (positive when x ranks higher).
/// Uses the exact null distribution when both samples have at most
/// `exact_limit` values and there are no ties; otherwise the normal
/// approximation with tie-corrected variance and no continuity correction.
TestResult rank_sum_test(std::span<const double> x, std::span<const double> y,
                         int exact_limit = 25);

/// Two-sided paired t-test on x - y. Identical samples give t = 0, p = 1;
/// a constant nonzero difference gives t = +/-inf, p = 0.
TestResult paired_t_test(std::span<const double> x, std::span<const double> y);

/// Mann-Whitney U of x (number of pairs with x > y, ties counting 1/2).
double mann_whitney_u(std::span<const double> x, std::span<const double> y);

}  // namespace mtpeer
