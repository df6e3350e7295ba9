#pragma once
// Two-sample significance tests on per-repeat error samples.

#include <span>
#include <vector>

namespace themetrek {

inline constexpr double kSignificanceLevel = 0.01;
/// Largest pooled sample size for which the rank-sum p-value is exact.
inline constexpr std::size_t kExactRankSumLimit = 16;

struct TestResult {
  double statistic = 0.0;  // rank sum of the first sample / W+ for signed-rank
  double p_value = 1.0;    // two-sided
  bool exact = false;
};

/// Average ranks (1-based) with ties sharing their midrank.
std::vector<double> midranks(std::span<const double> values);

/// Wilcoxon-Mann-Whitney rank-sum test. Two-sided p is
/// min(1, 2 * min(P[W <= w], P[W >= w])) under the permutation null; exact
/// when |a|+|b| <= kExactRankSumLimit, else the normal approximation with
/// tie and continuity correction. ArgumentError when a sample has < 2 values.
TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);

/// Wilcoxon signed-rank test on paired differences a - b (zeros dropped).
/// Exact for <= kExactRankSumLimit nonzero differences.
TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Sample mean and standard deviation (n - 1 denominator; 0 for n < 2).
double mean(std::span<const double> v);
double sample_sd(std::span<const double> v);

}  // namespace themetrek
