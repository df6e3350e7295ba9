#include "themetrek/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "themetrek/error.hpp"

namespace themetrek {

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

// Σ (t³ - t) over tie groups.
double tie_term(std::vector<double> ranks) {
  std::sort(ranks.begin(), ranks.end());
  double term = 0.0;
  for (std::size_t i = 0; i < ranks.size();) {
    std::size_t j = i;
    while (j < ranks.size() && ranks[j] == ranks[i]) ++j;
    const double t = static_cast<double>(j - i);
    term += t * t * t - t;
    i = j;
  }
  return term;
}

double two_sided_normal(double deviation, double variance) {
  if (!(variance > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(deviation) - 0.5) / std::sqrt(variance);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

// Exact tails from the number of size-k subsets of doubled ranks per sum.
double exact_rank_sum_p(const std::vector<long>& doubled, std::size_t k, long observed) {
  long total = 0;
  for (long d : doubled) total += d;
  std::vector<std::vector<double>> ways(k + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
  ways[0][0] = 1.0;
  for (long d : doubled) {
    for (std::size_t c = k; c >= 1; --c) {
      for (long s = total; s >= d; --s) ways[c][static_cast<std::size_t>(s)] += ways[c - 1][static_cast<std::size_t>(s - d)];
    }
  }
  double all = 0.0, le = 0.0, ge = 0.0;
  for (long s = 0; s <= total; ++s) {
    const double w = ways[k][static_cast<std::size_t>(s)];
    all += w;
    if (s <= observed) le += w;
    if (s >= observed) ge += w;
  }
  return std::min(1.0, 2.0 * std::min(le, ge) / all);
}

// Exact tails of W+ over all sign assignments of the doubled ranks.
double exact_signed_rank_p(const std::vector<long>& doubled, long observed) {
  long total = 0;
  for (long d : doubled) total += d;
  std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
  ways[0] = 1.0;
  for (long d : doubled) {
    for (long s = total; s >= d; --s) ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - d)];
  }
  double all = 0.0, le = 0.0, ge = 0.0;
  for (long s = 0; s <= total; ++s) {
    const double w = ways[static_cast<std::size_t>(s)];
    all += w;
    if (s <= observed) le += w;
    if (s >= observed) ge += w;
  }
  return std::min(1.0, 2.0 * std::min(le, ge) / all);
}

}  // namespace

TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ArgumentError("rank-sum test needs at least two values per sample");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  for (double v : pooled) {
    if (!std::isfinite(v)) throw ArgumentError("rank-sum test on non-finite values");
  }
  const auto ranks = midranks(pooled);
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
  TestResult res;
  for (std::size_t i = 0; i < n1; ++i) res.statistic += ranks[i];

  if (std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled.front(); })) {
    res.p_value = 1.0;
    res.exact = n <= kExactRankSumLimit;
    return res;
  }
  if (n <= kExactRankSumLimit) {
    std::vector<long> doubled(n);
    for (std::size_t i = 0; i < n; ++i) doubled[i] = std::lround(2.0 * ranks[i]);
    res.p_value = exact_rank_sum_p(doubled, n1, std::lround(2.0 * res.statistic));
    res.exact = true;
    return res;
  }
  const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2), dn = static_cast<double>(n);
  const double expected = dn1 * (dn + 1.0) / 2.0;
  const double variance = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term(ranks) / (dn * (dn - 1.0)));
  res.p_value = two_sided_normal(res.statistic - expected, variance);
  return res;
}

TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("signed-rank test needs paired samples of equal length");
  if (a.size() < 2) throw ArgumentError("signed-rank test needs at least two pairs");
  std::vector<double> diff, mag;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) throw ArgumentError("signed-rank test on non-finite values");
    if (d != 0.0) {
      diff.push_back(d);
      mag.push_back(std::abs(d));
    }
  }
  TestResult res;
  if (diff.empty()) return res;
  const auto ranks = midranks(mag);
  for (std::size_t i = 0; i < diff.size(); ++i) {
    if (diff[i] > 0.0) res.statistic += ranks[i];
  }
  const std::size_t n = diff.size();
  if (n <= kExactRankSumLimit) {
    std::vector<long> doubled(n);
    for (std::size_t i = 0; i < n; ++i) doubled[i] = std::lround(2.0 * ranks[i]);
    res.p_value = exact_signed_rank_p(doubled, std::lround(2.0 * res.statistic));
    res.exact = true;
    return res;
  }
  const double dn = static_cast<double>(n);
  const double expected = dn * (dn + 1.0) / 4.0;
  const double variance = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie_term(ranks) / 48.0;
  res.p_value = two_sided_normal(res.statistic - expected, variance);
  return res;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace themetrek
