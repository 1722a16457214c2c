#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gwap/error.hpp"
#include "gwap/stats/descriptive.hpp"
#include "gwap/stats/distributions.hpp"

namespace gwap::stats {

inline constexpr double kSignificanceLevels[] = {0.05, 0.01};

struct TestResult {
  std::string test_name;
  double statistic = 0.0;
  std::optional<double> degrees_of_freedom;  // Welch only
  double p_value = 1.0;
  std::optional<double> rank_sum;  // Wilcoxon only: rank sum of the first sample
  bool exact = false;

  bool significant(double level) const noexcept { return p_value < level; }

  std::vector<double> significant_at() const {
    std::vector<double> levels;
    for (double level : kSignificanceLevels) {
      if (significant(level)) levels.push_back(level);
    }
    return levels;
  }
};

/// Two-sided Welch (unequal variance) t-test.
inline TestResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::DegenerateSample, "Welch t-test needs at least two values per sample");
  }
  const double va = sample_variance(a);
  const double vb = sample_variance(b);
  if (va == 0.0 || vb == 0.0) {
    throw Error(ErrorCode::DegenerateSample, "Welch t-test needs nonzero variance in both samples");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sa = va / na;
  const double sb = vb / nb;
  const double t = (mean(a) - mean(b)) / std::sqrt(sa + sb);
  const double df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  TestResult r;
  r.test_name = "welch_t";
  r.statistic = t;
  r.degrees_of_freedom = df;
  r.p_value = std::clamp(student_t_two_sided_p(t, df), 0.0, 1.0);
  return r;
}

enum class RankSumMethod { automatic, exact, normal };

/// Combined sample size up to which the automatic method enumerates.
inline constexpr std::size_t kExactRankSumLimit = 12;

namespace detail {

// Number of size-k subsets of `values` for every attainable sum.
inline std::vector<std::vector<std::uint64_t>> subset_sum_counts(std::span<const int> values, std::size_t k) {
  int total = 0;
  for (int v : values) total += v;
  std::vector<std::vector<std::uint64_t>> ways(k + 1, std::vector<std::uint64_t>(total + 1, 0));
  ways[0][0] = 1;
  for (int v : values) {
    for (std::size_t j = k; j >= 1; --j) {
      for (int s = total; s >= v; --s) ways[j][s] += ways[j - 1][s - v];
    }
  }
  return ways;
}

}  // namespace detail

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) test with midranks for ties.
///
/// The exact path counts every assignment of the pooled midranks to the
/// first sample; the normal path uses the tie-corrected variance and a 0.5
/// continuity correction. `statistic` is the standardized rank sum of `a`.
inline TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                    RankSumMethod method = RankSumMethod::automatic) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::DegenerateSample, "rank-sum test needs non-empty samples");
  }
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t total = n + m;
  const double N = static_cast<double>(total);

  double w = 0.0;
  for (std::size_t i = 0; i < n; ++i) w += ranks[i];
  const double expected = static_cast<double>(n) * (N + 1.0) / 2.0;

  // tie correction
  std::vector<double> sorted = pooled;
  std::ranges::sort(sorted);
  double tie_sum = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_sum += t * t * t - t;
    i = j;
  }
  double variance = static_cast<double>(n) * static_cast<double>(m) / 12.0 * (N + 1.0);
  if (total > 1) variance -= static_cast<double>(n) * static_cast<double>(m) * tie_sum / (12.0 * N * (N - 1.0));

  TestResult r;
  r.test_name = "wilcoxon_rank_sum";
  r.rank_sum = w;

  const bool use_exact = method == RankSumMethod::exact ||
                         (method == RankSumMethod::automatic && total <= kExactRankSumLimit);
  if (use_exact) {
    // Doubled midranks are integers, so the extremeness comparison is exact.
    std::vector<int> doubled(total);
    for (std::size_t i = 0; i < total; ++i) doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
    int observed = 0;
    for (std::size_t i = 0; i < n; ++i) observed += doubled[i];
    const int centre = static_cast<int>(n * (total + 1));
    const int observed_dev = std::abs(observed - centre);
    const auto ways = detail::subset_sum_counts(doubled, n);
    std::uint64_t extreme = 0, all = 0;
    for (std::size_t s = 0; s < ways[n].size(); ++s) {
      all += ways[n][s];
      if (std::abs(static_cast<int>(s) - centre) >= observed_dev) extreme += ways[n][s];
    }
    r.exact = true;
    r.p_value = static_cast<double>(extreme) / static_cast<double>(all);
    r.statistic = variance > 0.0 ? (w - expected) / std::sqrt(variance) : 0.0;
    return r;
  }

  if (variance <= 0.0) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }
  const double dev = w - expected;
  const double corrected = std::max(std::fabs(dev) - 0.5, 0.0);
  const double z = std::copysign(corrected / std::sqrt(variance), dev);
  r.statistic = corrected == 0.0 ? 0.0 : z;
  r.p_value = std::clamp(normal_two_sided_p(z), 0.0, 1.0);
  return r;
}

}  // namespace gwap::stats
