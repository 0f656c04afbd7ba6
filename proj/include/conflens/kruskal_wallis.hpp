#ifndef CONFLENS_KRUSKAL_WALLIS_HPP_
#define CONFLENS_KRUSKAL_WALLIS_HPP_

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace conflens {

struct GroupTestResult {
  double h = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  std::vector<std::size_t> group_sizes;
};

/// Upper tail of the chi-square distribution.
inline double chi_square_survival(double x, int df) {
  if (x <= 0.0)
    return 1.0;
  return boost::math::gamma_q(static_cast<double>(df) / 2.0, x / 2.0);
}

/*
 * Kruskal-Wallis H test with tie correction. Ties get mid-ranks; the p-value
 * uses the chi-square approximation with (#groups - 1) degrees of freedom.
 * When every observation is tied, H is 0 and p is 1.
 */
inline GroupTestResult
kruskal_wallis(const std::vector<std::vector<double>> &groups) {
  if (groups.size() < 2)
    throw std::invalid_argument("kruskal_wallis needs at least two groups");
  struct Obs {
    double value;
    std::size_t group;
  };
  std::vector<Obs> all;
  GroupTestResult result;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty())
      throw std::invalid_argument("kruskal_wallis: group " + std::to_string(g) +
                                  " is empty");
    result.group_sizes.push_back(groups[g].size());
    for (double v : groups[g])
      all.push_back({v, g});
  }
  std::sort(all.begin(), all.end(),
            [](const Obs &a, const Obs &b) { return a.value < b.value; });

  const auto n = static_cast<double>(all.size());
  std::vector<double> rank_sums(groups.size(), 0.0);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].value == all[i].value)
      ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      rank_sums[all[k].group] += mid_rank;
    const auto t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  result.degrees_of_freedom = static_cast<int>(groups.size()) - 1;
  const double correction = 1.0 - tie_term / (n * n * n - n);
  if (correction <= 0.0) {
    result.h = 0.0;
    result.p_value = 1.0;
    return result;
  }
  double sum = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g)
    sum += rank_sums[g] * rank_sums[g] / static_cast<double>(groups[g].size());
  double h = (12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction;
  result.h = std::max(h, 0.0);
  result.p_value = chi_square_survival(result.h, result.degrees_of_freedom);
  return result;
}

} // namespace conflens

#endif // CONFLENS_KRUSKAL_WALLIS_HPP_
