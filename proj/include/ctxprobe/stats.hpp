#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ctxprobe {

/// Correlations with p below this are reported as significant.
inline constexpr double kSignificanceLevel = 0.005;

struct CorrelationResult {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  bool significant = false;
};

enum class PValueMethod {
  /// Exact permutation test for n <= 10, t approximation above.
  automatic,
  t_approximation,
  exact_permutation,
};

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman's rank correlation: Pearson correlation of the average ranks.
///
/// The two-sided p-value comes from t = rho * sqrt((n-2) / (1-rho^2)) against
/// Student's t with n-2 degrees of freedom, or from enumerating all n!
/// rank permutations. Throws Error on length mismatch or n < 3 and
/// UndefinedCorrelation when either side is constant.
CorrelationResult spearman(std::span<const double> xs, std::span<const double> ys,
                           PValueMethod method = PValueMethod::automatic);

}  // namespace ctxprobe
