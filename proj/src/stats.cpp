#include "ctxprobe/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "ctxprobe/error.hpp"

namespace ctxprobe {
namespace {

constexpr std::size_t kExactPermutationLimit = 10;

std::vector<double> centered(std::vector<double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (auto& x : v) x -= mean;
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double t_approximation_p(double rho, std::size_t n) {
  if (std::abs(rho) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = std::abs(rho) * std::sqrt(df / (1.0 - rho * rho));
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
}

double permutation_p(std::span<const double> dx, std::span<const double> dy) {
  const double observed = std::abs(dot(dx, dy));
  const double eps = 1e-9 * std::max(1.0, observed);
  std::vector<std::size_t> perm(dy.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t extreme = 0, total = 0;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += dx[i] * dy[perm[i]];
    if (std::abs(s) >= observed - eps) ++extreme;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = rank;
    i = j + 1;
  }
  return ranks;
}

CorrelationResult spearman(std::span<const double> xs, std::span<const double> ys, PValueMethod method) {
  if (xs.size() != ys.size())
    throw Error("spearman: length mismatch (" + std::to_string(xs.size()) + " vs " + std::to_string(ys.size()) + ")");
  const std::size_t n = xs.size();
  if (n < 3) throw Error("spearman: need at least 3 observations, got " + std::to_string(n));

  const auto dx = centered(average_ranks(xs));
  const auto dy = centered(average_ranks(ys));
  const double sxx = dot(dx, dx);
  const double syy = dot(dy, dy);
  if (sxx == 0.0) throw UndefinedCorrelation("spearman: first variable is constant");
  if (syy == 0.0) throw UndefinedCorrelation("spearman: second variable is constant");

  CorrelationResult r;
  r.n = n;
  r.rho = std::clamp(dot(dx, dy) / std::sqrt(sxx * syy), -1.0, 1.0);
  const bool exact = method == PValueMethod::exact_permutation ||
                     (method == PValueMethod::automatic && n <= kExactPermutationLimit);
  if (exact && n > kExactPermutationLimit)
    throw Error("spearman: exact permutation test limited to n <= " + std::to_string(kExactPermutationLimit));
  r.p_value = exact ? permutation_p(dx, dy) : t_approximation_p(r.rho, n);
  r.significant = r.p_value < kSignificanceLevel;
  return r;
}

}  // namespace ctxprobe
