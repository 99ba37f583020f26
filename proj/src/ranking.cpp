#include "odecert/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace odecert {
namespace {

constexpr int kMaxLambda = 64;  // log-factorial coefficients stay accurate
constexpr double kProbSlack = 1e-12;

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

WeightScheme::WeightScheme(std::vector<double> weights) : base_weights(std::move(weights)) {
  if (base_weights.size() < 2)
    throw std::invalid_argument("WeightScheme: need at least two weights");
  if (base_weights.size() > kMaxLambda)
    throw std::invalid_argument("WeightScheme: lambda > 64 not supported");
  for (std::size_t i = 0; i + 1 < base_weights.size(); ++i)
    if (base_weights[i] < base_weights[i + 1])
      throw std::invalid_argument("WeightScheme: weights must be nonincreasing");
}

double WeightScheme::weight_sum() const {
  return std::accumulate(base_weights.begin(), base_weights.end(), 0.0);
}

bool WeightScheme::has_strict_spread() const {
  return base_weights.front() > base_weights.back();
}

std::vector<double> assign_weights(std::span<const double> fvalues,
                                   const WeightScheme& scheme) {
  const int lambda = scheme.lambda();
  if (static_cast<int>(fvalues.size()) != lambda)
    throw std::invalid_argument("assign_weights: got " + std::to_string(fvalues.size()) +
                                " values for lambda=" + std::to_string(lambda));

  std::vector<int> order(lambda);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fvalues[a] < fvalues[b]; });

  std::vector<double> out(lambda);
  int k = 0;
  while (k < lambda) {
    int end = k + 1;
    while (end < lambda && fvalues[order[end]] == fvalues[order[k]]) ++end;
    double avg = 0.0;
    for (int j = k; j < end; ++j) avg += scheme.base_weights[j];
    avg /= static_cast<double>(end - k);
    for (int j = k; j < end; ++j) out[order[j]] = avg;
    k = end;
  }
  return out;
}

double utility_tri(double p, double q, const WeightScheme& scheme) {
  if (p < -kProbSlack || q < -kProbSlack || p + q > 1.0 + kProbSlack)
    throw std::invalid_argument("utility_tri: need p >= 0, q >= 0, p + q <= 1");
  p = std::max(p, 0.0);
  q = std::max(q, 0.0);
  const double r = std::max(1.0 - p - q, 0.0);

  const int lambda = scheme.lambda();
  const int n = lambda - 1;
  double total = 0.0;
  for (int k = 0; k <= n; ++k) {
    double wsum = 0.0;
    for (int l = 0; l <= n - k; ++l) {
      wsum += scheme.base_weights[k + l];
      const double avg = wsum / static_cast<double>(l + 1);
      const double coef = std::exp(log_factorial(n) - log_factorial(k) -
                                   log_factorial(l) - log_factorial(n - k - l));
      // pow(0, 0) == 1 covers the degenerate endpoints.
      total += avg * lambda * coef * std::pow(p, k) * std::pow(q, l) *
               std::pow(r, n - k - l);
    }
  }
  return total;
}

double utility_bin(double p, const WeightScheme& scheme) {
  if (p < -kProbSlack || p > 1.0 + kProbSlack)
    throw std::invalid_argument("utility_bin: need p in [0, 1]");
  p = std::clamp(p, 0.0, 1.0);

  const int lambda = scheme.lambda();
  const int n = lambda - 1;
  double total = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double coef =
        std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
    total += scheme.base_weights[k] * lambda * coef * std::pow(p, k) *
             std::pow(1.0 - p, n - k);
  }
  return total;
}

}  // namespace odecert
