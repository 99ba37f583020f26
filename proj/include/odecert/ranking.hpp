#pragma once

#include <span>
#include <vector>

namespace odecert {

/// Rank-based weighting scheme: lambda candidates per iteration, one base
/// weight per rank, nonincreasing. Schemes with w_1 == w_lambda are legal
/// here (they make every rank transform constant); the evolution-strategy
/// contraction certificate additionally needs w_1 > w_lambda and checks it
/// where the certificate is built.
struct WeightScheme {
  explicit WeightScheme(std::vector<double> weights);

  int lambda() const { return static_cast<int>(base_weights.size()); }
  double weight_sum() const;
  bool has_strict_spread() const;  // w_1 > w_lambda

  std::vector<double> base_weights;
};

/// Weight assigned to each candidate: candidate i with k strictly better and
/// l tied candidates receives the average of base weights for ranks
/// k+1 .. k+l+1. Ties compare by exact floating equality. The output always
/// sums to the sum of the base weights.
std::vector<double> assign_weights(std::span<const double> fvalues,
                                   const WeightScheme& scheme);

/// Expected rank transform of one candidate whose objective value has
/// probability p of being beaten and q of being tied by an independent
/// candidate, times lambda. Trinomial expansion over the lambda-1 rivals.
double utility_tri(double p, double q, const WeightScheme& scheme);

/// Tie-free specialisation of utility_tri (binomial expansion).
double utility_bin(double p, const WeightScheme& scheme);

}  // namespace odecert
