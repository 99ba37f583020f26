#pragma once

#include <span>
#include <vector>

namespace odecert {

/// Finite joint distribution of (f(X), g(X)): probabilities plus the two
/// function values on each support point.
struct DiscreteJoint {
  std::vector<double> probs;
  std::vector<double> fvals;
  std::vector<double> gvals;
};

struct ChebyshevBound {
  double lhs;                  // E[f g]
  double bound;                // sum of the first K product terms
  std::vector<double> terms;   // E[f_i] * E[g_i], i = 1..K
};

/// Recursive strengthening of the covariance lower bound for comonotone f, g:
/// E[f g] >= sum_{i<=K} E[f_i] E[g_i] with f_1 = f and
/// f_i(x) = E_y[(f_{i-1}(x) - f_{i-1}(y)) 1{f_{i-1}(y) < f_{i-1}(x)}].
/// Exact pair enumeration; comonotonicity is verified on the support and a
/// violating pair reported otherwise.
ChebyshevBound chebyshev_lower_bound(const DiscreteJoint& dist, int K);

struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0;        // mu_(2)
  double fourth_central = 0.0;  // mu_(4)
};

/// Lower bound on E|Y - Y'| for i.i.d. Y, Y' from the second and fourth
/// centered moments: 2 (mu2^3 / (mu4 + 3 mu2^2))^(1/2); zero when mu2 = 0.
double fourth_moment_lower_bound(const MomentSummary& m);

/// Sample mean, unbiased (n-1) variance, plug-in fourth central moment.
MomentSummary estimate_moments(std::span<const double> samples);

/// Monte-Carlo K=2 bound from paired samples f_i = f(X_i), g_i = g(X_i) on a
/// common i.i.d. sample. E|f(X)-f(Y)| uses disjoint sample pairs; standard
/// errors come from batch means over fixed-size batches.
struct ChebyshevK2Mc {
  double lhs, lhs_se;
  double bound, bound_se;
};
ChebyshevK2Mc chebyshev_k2_paired(std::span<const double> f_samples,
                                  std::span<const double> g_samples);

}  // namespace odecert
