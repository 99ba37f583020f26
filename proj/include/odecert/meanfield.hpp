#pragma once

#include <cstdint>
#include <vector>

#include "odecert/algorithms.hpp"
#include "odecert/ranking.hpp"

namespace odecert {

struct MeanFieldEstimate {
  std::vector<double> value;
  std::vector<double> std_error;
  std::int64_t n_samples = 0;
};

/// Unbiased Monte-Carlo estimate of F(theta) = E[F_n | theta_n = theta].
/// Samples are generated in fixed-size batches with per-batch derived seeds
/// and reduced pairwise in batch order, so the result is independent of the
/// number of worker threads.
MeanFieldEstimate meanfield_mc(const AlgorithmSpec& spec, const std::vector<double>& theta,
                               std::int64_t n_samples, std::uint64_t seed, int jobs = 1);

/// Closed-form mean field for the 1-D Bernoulli recursion with lambda = 2,
/// w = (1, 0) on OneMax: F(theta) = (1 - theta) theta.
double pbil1_meanfield_exact(double theta);

/// Contraction constant of the variance mean field (F(v) = -L v) and the
/// normalized second moment (E|F_n|^2 = S^2 v^2) for the fixed-mean sphere.
struct EsConstants {
  double lipschitz = 0.0;
  double lipschitz_se = 0.0;
  double second_moment = 0.0;
  double second_moment_se = 0.0;
  int dimension = 1;
  std::vector<double> base_weights;
  // K = 2 covariance certificate for L > 0 (paired Monte Carlo).
  double cheb_bound = 0.0;
  double cheb_bound_se = 0.0;
};

/// Monte-Carlo estimation of L and S. Throws CertificateFailure if the L
/// estimate is negative beyond noise (5 standard errors).
EsConstants es_sphere_constants(int dimension, const WeightScheme& scheme,
                                std::int64_t n_samples, std::uint64_t seed, int jobs = 1);

/// Regularized-incomplete-gamma chi-square CDF (relative error well below
/// the Monte-Carlo noise it feeds).
double chi_squared_cdf(double x, double dof);

}  // namespace odecert
