#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "odecert/ranking.hpp"
#include "odecert/rng.hpp"

namespace odecert {

enum class ProblemKind {
  EsFixedMeanSphere,  // Gaussian with mean pinned at the optimum; state = [v]
  EsFull,             // Gaussian adapting mean and variance; state = [m_0..m_{d-1}, v]
  Pbil,               // Bernoulli vector; state = [theta_0..theta_{d-1}]
};

/// Everything a rank-based recursion needs: sampling distribution shape,
/// weights, step size, objective and the distance used for hitting times.
struct AlgorithmSpec {
  ProblemKind kind;
  WeightScheme scheme;
  double alpha;
  double kappa = 1.0;  // mean/variance learning-rate ratio (ES only)
  int dimension = 1;
  std::function<double(std::span<const double>)> objective = {};
  std::function<double(std::span<const double>)> distance_to_opt = {};
  double psi_dist_const = 1.0;  // C with E[d(X, x*)] <= C Psi(theta)
  std::string name = {};

  int state_size() const;
  bool in_domain(std::span<const double> state) const;
  /// Domain-stay condition alpha < 1 / sum(w) for nonnegative weights.
  bool alpha_within_domain_stay() const;
};

AlgorithmSpec make_pbil_onemax(int dimension, WeightScheme scheme, double alpha);
AlgorithmSpec make_es_fixed_sphere(int dimension, WeightScheme scheme, double alpha);
AlgorithmSpec make_es_full_sphere(int dimension, WeightScheme scheme, double alpha,
                                  double kappa = 1.0);

struct EsState {
  std::vector<double> mean;
  double variance = 1.0;  // > 0
};

struct PbilState {
  std::vector<double> theta;  // every coordinate strictly in (0, 1)
};

/// Draw the lambda candidates for the current state.
std::vector<std::vector<double>> sample_candidates(const AlgorithmSpec& spec,
                                                   std::span<const double> state,
                                                   RandomSource& rng);

/// The random update direction F_n = sum_i W_i g(x_i; theta) for given
/// candidates; deterministic, so tests can force the draws.
std::vector<double> update_direction(const AlgorithmSpec& spec,
                                     std::span<const double> state,
                                     const std::vector<std::vector<double>>& candidates);

/// state + alpha * F_n.
std::vector<double> apply_update(const AlgorithmSpec& spec, std::span<const double> state,
                                 const std::vector<std::vector<double>>& candidates);

EsState es_step(const EsState& state, const AlgorithmSpec& spec, RandomSource& rng);
PbilState pbil_step(const PbilState& state, const AlgorithmSpec& spec, RandomSource& rng);

struct Trajectory {
  std::vector<std::vector<double>> states;  // length n_iters + 1
  std::vector<double> psi;                  // parallel, when a Psi was attached
  bool has_psi = false;
  std::uint64_t seed = 0;
  double alpha = 0.0;
};

/// Deterministic given (spec, theta0, n_iters, seed, stream). Aborts with
/// DomainExit (iteration index and offending state in the message) if an
/// iterate leaves the domain; the recursion is never projected back.
/// Ensembles run trial k on stream k of a shared master seed.
Trajectory run_trajectory(const AlgorithmSpec& spec, const std::vector<double>& theta0,
                          long n_iters, std::uint64_t seed,
                          const std::function<double(std::span<const double>)>& psi = {},
                          std::uint64_t stream = 0);

}  // namespace odecert
