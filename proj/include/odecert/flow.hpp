#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "odecert/algorithms.hpp"
#include "odecert/certificates.hpp"

namespace odecert {

/// Step-size schedule alpha_0, alpha_1, ... with the induced cumulative time
/// t(k) = sum_{i<k} alpha_i and squared mass eps(k) = sum_{i<k} alpha_i^2.
struct StepSchedule {
  explicit StepSchedule(std::vector<double> alphas);
  static StepSchedule constant(double alpha, int n);

  int size() const { return static_cast<int>(alphas.size()); }
  double t(int k) const;
  double eps(int k) const;

  std::vector<double> alphas;
};

struct FlowPath {
  std::vector<double> times;
  std::vector<std::vector<double>> points;
  std::string method;
};

/// Classical fixed-step fourth-order integration of dtheta/dt = F(theta).
/// Throws DomainExit with the exit time if a grid point leaves the domain.
FlowPath integrate_flow(
    const std::function<std::vector<double>(std::span<const double>)>& field,
    const std::vector<double>& theta0, double T, double dt,
    const std::function<bool(std::span<const double>)>& in_domain = {});

/// Logistic solution of dtheta/dt = (1 - theta) theta.
double pbil1_flow_exact(double theta0, double t);

/// Exponential solution of dv/dt = -L v.
double es_flow_exact(double v0, double t, double lipschitz);

struct DeviationResult {
  double empirical = 0.0;
  double bound = 0.0;
};

/// Euler-vs-flow deviation experiment: empirical
/// sup_k E[||theta_k - phi(t_k)||^2]^(1/2) over seeded trials against the
/// Gronwall bound ((L K / 2) eps + K eps^(1/2)) exp(L t). For the 1-D
/// Bernoulli problem L = 1 and K defaults to the second-moment sup over the
/// region [theta0 (1-alpha_max)^N, 1) the iterates provably stay in;
/// otherwise both constants must be supplied.
DeviationResult euler_ode_deviation(const AlgorithmSpec& spec,
                                    const std::vector<double>& theta0,
                                    const StepSchedule& schedule, int trials,
                                    std::uint64_t seed,
                                    std::optional<double> second_moment_bound = {},
                                    std::optional<double> lipschitz = {}, int jobs = 1);

/// Generic core used by euler_ode_deviation and by tests that force
/// deterministic updates.
DeviationResult euler_flow_deviation_core(
    const std::function<std::vector<double>(std::span<const double>, RandomSource&)>& draw,
    const std::function<std::vector<double>(double)>& flow_at,
    const std::vector<double>& theta0, const StepSchedule& schedule, int trials,
    std::uint64_t seed, double lipschitz, double second_moment_bound, int jobs = 1);

/// Psi-relative deviation experiment: empirical
/// sup_k E[|Psi(theta_k) - Psi(phi(k alpha))|^2]^(1/2) against
/// (C1 + C2) exp((Delta_L + K1) N alpha), with C1 integrated by Gauss-Legendre
/// quadrature of R along the closed-form flow.
DeviationResult psi_deviation(const AlgorithmSpec& spec, const CertificateBundle& cert,
                              const std::vector<double>& theta0, double alpha, int n_steps,
                              int trials, std::uint64_t seed, int jobs = 1);

}  // namespace odecert
