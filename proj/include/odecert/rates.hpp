#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "odecert/certificates.hpp"

namespace odecert {

/// A finite search can certify that a step size is admissible (a rate below
/// one was witnessed) but never that it is not; NotAdmissible records that
/// the searched horizon settled on a rate >= 1, Inconclusive that the search
/// ran out before the candidate rate stopped improving.
enum class RateStatus { Certified, NotAdmissible, Inconclusive };

std::string to_string(RateStatus s);

struct RateResult {
  double alpha = 0.0;
  double gamma = 0.0;      // inf_N (Delta_A1(N a) + Delta_A2(a, N a))^(1/N)
  long n_star = 0;         // smallest minimizer found
  double gamma_bar = 1.0;  // 1 if n_star == 1, else max_{N < n_star} of the sum
  RateStatus status = RateStatus::Inconclusive;
  long n_max = 0;
  double prefactor() const;  // gamma_bar / gamma^(n_star - 1) >= 1
};

RateResult convergence_rate(const Delta1Fn& delta1, const Delta2Fn& delta2, double alpha,
                            long n_max);

struct LowerRateResult {
  double alpha = 0.0;
  double gamma = 0.0;      // sup_N (Delta_B1(N a) - Delta_B2(a, N a))^(1/N), positive parts
  long n_star = 0;
  double gamma_bar = 1.0;  // 1 if n_star == 1, else min_{N < n_star} of the difference
  RateStatus status = RateStatus::Inconclusive;
  long n_max = 0;
};

LowerRateResult lower_rate(const Delta1Fn& delta_b1, const Delta2Fn& delta_b2, double alpha,
                           long n_max);

/// Default search horizon: 10^6 / ceil(1/alpha), capped at 10^5, at least 1.
long default_rate_n_max(double alpha);

/// Constructive step-size threshold with (0, alpha_bar] admissible: take T
/// with Delta_A1(T) < 1/2, then the smallest integer N with
/// Delta_A2(2T/N, 2T) < 1/2 and alpha_bar = 2T/N (capped at alpha_hi).
/// witness_sum = Delta_A1(2T) + Delta_A2(alpha_bar, 2T) < 1 certifies the
/// rate at alpha_bar directly without an exhaustive search.
struct AdmissibleAlpha {
  double alpha_bar = 0.0;
  double t_half = 0.0;      // the chosen T
  long long n_bar = 0;
  double witness_sum = 0.0;
  bool certified = false;
};

AdmissibleAlpha admissible_alpha(const Delta1Fn& delta1, const Delta2Fn& delta2,
                                 double alpha_hi, int log_grid_steps = 400);

/// gamma^n (gamma_bar / gamma^(n_star - 1)) psi0.
double anytime_bound(double gamma, double gamma_bar, long n_star, double psi0, long n);

/// Iterations after which a sample hits the eps-ball around the optimum with
/// probability at least 1 - delta. Throws CertificateFailure when gamma >= 1.
long hitting_time_bound(double eps, double delta, double dist_const, double gamma,
                        double gamma_bar, long n_star, double psi0);

struct LocalConfig {
  double zeta = 0.0;  // {Psi < zeta} is inside the basin U
  double psi0 = 0.0;  // Psi at the start point
};

struct LocalProbabilities {
  double pr_omega_k = 0.0;    // clamped to [0, 1]
  double pr_omega_inf = 0.0;  // clamped to [0, 1]
  double raw_k = 0.0;         // unclamped values kept for reporting
  double raw_inf = 0.0;
};

/// Lower bounds on the probability that the n_star-subsampled iterates stay
/// in the basin for k steps / forever.
LocalProbabilities local_probabilities(double gamma, long n_star, const LocalConfig& local,
                                       long k);

long local_hitting_time_bound(double eps, double delta, double dist_const, double gamma,
                              double gamma_bar, long n_star, double psi0,
                              double pr_omega_inf);

struct LiminfReport {
  bool precondition_ok = false;   // gamma^n / eps_n vanishes over the horizon
  double empirical_fraction = 0;  // trials with min_m (1/m) ln Psi_m <= ln gamma
  double certified_floor = 0.0;
  bool pass = false;
};

/// Checks the subsequence-rate statement on an ensemble: the fraction of
/// trials whose best running rate (1/m) ln Psi(theta_m) reaches ln gamma must
/// be at least the certified floor. Throws on a sequence whose gamma^n /
/// eps_n ratio does not vanish over the supplied horizon.
LiminfReport liminf_statements(double gamma, std::span<const double> epsilons,
                               const std::vector<std::vector<double>>& trial_psi,
                               double certified_floor);

}  // namespace odecert
