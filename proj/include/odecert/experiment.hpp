#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "odecert/algorithms.hpp"
#include "odecert/certificates.hpp"
#include "odecert/flow.hpp"
#include "odecert/rates.hpp"

namespace odecert {

struct HittingParams {
  double eps = 0.05;
  double delta = 0.1;
  double dist_const = 0.0;  // 0 = take the problem's constant
  int n_trials = 1000;
  long max_iters = 100000;
};

struct DeviationParams {
  int n_steps = 100;
  int trials = 500;
};

struct LocalParams {
  double zeta = 0.0;  // 0 = analysis skipped
  long k_max = 50;
};

struct ExperimentConfig {
  std::string problem;  // "pbil-1d" | "es-fixed-sphere"
  int dimension = 1;
  std::vector<double> weights = {1.0, 0.0};
  std::vector<double> alphas = {0.05};
  double kappa = 1.0;
  std::vector<double> theta0;
  long n_iters = 1000;
  int n_trials = 100;
  std::uint64_t master_seed = 1;
  std::vector<std::string> analyses = {"rate"};
  std::string out_dir = "out";
  long rate_n_max = 0;  // 0 = default_rate_n_max(alpha)
  std::int64_t meanfield_samples = 100000;
  std::int64_t es_constant_samples = 1000000;
  int traj_export = 8;
  double flow_t = 5.0;
  double flow_dt = 1e-3;
  HittingParams hitting;
  DeviationParams deviation;
  LocalParams local;
};

/// Strict parse: any key not in the schema, at any nesting level, is an
/// error (misspelled options must not be silently ignored).
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

AlgorithmSpec spec_from_config(const ExperimentConfig& config, double alpha);
CertificateBundle certificate_from_config(const ExperimentConfig& config, int jobs = 1);

/// Per-trial Psi series; trial k runs on stream (master_seed, k).
std::vector<std::vector<double>> run_psi_ensemble(const AlgorithmSpec& spec,
                                                  const std::vector<double>& theta0,
                                                  long n_iters, int trials,
                                                  std::uint64_t master_seed,
                                                  const PsiFunction& psi, int jobs = 1);

struct SlopeFit {
  double slope = 0.0;
  double ci_lo = 0.0;  // bootstrap 95% interval over trials
  double ci_hi = 0.0;
  bool truncated = false;  // mean Psi underflowed to zero inside the window
};

/// Least squares of ln(mean over trials of Psi) against the iteration index
/// over the second half of the horizon (the first half is burn-in).
SlopeFit estimate_empirical_rate(const std::vector<std::vector<double>>& trial_psi);

struct HittingExperiment {
  long tau_bar = -1;  // -1 when no certified rate exists
  std::string rate_status;
  double fraction_within_bound = 0.0;
  double tau_q50 = 0.0;
  double tau_q90 = 0.0;
  int n_trials = 0;
};

/// Seeded first-hitting-time runs: tau = 1 + first iteration at which a
/// sampled candidate lands in the eps-ball around the optimum.
HittingExperiment run_hitting(const AlgorithmSpec& spec, const CertificateBundle& cert,
                              const std::vector<double>& theta0,
                              const HittingParams& params, const RateResult& rate,
                              std::uint64_t master_seed, int jobs = 1);

/// Exit codes: 0 success, 2 certificate failure, 3 inconclusive rate search.
int run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                   int jobs = 1);

/// Minimal structural schema check (type / required / properties / items);
/// returns human-readable mismatches, empty when valid.
std::vector<std::string> validate_against_schema(const nlohmann::json& doc,
                                                 const nlohmann::json& schema);

std::string format_float(double x);  // 17 significant digits, '.' separator

}  // namespace odecert
