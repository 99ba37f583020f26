#include "odecert/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "odecert/errors.hpp"
#include "odecert/parallel.hpp"

namespace odecert {
namespace {

// 8-node Gauss-Legendre rule on [-1, 1].
constexpr double kGlNodes[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeights[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

std::vector<double> axpy(const std::vector<double>& x, double a,
                         const std::vector<double>& y) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * y[i];
  return out;
}

double closed_form_flow_coord(const AlgorithmSpec& spec, const CertificateBundle& cert,
                              double theta0, double t) {
  if (spec.kind == ProblemKind::Pbil) return pbil1_flow_exact(theta0, t);
  return es_flow_exact(theta0, t, cert.lipschitz);
}

}  // namespace

StepSchedule::StepSchedule(std::vector<double> a) : alphas(std::move(a)) {
  for (double x : alphas)
    if (!(x > 0.0)) throw std::invalid_argument("StepSchedule: all steps must be positive");
}

StepSchedule StepSchedule::constant(double alpha, int n) {
  return StepSchedule(std::vector<double>(n, alpha));
}

double StepSchedule::t(int k) const {
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += alphas[i];
  return s;
}

double StepSchedule::eps(int k) const {
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += alphas[i] * alphas[i];
  return s;
}

FlowPath integrate_flow(
    const std::function<std::vector<double>(std::span<const double>)>& field,
    const std::vector<double>& theta0, double T, double dt,
    const std::function<bool(std::span<const double>)>& in_domain) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_flow: dt must be positive");
  if (T < 0.0) throw std::invalid_argument("integrate_flow: T must be nonnegative");

  FlowPath path;
  path.method = "rk4";
  std::vector<double> y = theta0;
  double t = 0.0;
  path.times.push_back(t);
  path.points.push_back(y);

  while (t < T - 1e-15 * std::max(1.0, T)) {
    const double h = std::min(dt, T - t);
    const auto k1 = field(y);
    const auto k2 = field(axpy(y, h / 2.0, k1));
    const auto k3 = field(axpy(y, h / 2.0, k2));
    const auto k4 = field(axpy(y, h, k3));
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    t += h;
    if (in_domain && !in_domain(y))
      throw DomainExit("integrate_flow: path left the domain at t = " + std::to_string(t),
                       static_cast<long>(path.times.size()));
    path.times.push_back(t);
    path.points.push_back(y);
  }
  return path;
}

double pbil1_flow_exact(double theta0, double t) {
  if (!(theta0 > 0.0 && theta0 < 1.0))
    throw std::invalid_argument("pbil1_flow_exact: theta0 must be in (0, 1)");
  if (t < 0.0) throw std::invalid_argument("pbil1_flow_exact: t must be nonnegative");
  // theta0 e^t / (1 - theta0 + theta0 e^t), written to stay finite for large t.
  return 1.0 / (1.0 + (1.0 - theta0) / theta0 * std::exp(-t));
}

double es_flow_exact(double v0, double t, double lipschitz) {
  if (!(v0 > 0.0)) throw std::invalid_argument("es_flow_exact: v0 must be positive");
  if (!(lipschitz > 0.0)) throw std::invalid_argument("es_flow_exact: L must be positive");
  if (t < 0.0) throw std::invalid_argument("es_flow_exact: t must be nonnegative");
  return v0 * std::exp(-lipschitz * t);
}

DeviationResult euler_flow_deviation_core(
    const std::function<std::vector<double>(std::span<const double>, RandomSource&)>& draw,
    const std::function<std::vector<double>(double)>& flow_at,
    const std::vector<double>& theta0, const StepSchedule& schedule, int trials,
    std::uint64_t seed, double lipschitz, double second_moment_bound, int jobs) {
  const int n_steps = schedule.size();
  const std::size_t dim = theta0.size();

  // phi(t_k) once; per-trial squared errors; reduce in trial order.
  std::vector<std::vector<double>> flow(n_steps + 1);
  for (int k = 0; k <= n_steps; ++k) flow[k] = flow_at(schedule.t(k));

  std::vector<std::vector<double>> sq(trials, std::vector<double>(n_steps + 1));
  parallel_for(trials, jobs, [&](std::int64_t trial) {
    Rng rng(seed, static_cast<std::uint64_t>(trial));
    std::vector<double> state = theta0;
    for (int k = 0;; ++k) {
      double e2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double d = state[i] - flow[k][i];
        e2 += d * d;
      }
      sq[trial][k] = e2;
      if (k == n_steps) break;
      const auto f = draw(state, rng);
      for (std::size_t i = 0; i < dim; ++i) state[i] += schedule.alphas[k] * f[i];
    }
  });

  DeviationResult out;
  for (int k = 0; k <= n_steps; ++k) {
    double acc = 0.0;
    for (int trial = 0; trial < trials; ++trial) acc += sq[trial][k];
    out.empirical = std::max(out.empirical, std::sqrt(acc / trials));
  }
  const double eps = schedule.eps(n_steps);
  const double t_n = schedule.t(n_steps);
  out.bound = (lipschitz * second_moment_bound / 2.0 * eps +
               second_moment_bound * std::sqrt(eps)) *
              std::exp(lipschitz * t_n);
  return out;
}

DeviationResult euler_ode_deviation(const AlgorithmSpec& spec,
                                    const std::vector<double>& theta0,
                                    const StepSchedule& schedule, int trials,
                                    std::uint64_t seed,
                                    std::optional<double> second_moment_bound,
                                    std::optional<double> lipschitz, int jobs) {
  if (trials < 1) throw std::invalid_argument("euler_ode_deviation: trials >= 1");
  if (!spec.in_domain(theta0))
    throw std::invalid_argument("euler_ode_deviation: theta0 outside the domain");

  double L, K;
  std::function<std::vector<double>(double)> flow_at;
  if (spec.kind == ProblemKind::Pbil && spec.dimension == 1) {
    L = lipschitz.value_or(1.0);
    if (second_moment_bound) {
      K = *second_moment_bound;
    } else {
      // E[|F_n|^2 | theta] = 2 theta (1 - theta)^2 for lambda = 2, w = (1, 0);
      // the iterates stay in [theta0 (1-alpha_max)^N, 1).
      double alpha_max = 0.0;
      for (double a : schedule.alphas) alpha_max = std::max(alpha_max, a);
      const double lo = theta0[0] * std::pow(1.0 - alpha_max, schedule.size());
      auto m2 = [](double th) { return 2.0 * th * (1.0 - th) * (1.0 - th); };
      K = std::sqrt(lo <= 1.0 / 3.0 ? 8.0 / 27.0 : m2(lo));
    }
    const double th0 = theta0[0];
    flow_at = [th0](double t) { return std::vector<double>{pbil1_flow_exact(th0, t)}; };
  } else if (spec.kind == ProblemKind::EsFixedMeanSphere) {
    if (!second_moment_bound || !lipschitz)
      throw ConfigError(
          "euler_ode_deviation: supply L and K for the fixed-mean sphere problem");
    L = *lipschitz;
    K = *second_moment_bound;
    const double v0 = theta0[0];
    flow_at = [v0, L](double t) { return std::vector<double>{es_flow_exact(v0, t, L)}; };
  } else {
    throw ConfigError("euler_ode_deviation: unsupported problem kind");
  }

  auto draw = [&spec](std::span<const double> state, RandomSource& rng) {
    return update_direction(spec, state, sample_candidates(spec, state, rng));
  };
  return euler_flow_deviation_core(draw, flow_at, theta0, schedule, trials, seed, L, K,
                                   jobs);
}

DeviationResult psi_deviation(const AlgorithmSpec& spec, const CertificateBundle& cert,
                              const std::vector<double>& theta0, double alpha, int n_steps,
                              int trials, std::uint64_t seed, int jobs) {
  if (n_steps < 0) throw std::invalid_argument("psi_deviation: n_steps >= 0");
  if (n_steps == 0) return {0.0, 0.0};
  if (trials < 1) throw std::invalid_argument("psi_deviation: trials >= 1");
  if (spec.state_size() != 1)
    throw ConfigError("psi_deviation: certificates cover scalar-parameter problems");

  const double th0 = theta0[0];
  const double horizon = n_steps * alpha;
  const double q = cert.q_scale(alpha, horizon, th0);
  auto flow_coord = [&](double t) { return closed_form_flow_coord(spec, cert, th0, t); };
  auto r_along = [&](double t) { return cert.r_of(q, flow_coord(t)); };

  // C1 = Delta_L sum_i int_{i a}^{(i+1) a} ((i+1) a - t) R(phi(t)) dt.
  const double dl = cert.delta_l(alpha, horizon);
  double c1 = 0.0;
  for (int i = 0; i < n_steps; ++i) {
    const double a = i * alpha, b = (i + 1) * alpha;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int g = 0; g < 8; ++g) {
      const double t = mid + half * kGlNodes[g];
      acc += kGlWeights[g] * (b - t) * r_along(t);
    }
    c1 += acc * half;
  }
  c1 *= dl;

  double c2_sq = 0.0;
  for (int i = 0; i < n_steps; ++i) {
    const double r = r_along(i * alpha);
    c2_sq += r * r;
  }
  const double c2 = cert.k2 * alpha * std::sqrt(c2_sq);

  DeviationResult out;
  out.bound = (c1 + c2) * std::exp((dl + cert.k1) * horizon);

  std::vector<double> psi_flow(n_steps + 1);
  for (int k = 0; k <= n_steps; ++k)
    psi_flow[k] = cert.psi.eval(std::vector<double>{flow_coord(k * alpha)});

  AlgorithmSpec stepped = spec;
  stepped.alpha = alpha;
  std::vector<std::vector<double>> sq(trials, std::vector<double>(n_steps + 1));
  parallel_for(trials, jobs, [&](std::int64_t trial) {
    Rng rng(seed, static_cast<std::uint64_t>(trial));
    std::vector<double> state = theta0;
    for (int k = 0;; ++k) {
      const double d = cert.psi.eval(state) - psi_flow[k];
      sq[trial][k] = d * d;
      if (k == n_steps) break;
      state = apply_update(stepped, state, sample_candidates(stepped, state, rng));
    }
  });
  for (int k = 0; k <= n_steps; ++k) {
    double acc = 0.0;
    for (int trial = 0; trial < trials; ++trial) acc += sq[trial][k];
    out.empirical = std::max(out.empirical, std::sqrt(acc / trials));
  }
  return out;
}

}  // namespace odecert
