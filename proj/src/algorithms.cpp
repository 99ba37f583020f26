#include "odecert/algorithms.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "odecert/errors.hpp"

namespace odecert {
namespace {

double sq_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

void check_state_size(const AlgorithmSpec& spec, std::span<const double> state) {
  if (static_cast<int>(state.size()) != spec.state_size())
    throw std::invalid_argument("state size does not match the algorithm spec");
}

std::string format_state(std::span<const double> state) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < state.size(); ++i) os << (i ? ", " : "") << state[i];
  os << "]";
  return os.str();
}

}  // namespace

int AlgorithmSpec::state_size() const {
  switch (kind) {
    case ProblemKind::EsFixedMeanSphere: return 1;
    case ProblemKind::EsFull: return dimension + 1;
    case ProblemKind::Pbil: return dimension;
  }
  return 0;
}

bool AlgorithmSpec::in_domain(std::span<const double> state) const {
  switch (kind) {
    case ProblemKind::EsFixedMeanSphere:
      return state[0] > 0.0;
    case ProblemKind::EsFull:
      return state[dimension] > 0.0;
    case ProblemKind::Pbil:
      for (double t : state)
        if (!(t > 0.0 && t < 1.0)) return false;
      return true;
  }
  return false;
}

bool AlgorithmSpec::alpha_within_domain_stay() const {
  for (double w : scheme.base_weights)
    if (w < 0.0) return false;
  return alpha < 1.0 / scheme.weight_sum();
}

AlgorithmSpec make_pbil_onemax(int dimension, WeightScheme scheme, double alpha) {
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  if (alpha < 0.0) throw std::invalid_argument("alpha must be nonnegative");
  AlgorithmSpec spec{.kind = ProblemKind::Pbil, .scheme = std::move(scheme), .alpha = alpha};
  spec.dimension = dimension;
  spec.name = dimension == 1 ? "pbil-1d" : "pbil-" + std::to_string(dimension) + "d";
  spec.objective = [](std::span<const double> x) {
    double bad = 0.0;
    for (double b : x) bad += 1.0 - b;
    return bad;
  };
  spec.distance_to_opt = [](std::span<const double> x) {
    double d = 0.0;
    for (double b : x) d += std::abs(b - 1.0);
    return d;
  };
  spec.psi_dist_const = 1.0;  // 1 - theta <= Psi(theta)
  return spec;
}

AlgorithmSpec make_es_fixed_sphere(int dimension, WeightScheme scheme, double alpha) {
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  if (alpha < 0.0) throw std::invalid_argument("alpha must be nonnegative");
  AlgorithmSpec spec{.kind = ProblemKind::EsFixedMeanSphere, .scheme = std::move(scheme), .alpha = alpha};
  spec.dimension = dimension;
  spec.name = "es-fixed-sphere";
  spec.objective = [](std::span<const double> x) { return std::sqrt(sq_norm(x)); };
  spec.distance_to_opt = spec.objective;  // optimum at the origin
  spec.psi_dist_const = std::sqrt(static_cast<double>(dimension));  // E||X|| <= (d v)^(1/2)
  return spec;
}

AlgorithmSpec make_es_full_sphere(int dimension, WeightScheme scheme, double alpha,
                                  double kappa) {
  AlgorithmSpec spec = make_es_fixed_sphere(dimension, std::move(scheme), alpha);
  spec.kind = ProblemKind::EsFull;
  spec.kappa = kappa;
  spec.name = "es-full-sphere";
  return spec;
}

std::vector<std::vector<double>> sample_candidates(const AlgorithmSpec& spec,
                                                   std::span<const double> state,
                                                   RandomSource& rng) {
  check_state_size(spec, state);
  const int lambda = spec.scheme.lambda();
  const int d = spec.dimension;
  std::vector<std::vector<double>> out(lambda, std::vector<double>(d));

  switch (spec.kind) {
    case ProblemKind::EsFixedMeanSphere: {
      const double sd = std::sqrt(state[0]);
      for (auto& x : out)
        for (double& c : x) c = sd * rng.normal();
      break;
    }
    case ProblemKind::EsFull: {
      const double sd = std::sqrt(state[d]);
      for (auto& x : out)
        for (int j = 0; j < d; ++j) x[j] = state[j] + sd * rng.normal();
      break;
    }
    case ProblemKind::Pbil: {
      for (auto& x : out)
        for (int j = 0; j < d; ++j) x[j] = rng.uniform() < state[j] ? 1.0 : 0.0;
      break;
    }
  }
  return out;
}

std::vector<double> update_direction(const AlgorithmSpec& spec,
                                     std::span<const double> state,
                                     const std::vector<std::vector<double>>& candidates) {
  check_state_size(spec, state);
  const int lambda = spec.scheme.lambda();
  if (static_cast<int>(candidates.size()) != lambda)
    throw std::invalid_argument("update_direction: wrong number of candidates");

  std::vector<double> fvals(lambda);
  for (int i = 0; i < lambda; ++i) fvals[i] = spec.objective(candidates[i]);
  const std::vector<double> weights = assign_weights(fvals, spec.scheme);

  const int d = spec.dimension;
  std::vector<double> dir(state.size(), 0.0);
  switch (spec.kind) {
    case ProblemKind::EsFixedMeanSphere: {
      for (int i = 0; i < lambda; ++i)
        dir[0] += weights[i] * (sq_norm(candidates[i]) / d - state[0]);
      break;
    }
    case ProblemKind::EsFull: {
      for (int i = 0; i < lambda; ++i) {
        double sq = 0.0;
        for (int j = 0; j < d; ++j) {
          const double diff = candidates[i][j] - state[j];
          dir[j] += weights[i] * spec.kappa * diff;
          sq += diff * diff;
        }
        dir[d] += weights[i] * (sq / d - state[d]);
      }
      break;
    }
    case ProblemKind::Pbil: {
      for (int i = 0; i < lambda; ++i)
        for (int j = 0; j < d; ++j)
          dir[j] += weights[i] * (candidates[i][j] - state[j]);
      break;
    }
  }
  return dir;
}

std::vector<double> apply_update(const AlgorithmSpec& spec, std::span<const double> state,
                                 const std::vector<std::vector<double>>& candidates) {
  std::vector<double> dir = update_direction(spec, state, candidates);
  std::vector<double> out(state.begin(), state.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += spec.alpha * dir[i];
  return out;
}

EsState es_step(const EsState& state, const AlgorithmSpec& spec, RandomSource& rng) {
  std::vector<double> flat;
  if (spec.kind == ProblemKind::EsFull) {
    flat = state.mean;
    flat.push_back(state.variance);
  } else {
    flat = {state.variance};
  }
  auto candidates = sample_candidates(spec, flat, rng);
  auto next = apply_update(spec, flat, candidates);
  EsState out;
  if (spec.kind == ProblemKind::EsFull) {
    out.mean.assign(next.begin(), next.end() - 1);
    out.variance = next.back();
  } else {
    out.mean = state.mean;
    out.variance = next[0];
  }
  if (!(out.variance > 0.0))
    throw DomainExit("es_step: variance update produced v <= 0 (v = " +
                         std::to_string(out.variance) + ")",
                     0);
  return out;
}

PbilState pbil_step(const PbilState& state, const AlgorithmSpec& spec, RandomSource& rng) {
  auto candidates = sample_candidates(spec, state.theta, rng);
  PbilState out{apply_update(spec, state.theta, candidates)};
  if (!spec.in_domain(out.theta))
    throw DomainExit("pbil_step: parameter left (0,1)^d: " + format_state(out.theta), 0);
  return out;
}

Trajectory run_trajectory(const AlgorithmSpec& spec, const std::vector<double>& theta0,
                          long n_iters, std::uint64_t seed,
                          const std::function<double(std::span<const double>)>& psi,
                          std::uint64_t stream) {
  check_state_size(spec, theta0);
  if (!spec.in_domain(theta0))
    throw std::invalid_argument("run_trajectory: theta0 outside the domain");

  Trajectory traj;
  traj.seed = seed;
  traj.alpha = spec.alpha;
  traj.has_psi = static_cast<bool>(psi);
  traj.states.reserve(n_iters + 1);
  if (traj.has_psi) traj.psi.reserve(n_iters + 1);

  Rng rng(seed, stream);
  std::vector<double> state = theta0;
  for (long n = 0;; ++n) {
    traj.states.push_back(state);
    if (traj.has_psi) traj.psi.push_back(psi(state));
    if (n == n_iters) break;
    auto candidates = sample_candidates(spec, state, rng);
    state = apply_update(spec, state, candidates);
    if (!spec.in_domain(state))
      throw DomainExit("run_trajectory: left the domain at iteration " +
                           std::to_string(n + 1) + ", state " + format_state(state),
                       n + 1);
  }
  return traj;
}

}  // namespace odecert
