#include "odecert/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace odecert {
namespace {

constexpr std::size_t kMaxExactSupport = 10000;

void validate(const DiscreteJoint& d) {
  const std::size_t n = d.probs.size();
  if (n == 0 || d.fvals.size() != n || d.gvals.size() != n)
    throw std::invalid_argument("DiscreteJoint: probs/fvals/gvals sizes must match");
  if (n > kMaxExactSupport)
    throw std::invalid_argument("DiscreteJoint: support too large for exact path");
  double total = 0.0;
  for (double p : d.probs) {
    if (p < 0.0) throw std::invalid_argument("DiscreteJoint: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("DiscreteJoint: probabilities must sum to 1");
}

double expectation(const std::vector<double>& p, const std::vector<double>& v) {
  double e = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) e += p[i] * v[i];
  return e;
}

// Next function of the recursion: h(x) = E_y[(v(x) - v(y)) 1{v(y) < v(x)}].
std::vector<double> recursion_step(const std::vector<double>& p,
                                   const std::vector<double>& v) {
  const std::size_t n = p.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (v[j] < v[i]) acc += p[j] * (v[i] - v[j]);
    out[i] = acc;
  }
  return out;
}

}  // namespace

ChebyshevBound chebyshev_lower_bound(const DiscreteJoint& dist, int K) {
  validate(dist);
  if (K < 1) throw std::invalid_argument("chebyshev_lower_bound: K >= 1 required");

  const std::size_t n = dist.probs.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dist.probs[i] == 0.0 || dist.probs[j] == 0.0) continue;
      const double c = (dist.fvals[i] - dist.fvals[j]) * (dist.gvals[i] - dist.gvals[j]);
      if (c < 0.0)
        throw std::invalid_argument(
            "chebyshev_lower_bound: f and g not non-negatively correlated at "
            "support pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }

  ChebyshevBound result;
  std::vector<double> fg(n);
  for (std::size_t i = 0; i < n; ++i) fg[i] = dist.fvals[i] * dist.gvals[i];
  result.lhs = expectation(dist.probs, fg);

  std::vector<double> f = dist.fvals, g = dist.gvals;
  result.bound = 0.0;
  for (int i = 1; i <= K; ++i) {
    const double term = expectation(dist.probs, f) * expectation(dist.probs, g);
    result.terms.push_back(term);
    result.bound += term;
    if (i < K) {
      f = recursion_step(dist.probs, f);
      g = recursion_step(dist.probs, g);
    }
  }
  return result;
}

double fourth_moment_lower_bound(const MomentSummary& m) {
  if (m.variance < 0.0)
    throw std::invalid_argument("fourth_moment_lower_bound: negative variance");
  if (m.variance == 0.0) return 0.0;
  if (m.fourth_central < m.variance * m.variance)
    throw std::invalid_argument(
        "fourth_moment_lower_bound: mu4 < mu2^2 violates Jensen's inequality");
  return 2.0 * std::sqrt(m.variance * m.variance * m.variance /
                         (m.fourth_central + 3.0 * m.variance * m.variance));
}

MomentSummary estimate_moments(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("estimate_moments: need at least 2 samples");
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m4 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  MomentSummary out;
  out.mean = mean;
  out.variance = m2 / static_cast<double>(n - 1);  // unbiased
  out.fourth_central = m4 / static_cast<double>(n);  // plug-in
  return out;
}

ChebyshevK2Mc chebyshev_k2_paired(std::span<const double> f_samples,
                                  std::span<const double> g_samples) {
  const std::size_t n = f_samples.size();
  if (n != g_samples.size() || n < 4)
    throw std::invalid_argument("chebyshev_k2_paired: need matching samples, n >= 4");

  const std::size_t n_batches = std::min<std::size_t>(32, n / 4);
  std::vector<double> lhs_b(n_batches), bound_b(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    const std::size_t lo = b * n / n_batches, hi = (b + 1) * n / n_batches;
    double sfg = 0.0, sf = 0.0, sg = 0.0, sdf = 0.0, sdg = 0.0;
    std::size_t m = 0, pairs = 0;
    for (std::size_t i = lo; i < hi; ++i, ++m) {
      sfg += f_samples[i] * g_samples[i];
      sf += f_samples[i];
      sg += g_samples[i];
    }
    for (std::size_t i = lo; i + 1 < hi; i += 2, ++pairs) {
      sdf += std::abs(f_samples[i] - f_samples[i + 1]);
      sdg += std::abs(g_samples[i] - g_samples[i + 1]);
    }
    lhs_b[b] = sfg / m;
    bound_b[b] = (sf / m) * (sg / m) + 0.25 * (sdf / pairs) * (sdg / pairs);
  }

  auto mean_se = [&](const std::vector<double>& v, double& mean, double& se) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    double s2 = 0.0;
    for (double x : v) s2 += (x - mean) * (x - mean);
    se = std::sqrt(s2 / (v.size() - 1) / v.size());
  };
  ChebyshevK2Mc out;
  mean_se(lhs_b, out.lhs, out.lhs_se);
  mean_se(bound_b, out.bound, out.bound_se);
  return out;
}

}  // namespace odecert
