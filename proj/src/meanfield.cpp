#include "odecert/meanfield.hpp"

#include <array>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

#include "odecert/errors.hpp"
#include "odecert/parallel.hpp"
#include "odecert/stats.hpp"

namespace odecert {
namespace {

constexpr std::int64_t kBatch = 8192;

}  // namespace

MeanFieldEstimate meanfield_mc(const AlgorithmSpec& spec, const std::vector<double>& theta,
                               std::int64_t n_samples, std::uint64_t seed, int jobs) {
  if (n_samples < 2) throw std::invalid_argument("meanfield_mc: n_samples >= 2 required");
  if (!spec.in_domain(theta))
    throw std::invalid_argument("meanfield_mc: theta outside the domain");

  const int dim = spec.state_size();
  const std::int64_t n_batches = (n_samples + kBatch - 1) / kBatch;
  std::vector<std::vector<double>> sums(n_batches), sumsq(n_batches);

  parallel_for(n_batches, jobs, [&](std::int64_t b) {
    Rng rng(seed, static_cast<std::uint64_t>(b));
    const std::int64_t lo = b * kBatch;
    const std::int64_t hi = std::min(n_samples, lo + kBatch);
    std::vector<double> s(dim, 0.0), s2(dim, 0.0);
    for (std::int64_t i = lo; i < hi; ++i) {
      auto candidates = sample_candidates(spec, theta, rng);
      auto dir = update_direction(spec, theta, candidates);
      for (int j = 0; j < dim; ++j) {
        s[j] += dir[j];
        s2[j] += dir[j] * dir[j];
      }
    }
    sums[b] = std::move(s);
    sumsq[b] = std::move(s2);
  });

  MeanFieldEstimate out;
  out.n_samples = n_samples;
  out.value.resize(dim);
  out.std_error.resize(dim);
  std::vector<double> col(n_batches);
  for (int j = 0; j < dim; ++j) {
    for (std::int64_t b = 0; b < n_batches; ++b) col[b] = sums[b][j];
    const double total = pairwise_sum(col.data(), n_batches);
    for (std::int64_t b = 0; b < n_batches; ++b) col[b] = sumsq[b][j];
    const double total_sq = pairwise_sum(col.data(), n_batches);
    const double mean = total / n_samples;
    const double var = std::max(0.0, (total_sq - n_samples * mean * mean) / (n_samples - 1));
    out.value[j] = mean;
    out.std_error[j] = std::sqrt(var / n_samples);
  }
  return out;
}

double pbil1_meanfield_exact(double theta) {
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("pbil1_meanfield_exact: theta must be in (0, 1)");
  return (1.0 - theta) * theta;
}

double chi_squared_cdf(double x, double dof) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(dof / 2.0, x / 2.0);
}

EsConstants es_sphere_constants(int dimension, const WeightScheme& scheme,
                                std::int64_t n_samples, std::uint64_t seed, int jobs) {
  if (dimension < 1) throw std::invalid_argument("es_sphere_constants: dimension >= 1");
  if (n_samples < 2) throw std::invalid_argument("es_sphere_constants: n_samples >= 2");

  const int lambda = scheme.lambda();
  const std::int64_t n_batches = (n_samples + kBatch - 1) / kBatch;

  // Per batch: [0] sum I, [1] sum I^2, [2] sum Y, [3] sum Y^2 where
  // I = u(q(||z||^2)) (||z||^2/d - 1) so L = -E[I], and Y = |sum W_i G_i|^2
  // so S = sqrt(E[Y]). Streams 2b / 2b+1 keep the two estimators independent.
  std::vector<std::array<double, 4>> part(n_batches);
  // Paired samples of f = -I-monotone pieces for the K=2 covariance bound:
  // fs = -u(q(s)), gs = s/d - 1 (comonotone in s).
  std::vector<std::vector<double>> fs_part(n_batches), gs_part(n_batches);

  parallel_for(n_batches, jobs, [&](std::int64_t b) {
    Rng rng_l(seed, 2 * static_cast<std::uint64_t>(b));
    Rng rng_s(seed, 2 * static_cast<std::uint64_t>(b) + 1);
    const std::int64_t lo = b * kBatch;
    const std::int64_t hi = std::min(n_samples, lo + kBatch);
    std::array<double, 4> acc{0.0, 0.0, 0.0, 0.0};
    std::vector<double> fs, gs;
    fs.reserve(hi - lo);
    gs.reserve(hi - lo);

    std::vector<double> norms(lambda), gvals(lambda);
    for (std::int64_t i = lo; i < hi; ++i) {
      double s = 0.0;
      for (int j = 0; j < dimension; ++j) {
        const double z = rng_l.normal();
        s += z * z;
      }
      const double u = utility_bin(chi_squared_cdf(s, dimension), scheme);
      const double integrand = u * (s / dimension - 1.0);
      acc[0] += integrand;
      acc[1] += integrand * integrand;
      fs.push_back(-u);
      gs.push_back(s / dimension - 1.0);

      for (int c = 0; c < lambda; ++c) {
        double sc = 0.0;
        for (int j = 0; j < dimension; ++j) {
          const double z = rng_s.normal();
          sc += z * z;
        }
        norms[c] = sc;
        gvals[c] = sc / dimension - 1.0;
      }
      const auto weights = assign_weights(norms, scheme);
      double dot = 0.0;
      for (int c = 0; c < lambda; ++c) dot += weights[c] * gvals[c];
      acc[2] += dot * dot;
      acc[3] += dot * dot * dot * dot;
    }
    part[b] = acc;
    fs_part[b] = std::move(fs);
    gs_part[b] = std::move(gs);
  });

  std::vector<double> col(n_batches);
  auto reduce = [&](int k) {
    for (std::int64_t b = 0; b < n_batches; ++b) col[b] = part[b][k];
    return pairwise_sum(col.data(), n_batches);
  };
  const double n = static_cast<double>(n_samples);
  const double mean_i = reduce(0) / n;
  const double var_i = std::max(0.0, (reduce(1) - n * mean_i * mean_i) / (n - 1));
  const double mean_y = reduce(2) / n;
  const double var_y = std::max(0.0, (reduce(3) - n * mean_y * mean_y) / (n - 1));

  EsConstants out;
  out.dimension = dimension;
  out.base_weights = scheme.base_weights;
  out.lipschitz = -mean_i;
  out.lipschitz_se = std::sqrt(var_i / n);
  out.second_moment = std::sqrt(std::max(0.0, mean_y));
  const double se_mean_y = std::sqrt(var_y / n);
  out.second_moment_se =
      out.second_moment > 0.0 ? se_mean_y / (2.0 * out.second_moment) : se_mean_y;

  std::vector<double> fs_all, gs_all;
  fs_all.reserve(n_samples);
  gs_all.reserve(n_samples);
  for (std::int64_t b = 0; b < n_batches; ++b) {
    fs_all.insert(fs_all.end(), fs_part[b].begin(), fs_part[b].end());
    gs_all.insert(gs_all.end(), gs_part[b].begin(), gs_part[b].end());
  }
  const auto cheb = chebyshev_k2_paired(fs_all, gs_all);
  out.cheb_bound = cheb.bound;
  out.cheb_bound_se = cheb.bound_se;

  if (out.lipschitz + 5.0 * out.lipschitz_se <= 0.0)
    throw CertificateFailure(
        "es_sphere_constants: estimated L is nonpositive beyond noise (L = " +
        std::to_string(out.lipschitz) + " +/- " + std::to_string(out.lipschitz_se) + ")");
  return out;
}

}  // namespace odecert
