#include "odecert/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "odecert/errors.hpp"

namespace odecert {
namespace {

constexpr double kTinyDelta1 = 1e-16;
constexpr long kFlatRun = 1000;  // h must be nondecreasing this long to stop early

double root_n(double sum, long n) {
  if (sum <= 0.0) return 0.0;
  if (std::isinf(sum)) return sum;
  return std::exp(std::log(sum) / static_cast<double>(n));
}

}  // namespace

std::string to_string(RateStatus s) {
  switch (s) {
    case RateStatus::Certified: return "certified";
    case RateStatus::NotAdmissible: return "not-admissible";
    case RateStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

double RateResult::prefactor() const {
  return gamma_bar / std::pow(gamma, static_cast<double>(n_star - 1));
}

long default_rate_n_max(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("default_rate_n_max: alpha > 0");
  const double inv = std::ceil(1.0 / alpha);
  const long n = static_cast<long>(1e6 / inv);
  return std::clamp(n, 1L, 100000L);
}

RateResult convergence_rate(const Delta1Fn& delta1, const Delta2Fn& delta2, double alpha,
                            long n_max) {
  if (!(alpha > 0.0)) throw std::invalid_argument("convergence_rate: alpha > 0 required");
  if (n_max < 1) throw std::invalid_argument("convergence_rate: n_max >= 1 required");

  RateResult result;
  result.alpha = alpha;
  result.n_max = n_max;

  double best = std::numeric_limits<double>::infinity();
  long best_n = 0;
  double prev_h = std::numeric_limits<double>::infinity();
  long flat = 0;
  long scanned = 0;
  // h need not be unimodal, so search exhaustively; stop early only once the
  // A1 part is exhausted and h has been nondecreasing for a long run. The
  // improvement test carries a few-ulp tolerance so that mathematically flat
  // stretches resolve to their smallest N.
  for (long n = 1; n <= n_max; ++n) {
    const double d1 = delta1(n * alpha);
    const double sum = d1 + delta2(alpha, n * alpha);
    const double h = root_n(sum, n);
    if (h < best * (1.0 - 4e-15)) {
      best = h;
      best_n = n;
    }
    flat = (h >= prev_h) ? flat + 1 : 0;
    prev_h = h;
    scanned = n;
    if (d1 < kTinyDelta1 && flat >= kFlatRun) break;
  }

  result.gamma = best;
  result.n_star = best_n;
  if (best_n == 1) {
    result.gamma_bar = 1.0;
  } else {
    double m = -std::numeric_limits<double>::infinity();
    for (long n = 1; n < best_n; ++n)
      m = std::max(m, delta1(n * alpha) + delta2(alpha, n * alpha));
    result.gamma_bar = m;
  }
  if (best < 1.0) {
    result.status = RateStatus::Certified;
  } else if (delta2(alpha, scanned * alpha) >= 1.0) {
    // Delta_A2 is nondecreasing in the horizon, so every unscanned N also has
    // h(N) >= 1; this verdict does not rest on the truncation.
    result.status = RateStatus::NotAdmissible;
  } else {
    result.status = RateStatus::Inconclusive;
  }
  return result;
}

LowerRateResult lower_rate(const Delta1Fn& delta_b1, const Delta2Fn& delta_b2, double alpha,
                           long n_max) {
  if (!(alpha > 0.0)) throw std::invalid_argument("lower_rate: alpha > 0 required");
  if (n_max < 1) throw std::invalid_argument("lower_rate: n_max >= 1 required");

  LowerRateResult result;
  result.alpha = alpha;
  result.n_max = n_max;

  double best = 0.0;
  long best_n = 0;
  long flat = 0;
  double prev_h = std::numeric_limits<double>::infinity();
  for (long n = 1; n <= n_max; ++n) {
    const double d1 = delta_b1(n * alpha);
    const double diff = d1 - delta_b2(alpha, n * alpha);
    const double h = diff > 0.0 ? root_n(diff, n) : 0.0;
    if (h > best * (1.0 + 4e-15)) {
      best = h;
      best_n = n;
    }
    flat = (h <= prev_h) ? flat + 1 : 0;
    prev_h = h;
    if (d1 < kTinyDelta1 && flat >= kFlatRun) break;
  }

  result.gamma = best;
  result.n_star = best_n;
  if (best_n > 1) {
    double m = std::numeric_limits<double>::infinity();
    for (long n = 1; n < best_n; ++n)
      m = std::min(m, delta_b1(n * alpha) - delta_b2(alpha, n * alpha));
    result.gamma_bar = m;
  }
  // Delta_B1 - Delta_B2 is nonincreasing in N, so a sweep whose first
  // difference is already nonpositive has certified sup <= 0.
  result.status = best > 0.0 ? RateStatus::Certified : RateStatus::NotAdmissible;
  return result;
}

AdmissibleAlpha admissible_alpha(const Delta1Fn& delta1, const Delta2Fn& delta2,
                                 double alpha_hi, int log_grid_steps) {
  if (!(alpha_hi > 0.0)) throw std::invalid_argument("admissible_alpha: alpha_hi > 0");

  AdmissibleAlpha out;
  // Log-grid scan then bisection for the smallest T with Delta_A1(T) < 1/2.
  const double t_lo_cap = 1e-9, t_hi_cap = 1e9;
  double t_hit = -1.0, t_prev = t_lo_cap;
  if (delta1(t_lo_cap) < 0.5) {
    t_hit = t_lo_cap;
  } else {
    const double step = std::pow(t_hi_cap / t_lo_cap, 1.0 / log_grid_steps);
    for (double t = t_lo_cap * step; t <= t_hi_cap; t *= step) {
      if (delta1(t) < 0.5) {
        double lo = t_prev, hi = t;
        for (int i = 0; i < 80; ++i) {
          const double mid = 0.5 * (lo + hi);
          (delta1(mid) < 0.5 ? hi : lo) = mid;
        }
        t_hit = hi;
        break;
      }
      t_prev = t;
    }
  }
  if (t_hit < 0.0) return out;  // no certificate below the cap
  const double T = t_hit * (1.0 + 1e-6);  // strict margin
  out.t_half = T;

  // Smallest N with Delta_A2(2T/N, 2T) < 1/2: double until it holds, then
  // bisect (Delta_A2 is nondecreasing in its first argument).
  auto ok = [&](long long n) { return delta2(2.0 * T / n, 2.0 * T) < 0.5; };
  long long hi = 1;
  while (!ok(hi)) {
    if (hi > (1LL << 60)) return out;
    hi *= 2;
  }
  long long lo = hi / 2;  // lo == 0 when hi == 1
  while (hi - lo > 1) {
    const long long mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  out.n_bar = hi;
  out.alpha_bar = std::min(2.0 * T / hi, alpha_hi);
  out.witness_sum = delta1(2.0 * T) + delta2(2.0 * T / hi, 2.0 * T);
  out.certified = out.witness_sum < 1.0;
  return out;
}

double anytime_bound(double gamma, double gamma_bar, long n_star, double psi0, long n) {
  if (!(gamma > 0.0)) throw std::invalid_argument("anytime_bound: gamma > 0 required");
  if (n_star < 1) throw std::invalid_argument("anytime_bound: n_star >= 1 required");
  return std::pow(gamma, static_cast<double>(n)) *
         (gamma_bar / std::pow(gamma, static_cast<double>(n_star - 1))) * psi0;
}

long hitting_time_bound(double eps, double delta, double dist_const, double gamma,
                        double gamma_bar, long n_star, double psi0) {
  if (!(eps > 0.0)) throw std::invalid_argument("hitting_time_bound: eps > 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("hitting_time_bound: delta in (0, 1)");
  if (!(dist_const > 0.0)) throw std::invalid_argument("hitting_time_bound: C > 0");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw CertificateFailure("hitting_time_bound: rate not certified (gamma >= 1)");

  const double log_inv_rate = std::log(1.0 / gamma);
  const double prefactor = gamma_bar / std::pow(gamma, static_cast<double>(n_star - 1));
  const double terms = std::log(1.0 / (eps * delta)) / log_inv_rate +
                       std::log(dist_const * prefactor * psi0) / log_inv_rate;
  return std::max(1L, 1L + static_cast<long>(std::ceil(terms)));
}

LocalProbabilities local_probabilities(double gamma, long n_star, const LocalConfig& local,
                                       long k) {
  if (n_star < 1) throw std::invalid_argument("local_probabilities: n_star >= 1");
  if (!(local.zeta > 0.0)) throw std::invalid_argument("local_probabilities: zeta > 0");
  if (k < 0) throw std::invalid_argument("local_probabilities: k >= 0");
  const double g_n = std::pow(gamma, static_cast<double>(n_star));
  if (!(g_n < 1.0))
    throw CertificateFailure("local_probabilities: gamma^n_star must be below 1");

  const double ratio = local.psi0 / local.zeta;
  LocalProbabilities out;
  out.raw_k =
      1.0 - ratio * (g_n - std::pow(g_n, static_cast<double>(k + 1))) / (1.0 - g_n);
  out.raw_inf = 1.0 - ratio * g_n / (1.0 - g_n);
  out.pr_omega_k = std::clamp(out.raw_k, 0.0, 1.0);
  out.pr_omega_inf = std::clamp(out.raw_inf, 0.0, 1.0);
  return out;
}

long local_hitting_time_bound(double eps, double delta, double dist_const, double gamma,
                              double gamma_bar, long n_star, double psi0,
                              double pr_omega_inf) {
  if (!(eps > 0.0)) throw std::invalid_argument("local_hitting_time_bound: eps > 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("local_hitting_time_bound: delta in (0, 1)");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw CertificateFailure("local_hitting_time_bound: rate not certified (gamma >= 1)");
  if (!(pr_omega_inf > 0.0 && pr_omega_inf <= 1.0))
    throw CertificateFailure("local_hitting_time_bound: Pr[Omega_inf] must be in (0, 1]");

  const double log_inv_rate = std::log(1.0 / gamma);
  const double prefactor = gamma_bar / std::pow(gamma, static_cast<double>(n_star - 1));
  const double terms =
      2.0 * std::log(1.0 / (eps * (1.0 - std::sqrt(1.0 - delta)))) / log_inv_rate +
      std::log(1.0 / pr_omega_inf) / log_inv_rate +
      std::log(dist_const * psi0 * prefactor) / log_inv_rate;
  return std::max(1L, 1L + static_cast<long>(std::ceil(terms)));
}

LiminfReport liminf_statements(double gamma, std::span<const double> epsilons,
                               const std::vector<std::vector<double>>& trial_psi,
                               double certified_floor) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("liminf_statements: gamma in (0, 1) required");
  const std::size_t horizon = epsilons.size();
  if (horizon < 20) throw std::invalid_argument("liminf_statements: horizon too short");

  // gamma^n / eps_n must vanish over the horizon: compare the last decile
  // against the first.
  const std::size_t decile = horizon / 10;
  double head = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < horizon; ++i) {
    if (!(epsilons[i] > 0.0))
      throw std::invalid_argument("liminf_statements: epsilons must be positive");
    const double r = std::pow(gamma, static_cast<double>(i + 1)) / epsilons[i];
    if (i < decile) head = std::max(head, r);
    if (i >= horizon - decile) tail = std::max(tail, r);
  }
  LiminfReport report;
  report.precondition_ok = tail <= 1e-2 * head;
  if (!report.precondition_ok)
    throw std::invalid_argument(
        "liminf_statements: gamma^n / eps_n does not vanish over the horizon");

  const double ln_gamma = std::log(gamma);
  std::size_t hits = 0;
  for (const auto& psi : trial_psi) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 1; m < psi.size(); ++m)
      best = std::min(best, std::log(psi[m]) / static_cast<double>(m));
    hits += best <= ln_gamma ? 1 : 0;
  }
  report.empirical_fraction =
      trial_psi.empty() ? 0.0 : static_cast<double>(hits) / trial_psi.size();
  report.certified_floor = certified_floor;
  report.pass = report.empirical_fraction >= certified_floor;
  return report;
}

}  // namespace odecert
