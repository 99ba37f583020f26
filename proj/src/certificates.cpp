#include "odecert/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "odecert/errors.hpp"
#include "odecert/rng.hpp"

namespace odecert {
namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// One-sided directional derivative of psi at theta along f, with an
// h-refinement consistency check (the smooth built-ins never take this path
// outside tests).
double directional_derivative(const PsiFunction& psi, std::span<const double> theta,
                              std::span<const double> f) {
  const std::vector<double> hs = {1e-3, 1e-4, 1e-5};
  const double base = psi.eval(theta);
  std::vector<double> est;
  std::vector<double> shifted(theta.begin(), theta.end());
  for (double h : hs) {
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] = theta[i] + h * f[i];
    est.push_back((psi.eval(shifted) - base) / h);
  }
  const double scale = std::max({1.0, std::abs(est[1]), std::abs(est[2])});
  if (std::abs(est[2] - est[1]) > 1e-2 * scale)
    throw CertificateFailure("dini_check: directional difference did not stabilize");
  return est[2];
}

double min_beta(double lipschitz, double x, double y) {
  return std::min(std::exp(-lipschitz * y), std::pow(1.0 - x, y / x));
}

}  // namespace

DiniResult dini_check(const PsiFunction& psi,
                      const std::function<std::vector<double>(std::span<const double>)>& field,
                      const std::vector<std::vector<double>>& grid) {
  if (grid.empty()) throw std::invalid_argument("dini_check: empty grid");

  DiniResult result;
  double worst_max = -std::numeric_limits<double>::infinity();
  double worst_min = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> violations;

  for (const auto& theta : grid) {
    const double p = psi.eval(theta);
    if (!(p > 0.0))
      throw std::invalid_argument("dini_check: Psi must be positive on the grid");
    const std::vector<double> f = field(theta);
    double d;
    if (psi.gradient) {
      d = dot(psi.gradient(theta), f) / p;
    } else {
      d = directional_derivative(psi, theta, f) / p;
    }
    if (d >= 0.0) violations.push_back(theta);
    if (d > worst_max) {
      worst_max = d;
      result.worst_upper = theta;
    }
    if (d < worst_min) {
      worst_min = d;
      result.worst_lower = theta;
    }
  }

  if (!violations.empty()) {
    std::ostringstream os;
    os << "dini_check: grad(ln Psi).F >= 0 at " << violations.size()
       << " grid point(s), first at [";
    for (std::size_t i = 0; i < violations.front().size(); ++i)
      os << (i ? ", " : "") << violations.front()[i];
    os << "]; no negative contraction constant exists on this grid";
    throw CertificateFailure(os.str());
  }
  result.c_upper = -worst_max;
  result.c_lower = -worst_min;
  return result;
}

Delta1Fn build_delta1(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("build_delta1: C must be positive");
  return [c](double t) { return std::exp(-c * t); };
}

Delta2Fn build_delta2(Delta2Fn delta_l, double k1, double k2, Delta2Fn delta_r) {
  return [delta_l = std::move(delta_l), k1, k2, delta_r = std::move(delta_r)](
             double x, double y) {
    const double dl = delta_l(x, y);
    return (dl * x * y + k2 * std::sqrt(x * y)) * std::exp((dl + k1) * y) * delta_r(x, y);
  };
}

CertificateBundle es_certificate(const EsConstants& constants) {
  const double L = constants.lipschitz;
  const double S = constants.second_moment;
  if (!(L > 0.0))
    throw CertificateFailure("es_certificate: contraction constant L must be positive");
  if (L <= 5.0 * constants.lipschitz_se)
    throw CertificateFailure("es_certificate: L estimate lacks a 5-sigma positive margin");
  if (!(S > 0.0))
    throw CertificateFailure("es_certificate: second-moment constant S must be positive");

  CertificateBundle cert;
  cert.name = "es-fixed-sphere";
  cert.psi.name = "sqrt-variance";
  cert.psi.eval = [](std::span<const double> th) { return std::sqrt(th[0]); };
  cert.psi.gradient = [](std::span<const double> th) {
    return std::vector<double>{0.5 / std::sqrt(th[0])};
  };
  cert.c_upper = L / 2.0;
  cert.c_lower = L / 2.0;
  cert.delta_a1 = build_delta1(L / 2.0);
  cert.delta_b1 = build_delta1(L / 2.0);
  cert.lipschitz = L;
  cert.second_moment = S;
  cert.k1 = kSqrt2 * S;
  cert.k2 = kSqrt2;
  cert.delta_l = [L](double, double) { return L; };
  cert.delta_r = [L, S](double x, double y) {
    return 0.5 * S / std::sqrt(min_beta(L, x, y));
  };
  cert.beta = [L](double x, double y) { return min_beta(L, x, y); };
  cert.q_scale = [L](double x, double y, double v0) {
    return 1.0 / (4.0 * min_beta(L, x, y) * v0);
  };
  cert.r_of = [S](double q, double v) { return S * std::sqrt(q) * v; };
  cert.delta_a2 = build_delta2(cert.delta_l, cert.k1, cert.k2, cert.delta_r);
  cert.delta_b2 = cert.delta_a2;
  cert.domain_lo = 0.0;
  cert.domain_hi = std::numeric_limits<double>::infinity();
  cert.formula_ids = {"delta1_exp", "delta2_chain", "deltaR_es_half_S_beta",
                      "beta_min_exp_geom", "q_quarter_beta_theta"};
  return cert;
}

CertificateBundle pbil_certificate() {
  CertificateBundle cert;
  cert.name = "pbil-1d";
  cert.psi.name = "pbil-potential";
  cert.psi.eval = [](std::span<const double> th) {
    return (1.0 - th[0]) / std::sqrt(th[0]);
  };
  cert.psi.gradient = [](std::span<const double> th) {
    const double t = th[0];
    return std::vector<double>{-(1.0 + t) / (2.0 * t * std::sqrt(t))};
  };
  cert.c_upper = 0.5;
  cert.c_lower = 1.0;
  cert.delta_a1 = build_delta1(0.5);
  cert.delta_b1 = build_delta1(1.0);
  cert.lipschitz = 1.0;
  cert.k1 = 2.0;
  cert.k2 = kSqrt2;
  cert.delta_l = [](double, double) { return 1.0; };
  cert.delta_r = [](double x, double y) {
    return 1.0 / std::sqrt(2.0 * std::pow(1.0 - x, y / x));
  };
  cert.beta = [](double x, double y) { return min_beta(1.0, x, y); };
  cert.q_scale = [](double x, double y, double th0) {
    return 1.0 / (4.0 * min_beta(1.0, x, y) * th0);
  };
  cert.r_of = [](double q, double th) { return std::sqrt(2.0 * q) * (1.0 - th); };
  cert.delta_a2 = build_delta2(cert.delta_l, cert.k1, cert.k2, cert.delta_r);
  cert.delta_b2 = cert.delta_a2;
  cert.domain_lo = 0.0;
  cert.domain_hi = 1.0;
  cert.formula_ids = {"delta1_exp", "delta2_chain", "deltaR_pbil_inv_sqrt_2beta",
                      "beta_min_exp_geom", "q_quarter_beta_theta"};
  return cert;
}

P1Report check_p1(const CertificateBundle& cert, double alpha, double T,
                  double theta_start, int grid_points) {
  const double b = cert.beta(alpha, T);
  const double q = cert.q_scale(alpha, T, theta_start);
  const double lo = b * theta_start;
  double hi = std::isinf(cert.domain_hi) ? 10.0 * std::max(theta_start, 1.0)
                                         : cert.domain_hi * (1.0 - 1e-9);

  P1Report report;
  for (int i = 0; i < grid_points; ++i) {
    const double th = lo + (hi - lo) * i / (grid_points - 1.0);
    const double g = cert.psi.gradient(std::vector<double>{th})[0];
    const double ratio = g * g / q;
    if (ratio > report.max_ratio) {
      report.max_ratio = ratio;
      report.worst_theta = th;
    }
  }
  report.ok = report.max_ratio <= 1.0 + 1e-12;
  return report;
}

P4Report check_p4(const CertificateBundle& cert, double alpha, double T,
                  double theta_start, int n_pairs, std::uint64_t seed) {
  const double b = cert.beta(alpha, T);
  const double q = cert.q_scale(alpha, T, theta_start);
  const double lo = b * theta_start;
  const double hi = std::isinf(cert.domain_hi) ? 10.0 * std::max(theta_start, 1.0)
                                               : cert.domain_hi * (1.0 - 1e-9);

  Rng rng(seed);
  P4Report report;
  report.max_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_pairs; ++i) {
    const double a = lo + (hi - lo) * rng.uniform();
    const double c = lo + (hi - lo) * rng.uniform();
    const double ra = cert.r_of(q, a), rc = cert.r_of(q, c);
    const double rhs = cert.k1 * cert.k1 * q * (a - c) * (a - c) + cert.k2 * cert.k2 * rc * rc;
    report.max_violation = std::max(report.max_violation, ra * ra - rhs);
  }
  report.ok = report.max_violation <= 1e-9 * std::max(1.0, q);
  return report;
}

nlohmann::json certificate_to_json(const CertificateBundle& cert) {
  nlohmann::json j{
      {"psi_name", cert.psi.name}, {"name", cert.name},
      {"C_upper", cert.c_upper},   {"C_lower", cert.c_lower},
      {"L", cert.lipschitz},       {"K1", cert.k1},
      {"K2", cert.k2},             {"formula_ids", cert.formula_ids},
  };
  if (cert.second_moment) j["S"] = *cert.second_moment;
  return j;
}

CertificateBundle certificate_from_json(const nlohmann::json& j) {
  const std::string name = j.at("name").get<std::string>();
  if (name == "pbil-1d") {
    return pbil_certificate();
  }
  if (name == "es-fixed-sphere") {
    EsConstants constants;
    constants.lipschitz = j.at("L").get<double>();
    constants.second_moment = j.at("S").get<double>();
    constants.lipschitz_se = 0.0;  // serialized constants are taken as given
    return es_certificate(constants);
  }
  throw ConfigError("certificate_from_json: unknown certificate name '" + name + "'");
}

}  // namespace odecert
