#include "odecert/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>

#include "odecert/errors.hpp"
#include "odecert/meanfield.hpp"
#include "odecert/parallel.hpp"
#include "odecert/stats.hpp"

namespace odecert {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("unknown config key '" + where + key + "'");
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = pos - lo;
  return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

struct OlsFit {
  double slope = 0.0;
  bool ok = false;
};

OlsFit ols_log_slope(const std::vector<double>& mean_psi, std::size_t lo, std::size_t hi) {
  OlsFit fit;
  if (hi <= lo + 1) return fit;
  const double n = static_cast<double>(hi - lo + 1);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    mx += static_cast<double>(i);
    my += std::log(mean_psi[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double dx = static_cast<double>(i) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(mean_psi[i]) - my);
  }
  fit.slope = sxy / sxx;
  fit.ok = true;
  return fit;
}

std::vector<double> mean_over_trials(const std::vector<std::vector<double>>& trial_psi,
                                     const std::vector<std::size_t>& indices) {
  const std::size_t horizon = trial_psi.front().size();
  std::vector<double> mean(horizon, 0.0);
  for (std::size_t t : indices)
    for (std::size_t i = 0; i < horizon; ++i) mean[i] += trial_psi[t][i];
  for (double& m : mean) m /= static_cast<double>(indices.size());
  return mean;
}

void write_text_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << body;
}

json rate_to_json(const RateResult& r) {
  return json{{"alpha", r.alpha},         {"gamma", r.gamma},
              {"n_star", r.n_star},       {"gamma_bar", r.gamma_bar},
              {"prefactor", r.prefactor()}, {"status", to_string(r.status)},
              {"n_max", r.n_max}};
}

json lower_rate_to_json(const LowerRateResult& r) {
  return json{{"alpha", r.alpha},   {"gamma", r.gamma},
              {"n_star", r.n_star}, {"gamma_bar", r.gamma_bar},
              {"status", to_string(r.status)}, {"n_max", r.n_max}};
}

}  // namespace

std::string format_float(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {
ExperimentConfig parse_config_impl(const json& j);
}

ExperimentConfig parse_config(const json& j) {
  try {
    return parse_config_impl(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config value: ") + e.what());
  }
}

namespace {

ExperimentConfig parse_config_impl(const json& j) {
  check_keys(j, "", {"problem", "dimension", "scheme", "alpha", "kappa", "theta0",
                     "n_iters", "n_trials", "master_seed", "analyses", "out_dir",
                     "rate_n_max", "meanfield_samples", "es_constant_samples",
                     "traj_export", "flow", "hitting", "deviation", "local"});

  ExperimentConfig config;
  config.problem = j.at("problem").get<std::string>();
  if (config.problem != "pbil-1d" && config.problem != "es-fixed-sphere")
    throw ConfigError("problem must be 'pbil-1d' or 'es-fixed-sphere'");

  if (j.contains("dimension")) config.dimension = j["dimension"].get<int>();
  if (config.problem == "pbil-1d" && config.dimension != 1)
    throw ConfigError("pbil-1d requires dimension = 1");

  if (j.contains("scheme")) {
    check_keys(j["scheme"], "scheme.", {"lambda", "weights"});
    config.weights = j["scheme"].at("weights").get<std::vector<double>>();
    if (j["scheme"].contains("lambda") &&
        j["scheme"]["lambda"].get<int>() != static_cast<int>(config.weights.size()))
      throw ConfigError("scheme.lambda does not match scheme.weights length");
  }

  if (j.contains("alpha")) {
    if (j["alpha"].is_array())
      config.alphas = j["alpha"].get<std::vector<double>>();
    else
      config.alphas = {j["alpha"].get<double>()};
  }
  for (double a : config.alphas)
    if (!(a > 0.0)) throw ConfigError("alpha values must be positive");

  if (j.contains("kappa")) config.kappa = j["kappa"].get<double>();

  if (j.contains("theta0")) {
    if (j["theta0"].is_array())
      config.theta0 = j["theta0"].get<std::vector<double>>();
    else
      config.theta0 = {j["theta0"].get<double>()};
  } else {
    config.theta0 = config.problem == "pbil-1d" ? std::vector<double>{0.5}
                                                : std::vector<double>{1.0};
  }

  if (j.contains("n_iters")) config.n_iters = j["n_iters"].get<long>();
  if (j.contains("n_trials")) config.n_trials = j["n_trials"].get<int>();
  if (config.n_trials < 1) throw ConfigError("n_trials must be >= 1");
  if (j.contains("master_seed")) config.master_seed = j["master_seed"].get<std::uint64_t>();
  if (j.contains("analyses"))
    config.analyses = j["analyses"].get<std::vector<std::string>>();
  const std::set<std::string> known_analyses{"meanfield", "flow",      "certify", "rate",
                                             "hitting",   "deviation", "stats"};
  for (const auto& a : config.analyses)
    if (!known_analyses.count(a)) throw ConfigError("unknown analysis '" + a + "'");
  if (j.contains("out_dir")) config.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("rate_n_max")) config.rate_n_max = j["rate_n_max"].get<long>();
  if (j.contains("meanfield_samples"))
    config.meanfield_samples = j["meanfield_samples"].get<std::int64_t>();
  if (j.contains("es_constant_samples"))
    config.es_constant_samples = j["es_constant_samples"].get<std::int64_t>();
  if (j.contains("traj_export")) config.traj_export = j["traj_export"].get<int>();

  if (j.contains("flow")) {
    check_keys(j["flow"], "flow.", {"t", "dt"});
    if (j["flow"].contains("t")) config.flow_t = j["flow"]["t"].get<double>();
    if (j["flow"].contains("dt")) config.flow_dt = j["flow"]["dt"].get<double>();
  }
  if (j.contains("hitting")) {
    check_keys(j["hitting"], "hitting.", {"eps", "delta", "c", "n_trials", "max_iters"});
    const auto& h = j["hitting"];
    if (h.contains("eps")) config.hitting.eps = h["eps"].get<double>();
    if (h.contains("delta")) config.hitting.delta = h["delta"].get<double>();
    if (h.contains("c")) config.hitting.dist_const = h["c"].get<double>();
    if (h.contains("n_trials")) config.hitting.n_trials = h["n_trials"].get<int>();
    if (h.contains("max_iters")) config.hitting.max_iters = h["max_iters"].get<long>();
  }
  if (j.contains("deviation")) {
    check_keys(j["deviation"], "deviation.", {"n_steps", "trials"});
    const auto& d = j["deviation"];
    if (d.contains("n_steps")) config.deviation.n_steps = d["n_steps"].get<int>();
    if (d.contains("trials")) config.deviation.trials = d["trials"].get<int>();
  }
  if (j.contains("local")) {
    check_keys(j["local"], "local.", {"zeta", "k_max"});
    const auto& l = j["local"];
    if (l.contains("zeta")) config.local.zeta = l["zeta"].get<double>();
    if (l.contains("k_max")) config.local.k_max = l["k_max"].get<long>();
  }
  return config;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

AlgorithmSpec spec_from_config(const ExperimentConfig& config, double alpha) {
  WeightScheme scheme(config.weights);
  if (config.problem == "pbil-1d") return make_pbil_onemax(1, scheme, alpha);
  return make_es_fixed_sphere(config.dimension, scheme, alpha);
}

CertificateBundle certificate_from_config(const ExperimentConfig& config, int jobs) {
  if (config.problem == "pbil-1d") {
    if (config.weights != std::vector<double>{1.0, 0.0})
      throw ConfigError("the pbil-1d certificate is derived for weights [1, 0]");
    return pbil_certificate();
  }
  const EsConstants constants =
      es_sphere_constants(config.dimension, WeightScheme(config.weights),
                          config.es_constant_samples, config.master_seed ^ 0xE5C0DEULL, jobs);
  return es_certificate(constants);
}

std::vector<std::vector<double>> run_psi_ensemble(const AlgorithmSpec& spec,
                                                  const std::vector<double>& theta0,
                                                  long n_iters, int trials,
                                                  std::uint64_t master_seed,
                                                  const PsiFunction& psi, int jobs) {
  std::vector<std::vector<double>> out(trials);
  parallel_for(trials, jobs, [&](std::int64_t k) {
    const Trajectory traj = run_trajectory(spec, theta0, n_iters, master_seed, psi.eval,
                                           static_cast<std::uint64_t>(k));
    out[k] = traj.psi;
  });
  return out;
}

SlopeFit estimate_empirical_rate(const std::vector<std::vector<double>>& trial_psi) {
  if (trial_psi.empty() || trial_psi.front().size() < 2)
    throw std::invalid_argument("estimate_empirical_rate: need >= 2 time points");

  const std::size_t horizon = trial_psi.front().size() - 1;
  std::vector<std::size_t> all(trial_psi.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const std::vector<double> mean = mean_over_trials(trial_psi, all);

  // Burn-in: first half. Truncate at the last positive mean inside the window.
  std::size_t lo = horizon / 2, hi = horizon;
  SlopeFit fit;
  while (hi > lo && !(mean[hi] > 0.0)) {
    --hi;
    fit.truncated = true;
  }
  for (std::size_t i = lo; i <= hi; ++i)
    if (!(mean[i] > 0.0))
      throw std::invalid_argument("estimate_empirical_rate: mean Psi vanished mid-window");
  const OlsFit ols = ols_log_slope(mean, lo, hi);
  if (!ols.ok)
    throw std::invalid_argument("estimate_empirical_rate: window too short after truncation");
  fit.slope = ols.slope;

  // Bootstrap over trials, deterministic.
  const int n_boot = 200;
  std::vector<double> slopes;
  slopes.reserve(n_boot);
  Rng rng(0xB005757A9ULL);
  std::vector<std::size_t> resample(trial_psi.size());
  for (int b = 0; b < n_boot; ++b) {
    for (auto& idx : resample)
      idx = static_cast<std::size_t>(rng.uniform() * trial_psi.size());
    const std::vector<double> m = mean_over_trials(trial_psi, resample);
    std::size_t bhi = hi;
    while (bhi > lo && !(m[bhi] > 0.0)) --bhi;
    const OlsFit f = ols_log_slope(m, lo, bhi);
    if (f.ok) slopes.push_back(f.slope);
  }
  fit.ci_lo = quantile(slopes, 0.025);
  fit.ci_hi = quantile(slopes, 0.975);
  return fit;
}

HittingExperiment run_hitting(const AlgorithmSpec& spec, const CertificateBundle& cert,
                              const std::vector<double>& theta0,
                              const HittingParams& params, const RateResult& rate,
                              std::uint64_t master_seed, int jobs) {
  HittingExperiment out;
  out.n_trials = params.n_trials;
  out.rate_status = to_string(rate.status);
  const double dist_const =
      params.dist_const > 0.0 ? params.dist_const : spec.psi_dist_const;
  const double psi0 = cert.psi.eval(theta0);
  if (rate.status == RateStatus::Certified)
    out.tau_bar = hitting_time_bound(params.eps, params.delta, dist_const, rate.gamma,
                                     rate.gamma_bar, rate.n_star, psi0);

  std::vector<long> taus(params.n_trials, -1);
  parallel_for(params.n_trials, jobs, [&](std::int64_t k) {
    Rng rng(master_seed, static_cast<std::uint64_t>(k));
    std::vector<double> state = theta0;
    for (long n = 0; n < params.max_iters; ++n) {
      const auto candidates = sample_candidates(spec, state, rng);
      for (const auto& x : candidates)
        if (spec.distance_to_opt(x) < params.eps) {
          taus[k] = n + 1;
          break;
        }
      if (taus[k] >= 0) break;
      state = apply_update(spec, state, candidates);
      if (!spec.in_domain(state)) break;
    }
  });

  std::vector<double> finite;
  long within = 0;
  for (long tau : taus) {
    if (tau >= 0) finite.push_back(static_cast<double>(tau));
    if (out.tau_bar >= 0 && tau >= 0 && tau <= out.tau_bar) ++within;
  }
  out.fraction_within_bound =
      out.tau_bar >= 0 ? static_cast<double>(within) / params.n_trials : 0.0;
  out.tau_q50 = quantile(finite, 0.5);
  out.tau_q90 = quantile(finite, 0.9);
  return out;
}

std::vector<std::string> validate_against_schema(const json& doc, const json& schema) {
  std::vector<std::string> errors;
  std::function<void(const json&, const json&, std::string)> walk =
      [&](const json& d, const json& s, std::string path) {
        if (s.contains("type")) {
          const std::string type = s["type"].get<std::string>();
          const bool ok = (type == "object" && d.is_object()) ||
                          (type == "array" && d.is_array()) ||
                          (type == "string" && d.is_string()) ||
                          (type == "number" && d.is_number()) ||
                          (type == "integer" && d.is_number_integer()) ||
                          (type == "boolean" && d.is_boolean()) || (type == "null" && d.is_null());
          if (!ok) {
            errors.push_back(path + ": expected " + type);
            return;
          }
        }
        if (s.contains("required"))
          for (const auto& key : s["required"]) {
            const std::string k = key.get<std::string>();
            if (!d.contains(k)) errors.push_back(path + ": missing required key '" + k + "'");
          }
        if (s.contains("properties") && d.is_object())
          for (const auto& [key, sub] : s["properties"].items())
            if (d.contains(key)) walk(d[key], sub, path + "/" + key);
        if (s.contains("items") && d.is_array())
          for (std::size_t i = 0; i < d.size(); ++i)
            walk(d[i], s["items"], path + "[" + std::to_string(i) + "]");
      };
  walk(doc, schema, "");
  return errors;
}

namespace {

std::string trajectory_csv(const Trajectory& traj) {
  const std::size_t dim = traj.states.front().size();
  std::string body = "iter";
  body.reserve(traj.states.size() * (dim + 1) * 20);
  for (std::size_t j = 0; j < dim; ++j) {
    body += ",component_";
    body += std::to_string(j);
  }
  body += ",psi\n";
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    body += std::to_string(i);
    for (double c : traj.states[i]) {
      body += ',';
      body += format_float(c);
    }
    body += ',';
    body += traj.has_psi ? format_float(traj.psi[i]) : "nan";
    body += '\n';
  }
  return body;
}

std::string flow_csv(const FlowPath& path) {
  std::string body = "t";
  body.reserve(path.times.size() * (path.points.front().size() + 1) * 20);
  for (std::size_t j = 0; j < path.points.front().size(); ++j) {
    body += ",component_";
    body += std::to_string(j);
  }
  body += '\n';
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    body += format_float(path.times[i]);
    for (double c : path.points[i]) {
      body += ',';
      body += format_float(c);
    }
    body += '\n';
  }
  return body;
}

}  // namespace

int run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                   int jobs) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  fs::create_directories(out_dir / "trajectories");

  auto has = [&](const std::string& a) {
    return std::find(config.analyses.begin(), config.analyses.end(), a) !=
           config.analyses.end();
  };

  json report;
  report["problem"] = config.problem;
  report["seeds"] = {{"master_seed", config.master_seed}};
  report["config"] = {{"n_iters", config.n_iters},
                      {"n_trials", config.n_trials},
                      {"weights", config.weights},
                      {"theta0", config.theta0},
                      {"dimension", config.dimension}};
  int exit_code = 0;

  CertificateBundle cert;
  try {
    cert = certificate_from_config(config, jobs);
  } catch (const CertificateFailure& e) {
    report["certificate_error"] = e.what();
    report["statuses"] = json::array({"certificate-failure"});
    write_text_file(out_dir / "report.json", report.dump(2) + "\n");
    return 2;
  }
  report["certificate"] = certificate_to_json(cert);

  if (has("certify")) {
    json cj;
    std::vector<std::vector<double>> grid;
    if (config.problem == "pbil-1d") {
      for (int i = 1; i <= 99; ++i) grid.push_back({i / 100.0});
    } else {
      for (int i = 1; i <= 100; ++i) grid.push_back({config.theta0[0] * i / 25.0});
    }
    std::function<std::vector<double>(std::span<const double>)> field;
    if (config.problem == "pbil-1d") {
      field = [](std::span<const double> th) {
        return std::vector<double>{pbil1_meanfield_exact(th[0])};
      };
    } else {
      const double L = cert.lipschitz;
      field = [L](std::span<const double> th) { return std::vector<double>{-L * th[0]}; };
    }
    try {
      const DiniResult dini = dini_check(cert.psi, field, grid);
      cj["dini"] = {{"c_upper", dini.c_upper},
                    {"c_lower", dini.c_lower},
                    {"grid_only", dini.grid_only},
                    {"note", "grid certification is heuristic: a finite grid cannot "
                             "witness a supremum over a continuum"}};
    } catch (const CertificateFailure& e) {
      report["certificate_error"] = e.what();
      write_text_file(out_dir / "report.json", report.dump(2) + "\n");
      return 2;
    }
    const double alpha0 = config.alphas.front();
    const double horizon = std::max(1.0, config.n_iters * alpha0 / 10.0);
    const P1Report p1 = check_p1(cert, alpha0, horizon, config.theta0[0]);
    cj["p1"] = {{"max_ratio", p1.max_ratio},
                {"worst_theta", p1.worst_theta},
                {"ok", p1.ok}};
    const P4Report p4 =
        check_p4(cert, alpha0, horizon, config.theta0[0], 10000, config.master_seed);
    cj["p4"] = {{"max_violation", p4.max_violation}, {"ok", p4.ok}};
    report["certify"] = cj;
  }

  if (has("meanfield")) {
    const AlgorithmSpec spec = spec_from_config(config, config.alphas.front());
    const MeanFieldEstimate est = meanfield_mc(spec, config.theta0, config.meanfield_samples,
                                               config.master_seed ^ 0x3EA1ULL, jobs);
    json mj{{"value", est.value}, {"std_error", est.std_error}, {"n_samples", est.n_samples}};
    if (config.problem == "pbil-1d") mj["exact"] = pbil1_meanfield_exact(config.theta0[0]);
    report["meanfield"] = mj;
  }

  if (has("flow")) {
    std::function<std::vector<double>(std::span<const double>)> field;
    std::function<double(double)> exact;
    const double start = config.theta0[0];
    if (config.problem == "pbil-1d") {
      field = [](std::span<const double> th) {
        return std::vector<double>{(1.0 - th[0]) * th[0]};
      };
      exact = [start](double t) { return pbil1_flow_exact(start, t); };
    } else {
      const double L = cert.lipschitz;
      field = [L](std::span<const double> th) { return std::vector<double>{-L * th[0]}; };
      exact = [start, L](double t) { return es_flow_exact(start, t, L); };
    }
    const FlowPath path =
        integrate_flow(field, {start}, config.flow_t, config.flow_dt);
    double max_err = 0.0;
    for (std::size_t i = 0; i < path.times.size(); ++i)
      max_err = std::max(max_err, std::abs(path.points[i][0] - exact(path.times[i])));
    write_text_file(out_dir / "flow.csv", flow_csv(path));
    report["flow"] = {{"t", config.flow_t},
                      {"dt", config.flow_dt},
                      {"max_error_vs_closed_form", max_err}};
  }

  // The constructive step-size threshold does not depend on alpha.
  const AdmissibleAlpha abar = admissible_alpha(cert.delta_a1, cert.delta_a2, 1.0);
  report["admissible_alpha"] = {{"alpha_bar", abar.alpha_bar},
                                {"t", abar.t_half},
                                {"n_bar", abar.n_bar},
                                {"witness_sum", abar.witness_sum},
                                {"certified", abar.certified}};

  report["per_alpha"] = json::array();
  bool any_inconclusive = false;
  for (std::size_t ai = 0; ai < config.alphas.size(); ++ai) {
    const double alpha = config.alphas[ai];
    const AlgorithmSpec spec = spec_from_config(config, alpha);
    json aj{{"alpha", alpha}};

    std::vector<std::vector<double>> trial_psi;
    const bool need_ensemble = has("rate") || has("hitting") || config.traj_export > 0;
    if (need_ensemble)
      trial_psi = run_psi_ensemble(spec, config.theta0, config.n_iters, config.n_trials,
                                   config.master_seed, cert.psi, jobs);

    for (int k = 0; k < std::min<int>(config.traj_export, config.n_trials); ++k) {
      const Trajectory traj =
          run_trajectory(spec, config.theta0, config.n_iters, config.master_seed,
                         cert.psi.eval, static_cast<std::uint64_t>(k));
      write_text_file(out_dir / "trajectories" /
                          ("alpha" + std::to_string(ai) + "_trial" + std::to_string(k) +
                           ".csv"),
                      trajectory_csv(traj));
    }

    RateResult rate;
    if (has("rate") || has("hitting")) {
      const long n_max =
          config.rate_n_max > 0 ? config.rate_n_max : default_rate_n_max(alpha);
      rate = convergence_rate(cert.delta_a1, cert.delta_a2, alpha, n_max);
      const LowerRateResult lower = lower_rate(cert.delta_b1, cert.delta_b2, alpha, n_max);
      aj["rate"] = rate_to_json(rate);
      aj["rate_lower"] = lower_rate_to_json(lower);
      if (rate.status == RateStatus::Inconclusive) any_inconclusive = true;

      if (has("rate")) {
        const SlopeFit fit = estimate_empirical_rate(trial_psi);
        aj["empirical_slope"] = {{"slope", fit.slope},
                                 {"ci_lo", fit.ci_lo},
                                 {"ci_hi", fit.ci_hi},
                                 {"truncated", fit.truncated}};
        aj["slope_sandwich"] = {
            {"ln_gamma_lower", lower.gamma > 0.0 ? std::log(lower.gamma) : 0.0},
            {"ln_gamma_upper", std::log(rate.gamma)},
            {"inside", lower.gamma > 0.0 && fit.slope >= std::log(lower.gamma) &&
                           fit.slope <= std::log(rate.gamma)}};

        // Anytime-bound curve vs the empirical ensemble.
        const double psi0 = cert.psi.eval(config.theta0);
        std::vector<std::size_t> all(trial_psi.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        const std::vector<double> mean = mean_over_trials(trial_psi, all);
        std::string csv = "n,bound,empirical_mean_psi,empirical_q05,empirical_q95\n";
        csv.reserve((config.n_iters + 1) * 100);
        bool dominated = true;
        std::vector<double> column(trial_psi.size());
        for (long n = 0; n <= config.n_iters; ++n) {
          const double bound =
              anytime_bound(rate.gamma, rate.gamma_bar, rate.n_star, psi0, n);
          for (std::size_t t = 0; t < trial_psi.size(); ++t) column[t] = trial_psi[t][n];
          const double q05 = quantile(column, 0.05), q95 = quantile(column, 0.95);
          if (mean[n] > bound * (1.0 + 1e-12)) dominated = false;
          csv += std::to_string(n);
          csv += ',';
          csv += format_float(bound);
          csv += ',';
          csv += format_float(mean[n]);
          csv += ',';
          csv += format_float(q05);
          csv += ',';
          csv += format_float(q95);
          csv += '\n';
        }
        const std::string bounds_name =
            ai == 0 ? "bounds.csv" : "bounds_" + std::to_string(ai + 1) + ".csv";
        write_text_file(out_dir / bounds_name, csv);
        aj["anytime_bound_dominates"] = dominated;
      }
    }

    if (has("hitting")) {
      const HittingExperiment hit = run_hitting(spec, cert, config.theta0, config.hitting,
                                                rate, config.master_seed ^ 0x417ULL, jobs);
      aj["hitting"] = {{"tau_bar", hit.tau_bar},
                       {"rate_status", hit.rate_status},
                       {"fraction_within_bound", hit.fraction_within_bound},
                       {"tau_q50", hit.tau_q50},
                       {"tau_q90", hit.tau_q90},
                       {"n_trials", hit.n_trials},
                       {"eps", config.hitting.eps},
                       {"delta", config.hitting.delta}};
      if (config.local.zeta > 0.0 && rate.status == RateStatus::Certified) {
        const LocalConfig local{config.local.zeta, cert.psi.eval(config.theta0)};
        const LocalProbabilities pr =
            local_probabilities(rate.gamma, rate.n_star, local, config.local.k_max);
        aj["local"] = {{"zeta", local.zeta},
                       {"pr_omega_k", pr.pr_omega_k},
                       {"pr_omega_inf", pr.pr_omega_inf},
                       {"k", config.local.k_max}};
      }
    }

    if (has("deviation")) {
      const StepSchedule schedule =
          StepSchedule::constant(alpha, config.deviation.n_steps);
      json dj;
      if (config.problem == "pbil-1d") {
        const DeviationResult euler =
            euler_ode_deviation(spec, config.theta0, schedule, config.deviation.trials,
                                config.master_seed ^ 0xD1AULL, {}, {}, jobs);
        dj["euler"] = {{"empirical", euler.empirical},
                       {"bound", euler.bound},
                       {"ok", euler.empirical <= euler.bound}};
      }
      const DeviationResult psi_dev =
          psi_deviation(spec, cert, config.theta0, alpha, config.deviation.n_steps,
                        config.deviation.trials, config.master_seed ^ 0x5D1AULL, jobs);
      dj["psi"] = {{"empirical", psi_dev.empirical},
                   {"bound", psi_dev.bound},
                   {"ok", psi_dev.empirical <= psi_dev.bound}};
      aj["deviation"] = dj;
    }

    report["per_alpha"].push_back(aj);
  }

  if (has("stats")) {
    // Fourth-moment benchmarks with known closed forms.
    json table = json::array();
    table.push_back({{"distribution", "normal"},
                     {"bound", fourth_moment_lower_bound({0.0, 1.0, 3.0})},
                     {"exact_mean_abs_diff", 2.0 / std::sqrt(3.14159265358979323846)}});
    table.push_back({{"distribution", "uniform"},
                     {"bound", fourth_moment_lower_bound({0.5, 1.0 / 12.0, 1.0 / 80.0})},
                     {"exact_mean_abs_diff", 1.0 / 3.0}});
    table.push_back({{"distribution", "two-point"},
                     {"bound", fourth_moment_lower_bound({0.5, 0.25, 0.0625})},
                     {"exact_mean_abs_diff", 0.5}});
    const DiscreteJoint coin{{0.5, 0.5}, {0.0, 1.0}, {0.0, 1.0}};
    json cheb = json::array();
    for (int k = 1; k <= 3; ++k) {
      const ChebyshevBound b = chebyshev_lower_bound(coin, k);
      cheb.push_back({{"K", k}, {"lhs", b.lhs}, {"bound", b.bound}});
    }
    report["stats"] = {{"fourth_moment", table}, {"chebyshev_two_point", cheb}};
  }

  report["statuses"] = json::array();
  if (any_inconclusive) {
    report["statuses"].push_back("rate-search-inconclusive");
    exit_code = 3;
  } else {
    report["statuses"].push_back("ok");
  }
  // Timestamps live only here so determinism checks can drop this one field.
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  report["metadata"] = {{"generator", "odecert"},
                        {"report_version", 1},
                        {"timestamp", stamp}};

  write_text_file(out_dir / "report.json", report.dump(2) + "\n");
  return exit_code;
}

}  // namespace odecert
