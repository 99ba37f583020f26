#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "odecert/errors.hpp"
#include "odecert/experiment.hpp"

using namespace odecert;
namespace fs = std::filesystem;

namespace {

nlohmann::json minimal_config() {
  return nlohmann::json{{"problem", "pbil-1d"},
                        {"alpha", 0.05},
                        {"n_iters", 50},
                        {"n_trials", 4},
                        {"master_seed", 9},
                        {"analyses", {"rate"}}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

fs::path temp_dir(const std::string& leaf) {
  const fs::path p = fs::temp_directory_path() / ("odecert_test_" + leaf);
  fs::remove_all(p);
  return p;
}

// Repo root relative to the test binary (build/<test> -> ..).
fs::path repo_root() {
  fs::path p = fs::current_path();
  while (!fs::exists(p / "docs" / "report.schema.json")) {
    REQUIRE(p.has_parent_path());
    const fs::path parent = p.parent_path();
    REQUIRE(parent != p);
    p = parent;
  }
  return p;
}

}  // namespace

TEST_CASE("config parsing accepts the documented keys only") {
  const ExperimentConfig c = parse_config(minimal_config());
  CHECK(c.problem == "pbil-1d");
  CHECK(c.alphas == std::vector<double>{0.05});
  CHECK(c.theta0 == std::vector<double>{0.5});  // problem default

  auto bad = minimal_config();
  bad["n_itres"] = 10;  // typo must be fatal
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  auto nested = minimal_config();
  nested["hitting"] = {{"eps", 0.05}, {"detla", 0.1}};
  CHECK_THROWS_AS(parse_config(nested), ConfigError);

  auto negative = minimal_config();
  negative["alpha"] = -0.1;
  CHECK_THROWS_AS(parse_config(negative), ConfigError);

  auto zero_trials = minimal_config();
  zero_trials["n_trials"] = 0;
  CHECK_THROWS_AS(parse_config(zero_trials), ConfigError);

  auto wrong_scheme = minimal_config();
  wrong_scheme["scheme"] = {{"lambda", 3}, {"weights", {1.0, 0.0}}};
  CHECK_THROWS_AS(parse_config(wrong_scheme), ConfigError);

  auto wrong_type = minimal_config();
  wrong_type["n_iters"] = "plenty";
  CHECK_THROWS_AS(parse_config(wrong_type), ConfigError);
}

TEST_CASE("slope fit on exact geometric input") {
  std::vector<std::vector<double>> psis(3, std::vector<double>(101));
  for (auto& p : psis)
    for (int n = 0; n <= 100; ++n) p[n] = std::pow(0.9, n);
  const SlopeFit fit = estimate_empirical_rate(psis);
  CHECK(fit.slope == doctest::Approx(std::log(0.9)).epsilon(1e-12));
  CHECK_FALSE(fit.truncated);
  CHECK(fit.ci_lo <= fit.slope);
  CHECK(fit.ci_hi >= fit.slope);
}

TEST_CASE("slope fit on constant input is zero") {
  std::vector<std::vector<double>> psis(3, std::vector<double>(50, 0.7));
  CHECK(estimate_empirical_rate(psis).slope == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("slope fit truncates a series that underflows to zero") {
  std::vector<std::vector<double>> psis(2, std::vector<double>(101));
  for (auto& p : psis) {
    for (int n = 0; n <= 100; ++n) p[n] = std::pow(0.9, n);
    p[95] = p[96] = p[97] = p[98] = p[99] = p[100] = 0.0;
  }
  const SlopeFit fit = estimate_empirical_rate(psis);
  CHECK(fit.truncated);
  CHECK(fit.slope == doctest::Approx(std::log(0.9)).epsilon(1e-9));
}

TEST_CASE("minimal run produces a single-point trajectory") {
  auto j = minimal_config();
  j["n_iters"] = 0;
  j["n_trials"] = 1;
  j["analyses"] = nlohmann::json::array();
  j["traj_export"] = 1;
  const fs::path out = temp_dir("minimal");
  CHECK(run_experiment(parse_config(j), out, 1) == 0);
  const std::string csv = slurp(out / "trajectories" / "alpha0_trial0.csv");
  CHECK(csv.rfind("iter,component_0,psi\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one state
}

TEST_CASE("reruns with the same master seed are byte-identical") {
  auto j = minimal_config();
  j["analyses"] = {"rate", "hitting", "meanfield"};
  j["hitting"] = {{"n_trials", 50}, {"max_iters", 2000}};
  j["n_trials"] = 8;
  const fs::path out1 = temp_dir("det1"), out2 = temp_dir("det2");
  CHECK(run_experiment(parse_config(j), out1, 1) == 0);
  CHECK(run_experiment(parse_config(j), out2, 3) == 0);  // jobs must not matter

  const std::string bounds = slurp(out1 / "bounds.csv");
  CHECK(bounds.rfind("n,bound,empirical_mean_psi,empirical_q05,empirical_q95\n", 0) == 0);
  CHECK(bounds == slurp(out2 / "bounds.csv"));
  CHECK(slurp(out1 / "trajectories" / "alpha0_trial0.csv") ==
        slurp(out2 / "trajectories" / "alpha0_trial0.csv"));

  auto r1 = read_json(out1 / "report.json");
  auto r2 = read_json(out2 / "report.json");
  r1.erase("metadata");  // timestamps are segregated there
  r2.erase("metadata");
  CHECK(r1 == r2);
}

TEST_CASE("report validates against the shipped schema") {
  auto j = minimal_config();
  j["analyses"] = {"rate", "hitting", "certify", "deviation", "stats"};
  j["n_trials"] = 6;
  j["deviation"] = {{"n_steps", 20}, {"trials", 10}};
  j["hitting"] = {{"n_trials", 20}, {"max_iters", 500}};
  const fs::path out = temp_dir("schema");
  run_experiment(parse_config(j), out, 2);
  const auto report = read_json(out / "report.json");
  const auto schema = read_json(repo_root() / "docs" / "report.schema.json");
  const auto errors = validate_against_schema(report, schema);
  for (const auto& e : errors) MESSAGE(e);
  CHECK(errors.empty());

  // a broken document is caught
  auto mutilated = report;
  mutilated.erase("certificate");
  mutilated["statuses"] = 3;
  CHECK_FALSE(validate_against_schema(mutilated, schema).empty());
}

TEST_CASE("certified numbers reproduce from the serialized constants alone") {
  auto j = minimal_config();
  j["analyses"] = {"rate"};
  const fs::path out = temp_dir("rederive");
  run_experiment(parse_config(j), out, 1);
  const auto report = read_json(out / "report.json");

  const CertificateBundle cert = certificate_from_json(report["certificate"]);
  const auto& rj = report["per_alpha"][0]["rate"];
  const RateResult redone = convergence_rate(cert.delta_a1, cert.delta_a2,
                                             rj["alpha"].get<double>(),
                                             rj["n_max"].get<long>());
  CHECK(redone.gamma == rj["gamma"].get<double>());
  CHECK(redone.n_star == rj["n_star"].get<long>());
  CHECK(redone.gamma_bar == rj["gamma_bar"].get<double>());
}

TEST_CASE("hitting analysis reports an uncertified rate honestly") {
  auto j = minimal_config();  // alpha = 0.05 is not admissible for this certificate
  j["analyses"] = {"hitting"};
  j["hitting"] = {{"n_trials", 30}, {"max_iters", 500}};
  const fs::path out = temp_dir("hit_uncert");
  run_experiment(parse_config(j), out, 1);
  const auto report = read_json(out / "report.json");
  const auto& h = report["per_alpha"][0]["hitting"];
  CHECK(h["tau_bar"].get<long>() == -1);
  CHECK(h["rate_status"].get<std::string>() == "not-admissible");
}

TEST_CASE("hitting analysis certifies and meets the bound at a small step size") {
  auto j = minimal_config();
  j["alpha"] = 0.01;
  j["n_iters"] = 20;
  j["analyses"] = {"hitting"};
  j["rate_n_max"] = 20000;
  j["hitting"] = {{"eps", 0.05}, {"delta", 0.1}, {"n_trials", 200}, {"max_iters", 20000}};
  const fs::path out = temp_dir("hit_cert");
  CHECK(run_experiment(parse_config(j), out, 2) == 0);
  const auto report = read_json(out / "report.json");
  const auto& h = report["per_alpha"][0]["hitting"];
  CHECK(h["rate_status"].get<std::string>() == "certified");
  CHECK(h["tau_bar"].get<long>() >= 1);
  CHECK(h["fraction_within_bound"].get<double>() >= 0.9);
}

TEST_CASE("certificate failure surfaces as exit code 2") {
  nlohmann::json j{{"problem", "es-fixed-sphere"},
                   {"dimension", 1},
                   {"scheme", {{"weights", {0.5, 0.5}}}},  // flat weights: L ~ 0
                   {"alpha", 0.05},
                   {"theta0", 1.0},
                   {"n_iters", 10},
                   {"n_trials", 2},
                   {"master_seed", 3},
                   {"es_constant_samples", 20000},
                   {"analyses", {"rate"}}};
  const fs::path out = temp_dir("certfail");
  CHECK(run_experiment(parse_config(j), out, 1) == 2);
  const auto report = read_json(out / "report.json");
  CHECK(report.contains("certificate_error"));
}

TEST_CASE("inconclusive rate search surfaces as exit code 3") {
  auto j = minimal_config();
  j["alpha"] = 0.012;   // admissible only past the default horizon for this alpha
  j["rate_n_max"] = 2;  // force a too-short search
  const fs::path out = temp_dir("inconclusive");
  CHECK(run_experiment(parse_config(j), out, 1) == 3);
}

TEST_CASE("float formatting uses 17 significant digits and a point separator") {
  CHECK(format_float(0.1) == "0.10000000000000001");
  CHECK(format_float(1.0) == "1");
  CHECK(format_float(2.0 / 3.0) == "0.66666666666666663");
}
