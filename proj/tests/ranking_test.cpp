#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "odecert/ranking.hpp"
#include "odecert/rng.hpp"

using namespace odecert;

namespace {

// Exact-integer trinomial oracle, valid for lambda <= 12 (coefficients fit
// in int64 exactly). Independent of the lgamma path in the implementation.
double utility_tri_exact(double p, double q, const WeightScheme& scheme) {
  const int n = scheme.lambda() - 1;
  auto fact = [](int m) {
    std::int64_t f = 1;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
  };
  const double r = 1.0 - p - q;
  double total = 0.0;
  for (int k = 0; k <= n; ++k)
    for (int l = 0; l <= n - k; ++l) {
      double avg = 0.0;
      for (int j = k; j <= k + l; ++j) avg += scheme.base_weights[j];
      avg /= l + 1;
      const double coef =
          static_cast<double>(fact(n) / (fact(k) * fact(l) * fact(n - k - l)));
      total += avg * scheme.lambda() * coef * std::pow(p, k) * std::pow(q, l) *
               std::pow(std::max(r, 0.0), n - k - l);
    }
  return total;
}

WeightScheme random_scheme(Rng& rng, int lambda) {
  std::vector<double> w(lambda);
  double acc = 2.0;
  for (double& x : w) {
    x = acc;
    acc -= rng.uniform();
  }
  return WeightScheme(w);
}

}  // namespace

TEST_CASE("weight scheme validation") {
  CHECK_THROWS(WeightScheme({1.0}));
  CHECK_THROWS(WeightScheme({0.0, 1.0}));
  WeightScheme ok({1.0, 1.0, 0.0});
  CHECK(ok.lambda() == 3);
  CHECK(ok.weight_sum() == doctest::Approx(2.0));
  CHECK(ok.has_strict_spread());
  CHECK_FALSE(WeightScheme({1.0, 1.0}).has_strict_spread());
}

TEST_CASE("assign_weights on distinct values") {
  WeightScheme scheme({1.0, 0.5, 0.0});
  const auto w = assign_weights(std::vector<double>{3.0, 1.0, 2.0}, scheme);
  CHECK(w[0] == 0.0);
  CHECK(w[1] == 1.0);
  CHECK(w[2] == 0.5);
}

TEST_CASE("assign_weights splits ties") {
  WeightScheme scheme({1.0, 0.5, 0.0});
  const auto w = assign_weights(std::vector<double>{1.0, 1.0, 2.0}, scheme);
  CHECK(w[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(w[2] == 0.0);
}

TEST_CASE("assign_weights rejects length mismatch") {
  WeightScheme scheme({1.0, 0.0});
  CHECK_THROWS_AS(assign_weights(std::vector<double>{1.0, 2.0, 3.0}, scheme),
                  std::invalid_argument);
}

TEST_CASE("weight conservation over random inputs") {
  Rng rng(11);
  for (int it = 0; it < 10000; ++it) {
    const int lambda = 2 + static_cast<int>(rng.uniform() * 6);
    const WeightScheme scheme = random_scheme(rng, lambda);
    std::vector<double> f(lambda);
    for (double& x : f) {
      x = std::floor(rng.uniform() * 4);  // coarse values force ties
    }
    const auto w = assign_weights(f, scheme);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    CHECK(std::abs(total - scheme.weight_sum()) <= 1e-12);
  }
}

TEST_CASE("permutation equivariance and monotonicity") {
  Rng rng(12);
  WeightScheme scheme({2.0, 1.5, 1.5, 0.25, 0.0});
  for (int it = 0; it < 500; ++it) {
    std::vector<double> f(5);
    for (double& x : f) x = std::floor(rng.uniform() * 3);
    const auto w = assign_weights(f, scheme);

    // rotate and compare
    std::vector<double> g(f.begin() + 1, f.end());
    g.push_back(f.front());
    const auto wg = assign_weights(g, scheme);
    for (int i = 0; i < 4; ++i) CHECK(wg[i] == w[i + 1]);
    CHECK(wg[4] == w[0]);

    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (f[i] < f[j]) CHECK(w[i] >= w[j]);
  }
}

TEST_CASE("utility_tri lambda-2 special values") {
  WeightScheme scheme({1.0, 0.0});
  CHECK(utility_tri(0.0, 1.0, scheme) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(utility_tri(0.5, 0.0, scheme) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(utility_tri(0.0, 0.0, scheme) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(utility_tri(0.7, 0.7, scheme), std::invalid_argument);
}

TEST_CASE("utility_bin lambda-2 closed form and bounds checks") {
  WeightScheme scheme({1.0, 0.0});
  CHECK(utility_bin(0.0, scheme) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(utility_bin(1.0, scheme) == doctest::Approx(0.0).epsilon(1e-14));
  for (double p = 0.0; p <= 1.0; p += 0.125)
    CHECK(utility_bin(p, scheme) == doctest::Approx(2.0 * (1.0 - p)).epsilon(1e-13));
  CHECK_THROWS_AS(utility_bin(-0.1, scheme), std::invalid_argument);
  CHECK_THROWS_AS(utility_bin(1.1, scheme), std::invalid_argument);
}

TEST_CASE("constant weights give constant utility") {
  WeightScheme scheme({0.7, 0.7, 0.7, 0.7});
  for (double p = 0.0; p <= 1.0; p += 0.1)
    CHECK(utility_bin(p, scheme) == doctest::Approx(4 * 0.7).epsilon(1e-13));
}

TEST_CASE("tie-free utility_tri reduces to utility_bin") {
  Rng rng(13);
  for (int lambda = 2; lambda <= 5; ++lambda) {
    const WeightScheme scheme = random_scheme(rng, lambda);
    for (double p = 0.0; p <= 1.0 + 1e-12; p += 0.1)
      CHECK(std::abs(utility_tri(std::min(p, 1.0), 0.0, scheme) -
                     utility_bin(std::min(p, 1.0), scheme)) <= 1e-12);
  }
}

TEST_CASE("utility_bin nonincreasing in p for nonincreasing weights") {
  Rng rng(14);
  for (int lambda = 2; lambda <= 5; ++lambda) {
    const WeightScheme scheme = random_scheme(rng, lambda);
    double prev = utility_bin(0.0, scheme);
    for (double p = 0.01; p <= 1.0; p += 0.01) {
      const double u = utility_bin(p, scheme);
      CHECK(u <= prev + 1e-12);
      prev = u;
    }
  }
}

TEST_CASE("log-factorial path matches the exact oracle for lambda <= 12") {
  Rng rng(15);
  for (int it = 0; it < 200; ++it) {
    const int lambda = 2 + static_cast<int>(rng.uniform() * 11);
    const WeightScheme scheme = random_scheme(rng, lambda);
    const double p = rng.uniform();
    const double q = rng.uniform() * (1.0 - p);
    const double got = utility_tri(p, q, scheme);
    const double want = utility_tri_exact(p, q, scheme);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}
