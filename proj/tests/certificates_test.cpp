#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "odecert/certificates.hpp"
#include "odecert/errors.hpp"
#include "odecert/flow.hpp"
#include "odecert/rng.hpp"

using namespace odecert;

namespace {

std::vector<std::vector<double>> scalar_grid(double lo, double hi, int n) {
  std::vector<std::vector<double>> grid;
  for (int i = 0; i < n; ++i) grid.push_back({lo + (hi - lo) * i / (n - 1.0)});
  return grid;
}

std::vector<double> pbil_field(std::span<const double> th) {
  return {(1.0 - th[0]) * th[0]};
}

EsConstants unit_constants() {
  EsConstants c;
  c.lipschitz = 1.0;
  c.second_moment = 1.0;
  c.dimension = 1;
  return c;
}

}  // namespace

TEST_CASE("dini constants of the Bernoulli potential on the coarse grid") {
  const auto cert = pbil_certificate();
  const DiniResult r = dini_check(cert.psi, pbil_field, scalar_grid(0.1, 0.9, 9));
  // grad(ln Psi) . F = -(1 + theta)/2, extremes at the grid ends
  CHECK(r.c_upper == doctest::Approx(0.55).epsilon(1e-12));
  CHECK(r.c_lower == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(r.worst_upper[0] == doctest::Approx(0.1));
  CHECK(r.worst_lower[0] == doctest::Approx(0.9));
  CHECK(r.grid_only);
}

TEST_CASE("dini check falls back to directional differences without a gradient") {
  PsiFunction psi = pbil_certificate().psi;
  psi.gradient = nullptr;
  const DiniResult r = dini_check(psi, pbil_field, scalar_grid(0.1, 0.9, 9));
  CHECK(r.c_upper == doctest::Approx(0.55).epsilon(1e-4));
  CHECK(r.c_lower == doctest::Approx(0.95).epsilon(1e-4));
}

TEST_CASE("dini constants of the variance potential are exactly L/2") {
  EsConstants c = unit_constants();
  c.lipschitz = 0.8;
  const auto cert = es_certificate(c);
  auto field = [](std::span<const double> v) { return std::vector<double>{-0.8 * v[0]}; };
  const DiniResult r = dini_check(cert.psi, field, scalar_grid(0.01, 5.0, 40));
  CHECK(r.c_upper == doctest::Approx(0.4).epsilon(1e-13));
  CHECK(r.c_lower == doctest::Approx(0.4).epsilon(1e-13));
}

TEST_CASE("a vanishing field admits no contraction constant") {
  const auto cert = pbil_certificate();
  auto zero = [](std::span<const double> th) { return std::vector<double>(th.size(), 0.0); };
  CHECK_THROWS_AS(dini_check(cert.psi, zero, scalar_grid(0.2, 0.8, 5)), CertificateFailure);
}

TEST_CASE("exponential decay builder") {
  CHECK_THROWS_AS(build_delta1(0.0), std::invalid_argument);
  const auto d1 = build_delta1(1.0);
  CHECK(d1(0.0) == 1.0);
  CHECK(build_delta1(0.5)(2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  double prev = d1(0.0);
  for (double t = 0.1; t < 10.0; t += 0.1) {
    CHECK(d1(t) <= prev);
    prev = d1(t);
  }
}

TEST_CASE("deviation-bound builder reproduces the frozen value") {
  const auto dl = [](double, double) { return 1.0; };
  const auto dr = [](double x, double y) {
    return 1.0 / std::sqrt(2.0 * std::pow(1.0 - x, y / x));
  };
  const auto d2 = build_delta2(dl, 2.0, std::sqrt(2.0), dr);
  // independently computed: (0.05 + sqrt(2) sqrt(0.05)) e^1.5 (2 * 0.9^5)^-1/2
  CHECK(d2(0.1, 0.5) == doctest::Approx(1.5103295487943895).epsilon(1e-12));

  // vanishes as x -> 0 at fixed y
  CHECK(d2(1e-12, 0.5) < 1e-5);

  // nondecreasing in each argument on a grid
  for (int i = 1; i <= 10; ++i)
    for (int j = 1; j <= 10; ++j) {
      const double x = 0.05 * i, y = 0.1 * j;
      if (i < 10) CHECK(d2(x, y) <= d2(x + 0.05, y) * (1 + 1e-12));
      if (j < 10) CHECK(d2(x, y) <= d2(x, y + 0.1) * (1 + 1e-12));
    }
}

TEST_CASE("sphere certificate constants") {
  const auto cert = es_certificate(unit_constants());
  CHECK(cert.delta_a1(0.0) == 1.0);
  CHECK(cert.psi.eval(std::vector<double>{4.0}) == 2.0);
  // 0.9^5 < e^{-0.5}, so the geometric branch is active
  CHECK(cert.delta_r(0.1, 0.5) == doctest::Approx(0.650674415672506).epsilon(1e-12));
  CHECK(cert.k1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(cert.k2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  EsConstants bad = unit_constants();
  bad.lipschitz = -0.1;
  CHECK_THROWS_AS(es_certificate(bad), CertificateFailure);
  EsConstants noisy = unit_constants();
  noisy.lipschitz_se = 0.5;  // only a 2-sigma margin
  CHECK_THROWS_AS(es_certificate(noisy), CertificateFailure);
}

TEST_CASE("Bernoulli certificate constants") {
  const auto cert = pbil_certificate();
  CHECK(cert.psi.eval(std::vector<double>{0.5}) ==
        doctest::Approx(0.7071067811865475).epsilon(1e-15));
  CHECK(cert.delta_r(0.1, 0.5) == doctest::Approx(0.9201925833332467).epsilon(1e-12));
  CHECK(cert.psi.eval(std::vector<double>{1e-10}) > 1e4);
  CHECK(cert.psi.eval(std::vector<double>{1.0 - 1e-12}) < 1e-11);
  CHECK(cert.k1 == 2.0);
  CHECK(cert.delta_a1(2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(cert.delta_b1(2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
}

TEST_CASE("certified decay brackets the closed-form flows") {
  const auto pbil = pbil_certificate();
  for (double theta = 0.1; theta < 0.95; theta += 0.1)
    for (double t = 0.1; t <= 5.0; t += 0.1) {
      const double psi0 = pbil.psi.eval(std::vector<double>{theta});
      const double along = pbil.psi.eval(std::vector<double>{pbil1_flow_exact(theta, t)});
      CHECK(along <= pbil.delta_a1(t) * psi0 * (1 + 1e-12));
      CHECK(along >= pbil.delta_b1(t) * psi0 * (1 - 1e-12));
    }

  EsConstants c = unit_constants();
  c.lipschitz = 0.7;
  const auto es = es_certificate(c);
  for (double v = 0.25; v <= 4.0; v += 0.25)
    for (double t = 0.1; t <= 5.0; t += 0.1) {
      const double psi0 = es.psi.eval(std::vector<double>{v});
      const double along = es.psi.eval(std::vector<double>{es_flow_exact(v, t, 0.7)});
      CHECK(std::abs(along - es.delta_a1(t) * psi0) <= 1e-10 * psi0);
    }
}

TEST_CASE("gradients match central differences") {
  Rng rng(61);
  for (const auto& cert : {pbil_certificate(), es_certificate(unit_constants())}) {
    for (int it = 0; it < 100; ++it) {
      const double lo = cert.name == "pbil-1d" ? 0.05 : 0.1;
      const double hi = cert.name == "pbil-1d" ? 0.95 : 4.0;
      const double th = lo + (hi - lo) * rng.uniform();
      const double h = 1e-6 * std::max(1.0, std::abs(th));
      const double num = (cert.psi.eval(std::vector<double>{th + h}) -
                          cert.psi.eval(std::vector<double>{th - h})) /
                         (2.0 * h);
      const double ana = cert.psi.gradient(std::vector<double>{th})[0];
      CHECK(ana == doctest::Approx(num).epsilon(1e-6));
    }
  }
}

TEST_CASE("weighted-norm gradient condition holds for the sphere certificate") {
  const auto cert = es_certificate(unit_constants());
  const P1Report r = check_p1(cert, 0.05, 0.5, 1.0);
  CHECK(r.ok);
  CHECK(r.max_ratio <= 1.0 + 1e-12);
  CHECK(r.max_ratio > 0.99);  // tight at the lower edge of the region
}

TEST_CASE("weighted-norm gradient condition fails for the Bernoulli certificate") {
  // The Q this certificate carries is the reciprocal 1/(4 beta theta),
  // which bounds the directional derivative but not the raw gradient; the
  // honest check reports the violation near the lower edge of the region.
  const auto cert = pbil_certificate();
  const P1Report r = check_p1(cert, 0.05, 0.5, 0.5);
  CHECK_FALSE(r.ok);
  CHECK(r.max_ratio > 1.0);
  CHECK(r.worst_theta < 0.5);
}

TEST_CASE("second-moment envelope inequality holds on random pairs") {
  for (const auto& cert : {pbil_certificate(), es_certificate(unit_constants())}) {
    const double start = cert.name == "pbil-1d" ? 0.5 : 1.0;
    const P4Report r = check_p4(cert, 0.05, 0.5, start, 10000, 62);
    CHECK(r.ok);
  }
}

TEST_CASE("bundle decay functions are monotone with the right limits") {
  for (const auto& cert : {pbil_certificate(), es_certificate(unit_constants())}) {
    // delta_A1 nonincreasing and vanishing, on a log grid
    double prev = cert.delta_a1(0.0);
    CHECK(prev == 1.0);
    for (double t = 1e-3; t <= 1e3; t *= 2.0) {
      const double v = cert.delta_a1(t);
      CHECK(v <= prev * (1 + 1e-15));
      prev = v;
    }
    CHECK(cert.delta_a1(1e3) < 1e-100);
    CHECK(cert.delta_b1(1e3) < 1e-100);

    // delta_A2 nondecreasing in each argument, vanishing as alpha -> 0
    for (int i = 1; i <= 8; ++i)
      for (int j = 1; j <= 8; ++j) {
        const double x = 0.01 * i, y = 0.05 * j;
        CHECK(cert.delta_a2(x, y) <= cert.delta_a2(x + 0.01, y) * (1 + 1e-12));
        CHECK(cert.delta_a2(x, y) <= cert.delta_a2(x, y + 0.05) * (1 + 1e-12));
      }
    for (double y : {0.1, 0.5})
      CHECK(cert.delta_a2(1e-14, y) < 1e-5);
  }
}

TEST_CASE("serialization round trip preserves the certified bounds") {
  EsConstants c = unit_constants();
  c.lipschitz = 0.735;
  c.second_moment = 0.795;
  const auto cert = es_certificate(c);
  const auto restored = certificate_from_json(certificate_to_json(cert));
  for (double a : {0.01, 0.05}) {
    CHECK(restored.delta_a1(7.0 * a) == cert.delta_a1(7.0 * a));
    CHECK(restored.delta_a2(a, 7.0 * a) == cert.delta_a2(a, 7.0 * a));
  }

  const auto pbil = certificate_from_json(certificate_to_json(pbil_certificate()));
  CHECK(pbil.delta_a2(0.1, 0.5) == pbil_certificate().delta_a2(0.1, 0.5));
}
