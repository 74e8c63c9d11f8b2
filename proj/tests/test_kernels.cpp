#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nwboost/kernels.hpp"
#include "oracles.hpp"

using namespace nwboost;

TEST_CASE("eval: plain kernels") {
  const KernelSpec g = KernelSpec::gaussian();
  CHECK(g(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));
  CHECK(g(0.0) == doctest::Approx(0.39894).epsilon(1e-4));
  CHECK(g(1.5) == doctest::Approx(oracles::phi(1.5)).epsilon(1e-14));
  CHECK(g(9.0) == 0.0);  // truncated tail

  const KernelSpec e = KernelSpec::epanechnikov();
  CHECK(e(2.0) == 0.0);
  CHECK(e(0.0) == doctest::Approx(0.75));
  CHECK(e(0.5) == doctest::Approx(0.5625));
  CHECK(e(-1.0) == 0.0);
}

TEST_CASE("eval: signed gaussian mixture") {
  const KernelSpec k = KernelSpec::gaussian_mixture({{2.0, 1.0}, {-1.0, std::sqrt(2.0)}});
  const double expected = 2.0 * oracles::phi(0.0) - oracles::phi(0.0, std::sqrt(2.0));
  CHECK(k(0.0) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(k(0.0) == doctest::Approx(0.51579).epsilon(1e-4));
  CHECK(k(0.7) ==
        doctest::Approx(2.0 * oracles::phi(0.7) - oracles::phi(0.7, std::sqrt(2.0)))
            .epsilon(1e-13));
}

TEST_CASE("eval: scaled kernel obeys K_h(u) = K(u/h)/h") {
  const KernelSpec g = KernelSpec::gaussian();
  const ScaledKernel kh{g, 0.25};
  CHECK(kh(0.1) == g(0.1 / 0.25) / 0.25);
  CHECK(kh(0.0) == g(0.0) / 0.25);
}

TEST_CASE("mixture construction validates invariants") {
  CHECK_THROWS_AS(KernelSpec::gaussian_mixture({}), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::gaussian_mixture({{0.5, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::gaussian_mixture({{1.0, -1.0}}), std::invalid_argument);
}

TEST_CASE("tabulated construction validates the unit integral") {
  // uniform density on [-1, 1] tabulates cleanly
  const std::vector<double> ok(201, 0.5);
  CHECK_NOTHROW(KernelSpec::tabulated(-1.0, 1.0, ok));
  std::vector<double> bad(201, 0.7);
  CHECK_THROWS_AS(KernelSpec::tabulated(-1.0, 1.0, bad), std::invalid_argument);
}

TEST_CASE("convolve: gaussian closed form") {
  const KernelSpec g = KernelSpec::gaussian();
  const KernelSpec c = convolve(g, g);
  REQUIRE(c.form() == KernelForm::GaussianMixture);
  REQUIRE(c.terms().size() == 1);
  CHECK(c.terms()[0].coef == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.terms()[0].scale == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("convolve: mixture with itself expands bilinearly") {
  const KernelSpec k1 = KernelSpec::gaussian_mixture({{2.0, 1.0}, {-1.0, std::sqrt(2.0)}});
  const KernelSpec c = convolve(k1, k1);
  REQUIRE(c.terms().size() == 3);
  CHECK(c.terms()[0].coef == doctest::Approx(4.0));
  CHECK(c.terms()[0].scale == doctest::Approx(std::sqrt(2.0)));
  CHECK(c.terms()[1].coef == doctest::Approx(-4.0));
  CHECK(c.terms()[1].scale == doctest::Approx(std::sqrt(3.0)));
  CHECK(c.terms()[2].coef == doctest::Approx(1.0));
  CHECK(c.terms()[2].scale == doctest::Approx(2.0));

  // against the quadrature oracle
  const auto f = [&](double u) { return k1(u); };
  for (double x : {0.0, 0.5, 1.3, 2.7}) {
    const double expected = oracles::convolution_quadrature(f, k1.support_radius(), f, x);
    CHECK(c(x) == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("convolve: epanechnikov pair tabulates on [-2, 2]") {
  const KernelSpec e = KernelSpec::epanechnikov();
  const KernelSpec c = convolve(e, e);
  REQUIRE(c.form() == KernelForm::Tabulated);
  CHECK(c.table_lo() == doctest::Approx(-2.0));
  CHECK(c.table_hi() == doctest::Approx(2.0));
  CHECK(kernel_moment(c, 0) == doctest::Approx(1.0).epsilon(1e-6));

  const auto f = [&](double u) { return e(u); };
  for (double x : {0.0, 0.4, 1.1, 1.9}) {
    const double expected = oracles::convolution_quadrature(f, 1.0, f, x);
    CHECK(std::abs(c(x) - expected) <= 1e-5);
  }
}

TEST_CASE("convolve: commutative on evaluation grids") {
  const KernelSpec e = KernelSpec::epanechnikov();
  const KernelSpec g = KernelSpec::gaussian();
  const KernelSpec ab = convolve(e, g);
  const KernelSpec ba = convolve(g, e);
  for (int i = -20; i <= 20; ++i) {
    const double x = 0.3 * i;
    CHECK(std::abs(ab(x) - ba(x)) <= 1e-10);
  }
  const KernelSpec m = KernelSpec::gaussian_mixture({{2.0, 1.0}, {-1.0, std::sqrt(2.0)}});
  const KernelSpec mg = convolve(m, g);
  const KernelSpec gm = convolve(g, m);
  REQUIRE(mg.terms().size() == gm.terms().size());
  for (std::size_t i = 0; i < mg.terms().size(); ++i) {
    CHECK(mg.terms()[i].coef == doctest::Approx(gm.terms()[i].coef).epsilon(1e-14));
    CHECK(mg.terms()[i].scale == doctest::Approx(gm.terms()[i].scale).epsilon(1e-14));
  }
}

TEST_CASE("convolve: rejects mismatched tabulated grids") {
  const KernelSpec a = tabulate(KernelSpec::gaussian(), 1.0 / 512);
  const KernelSpec b = tabulate(KernelSpec::gaussian(), 1.0 / 300);
  CHECK_THROWS_AS(convolve(a, b), std::invalid_argument);
  CHECK_NOTHROW(convolve(a, tabulate(KernelSpec::gaussian(), 1.0 / 512)));
}

TEST_CASE("higher_order_kernel: gaussian recursion") {
  const KernelSpec g = KernelSpec::gaussian();

  const KernelSpec k0 = higher_order_kernel(g, 0);
  CHECK(k0.form() == KernelForm::Plain);
  CHECK(k0(0.3) == g(0.3));

  const KernelSpec k1 = higher_order_kernel(g, 1);
  REQUIRE(k1.terms().size() == 2);
  CHECK(k1.terms()[0].coef == doctest::Approx(2.0));
  CHECK(k1.terms()[0].scale == doctest::Approx(1.0));
  CHECK(k1.terms()[1].coef == doctest::Approx(-1.0));
  CHECK(k1.terms()[1].scale == doctest::Approx(std::sqrt(2.0)));
  CHECK(kernel_moment(k1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(kernel_moment(k1, 2)) <= 1e-12);

  const KernelSpec k2 = higher_order_kernel(g, 2);
  REQUIRE(k2.terms().size() == 4);
  const double expected_coef[] = {4.0, -6.0, 4.0, -1.0};
  const double expected_scale[] = {1.0, std::sqrt(2.0), std::sqrt(3.0), 2.0};
  for (int i = 0; i < 4; ++i) {
    CHECK(k2.terms()[static_cast<std::size_t>(i)].coef == doctest::Approx(expected_coef[i]));
    CHECK(k2.terms()[static_cast<std::size_t>(i)].scale == doctest::Approx(expected_scale[i]));
  }
}

TEST_CASE("higher_order_kernel: preconditions") {
  CHECK_THROWS_AS(higher_order_kernel(KernelSpec::gaussian(), -1), std::invalid_argument);
  const KernelSpec mix = KernelSpec::gaussian_mixture({{1.0, 1.0}});
  CHECK_THROWS_AS(higher_order_kernel(mix, 1), std::invalid_argument);
}

TEST_CASE("kernel_moment: gaussian closed forms and quadrature oracle") {
  const KernelSpec g = KernelSpec::gaussian();
  CHECK(kernel_moment(g, 1) == 0.0);
  CHECK(kernel_moment(g, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kernel_moment(g, 4) == doctest::Approx(3.0).epsilon(1e-12));
  const double quad = oracles::moment_quadrature([&](double u) { return g(u); }, 8.0, 2);
  CHECK(kernel_moment(g, 2) == doctest::Approx(quad).epsilon(1e-6));

  const KernelSpec k1 = higher_order_kernel(g, 1);
  CHECK(std::abs(kernel_moment(k1, 2)) <= 1e-8);

  const KernelSpec e = KernelSpec::epanechnikov();
  CHECK(kernel_moment(e, 2) == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(kernel_moment(e, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));

  CHECK_THROWS_AS(kernel_moment(g, 9), std::invalid_argument);
  CHECK_THROWS_AS(kernel_moment(g, -1), std::invalid_argument);
}

TEST_CASE("every constructed kernel integrates to 1 and is symmetric") {
  const KernelSpec g = KernelSpec::gaussian();
  std::vector<KernelSpec> kernels = {g, KernelSpec::epanechnikov(),
                                     convolve(KernelSpec::epanechnikov(),
                                              KernelSpec::epanechnikov()),
                                     higher_order_kernel(KernelSpec::epanechnikov(), 1)};
  for (int r = 1; r <= 4; ++r) kernels.push_back(higher_order_kernel(g, r));

  for (const auto& k : kernels) {
    CHECK(kernel_moment(k, 0) == doctest::Approx(1.0).epsilon(1e-6));
    const double radius = k.support_radius();
    for (int i = 0; i <= 40; ++i) {
      const double u = radius * i / 40.0;
      CHECK(std::abs(k(u) - k(-u)) <= 1e-10);
    }
  }
}

TEST_CASE("order property: each twicing step doubles the kernel order") {
  // K^(r) = 1 - (1 - K)^(2^r) in the convolution algebra, so moments vanish
  // for p < 2^(r+1) and the first nonzero moment sits at p = 2^(r+1).
  const KernelSpec g = KernelSpec::gaussian();
  for (int r = 1; r <= 3; ++r) {
    const KernelSpec kr = higher_order_kernel(g, r);
    const int lead = 1 << (r + 1);
    for (int p = 1; p <= std::min(lead - 1, 8); ++p)
      CHECK(std::abs(kernel_moment(kr, p)) <= 1e-6);
    if (lead <= 8) CHECK(std::abs(kernel_moment(kr, lead)) > 1e-3);
  }
  // K^(2) by hand: 105 * (4 - 6*2^4 + 4*3^4 - 4^4) = -2520 at p = 8
  CHECK(kernel_moment(higher_order_kernel(g, 2), 8) == doctest::Approx(-2520.0).epsilon(1e-9));
}

TEST_CASE("grid twicing agrees with the symbolic mixture") {
  // validates the tabulated-convolution path used to build high orders
  const KernelSpec g = KernelSpec::gaussian();
  const KernelSpec tab = tabulate(g, 1.0 / 512);
  const KernelSpec k1_grid = twicing_step(tab);
  const KernelSpec k2_grid = twicing_step(k1_grid);
  const KernelSpec k1_sym = higher_order_kernel(g, 1);
  const KernelSpec k2_sym = higher_order_kernel(g, 2);
  for (int i = -50; i <= 50; ++i) {
    const double x = 0.1 * i;
    CHECK(std::abs(k1_grid(x) - k1_sym(x)) <= 1e-5);
    CHECK(std::abs(k2_grid(x) - k2_sym(x)) <= 1e-5);
  }
}

TEST_CASE("tabulate resamples faithfully") {
  const KernelSpec g = KernelSpec::gaussian();
  const KernelSpec t = tabulate(g, 1.0 / 2048);
  for (int i = -80; i <= 80; ++i) {
    const double u = 0.1 * i;
    CHECK(std::abs(t(u) - g(u)) <= 1e-6);
  }
  CHECK(t(100.0) == 0.0);
}

TEST_CASE("kernel parsing") {
  CHECK(KernelSpec::parse("gaussian").base() == BaseKernel::Gaussian);
  CHECK(KernelSpec::parse("Epanechnikov").base() == BaseKernel::Epanechnikov);
  CHECK_THROWS_AS(KernelSpec::parse("uniform"), std::invalid_argument);
}
