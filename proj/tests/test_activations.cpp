#include <cmath>
#include <numbers>

#include <doctest.h>

#include "deepkrein/activations.hpp"
#include "deepkrein/errors.hpp"

using namespace deepkrein;

namespace {

std::vector<ActivationSpec> all_kinds() {
  return {ActivationSpec::linear(),         ActivationSpec::erf(),
          ActivationSpec::tanh(),           ActivationSpec::logistic(),
          ActivationSpec::exp(),            ActivationSpec::polynomial({0.0, 1.0, 2.0}),
          ActivationSpec::relu_surrogate(), ActivationSpec::relu_surrogate(0.5),
          ActivationSpec::erf().associated(), ActivationSpec::tanh().associated(),
          ActivationSpec::logistic().associated(), ActivationSpec::relu_surrogate(0.5).associated()};
}

}  // namespace

TEST_SUITE("activations") {
  TEST_CASE("taylor coefficients") {
    CHECK(taylor_coefficient(ActivationSpec::erf(), 1) == doctest::Approx(2.0 / std::sqrt(std::numbers::pi)).epsilon(1e-14));
    CHECK(taylor_coefficient(ActivationSpec::erf(), 3) ==
          doctest::Approx(-2.0 / (3.0 * std::sqrt(std::numbers::pi))).epsilon(1e-14));
    CHECK(taylor_coefficient(ActivationSpec::erf(), 2) == 0.0);
    CHECK(taylor_coefficient(ActivationSpec::tanh(), 3) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
    CHECK(taylor_coefficient(ActivationSpec::tanh(), 5) == doctest::Approx(2.0 / 15.0).epsilon(1e-14));
    for (int i = 0; i < 10; ++i) CHECK(taylor_coefficient(ActivationSpec::linear(), i) == (i == 1 ? 1.0 : 0.0));
    CHECK(taylor_coefficient(ActivationSpec::logistic(), 0) == 0.5);
    CHECK(taylor_coefficient(ActivationSpec::logistic(), 1) == doctest::Approx(0.25));
    CHECK(taylor_coefficient(ActivationSpec::logistic(), 3) == doctest::Approx(-1.0 / 48.0));
  }

  TEST_CASE("erf partial sums match the library erf") {
    const auto erf = ActivationSpec::erf();
    CHECK(std::abs(erf.series_eval(0.5, 26) - std::erf(0.5)) <= 1e-12);
  }

  TEST_CASE("tanh partial sums match direct evaluation on [-1, 1]") {
    const auto tanh = ActivationSpec::tanh().with_max_terms(60);
    // The series converges slowly near |xi| = 1 (radius pi/2), so more terms.
    for (double xi = -1.0; xi <= 1.0; xi += 0.125) {
      CHECK(std::abs(tanh.series_eval(xi, 200) - std::tanh(xi)) <= 1e-10);
    }
  }

  TEST_CASE("eval examples") {
    CHECK(ActivationSpec::linear().eval(3.7) == 3.7);
    CHECK(ActivationSpec::tanh().eval(0.0) == 0.0);
    CHECK(std::abs(ActivationSpec::relu_surrogate(0.01).eval(5.0) - 5.0) <= 1e-6);
    CHECK(std::abs(ActivationSpec::relu_surrogate(0.01).eval(-5.0)) <= 1e-6);
    CHECK(ActivationSpec::tanh().associated().eval(0.5) == doctest::Approx(std::tan(0.5)).epsilon(1e-14));
  }

  TEST_CASE("series-only kinds reject arguments outside the radius") {
    const auto tan = ActivationSpec::tanh().associated();
    CHECK_THROWS_AS(tan.eval(1.6), DomainError);
    CHECK_THROWS_AS(tan.eval(-1.6), DomainError);
    CHECK_NOTHROW(tan.eval(1.5));
    CHECK_THROWS_AS(ActivationSpec::logistic().associated().eval(3.2), DomainError);
  }

  TEST_CASE("associated activations") {
    CHECK(ActivationSpec::linear().associated() == ActivationSpec::linear());
    CHECK(ActivationSpec::exp().associated() == ActivationSpec::exp());
    CHECK(ActivationSpec::tanh().associated().kind() == ActivationKind::Tan);
    CHECK(ActivationSpec::erf().associated().kind() == ActivationKind::Erfi);
    CHECK(ActivationSpec::logistic().associated().kind() == ActivationKind::LogisticAssociated);
    const double xi = 0.7;
    CHECK(ActivationSpec::logistic().associated().eval(xi) ==
          doctest::Approx(0.5 * (1.0 + std::tan(xi / 2.0))).epsilon(1e-13));
  }

  TEST_CASE("lipschitz constants") {
    CHECK(ActivationSpec::tanh().lipschitz_on(kInfinity) == 1.0);
    CHECK(ActivationSpec::erf().lipschitz_on(kInfinity) == doctest::Approx(2.0 / std::sqrt(std::numbers::pi)));
    CHECK(ActivationSpec::logistic().lipschitz_on(kInfinity) == 0.25);
    CHECK(ActivationSpec::linear().lipschitz_on(kInfinity) == 1.0);
    const double tan1 = ActivationSpec::tanh().associated().lipschitz_on(1.0);
    const double exact = 1.0 / (std::cos(1.0) * std::cos(1.0));
    CHECK(tan1 >= exact);
    CHECK(tan1 <= 1.02 * exact);
    CHECK_THROWS_AS(ActivationSpec::exp().lipschitz_on(kInfinity), DomainError);
    CHECK_THROWS_AS(ActivationSpec::tanh().associated().lipschitz_on(2.0), DomainError);
    // A finite interval bound never undercuts the sampled slope.
    const auto erfi = ActivationSpec::erf().associated();
    CHECK(erfi.lipschitz_on(1.0) >= erfi.derivative(1.0));
  }

  TEST_CASE("convergence radii") {
    CHECK(std::isinf(ActivationSpec::linear().convergence_radius()));
    CHECK(std::isinf(ActivationSpec::erf().convergence_radius()));
    CHECK(std::isinf(ActivationSpec::polynomial({0.0, 1.0, 2.0}).convergence_radius()));
    CHECK(ActivationSpec::tanh().associated().convergence_radius() == doctest::Approx(std::numbers::pi / 2));
    CHECK(ActivationSpec::tanh().convergence_radius() == doctest::Approx(std::numbers::pi / 2));
    CHECK(ActivationSpec::logistic().associated().convergence_radius() == doctest::Approx(std::numbers::pi));
  }

  TEST_CASE("closed form and 30-term series agree within half the radius") {
    // Entire kinds are checked on [-1, 1]; the surrogate's series has radius
    // infinity but coefficients of size c^{-i}, so it is checked on [-c, c].
    for (const auto& s : all_kinds()) {
      double half = std::min(1.0, s.convergence_radius() / 2.0);
      if (s.kind() == ActivationKind::ReluSurrogate || s.kind() == ActivationKind::ReluSurrogateAssociated) {
        half = std::min(half, s.sharpness());
      }
      for (int k = -20; k <= 20; ++k) {
        const double xi = half * k / 20.0;
        INFO(s.name() << " at " << xi);
        CHECK(std::abs(s.eval(xi) - s.series_eval(xi, 30)) <= 1e-8);
      }
    }
  }

  TEST_CASE("absolute coefficients are idempotent") {
    for (const auto& s : all_kinds()) {
      const auto a = s.associated();
      const auto aa = a.associated();
      for (int i = 0; i <= 30; ++i) {
        INFO(s.name() << " coefficient " << i);
        CHECK(aa.coefficient(i) == a.coefficient(i));
        CHECK(a.coefficient(i) == std::abs(s.coefficient(i)));
      }
    }
  }

  TEST_CASE("a_0 >= 0 and a_1 > 0 for every constructible spec") {
    for (const auto& s : all_kinds()) {
      CHECK(s.coefficient(0) >= 0.0);
      CHECK(s.coefficient(1) > 0.0);
    }
    CHECK_THROWS_AS(ActivationSpec::polynomial({0.0, -1.0}), ValidationError);
    CHECK_THROWS_AS(ActivationSpec::polynomial({-1.0, 1.0}), ValidationError);
  }

  TEST_CASE("names round-trip") {
    for (const auto& s : all_kinds()) {
      const auto back = ActivationSpec::from_name(s.name(), s.polynomial_coefficients(),
                                                  s.sharpness() > 0 ? s.sharpness() : ActivationSpec::kDefaultReluSharpness);
      CHECK(back == s);
    }
    CHECK_THROWS_AS(ActivationSpec::from_name("softsign"), ValidationError);
  }

  TEST_CASE("shape predicates") {
    CHECK(ActivationSpec::tanh().concave_on_positive());
    CHECK(ActivationSpec::erf().concave_on_positive());
    CHECK(ActivationSpec::linear().concave_on_positive());
    CHECK_FALSE(ActivationSpec::exp().concave_on_positive());
    CHECK(ActivationSpec::tanh().is_odd());
    CHECK_FALSE(ActivationSpec::logistic().is_odd());
    CHECK(ActivationSpec::tanh().bounded_by_one_on_positive());
    CHECK_FALSE(ActivationSpec::linear().bounded_by_one_on_positive());
  }
}
