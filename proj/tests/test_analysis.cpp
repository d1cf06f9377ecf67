#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "deepkrein/analysis.hpp"
#include "deepkrein/errors.hpp"
#include "deepkrein/pushforward.hpp"
#include "helpers.hpp"

using namespace deepkrein;
using testing::mat;
using testing::vec;

namespace {

Eigen::MatrixXd unit_circle(int n) {
  Eigen::MatrixXd x(n, 2);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    x(i, 0) = std::cos(t);
    x(i, 1) = std::sin(t);
  }
  return x;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("reg_layer on linear nets") {
    std::mt19937_64 rng(31);
    for (int depth = 1; depth <= 3; ++depth) {
      const Architecture arch(3, testing::random_widths(rng, depth, 4),
                              std::vector<ActivationSpec>(static_cast<std::size_t>(depth), ActivationSpec::linear()));
      const WeightSet w = testing::uniform_weights(arch, rng, 1.0);
      double prod = 1.0;
      for (int q = 0; q < depth; ++q) prod *= arch.width(q);
      for (int q = 0; q < depth; ++q) {
        const double expect = 3.0 * prod / (arch.width(q) * arch.width(q - 1)) * w.layer(q).squaredNorm();
        CHECK(reg_layer(arch, w, q, KernelVariant::Krein) == doctest::Approx(expect).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("zero layers with odd activations vanish") {
    const Architecture arch(2, {2, 1}, {ActivationSpec::tanh(), ActivationSpec::erf()});
    WeightSet w({mat(2, 2, {0.3, 0.1, -0.2, 0.4}), mat(1, 2, {0.0, 0.0})});
    CHECK(reg_layer(arch, w, 1, KernelVariant::Krein) == 0.0);
    CHECK(reg_flat(arch, w, KernelVariant::Krein) == 0.0);
  }

  TEST_CASE("reg_flat hand example") {
    const Architecture arch(1, {1, 1}, {ActivationSpec::linear(), ActivationSpec::linear()});
    const WeightSet w({mat(1, 1, {0.7}), mat(1, 1, {-1.5})});
    CHECK(reg_flat(arch, w, KernelVariant::Krein) == doctest::Approx(0.49 * 2.25).epsilon(1e-15));
  }

  TEST_CASE("reg_flat equals the flat self-product for polynomial nets") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 8; ++trial) {
      const int depth = 1 + trial % 3;
      std::vector<ActivationSpec> acts;
      for (int q = 0; q < depth; ++q) acts.push_back(ActivationSpec::polynomial({0.0, 1.0, q % 2 ? -0.4 : 0.3}));
      const Architecture arch(2, testing::random_widths(rng, depth, 2), acts);
      const int t = 1 << depth;
      const auto space = FlatSpace::build(arch, t);
      const WeightSet w = testing::uniform_weights(arch, rng, 0.7);
      const auto v = space.flat_weight(arch, w);
      double signed_sum = 0.0;
      double abs_sum = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k) {
        signed_sum += space.metric()[k] * v[k] * v[k];
        abs_sum += std::abs(space.metric()[k]) * v[k] * v[k];
      }
      CHECK(std::abs(reg_flat(arch, w, KernelVariant::Krein) - signed_sum) <= 1e-9 * (1.0 + std::abs(signed_sum)));
      CHECK(std::abs(reg_flat(arch, w, KernelVariant::Associated) - abs_sum) <= 1e-9 * (1.0 + abs_sum));
    }
  }

  TEST_CASE("radii") {
    const Architecture arch(1, {1, 1}, {ActivationSpec::linear(), ActivationSpec::linear()});
    CHECK(rnn_radius(arch, WeightSet::zeros(arch)) == 0.0);
    CHECK(rnn_radius(arch, WeightSet({mat(1, 1, {1.0}), mat(1, 1, {std::sqrt(3.0)})})) == doctest::Approx(2.0));
    CHECK(svm_radius(1.0, 1.0, 5) == 1.0);
    CHECK(svm_radius(2.0, 1.0, 3) == 8.0);
    CHECK(svm_radius(1.0, 2.0 / std::sqrt(std::numbers::pi), 2) == doctest::Approx(4.0 / std::numbers::pi));
    CHECK(svm_radius(1.5, 1.0, 2) >= svm_radius(1.2, 1.0, 2));
    CHECK(svm_radius(1.0, 1.3, 2) >= svm_radius(1.0, 1.1, 2));
  }

  TEST_CASE("objective regularizer equals lambda R_NN") {
    const Architecture arch(2, {3, 1}, {ActivationSpec::tanh(), ActivationSpec::linear()});
    std::mt19937_64 rng(2);
    const WeightSet w = testing::uniform_weights(arch, rng, 1.0);
    Dataset d;
    d.x = Eigen::MatrixXd::Zero(2, 2);
    d.y = Eigen::VectorXd::Zero(2);
    CHECK(objective(arch, w, d, Loss::Squared, 0.4) == doctest::Approx(0.4 * rnn_radius(arch, w)).epsilon(1e-14));
  }

  TEST_CASE("Rademacher bound arithmetic") {
    CHECK(rademacher_bound_svm(0.0, 3.0, 10) == 0.0);
    CHECK(rademacher_bound_svm(4.0, 1.0, 100) == doctest::Approx(0.2).epsilon(1e-15));
    const Architecture lin(2, {4, 1}, {ActivationSpec::linear(), ActivationSpec::linear()});
    const BoundReport b = rademacher_bound_nn(lin, 1.0, unit_circle(100), 100);
    REQUIRE(b.bound_linear.has_value());
    CHECK(b.width == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(b.lipschitz == 1.0);
    CHECK(*b.bound_linear == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(b.bound_kernel == doctest::Approx(*b.bound_linear).epsilon(1e-14));
    CHECK(b.r_svm == 1.0);
    CHECK(rademacher_bound_nn(lin, 0.0, unit_circle(10), 10).bound_kernel == 0.0);
  }

  TEST_CASE("chi recursion") {
    const Architecture one(1, {1}, {ActivationSpec::tanh()});
    CHECK(chi_nn(one, 0.7) == doctest::Approx(std::tanh(0.7)).epsilon(1e-15));
    const Architecture lin(2, {4, 1}, {ActivationSpec::linear(), ActivationSpec::linear()});
    CHECK(chi_nn(lin, 0.3) == doctest::Approx(4.0 * 0.3));
  }

  TEST_CASE("tight bound variants") {
    const Architecture th(2, {3, 1}, {ActivationSpec::tanh(), ActivationSpec::tanh()});
    const Eigen::MatrixXd sample = unit_circle(25);
    const TightBound t = tight_bound(th, 0.8, sample, 25);
    REQUIRE(t.precondition_met);
    REQUIRE(t.bounded.has_value());
    CHECK(*t.bounded_layer == 1);
    CHECK(*t.bounded == doctest::Approx(1.0 / 5.0));
    CHECK(t.value <= *t.bounded);

    const Architecture ex(2, {2, 1}, {ActivationSpec::exp(), ActivationSpec::linear()});
    const TightBound e = tight_bound(ex, 0.8, sample, 25);
    CHECK_FALSE(e.precondition_met);
    CHECK(e.reason.rfind("precondition not met", 0) == 0);

    const Architecture lin(2, {4, 1}, {ActivationSpec::linear(), ActivationSpec::linear()});
    const TightBound l = tight_bound(lin, 1.0, unit_circle(100), 100);
    REQUIRE(l.unbounded.has_value());
    // (d sqrt(H) L)^d = (2 sqrt(2))^2 = 8.
    CHECK(*l.unbounded == doctest::Approx(0.1 * 8.0));
    CHECK(l.general == doctest::Approx(0.1 * 4.0));
  }

  TEST_CASE("empirical Rademacher") {
    const Architecture th(2, {3, 1}, {ActivationSpec::tanh(), ActivationSpec::linear()});
    const Eigen::MatrixXd sample = unit_circle(25);
    CHECK(empirical_rademacher(th, 0.0, sample, 10, 10, 1).estimate == 0.0);
    const auto a = empirical_rademacher(th, 1.0, sample, 30, 40, 5);
    const auto b = empirical_rademacher_serial(th, 1.0, sample, 30, 40, 5);
    CHECK(a.estimate == b.estimate);
    CHECK(a.per_trial == b.per_trial);
    CHECK(a.accepted_draws == 40);
    const auto c = empirical_rademacher(th, 1.0, sample, 30, 40, 5);
    CHECK(c.estimate == a.estimate);
    const BoundReport r = rademacher_bound_nn(th, 1.0, sample, 25);
    CHECK(a.estimate <= r.bound_kernel);
  }

  TEST_CASE("empirical estimate scales like one over root N") {
    const Architecture lin(2, {2, 1}, {ActivationSpec::linear(), ActivationSpec::linear()});
    std::mt19937_64 rng(4);
    std::vector<double> est;
    for (int n : {25, 100, 400}) {
      const Eigen::MatrixXd x = testing::uniform_points(rng, n, 2, 1.0);
      est.push_back(empirical_rademacher(lin, 1.0, x, 60, 60, 9).estimate * std::sqrt(static_cast<double>(n)));
    }
    for (double e : est) {
      CHECK(e <= 2.0 * est[0]);
      CHECK(e >= 0.5 * est[0]);
    }
  }

  TEST_CASE("sparsity profile basics") {
    auto set = IndexSet::all_monomials(2, 2);
    const SeriesVector g(set, {1.0, -2.0, 0.5, 1.0, 0.25, -1.0});
    const SeriesVector zero(set, std::vector<double>(6, 0.0));
    SparsityInputs in{2.0, 1.0, 2, 1.0, 2, {0.1, 0.01}};
    const auto p0 = sparsity_profile(g, zero, in);
    CHECK(p0.norm == 0.0);
    CHECK(p0.counts == std::vector<std::size_t>{0, 0});
    const SeriesVector v(set, {0.5, 0.1, -0.2, 0.05, 1.0, 0.0});
    const auto p = sparsity_profile(g, v, in);
    CHECK(p.norm == doctest::Approx(0.5 + 0.2 + 0.1 + 0.05 + 0.25));
    CHECK(p.counts[0] == 3);
    CHECK(p.counts[1] == 5);
    CHECK(p.bound == doctest::Approx(std::pow(2.0, 2) * 2.0 / 4.0));
    CHECK(p.caps[0] == std::floor(p.bound * 10.0));
    CHECK(p.v_inf == 1.0);
    CHECK(p.v_inf_bound == 1.0);
  }

  TEST_CASE("fractional powers of tiny products") {
    CHECK(abs_product_power(1e-200, 1e-200, 0.5) == doctest::Approx(1e-200).epsilon(1e-12));
    CHECK(abs_product_power(-3.0, 2.0, 1.0) == 6.0);
    CHECK(abs_product_power(0.0, 5.0, 0.5) == 0.0);
  }

  TEST_CASE("derived seeds are distinct and stable") {
    CHECK(derive_seed(1, 11) == derive_seed(1, 11));
    CHECK(derive_seed(1, 11) != derive_seed(1, 12));
    CHECK(derive_seed(1, 11) != derive_seed(2, 11));
  }

  TEST_CASE("chain Lipschitz constants cover the arguments actually seen") {
    // The associated chains start at sigma-bar_0(D), so tan needs D < pi/2.
    const Architecture arch(1, {2, 1}, {ActivationSpec::tanh(), ActivationSpec::erf()});
    const WeightSet w({mat(2, 1, {0.3, -0.2}), mat(1, 2, {0.5, 0.6})});
    const auto lbar = chain_lipschitz_bar(arch, w);
    REQUIRE(lbar.size() == 2);
    for (double l : lbar) CHECK(l >= 1.0);
    const Architecture wide(2, {2, 1}, {ActivationSpec::tanh(), ActivationSpec::erf()});
    CHECK_THROWS_AS(chain_lipschitz_bar(wide, WeightSet::zeros(wide)), DomainError);
  }
}
