#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "deepkrein/errors.hpp"
#include "deepkrein/io.hpp"
#include "deepkrein/ksvm.hpp"
#include "helpers.hpp"

using namespace deepkrein;
using testing::mat;
using testing::vec;

namespace {

Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
  return 0.5 * (a + a.transpose());
}

}  // namespace

TEST_SUITE("ksvm") {
  TEST_CASE("closed-form solutions") {
    const auto s1 = train_squared(mat(1, 1, {2.0}), vec({3.0}), 0.5);
    CHECK(s1.alpha[0] == doctest::Approx(3.0 / 2.5));
    const auto s0 = train_squared(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3), 0.1);
    CHECK(s0.alpha.isZero(0.0));
    const auto s2 = train_squared(Eigen::MatrixXd::Identity(2, 2), vec({3.0, -6.0}), 1.0);
    CHECK(s2.alpha[0] == doctest::Approx(1.0));
    CHECK(s2.alpha[1] == doctest::Approx(-2.0));
  }

  TEST_CASE("input validation") {
    CHECK_THROWS_AS(train_squared(mat(2, 2, {1.0, 0.5, 0.4, 1.0}), vec({1.0, 1.0}), 0.1), ValidationError);
    CHECK_THROWS_AS(train_squared(Eigen::MatrixXd::Identity(2, 2), vec({1.0}), 0.1), ValidationError);
    CHECK_THROWS_AS(train_squared(Eigen::MatrixXd::Identity(2, 2), vec({1.0, 1.0}), 0.0), ValidationError);
    // G + lambda N I singular.
    CHECK_THROWS_AS(train_squared(mat(2, 2, {-0.2, 0.0, 0.0, 1.0}), vec({1.0, 1.0}), 0.1), DomainError);
  }

  TEST_CASE("stationarity and residual on indefinite problems") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 2 + trial % 10;
      const Eigen::MatrixXd g = random_symmetric(rng, n);
      const Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return std::normal_distribution<double>()(rng); });
      SquaredSolution s;
      try {
        s = train_squared(g, y, 0.05);
      } catch (const DomainError&) {
        continue;
      }
      CHECK(s.residual <= 1e-10 * (1.0 + y.norm()));
      const Eigen::VectorXd grad = stabilized_gradient(s.alpha, g, y, 0.05, Loss::Squared);
      const double scale = 1.0 + y.norm();
      CHECK(grad.cwiseAbs().maxCoeff() <= 1e-8 * scale * (1.0 + g.norm()));
    }
  }

  TEST_CASE("linearity in y") {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd g = random_symmetric(rng, 6);
    const Eigen::VectorXd y = vec({1.0, -2.0, 0.5, 0.0, 3.0, -1.0});
    const auto a = train_squared(g, y, 0.2);
    const auto b = train_squared(g, -2.5 * y, 0.2);
    CHECK((b.alpha + 2.5 * a.alpha).norm() <= 1e-12 * (1.0 + a.alpha.norm()));
  }

  TEST_CASE("gradient descent agrees with the eigen solver on a conditioned problem") {
    std::mt19937_64 rng(17);
    const Eigen::MatrixXd b = testing::uniform_points(rng, 5, 5, 1.0);
    const Eigen::MatrixXd g = b * b.transpose() / 5.0 + 0.2 * Eigen::MatrixXd::Identity(5, 5);
    const Eigen::VectorXd y = vec({1.0, -1.0, 0.5, 0.2, -0.7});
    const auto exact = train_squared(g, y, 0.1);
    const auto gd = train_gd(g, y, 0.1, Loss::Squared, {3, 20000, 0.2, 0.0});
    CHECK((gd.alpha - exact.alpha).cwiseAbs().maxCoeff() <= 1e-4);
  }

  TEST_CASE("first gradient step from zero") {
    const Eigen::MatrixXd g = mat(2, 2, {1.0, 0.3, 0.3, -0.5});
    const Eigen::VectorXd y = vec({1.0, 2.0});
    const auto one = train_gd(g, y, 0.1, Loss::Squared, {0, 1, 0.01, 0.0});
    const Eigen::VectorXd expect = (2.0 * 0.01 / 2.0) * g * y;
    CHECK((one.alpha - expect).norm() <= 1e-15);
    const auto zero = train_gd(g, Eigen::VectorXd::Zero(2), 0.1, Loss::Squared, {0, 50, 0.01, 0.0});
    CHECK(zero.alpha.isZero(0.0));
  }

  TEST_CASE("stabilized objective") {
    const Eigen::MatrixXd g = mat(2, 2, {1.0, 0.0, 0.0, -1.0});
    const auto o = stabilized_objective(vec({0.0, 1.0}), g, vec({0.0, 0.0}), 1.0, Loss::Squared);
    CHECK(o.regularizer == -1.0);
    const auto z = stabilized_objective(vec({0.0, 0.0}), g, vec({1.0, -3.0}), 1.0, Loss::Squared);
    CHECK(z.total == 5.0);
    const auto l = stabilized_objective(vec({0.0, 0.0}), g, vec({1.0, -1.0}), 1.0, Loss::Logistic);
    CHECK(l.data_term == doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("stabilized gradient matches central differences") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + trial % 5;
      const Eigen::MatrixXd g = random_symmetric(rng, n);
      const Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index i) { return i % 2 ? 1.0 : -1.0; });
      const Eigen::VectorXd a = testing::uniform_points(rng, n, 1, 0.5).col(0);
      const Loss loss = trial % 2 ? Loss::Logistic : Loss::Squared;
      const Eigen::VectorXd grad = stabilized_gradient(a, g, y, 0.3, loss);
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd up = a;
        Eigen::VectorXd dn = a;
        up[i] += 1e-5;
        dn[i] -= 1e-5;
        const double fd = (stabilized_objective(up, g, y, 0.3, loss).total - stabilized_objective(dn, g, y, 0.3, loss).total) / 2e-5;
        CHECK(std::abs(grad[i] - fd) / std::max({1.0, std::abs(grad[i]), std::abs(fd)}) <= 1e-5);
      }
    }
  }

  TEST_CASE("prediction through the representer form") {
    const Architecture arch(2, {3, 1}, {ActivationSpec::erf(), ActivationSpec::linear()});
    const KernelDefinition def(arch, KernelVariant::Krein);
    Eigen::MatrixXd pts(4, 2);
    pts << 0.1, 0.9, -0.5, 0.3, 0.8, -0.2, -0.4, -0.6;
    const Eigen::VectorXd x = vec({0.2, 0.2});
    const Eigen::VectorXd p0 = pts.row(0).transpose();
    CHECK(TrainedKSVM(vec({1.0, 0.0, 0.0, 0.0}), pts, 0.1, def).predict(x) == kernel(def, x, p0));
    CHECK(TrainedKSVM(Eigen::VectorXd::Zero(4), pts, 0.1, def).predict(x) == 0.0);

    const Eigen::MatrixXd g = gram(def, pts);
    const Eigen::VectorXd y = vec({0.3, -1.0, 0.7, 0.1});
    const auto sol = train_squared(g, y, 1e-9);
    const TrainedKSVM model(sol.alpha, pts, 1e-9, def);
    for (int i = 0; i < 4; ++i) CHECK(model.predict(pts.row(i).transpose()) == doctest::Approx(y[i]).epsilon(1e-5));
    // Same Gram entries bit for bit.
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
      e[i] = 1.0;
      const TrainedKSVM unit(e, pts, 0.1, def);
      for (int j = 0; j < 4; ++j) CHECK(unit.predict(pts.row(j).transpose()) == g(j, i));
    }
  }

  TEST_CASE("model files round-trip") {
    const Architecture arch(2, {2, 1}, {ActivationSpec::polynomial({0.0, 1.0, 0.25}), ActivationSpec::relu_surrogate(0.3)});
    Eigen::MatrixXd pts(2, 2);
    pts << 0.1, 1.0 / 3.0, -0.5, 0.3;
    const TrainedKSVM model(vec({0.123456789012345678, -2.0 / 7.0}), pts, 0.01, KernelDefinition(arch, KernelVariant::Associated));
    std::stringstream ss;
    write_model(ss, model);
    const TrainedKSVM back = read_model(ss);
    CHECK(back.alpha() == model.alpha());
    CHECK(back.points() == model.points());
    CHECK(back.lambda() == model.lambda());
    CHECK(back.kernel_definition().variant() == KernelVariant::Associated);
    CHECK(back.kernel_definition().architecture().activations() == arch.activations());
    std::stringstream bad("lambda 0.1\nkernel krein\narchitecture 1 1 1 linear\npoints 1 1\n0.5\nalpha 2\n1\n2\n");
    CHECK_THROWS_AS(read_model(bad), ValidationError);
  }
}
