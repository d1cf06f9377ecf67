#include "deepkrein/ksvm.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "deepkrein/errors.hpp"

namespace deepkrein {

namespace {

void check_problem(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, double lambda) {
  if (gram.rows() == 0) throw ValidationError("KSVM needs at least one training point");
  if (gram.rows() != gram.cols()) throw ValidationError("Gram matrix must be square");
  if (y.size() != gram.rows()) throw ValidationError("targets and Gram matrix disagree in size");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be positive");
  if (!gram.allFinite() || !y.allFinite()) throw ValidationError("Gram matrix and targets must be finite");
  const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("Gram matrix must be symmetric");
  }
}

}  // namespace

SquaredSolution train_squared(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, double lambda) {
  check_problem(gram, y, lambda);
  const auto n = gram.rows();
  const double shift = lambda * static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw DomainError("eigendecomposition of the Gram matrix failed");
  const Eigen::VectorXd& mu = eig.eigenvalues();
  const Eigen::MatrixXd& q = eig.eigenvectors();
  const double gnorm = mu.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = mu[i] + shift;
    if (std::abs(s) < 1e-12 * gnorm) {
      throw DomainError("G + lambda N I is near-singular (eigenvalue " + std::to_string(mu[i]) +
                        ", lambda N = " + std::to_string(shift) + ")");
    }
    inv[i] = 1.0 / s;
  }
  auto solve = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
    return q * (inv.asDiagonal() * (q.transpose() * rhs));
  };
  Eigen::MatrixXd system = gram;
  system.diagonal().array() += shift;
  SquaredSolution out;
  out.alpha = solve(y);
  Eigen::VectorXd r = y - system * out.alpha;
  double rnorm = r.norm();
  for (int it = 0; it < 5 && rnorm > 0.0; ++it) {
    const Eigen::VectorXd candidate = out.alpha + solve(r);
    const Eigen::VectorXd rc = y - system * candidate;
    if (!(rc.norm() < rnorm)) break;
    out.alpha = candidate;
    r = rc;
    rnorm = rc.norm();
  }
  if (!out.alpha.allFinite()) throw DomainError("KSVM solution is not finite");
  out.residual = rnorm;
  out.min_eigenvalue = mu[0];
  out.max_eigenvalue = mu[n - 1];
  out.negative_eigenvalues = static_cast<int>((mu.array() < 0.0).count());
  return out;
}

StabilizedObjective stabilized_objective(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& gram,
                                         const Eigen::VectorXd& y, double lambda, Loss loss) {
  if (alpha.size() != gram.rows() || gram.rows() != gram.cols() || y.size() != gram.rows()) {
    throw ValidationError("stabilized objective shapes are inconsistent");
  }
  if (gram.rows() == 0) throw ValidationError("stabilized objective needs at least one point");
  const Eigen::VectorXd f = gram * alpha;
  StabilizedObjective out;
  for (Eigen::Index i = 0; i < f.size(); ++i) out.data_term += loss_value(loss, y[i], f[i]);
  out.data_term /= static_cast<double>(f.size());
  out.regularizer = lambda * alpha.dot(f);
  out.total = out.data_term + out.regularizer;
  return out;
}

Eigen::VectorXd stabilized_gradient(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& gram,
                                    const Eigen::VectorXd& y, double lambda, Loss loss) {
  if (alpha.size() != gram.rows() || gram.rows() != gram.cols() || y.size() != gram.rows()) {
    throw ValidationError("stabilized gradient shapes are inconsistent");
  }
  const Eigen::VectorXd f = gram * alpha;
  const double inv_n = 1.0 / static_cast<double>(f.size());
  Eigen::VectorXd outer(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) outer[i] = inv_n * loss_derivative(loss, y[i], f[i]) + 2.0 * lambda * alpha[i];
  // G symmetric: grad = G (l'/N + 2 lambda alpha).
  return gram * outer;
}

GdSolution train_gd(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, double lambda, Loss loss,
                    const GdOptions& options) {
  check_problem(gram, y, lambda);
  if (options.steps < 1) throw ValidationError("train_gd needs steps >= 1");
  if (!(options.step_size > 0.0)) throw ValidationError("train_gd needs a positive step size");
  if (!(options.init_scale >= 0.0)) throw ValidationError("train_gd init_scale must be nonnegative");
  GdSolution out;
  out.alpha = Eigen::VectorXd::Zero(gram.rows());
  if (options.init_scale > 0.0) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, options.init_scale);
    for (Eigen::Index i = 0; i < out.alpha.size(); ++i) out.alpha[i] = normal(rng);
  }
  Eigen::VectorXd grad;
  for (int step = 0; step < options.steps; ++step) {
    grad = stabilized_gradient(out.alpha, gram, y, lambda, loss);
    out.alpha -= options.step_size * grad;
    if (!out.alpha.allFinite()) {
      throw DomainError("KSVM gradient descent diverged at step " + std::to_string(step + 1));
    }
  }
  out.objective = stabilized_objective(out.alpha, gram, y, lambda, loss).total;
  if (!std::isfinite(out.objective)) throw DomainError("KSVM gradient descent objective is not finite");
  out.gradient_norm = stabilized_gradient(out.alpha, gram, y, lambda, loss).norm();
  return out;
}

TrainedKSVM::TrainedKSVM(Eigen::VectorXd alpha, Eigen::MatrixXd points, double lambda, KernelDefinition kernel)
    : alpha_(std::move(alpha)), points_(std::move(points)), lambda_(lambda), kernel_(std::move(kernel)) {
  if (alpha_.size() != points_.rows()) throw ValidationError("alpha length must match the training points");
  if (!alpha_.allFinite()) throw ValidationError("alpha must be finite");
  if (points_.cols() != kernel_.architecture().input_dim()) {
    throw ValidationError("training points do not match the kernel input dimension");
  }
}

double TrainedKSVM::predict(const Eigen::VectorXd& x) const {
  if (x.size() != points_.cols()) throw ValidationError("prediction input has the wrong dimension");
  double s = 0.0;
  for (Eigen::Index i = 0; i < points_.rows(); ++i) {
    const Eigen::VectorXd xi = points_.row(i).transpose();
    s += alpha_[i] * kernel(kernel_, x, xi);
  }
  return s;
}

}  // namespace deepkrein
