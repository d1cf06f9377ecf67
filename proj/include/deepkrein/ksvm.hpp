#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "deepkrein/kreinkernel.hpp"
#include "deepkrein/netcore.hpp"

namespace deepkrein {

struct SquaredSolution {
  Eigen::VectorXd alpha;
  double residual = 0.0;  // ||(G + lambda N I) alpha - y||
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  int negative_eigenvalues = 0;
};

/// The stationary point solving (G + lambda N I) alpha = y, through a
/// symmetric eigendecomposition plus iterative refinement. Throws DomainError
/// if some |mu + lambda N| < 1e-12 ||G||.
SquaredSolution train_squared(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, double lambda);

struct StabilizedObjective {
  double data_term = 0.0;
  double regularizer = 0.0;  // lambda alpha^T G alpha, may be negative
  double total = 0.0;
};

/// (1/N) sum_i loss(y_i, (G alpha)_i) + lambda alpha^T G alpha.
StabilizedObjective stabilized_objective(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& gram,
                                         const Eigen::VectorXd& y, double lambda, Loss loss);
Eigen::VectorXd stabilized_gradient(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& gram,
                                    const Eigen::VectorXd& y, double lambda, Loss loss);

struct GdOptions {
  std::uint64_t seed = 0;
  int steps = 1000;
  double step_size = 0.01;
  // Std of a seeded Gaussian jitter on the zero start. 0 starts exactly at 0.
  double init_scale = 0.0;
};

struct GdSolution {
  Eigen::VectorXd alpha;
  double gradient_norm = 0.0;
  double objective = 0.0;
};

GdSolution train_gd(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, double lambda, Loss loss,
                    const GdOptions& options);

/// alpha over training points plus the kernel they were fitted with.
class TrainedKSVM {
 public:
  TrainedKSVM(Eigen::VectorXd alpha, Eigen::MatrixXd points, double lambda, KernelDefinition kernel);

  const Eigen::VectorXd& alpha() const { return alpha_; }
  const Eigen::MatrixXd& points() const { return points_; }
  double lambda() const { return lambda_; }
  const KernelDefinition& kernel_definition() const { return kernel_; }

  /// sum_i alpha_i K(x, x_i).
  double predict(const Eigen::VectorXd& x) const;

 private:
  Eigen::VectorXd alpha_;
  Eigen::MatrixXd points_;
  double lambda_;
  KernelDefinition kernel_;
};

}  // namespace deepkrein
