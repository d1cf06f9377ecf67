#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "deepkrein/netcore.hpp"
#include "deepkrein/pushforward.hpp"

namespace deepkrein {

enum class KernelVariant { Krein, Associated };

KernelVariant kernel_variant_from_name(const std::string& name);
std::string kernel_variant_name(KernelVariant variant);

/// K_NN or K-bar_NN of an architecture. The associated variant evaluates the
/// same recursion with every sigma_q replaced by sigma-bar_q.
class KernelDefinition {
 public:
  KernelDefinition(Architecture arch, KernelVariant variant);

  const Architecture& architecture() const { return arch_; }
  KernelVariant variant() const { return variant_; }
  // The activations the recursion actually applies.
  const Architecture& effective() const { return effective_; }

 private:
  Architecture arch_;
  KernelVariant variant_;
  Architecture effective_;
};

/// sigma_{d-1}(H_{d-2} sigma_{d-2}(... H_0 sigma_0(<x, x'>))). Throws
/// DomainError carrying the layer whose argument is out of domain. If
/// `arguments` is given, |argument| of layer q is max-accumulated into it.
double kernel(const KernelDefinition& def, std::span<const double> x, std::span<const double> xp,
              std::vector<double>* arguments = nullptr);
double kernel(const KernelDefinition& def, const Eigen::VectorXd& x, const Eigen::VectorXd& xp);

double krein_kernel(const Architecture& arch, const Eigen::VectorXd& x, const Eigen::VectorXd& xp);
double associated_kernel(const Architecture& arch, const Eigen::VectorXd& x, const Eigen::VectorXd& xp);

struct KernelParts {
  double k_plus = 0.0;
  double k_minus = 0.0;
};

/// sum_k (g_k)_+ phi_k(x) phi_k(x') and sum_k (-g_k)_+ phi_k(x) phi_k(x').
KernelParts kernel_parts(const FlatSpace& space, std::span<const double> x, std::span<const double> xp);
KernelParts kernel_parts(const Architecture& arch, const Eigen::VectorXd& x, const Eigen::VectorXd& xp,
                         int truncation);

/// <<phi_NN(x), phi_NN(x')>>_g for the given metric (signed or absolute).
double feature_kernel(const FlatSpace& space, std::span<const double> x, std::span<const double> xp,
                      bool absolute_metric);

/// G_ij = kernel(x_i, x_j) for the rows of x. The upper triangle is computed
/// in parallel and mirrored, so G is exactly symmetric. The first failing
/// cell in row-major order is reported, independent of the schedule.
Eigen::MatrixXd gram(const KernelDefinition& def, const Eigen::MatrixXd& x);
Eigen::MatrixXd gram_serial(const KernelDefinition& def, const Eigen::MatrixXd& x);

}  // namespace deepkrein
