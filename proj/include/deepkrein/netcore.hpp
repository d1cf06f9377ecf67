#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "deepkrein/activations.hpp"

namespace deepkrein {

/// A fully connected scalar-output network shape: input dimension D, layer
/// widths H_0..H_{d-1} with H_{d-1} = 1, and one activation per layer.
class Architecture {
 public:
  Architecture(int input_dim, std::vector<int> widths, std::vector<ActivationSpec> activations);

  int input_dim() const { return input_dim_; }
  int depth() const { return static_cast<int>(widths_.size()); }
  // H_q, with H_{-1} = D.
  int width(int q) const { return q < 0 ? input_dim_ : widths_.at(static_cast<std::size_t>(q)); }
  const std::vector<int>& widths() const { return widths_; }
  const ActivationSpec& activation(int q) const { return activations_.at(static_cast<std::size_t>(q)); }
  const std::vector<ActivationSpec>& activations() const { return activations_; }

  /// Same shape with every activation replaced by its associated activation.
  Architecture associated() const;

  bool all_linear() const;

 private:
  int input_dim_;
  std::vector<int> widths_;
  std::vector<ActivationSpec> activations_;
};

/// W_[q] of shape H_q x H_{q-1}, one per layer.
class WeightSet {
 public:
  WeightSet() = default;
  explicit WeightSet(std::vector<Eigen::MatrixXd> layers) : layers_(std::move(layers)) {}

  static WeightSet zeros(const Architecture& arch);

  int depth() const { return static_cast<int>(layers_.size()); }
  const Eigen::MatrixXd& layer(int q) const { return layers_.at(static_cast<std::size_t>(q)); }
  Eigen::MatrixXd& layer(int q) { return layers_.at(static_cast<std::size_t>(q)); }
  const std::vector<Eigen::MatrixXd>& layers() const { return layers_; }

  // Throws ValidationError on shape mismatch or non-finite entries.
  void validate(const Architecture& arch) const;

  double squared_norm() const;
  std::size_t parameter_count() const;

  WeightSet& operator+=(const WeightSet& other);
  WeightSet& operator*=(double s);

 private:
  std::vector<Eigen::MatrixXd> layers_;
};

/// Training data: one sample per row of x.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;

  int size() const { return static_cast<int>(x.rows()); }
  int dim() const { return static_cast<int>(x.cols()); }
};

enum class Loss { Squared, Logistic };

Loss loss_from_name(const std::string& name);
std::string loss_name(Loss loss);

// Squared: (y - f)^2. Logistic: log(1 + exp(-y f)) with y in {-1, +1}.
double loss_value(Loss loss, double y, double f);
double loss_derivative(Loss loss, double y, double f);

double forward(const Architecture& arch, const WeightSet& w, std::span<const double> x);
double forward(const Architecture& arch, const WeightSet& w, const Eigen::VectorXd& x);

/// Scale c in front of sum_q ||W_[q]||_F^2. Defaults to 1/d.
double regularization_scale(const Architecture& arch, std::optional<double> override_scale);

/// (1/N) sum_i loss(y_i, f(x_i)) + lambda c sum_q ||W_[q]||_F^2.
double objective(const Architecture& arch, const WeightSet& w, const Dataset& data, Loss loss,
                 double lambda, std::optional<double> reg_scale = std::nullopt);

/// Exact gradient of objective() by backpropagation.
WeightSet gradient(const Architecture& arch, const WeightSet& w, const Dataset& data, Loss loss,
                   double lambda, std::optional<double> reg_scale = std::nullopt);

struct TrainOptions {
  std::uint64_t seed = 0;
  int steps = 1000;
  double step_size = 0.01;
  std::optional<double> reg_scale;
};

struct TrainResult {
  WeightSet weights;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  std::vector<double> history;  // objective before each step, then the final value
};

/// Gaussian init with std 0.5 / sqrt(H_{q-1}).
WeightSet initial_weights(const Architecture& arch, std::uint64_t seed);

/// Plain fixed-step gradient descent from initial_weights(seed).
TrainResult train(const Architecture& arch, const Dataset& data, Loss loss, double lambda,
                  const TrainOptions& options);

struct GeometricMeans {
  double width = 0.0;          // H
  double lipschitz = 0.0;      // L
  double lipschitz_bar = 0.0;  // L-bar
  std::vector<double> layer_lipschitz;
  std::vector<double> layer_lipschitz_bar;
};

double geometric_mean(std::span<const double> values);

/// H = GM(H_q) and L, L-bar from lipschitz_on over [0, m_q] per layer
/// (m_q may be infinite).
GeometricMeans geometric_means(const Architecture& arch, std::span<const double> interval_per_layer);

}  // namespace deepkrein
