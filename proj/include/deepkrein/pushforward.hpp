#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "deepkrein/activations.hpp"
#include "deepkrein/multi_index.hpp"
#include "deepkrein/netcore.hpp"

namespace deepkrein {

/// m! / prod_j e_j! for the exponents of a multi-index.
double multinomial(const MultiIndex& index);

/// phi_i(x) = prod_j x_j^{i_j} for every i with degree <= T.
SeriesVector monomial_features(std::span<const double> x, int truncation);

/// gamma_i = multinomial(sum(i); i) * a_{sum(i)} over all i with degree <= T.
SeriesVector gamma_weights(const ActivationSpec& spec, int n, int truncation);

struct PushforwardSides {
  double lhs = 0.0;  // sigma(<x, ..., x'>_{m, mu})
  double rhs = 0.0;  // <phi(x), ..., phi(x')>_{m, gamma . phi(mu)}, truncated
};

/// Both sides of the push-forward identity for m argument vectors.
PushforwardSides pushforward_check(const ActivationSpec& spec, std::span<const Eigen::VectorXd> xs,
                                   const Eigen::VectorXd& mu, int truncation);

/// The truncated flat feature space of an architecture.
///
/// Level q features are multisets over level-q variables: the D inputs for
/// q = 0, and pairs (neuron h < H_{q-1}, feature j of level q-1) above. The
/// block tag h stands for the Kronecker replication 1_{H_{q-1}} (x) .; phi
/// ignores it, the weight streams do not. A feature is kept iff its size m has
/// a_{[q]m} != 0, m <= T, and its total degree in x is <= T. Coordinates with
/// zero metric carry nothing and are never stored.
class FlatSpace {
 public:
  static constexpr std::size_t kDefaultBudget = 2'000'000;
  static constexpr int kDefaultTruncation = 8;

  /// Throws ValidationError if any level would exceed `budget` features.
  static FlatSpace build(const Architecture& arch, int truncation, std::size_t budget = kDefaultBudget);

  int truncation() const { return truncation_; }
  int depth() const { return static_cast<int>(levels_.size()); }
  int input_dim() const { return input_dim_; }
  std::size_t size() const { return levels_.back().metric.size(); }
  std::size_t level_size(int q) const { return levels_.at(static_cast<std::size_t>(q)).metric.size(); }
  const std::shared_ptr<const IndexSet>& index_set() const { return levels_.back().set; }
  // Total degree in x of each top-level feature.
  const std::vector<int>& composed_degree() const { return levels_.back().composed_degree; }

  /// g_NN, signed. The associated metric is its elementwise absolute value.
  const std::vector<double>& metric() const { return levels_.back().metric; }

  /// phi_NN(x).
  std::vector<double> feature_map(std::span<const double> x) const;

  /// v_[0], ..., v_[d-1] over the top-level features.
  std::vector<std::vector<double>> layer_weights(const Architecture& arch, const WeightSet& w) const;

  /// v_NN = v_[0] . ... . v_[d-1].
  std::vector<double> flat_weight(const Architecture& arch, const WeightSet& w) const;

  /// f(x_i) = sum_k c_k phi_k(x_i) for each row, with c = g . v_NN.
  Eigen::VectorXd evaluate_batch(const Eigen::MatrixXd& x, std::span<const double> total_weight) const;
  Eigen::VectorXd evaluate_batch_serial(const Eigen::MatrixXd& x, std::span<const double> total_weight) const;

  SeriesVector as_series(std::vector<double> values) const;

 private:
  struct Level {
    std::shared_ptr<const IndexSet> set;
    std::vector<int> composed_degree;
    std::vector<double> metric;
    // Flattened terms of every feature: [offset[k], offset[k+1]).
    std::vector<std::size_t> offset;
    std::vector<int> var;
    std::vector<int> exp;
    // For q >= 1, per variable.
    std::vector<int> block;
    std::vector<int> parent;
  };

  void feature_map_into(std::span<const double> x, std::vector<double>& prev, std::vector<double>& cur) const;

  int truncation_ = 0;
  int input_dim_ = 0;
  std::vector<int> widths_;
  std::vector<Level> levels_;
};

double flat_eval(const SeriesVector& v, const SeriesVector& phi, const SeriesVector& g);

/// The (d+1)-fold product sum_k g_k prod_q v_[q]k phi_k.
double semi_flat_eval(std::span<const SeriesVector> v, const SeriesVector& phi, const SeriesVector& g);

SeriesVector flatten_feature_map(const Architecture& arch, std::span<const double> x, int truncation);
SeriesVector flatten_metric(const Architecture& arch, int truncation);
SeriesVector pushforward_weights(const Architecture& arch, const WeightSet& w, int q, int truncation);
SeriesVector flat_weight(const Architecture& arch, const WeightSet& w, int truncation);

}  // namespace deepkrein
