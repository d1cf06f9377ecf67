#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "deepkrein/netcore.hpp"

namespace testing {

using deepkrein::ActivationSpec;
using deepkrein::Architecture;
using deepkrein::WeightSet;

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Eigen::MatrixXd mat(int rows, int cols, std::initializer_list<double> row_major) {
  Eigen::MatrixXd m(rows, cols);
  auto it = row_major.begin();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = *it++;
  }
  return m;
}

inline std::vector<int> random_widths(std::mt19937_64& rng, int depth, int max_width) {
  std::uniform_int_distribution<int> h(1, max_width);
  std::vector<int> widths;
  for (int q = 0; q + 1 < depth; ++q) widths.push_back(h(rng));
  widths.push_back(1);
  return widths;
}

inline WeightSet uniform_weights(const Architecture& arch, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Eigen::MatrixXd> layers;
  for (int q = 0; q < arch.depth(); ++q) {
    Eigen::MatrixXd m(arch.width(q), arch.width(q - 1));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    layers.push_back(std::move(m));
  }
  return WeightSet(std::move(layers));
}

inline Eigen::MatrixXd uniform_points(std::mt19937_64& rng, int n, int dim, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

inline std::vector<double> row(const Eigen::MatrixXd& x, Eigen::Index i) {
  std::vector<double> out(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) out[static_cast<std::size_t>(j)] = x(i, j);
  return out;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace testing
