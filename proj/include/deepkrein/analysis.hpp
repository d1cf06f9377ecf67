#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "deepkrein/kreinkernel.hpp"
#include "deepkrein/multi_index.hpp"
#include "deepkrein/netcore.hpp"

namespace deepkrein {

/// p_q (Krein) or p-bar_q (associated):
///   s_0 = sigma_0(D), s_k = sigma_k(H_{k-1} s_{k-1}) for k < q,
///   t = sum_i sigma_q(||W_[q]i,:||^2 s_{q-1})   (sigma_0(||W_[0]i,:||^2) for q = 0),
///   then sigma_{q+1}(t) and sigma_k(H_{k-1} .) for k > q + 1.
/// If `arguments` is given, |argument| of sigma_q is max-accumulated per layer.
double reg_layer(const Architecture& arch, const WeightSet& w, int q, KernelVariant variant,
                 std::vector<double>* arguments = nullptr);

/// p_NN (Krein) or p-bar_NN (associated):
///   r_0[i] = sigma_0(||W_[0]i,:||^2), r_q[i] = sigma_q(sum_j W_[q]ij^2 r_{q-1}[j]),
/// and p_NN = r_{d-1}[0]. Equals sum_k g_k v_k^2 (resp. |g_k|) on the flat space.
double reg_flat(const Architecture& arch, const WeightSet& w, KernelVariant variant,
                std::vector<double>* arguments = nullptr);

/// (1/d) sum_q ||W_[q]||_F^2.
double rnn_radius(const Architecture& arch, const WeightSet& w);

/// (L R_NN)^d.
double svm_radius(double r_nn, double lipschitz, int depth);

/// (1/sqrt(N)) sqrt(R_SVM * kbar_integral).
double rademacher_bound_svm(double r_svm, double kbar_integral, int n);

/// sigma_{d-1}(d sqrt(H_{d-2}) sigma_{d-2}(... d sqrt(H_0) sigma_0(xi))).
double chi_nn(const Architecture& arch, double xi);

struct TightBound {
  bool precondition_met = false;
  std::string reason;  // why the precondition failed
  double general = 0.0;
  std::optional<double> unbounded;
  std::optional<double> bounded;
  std::optional<int> bounded_layer;  // the q minimizing the bounded variant
  double value = 0.0;                // least applicable variant
};

/// Requires every sigma_q concave on R_+, odd, with sigma_q(0) = 0.
TightBound tight_bound(const Architecture& arch, double r_nn, const Eigen::MatrixXd& sample, int n);

struct BoundReport {
  double r_nn = 0.0;
  double r_svm = 0.0;
  double lipschitz = 0.0;  // L, GM over layers
  double width = 0.0;      // H, GM over layers
  int depth = 0;
  int n = 0;
  double kbar_mean = 0.0;     // mean K-bar(x, x) over the sample
  double mean_sq_norm = 0.0;  // mean ||x||^2 over the sample
  double bound_kernel = 0.0;
  std::optional<double> bound_linear;  // all-linear nets only
  TightBound concave;
  std::optional<double> empirical_estimate;
  std::vector<double> layer_lipschitz;
};

/// L is taken per layer from lipschitz_on(sigma_q, [0, lipschitz_interval]);
/// infinity selects the global constants.
BoundReport rademacher_bound_nn(const Architecture& arch, double r_nn, const Eigen::MatrixXd& sample, int n,
                                double lipschitz_interval = kInfinity);

struct EmpiricalRademacher {
  double estimate = 0.0;
  int accepted_draws = 0;
  int attempted_draws = 0;
  std::vector<double> per_trial;
};

/// Mean over sign trials of max over a shared set of random hypotheses with
/// rnn_radius <= R_NN of |(1/N) sum_i eps_i f(x_i)|. A lower estimate of the
/// true supremum. Trials run in parallel with per-trial derived seeds.
EmpiricalRademacher empirical_rademacher(const Architecture& arch, double r_nn, const Eigen::MatrixXd& sample,
                                         int trials, int hypothesis_draws, std::uint64_t seed);
EmpiricalRademacher empirical_rademacher_serial(const Architecture& arch, double r_nn,
                                                const Eigen::MatrixXd& sample, int trials,
                                                int hypothesis_draws, std::uint64_t seed);

/// L-bar_q = lipschitz_on(sigma-bar_q, [0, m_q]) where m_q is the largest
/// argument sigma-bar_q sees in the associated regularization chains.
std::vector<double> chain_lipschitz_bar(const Architecture& arch, const WeightSet& w);

struct SparsityInputs {
  double width = 1.0;          // H
  double lipschitz_bar = 1.0;  // L-bar
  int input_dim = 1;           // D
  double r_nn = 0.0;
  int depth = 1;
  std::vector<double> epsilons;
};

struct SparsityProfile {
  double norm = 0.0;   // sum_i |g_i v_i|^{2/d}
  double bound = 0.0;  // (H L-bar)^d D R_NN / H^2
  double v_inf = 0.0;
  double v_inf_bound = 0.0;  // R_NN^d
  double gv_inf = 0.0;
  std::vector<double> epsilons;
  std::vector<std::size_t> counts;  // #{i : |g_i v_i| > eps}
  std::vector<double> caps;         // floor(bound * eps^{-2/d})
};

/// |a b|^p, through logarithms when |a b| < 1e-300 so underflow of the
/// product does not zero the power.
double abs_product_power(double a, double b, double p);

SparsityProfile sparsity_profile(const SeriesVector& g, const SeriesVector& v, const SparsityInputs& inputs);

/// Deterministic child seed for a named derivation path.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace deepkrein
