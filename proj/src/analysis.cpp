#include "deepkrein/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "deepkrein/errors.hpp"

namespace deepkrein {

namespace {

class Chain {
 public:
  Chain(const Architecture& arch, KernelVariant variant, std::vector<double>* arguments)
      : arch_(variant == KernelVariant::Krein ? arch : arch.associated()), arguments_(arguments) {
    if (arguments_ && static_cast<int>(arguments_->size()) != arch_.depth()) {
      arguments_->assign(static_cast<std::size_t>(arch_.depth()), 0.0);
    }
  }

  double apply(int q, double xi) const {
    if (arguments_) {
      auto& slot = (*arguments_)[static_cast<std::size_t>(q)];
      slot = std::max(slot, std::abs(xi));
    }
    const ActivationSpec& sigma = arch_.activation(q);
    double out;
    try {
      out = sigma.eval(xi);
    } catch (const DomainError& e) {
      throw DomainError(e.what(), q);
    }
    if (!std::isfinite(out)) throw DomainError(sigma.name() + " overflows in the regularization chain", q);
    return out;
  }

  const Architecture& arch() const { return arch_; }

 private:
  Architecture arch_;
  std::vector<double>* arguments_;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void check_sample(const Architecture& arch, const Eigen::MatrixXd& sample) {
  if (sample.rows() == 0) throw ValidationError("bounds need a nonempty sample");
  if (sample.cols() != arch.input_dim()) {
    throw ValidationError("sample points must have dimension " + std::to_string(arch.input_dim()));
  }
}

}  // namespace

double reg_layer(const Architecture& arch, const WeightSet& w, int q, KernelVariant variant,
                 std::vector<double>* arguments) {
  w.validate(arch);
  if (q < 0 || q >= arch.depth()) throw ValidationError("layer index out of range");
  const Chain chain(arch, variant, arguments);
  double s = 0.0;
  if (q > 0) {
    s = chain.apply(0, static_cast<double>(arch.input_dim()));
    for (int k = 1; k < q; ++k) s = chain.apply(k, arch.width(k - 1) * s);
  }
  const Eigen::MatrixXd& wq = w.layer(q);
  double t = 0.0;
  for (Eigen::Index i = 0; i < wq.rows(); ++i) {
    const double row = wq.row(i).squaredNorm();
    t += chain.apply(q, q == 0 ? row : row * s);
  }
  if (q + 1 < arch.depth()) {
    t = chain.apply(q + 1, t);
    for (int k = q + 2; k < arch.depth(); ++k) t = chain.apply(k, arch.width(k - 1) * t);
  }
  return t;
}

double reg_flat(const Architecture& arch, const WeightSet& w, KernelVariant variant, std::vector<double>* arguments) {
  w.validate(arch);
  const Chain chain(arch, variant, arguments);
  Eigen::VectorXd r = Eigen::VectorXd::Ones(arch.input_dim());
  for (int q = 0; q < arch.depth(); ++q) {
    const Eigen::VectorXd raw = w.layer(q).array().square().matrix() * r;
    r.resize(raw.size());
    for (Eigen::Index i = 0; i < raw.size(); ++i) r[i] = chain.apply(q, raw[i]);
  }
  return r[0];
}

double rnn_radius(const Architecture& arch, const WeightSet& w) {
  w.validate(arch);
  return w.squared_norm() / arch.depth();
}

double svm_radius(double r_nn, double lipschitz, int depth) {
  if (!(r_nn >= 0.0)) throw ValidationError("R_NN must be nonnegative");
  if (!(lipschitz > 0.0)) throw ValidationError("L must be positive");
  if (depth < 1) throw ValidationError("depth must be positive");
  return std::pow(lipschitz * r_nn, depth);
}

double rademacher_bound_svm(double r_svm, double kbar_integral, int n) {
  if (!(r_svm >= 0.0) || !(kbar_integral >= 0.0)) {
    throw ValidationError("R_SVM and the K-bar integral must be nonnegative");
  }
  if (n < 1) throw ValidationError("N must be positive");
  return std::sqrt(r_svm * kbar_integral / n);
}

double chi_nn(const Architecture& arch, double xi) {
  double s = arch.activation(0).eval(xi);
  const double d = arch.depth();
  for (int q = 1; q < arch.depth(); ++q) s = arch.activation(q).eval(d * std::sqrt(arch.width(q - 1)) * s);
  return s;
}

TightBound tight_bound(const Architecture& arch, double r_nn, const Eigen::MatrixXd& sample, int n) {
  check_sample(arch, sample);
  if (n < 1) throw ValidationError("N must be positive");
  if (!(r_nn >= 0.0)) throw ValidationError("R_NN must be nonnegative");
  TightBound out;
  for (int q = 0; q < arch.depth(); ++q) {
    const auto& s = arch.activation(q);
    if (!s.concave_on_positive() || !s.zero_at_origin() || !s.is_odd()) {
      out.reason = "precondition not met: layer " + std::to_string(q) + " activation " + s.name() +
                   " is not odd, concave on R+ and zero at 0";
      return out;
    }
  }
  out.precondition_met = true;
  const int d = arch.depth();
  const double lead = std::max(1.0, std::pow(r_nn, d)) / std::sqrt(static_cast<double>(n));
  std::vector<double> chi2;
  std::vector<double> sq;
  for (Eigen::Index i = 0; i < sample.rows(); ++i) {
    const double norm = sample.row(i).norm();
    const double c = chi_nn(arch, norm);
    chi2.push_back(c * c);
    sq.push_back(norm * norm);
  }
  out.general = lead * std::sqrt(mean_of(chi2));
  out.value = out.general;

  std::vector<double> widths;
  std::vector<double> lips;
  bool any_bounded = false;
  for (int q = 0; q < d; ++q) {
    widths.push_back(arch.width(q));
    lips.push_back(arch.activation(q).global_lipschitz());
    any_bounded = any_bounded || arch.activation(q).bounded_by_one_on_positive();
  }
  if (!any_bounded) {
    const double h = geometric_mean(widths);
    const double l = geometric_mean(lips);
    out.unbounded = lead * std::pow(d * std::sqrt(h) * l, d) * std::sqrt(mean_of(sq));
    out.value = std::min(out.value, *out.unbounded);
  } else {
    for (int q = 0; q < d; ++q) {
      if (!arch.activation(q).bounded_by_one_on_positive()) continue;
      const std::span<const double> hw(widths.data() + q + 1, static_cast<std::size_t>(d - q - 1));
      const std::span<const double> lw(lips.data() + q + 1, static_cast<std::size_t>(d - q - 1));
      const double factor = std::pow(d * std::sqrt(geometric_mean(hw)) * geometric_mean(lw), d - q - 1);
      const double b = lead * factor;
      if (!out.bounded || b < *out.bounded) {
        out.bounded = b;
        out.bounded_layer = q;
      }
    }
    out.value = std::min(out.value, *out.bounded);
  }
  return out;
}

BoundReport rademacher_bound_nn(const Architecture& arch, double r_nn, const Eigen::MatrixXd& sample, int n,
                                double lipschitz_interval) {
  check_sample(arch, sample);
  if (n < 1) throw ValidationError("N must be positive");
  if (!(r_nn >= 0.0)) throw ValidationError("R_NN must be nonnegative");
  BoundReport out;
  out.r_nn = r_nn;
  out.depth = arch.depth();
  out.n = n;
  std::vector<double> widths;
  for (int q = 0; q < arch.depth(); ++q) {
    widths.push_back(arch.width(q));
    try {
      out.layer_lipschitz.push_back(arch.activation(q).lipschitz_on(lipschitz_interval));
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + "; set a finite Lipschitz interval", q);
    }
  }
  out.width = geometric_mean(widths);
  out.lipschitz = geometric_mean(out.layer_lipschitz);
  out.r_svm = svm_radius(r_nn, out.lipschitz, arch.depth());

  const KernelDefinition bar(arch, KernelVariant::Associated);
  std::vector<double> kbar;
  std::vector<double> sq;
  for (Eigen::Index i = 0; i < sample.rows(); ++i) {
    const Eigen::VectorXd x = sample.row(i).transpose();
    try {
      kbar.push_back(kernel(bar, x, x));
    } catch (const DomainError& e) {
      throw DomainError::preformatted("sample point " + std::to_string(i) + ": " + e.what(), e.layer());
    }
    sq.push_back(x.squaredNorm());
  }
  out.kbar_mean = mean_of(kbar);
  out.mean_sq_norm = mean_of(sq);
  out.bound_kernel = rademacher_bound_svm(out.r_svm, out.kbar_mean, n);
  if (arch.all_linear()) {
    out.bound_linear = std::sqrt(std::pow(out.width * out.lipschitz * r_nn, arch.depth()) * out.mean_sq_norm / n);
  }
  out.concave = tight_bound(arch, r_nn, sample, n);
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the pair.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

EmpiricalRademacher empirical_impl(const Architecture& arch, double r_nn, const Eigen::MatrixXd& sample,
                                   int trials, int hypothesis_draws, std::uint64_t seed, bool parallel) {
  check_sample(arch, sample);
  if (trials < 1 || hypothesis_draws < 1) throw ValidationError("trials and hypothesis draws must be >= 1");
  if (!(r_nn >= 0.0)) throw ValidationError("R_NN must be nonnegative");
  const auto n = sample.rows();
  const WeightSet shape = WeightSet::zeros(arch);
  const double params = static_cast<double>(shape.parameter_count());
  // E[rnn_radius] = R_NN.
  const double std_dev = std::sqrt(arch.depth() * r_nn / params);

  std::mt19937_64 rng(derive_seed(seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  const int max_attempts = 10 * hypothesis_draws;
  EmpiricalRademacher out;
  std::vector<Eigen::VectorXd> accepted;
  while (static_cast<int>(accepted.size()) < hypothesis_draws && out.attempted_draws < max_attempts) {
    const int batch = std::min(hypothesis_draws - static_cast<int>(accepted.size()),
                               max_attempts - out.attempted_draws);
    std::vector<WeightSet> cand;
    for (int b = 0; b < batch; ++b) {
      WeightSet w = shape;
      for (int q = 0; q < w.depth(); ++q) {
        auto& m = w.layer(q);
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
          for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = std_dev * normal(rng);
        }
      }
      cand.push_back(std::move(w));
    }
    out.attempted_draws += batch;
    std::vector<Eigen::VectorXd> values(static_cast<std::size_t>(batch));
    std::vector<char> ok(static_cast<std::size_t>(batch), 0);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int b = 0; b < batch; ++b) {
      const auto& w = cand[static_cast<std::size_t>(b)];
      if (w.squared_norm() / arch.depth() > r_nn) continue;
      Eigen::VectorXd f(n);
      bool good = true;
      for (Eigen::Index i = 0; i < n && good; ++i) {
        try {
          f[i] = forward(arch, w, Eigen::VectorXd(sample.row(i).transpose()));
          good = std::isfinite(f[i]);
        } catch (const DomainError&) {
          good = false;
        }
      }
      if (good) {
        values[static_cast<std::size_t>(b)] = std::move(f);
        ok[static_cast<std::size_t>(b)] = 1;
      }
    }
    for (int b = 0; b < batch; ++b) {
      if (ok[static_cast<std::size_t>(b)]) accepted.push_back(std::move(values[static_cast<std::size_t>(b)]));
    }
  }
  out.accepted_draws = static_cast<int>(accepted.size());
  out.per_trial.assign(static_cast<std::size_t>(trials), 0.0);
  if (accepted.empty()) return out;

  Eigen::MatrixXd f(static_cast<Eigen::Index>(accepted.size()), n);
  for (std::size_t h = 0; h < accepted.size(); ++h) f.row(static_cast<Eigen::Index>(h)) = accepted[h].transpose();

  const std::uint64_t trial_root = derive_seed(seed, 2);
#pragma omp parallel for schedule(static) if (parallel)
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 trng(derive_seed(trial_root, static_cast<std::uint64_t>(t)));
    Eigen::VectorXd eps(n);
    for (Eigen::Index i = 0; i < n; ++i) eps[i] = (trng() >> 63) ? 1.0 : -1.0;
    out.per_trial[static_cast<std::size_t>(t)] = (f * eps).cwiseAbs().maxCoeff() / static_cast<double>(n);
  }
  out.estimate = mean_of(out.per_trial);
  return out;
}

}  // namespace

EmpiricalRademacher empirical_rademacher(const Architecture& arch, double r_nn, const Eigen::MatrixXd& sample,
                                         int trials, int hypothesis_draws, std::uint64_t seed) {
  return empirical_impl(arch, r_nn, sample, trials, hypothesis_draws, seed, true);
}

EmpiricalRademacher empirical_rademacher_serial(const Architecture& arch, double r_nn,
                                                const Eigen::MatrixXd& sample, int trials,
                                                int hypothesis_draws, std::uint64_t seed) {
  return empirical_impl(arch, r_nn, sample, trials, hypothesis_draws, seed, false);
}

std::vector<double> chain_lipschitz_bar(const Architecture& arch, const WeightSet& w) {
  std::vector<double> args(static_cast<std::size_t>(arch.depth()), 0.0);
  for (int q = 0; q < arch.depth(); ++q) reg_layer(arch, w, q, KernelVariant::Associated, &args);
  reg_flat(arch, w, KernelVariant::Associated, &args);
  std::vector<double> out;
  for (int q = 0; q < arch.depth(); ++q) {
    const double m = std::max(args[static_cast<std::size_t>(q)], 1e-12);
    out.push_back(arch.activation(q).associated().lipschitz_on(m));
  }
  return out;
}

double abs_product_power(double a, double b, double p) {
  const double prod = std::abs(a * b);
  if (prod >= 1e-300) return std::pow(prod, p);
  if (a == 0.0 || b == 0.0) return 0.0;
  return std::exp(p * (std::log(std::abs(a)) + std::log(std::abs(b))));
}

SparsityProfile sparsity_profile(const SeriesVector& g, const SeriesVector& v, const SparsityInputs& inputs) {
  if (!g.same_indices(v)) throw ValidationError("sparsity_profile needs g and v over the same indices");
  if (inputs.depth < 1) throw ValidationError("depth must be positive");
  const double p = 2.0 / inputs.depth;
  SparsityProfile out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    out.norm += abs_product_power(g[k], v[k], p);
    out.v_inf = std::max(out.v_inf, std::abs(v[k]));
    out.gv_inf = std::max(out.gv_inf, std::abs(g[k] * v[k]));
  }
  const double h = inputs.width;
  out.bound = std::pow(h * inputs.lipschitz_bar, inputs.depth) * inputs.input_dim * inputs.r_nn / (h * h);
  out.v_inf_bound = std::pow(inputs.r_nn, inputs.depth);
  for (double eps : inputs.epsilons) {
    if (!(eps > 0.0)) throw ValidationError("sparsity epsilons must be positive");
    std::size_t count = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (std::abs(g[k] * v[k]) > eps) ++count;
    }
    out.epsilons.push_back(eps);
    out.counts.push_back(count);
    out.caps.push_back(std::floor(out.bound * std::pow(eps, -p)));
  }
  return out;
}

}  // namespace deepkrein
