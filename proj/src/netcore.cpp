#include "deepkrein/netcore.hpp"

#include <cmath>
#include <random>

#include "deepkrein/errors.hpp"

namespace deepkrein {

Architecture::Architecture(int input_dim, std::vector<int> widths,
                           std::vector<ActivationSpec> activations)
    : input_dim_(input_dim), widths_(std::move(widths)), activations_(std::move(activations)) {
  if (input_dim_ < 1) throw ValidationError("input dimension must be positive");
  if (widths_.empty()) throw ValidationError("architecture needs at least one layer");
  if (widths_.size() != activations_.size()) {
    throw ValidationError("architecture needs one activation per layer");
  }
  for (int h : widths_) {
    if (h < 1) throw ValidationError("layer widths must be positive");
  }
  if (widths_.back() != 1) throw ValidationError("the last layer width must be 1 (scalar output)");
}

Architecture Architecture::associated() const {
  std::vector<ActivationSpec> bar;
  bar.reserve(activations_.size());
  for (const auto& a : activations_) bar.push_back(a.associated());
  return Architecture(input_dim_, widths_, std::move(bar));
}

bool Architecture::all_linear() const {
  for (const auto& a : activations_) {
    if (a.kind() != ActivationKind::Linear) return false;
  }
  return true;
}

WeightSet WeightSet::zeros(const Architecture& arch) {
  std::vector<Eigen::MatrixXd> layers;
  for (int q = 0; q < arch.depth(); ++q) {
    layers.push_back(Eigen::MatrixXd::Zero(arch.width(q), arch.width(q - 1)));
  }
  return WeightSet(std::move(layers));
}

void WeightSet::validate(const Architecture& arch) const {
  if (depth() != arch.depth()) {
    throw ValidationError("weight set has " + std::to_string(depth()) + " layers, architecture has " +
                          std::to_string(arch.depth()));
  }
  for (int q = 0; q < depth(); ++q) {
    const auto& m = layer(q);
    if (m.rows() != arch.width(q) || m.cols() != arch.width(q - 1)) {
      throw ValidationError("W_[" + std::to_string(q) + "] has shape " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected " + std::to_string(arch.width(q)) +
                            "x" + std::to_string(arch.width(q - 1)));
    }
    if (!m.allFinite()) throw ValidationError("W_[" + std::to_string(q) + "] has non-finite entries");
  }
}

double WeightSet::squared_norm() const {
  double s = 0.0;
  for (const auto& m : layers_) s += m.squaredNorm();
  return s;
}

std::size_t WeightSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& m : layers_) n += static_cast<std::size_t>(m.size());
  return n;
}

WeightSet& WeightSet::operator+=(const WeightSet& other) {
  for (std::size_t q = 0; q < layers_.size(); ++q) layers_[q] += other.layers_.at(q);
  return *this;
}

WeightSet& WeightSet::operator*=(double s) {
  for (auto& m : layers_) m *= s;
  return *this;
}

Loss loss_from_name(const std::string& name) {
  if (name == "squared") return Loss::Squared;
  if (name == "logistic") return Loss::Logistic;
  throw ValidationError("unknown loss '" + name + "' (expected squared or logistic)");
}

std::string loss_name(Loss loss) { return loss == Loss::Squared ? "squared" : "logistic"; }

double loss_value(Loss loss, double y, double f) {
  if (loss == Loss::Squared) return (y - f) * (y - f);
  const double m = -y * f;
  // softplus(m), stable for large |m|
  return m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
}

double loss_derivative(Loss loss, double y, double f) {
  if (loss == Loss::Squared) return 2.0 * (f - y);
  const double m = -y * f;
  const double s = m >= 0.0 ? 1.0 / (1.0 + std::exp(-m)) : std::exp(m) / (1.0 + std::exp(m));
  return -y * s;
}

namespace {

void check_input(const Architecture& arch, std::size_t dim) {
  if (static_cast<int>(dim) != arch.input_dim()) {
    throw ValidationError("input has dimension " + std::to_string(dim) + ", architecture expects " +
                          std::to_string(arch.input_dim()));
  }
}

void check_dataset(const Architecture& arch, const Dataset& data) {
  if (data.size() == 0) throw ValidationError("dataset is empty");
  if (data.y.size() != data.x.rows()) throw ValidationError("dataset has mismatched x and y lengths");
  check_input(arch, static_cast<std::size_t>(data.x.cols()));
}

struct Trace {
  std::vector<Eigen::VectorXd> pre;   // z_q
  std::vector<Eigen::VectorXd> post;  // a_{q-1}, index 0 is the input
};

// Shapes only; entries are checked where weights enter the system.
void check_shapes(const Architecture& arch, const WeightSet& w) {
  if (w.depth() != arch.depth()) throw ValidationError("weight set depth does not match the architecture");
  for (int q = 0; q < arch.depth(); ++q) {
    if (w.layer(q).rows() != arch.width(q) || w.layer(q).cols() != arch.width(q - 1)) {
      throw ValidationError("weight matrix " + std::to_string(q) + " has the wrong shape");
    }
  }
}

double forward_trace(const Architecture& arch, const WeightSet& w, const Eigen::VectorXd& x, Trace* trace) {
  check_shapes(arch, w);
  Eigen::VectorXd a = x;
  if (trace) {
    trace->pre.clear();
    trace->post.clear();
    trace->post.push_back(a);
  }
  for (int q = 0; q < arch.depth(); ++q) {
    Eigen::VectorXd z = w.layer(q) * a;
    const auto& sigma = arch.activation(q);
    a.resize(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) a[i] = sigma.eval(z[i]);
    if (trace) {
      trace->pre.push_back(std::move(z));
      trace->post.push_back(a);
    }
  }
  return a[0];
}

}  // namespace

double forward(const Architecture& arch, const WeightSet& w, const Eigen::VectorXd& x) {
  check_input(arch, static_cast<std::size_t>(x.size()));
  return forward_trace(arch, w, x, nullptr);
}

double forward(const Architecture& arch, const WeightSet& w, std::span<const double> x) {
  check_input(arch, x.size());
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return forward_trace(arch, w, v, nullptr);
}

double regularization_scale(const Architecture& arch, std::optional<double> override_scale) {
  if (override_scale) {
    if (!(*override_scale >= 0.0)) throw ValidationError("regularization scale must be nonnegative");
    return *override_scale;
  }
  return 1.0 / arch.depth();
}

double objective(const Architecture& arch, const WeightSet& w, const Dataset& data, Loss loss,
                 double lambda, std::optional<double> reg_scale) {
  check_dataset(arch, data);
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
  w.validate(arch);
  double risk = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd xi = data.x.row(i).transpose();
    risk += loss_value(loss, data.y[i], forward_trace(arch, w, xi, nullptr));
  }
  return risk / data.size() + lambda * regularization_scale(arch, reg_scale) * w.squared_norm();
}

WeightSet gradient(const Architecture& arch, const WeightSet& w, const Dataset& data, Loss loss,
                   double lambda, std::optional<double> reg_scale) {
  check_dataset(arch, data);
  w.validate(arch);
  WeightSet grad = WeightSet::zeros(arch);
  Trace trace;
  const double inv_n = 1.0 / data.size();
  for (int i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd xi = data.x.row(i).transpose();
    const double f = forward_trace(arch, w, xi, &trace);
    Eigen::VectorXd delta(1);
    delta[0] = loss_derivative(loss, data.y[i], f) * inv_n;
    for (int q = arch.depth() - 1; q >= 0; --q) {
      const auto& sigma = arch.activation(q);
      for (Eigen::Index k = 0; k < delta.size(); ++k) delta[k] *= sigma.derivative(trace.pre[q][k]);
      grad.layer(q) += delta * trace.post[q].transpose();
      if (q > 0) delta = w.layer(q).transpose() * delta;
    }
  }
  const double c = 2.0 * lambda * regularization_scale(arch, reg_scale);
  for (int q = 0; q < arch.depth(); ++q) grad.layer(q) += c * w.layer(q);
  return grad;
}

WeightSet initial_weights(const Architecture& arch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Eigen::MatrixXd> layers;
  for (int q = 0; q < arch.depth(); ++q) {
    std::normal_distribution<double> normal(0.0, 0.5 / std::sqrt(static_cast<double>(arch.width(q - 1))));
    Eigen::MatrixXd m(arch.width(q), arch.width(q - 1));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = normal(rng);
    }
    layers.push_back(std::move(m));
  }
  return WeightSet(std::move(layers));
}

TrainResult train(const Architecture& arch, const Dataset& data, Loss loss, double lambda,
                  const TrainOptions& options) {
  if (options.steps < 1) throw ValidationError("train needs steps >= 1");
  if (!(options.step_size > 0.0)) throw ValidationError("train needs a positive step size");
  TrainResult result;
  WeightSet w = initial_weights(arch, options.seed);
  WeightSet best = w;
  double current = objective(arch, w, data, loss, lambda, options.reg_scale);
  double best_value = current;
  result.initial_objective = current;
  result.history.reserve(static_cast<std::size_t>(options.steps) + 1);
  for (int step = 0; step < options.steps; ++step) {
    result.history.push_back(current);
    WeightSet g = gradient(arch, w, data, loss, lambda, options.reg_scale);
    g *= -options.step_size;
    w += g;
    current = objective(arch, w, data, loss, lambda, options.reg_scale);
    if (!std::isfinite(current)) {
      throw DomainError("network training diverged at step " + std::to_string(step + 1));
    }
    if (current < best_value) {
      best_value = current;
      best = w;
    }
  }
  result.history.push_back(current);
  if (current <= result.initial_objective) {
    result.weights = std::move(w);
    result.final_objective = current;
  } else {
    result.weights = std::move(best);
    result.final_objective = best_value;
  }
  return result;
}

double geometric_mean(std::span<const double> values) {
  if (values.empty()) return 1.0;
  double log_sum = 0.0;
  for (double v : values) {
    if (v == 0.0) return 0.0;
    if (std::isinf(v)) return kInfinity;
    log_sum += std::log(v);
  }
  return std::exp(log_sum / static_cast<double>(values.size()));
}

GeometricMeans geometric_means(const Architecture& arch, std::span<const double> interval_per_layer) {
  if (static_cast<int>(interval_per_layer.size()) != arch.depth()) {
    throw ValidationError("geometric_means needs one Lipschitz interval per layer");
  }
  GeometricMeans out;
  std::vector<double> widths;
  for (int q = 0; q < arch.depth(); ++q) {
    widths.push_back(arch.width(q));
    const double m = interval_per_layer[static_cast<std::size_t>(q)];
    out.layer_lipschitz.push_back(arch.activation(q).lipschitz_on(m));
    const auto bar = arch.activation(q).associated();
    if (std::isinf(m) && std::isinf(bar.global_lipschitz())) {
      out.layer_lipschitz_bar.push_back(kInfinity);
    } else {
      out.layer_lipschitz_bar.push_back(bar.lipschitz_on(m));
    }
  }
  out.width = geometric_mean(widths);
  out.lipschitz = geometric_mean(out.layer_lipschitz);
  out.lipschitz_bar = geometric_mean(out.layer_lipschitz_bar);
  return out;
}

}  // namespace deepkrein
