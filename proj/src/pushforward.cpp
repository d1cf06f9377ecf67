#include "deepkrein/pushforward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "deepkrein/errors.hpp"

namespace deepkrein {

namespace {

double ipow(double base, int e) {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

}  // namespace

double multinomial(const MultiIndex& index) {
  double r = 1.0;
  int partial = 0;
  for (const auto& [var, e] : index.terms()) {
    partial += e;
    r *= binomial(partial, e);
  }
  return r;
}

SeriesVector monomial_features(std::span<const double> x, int truncation) {
  if (x.empty()) throw ValidationError("monomial_features needs a nonempty vector");
  auto set = IndexSet::all_monomials(static_cast<int>(x.size()), truncation);
  std::vector<double> values(set->size());
  for (std::size_t k = 0; k < set->size(); ++k) {
    double v = 1.0;
    for (const auto& [var, e] : (*set)[k].terms()) v *= ipow(x[static_cast<std::size_t>(var)], e);
    values[k] = v;
  }
  return SeriesVector(std::move(set), std::move(values));
}

SeriesVector gamma_weights(const ActivationSpec& spec, int n, int truncation) {
  auto set = IndexSet::all_monomials(n, truncation);
  std::vector<double> values(set->size());
  for (std::size_t k = 0; k < set->size(); ++k) {
    values[k] = multinomial((*set)[k]) * spec.coefficient((*set)[k].degree());
  }
  return SeriesVector(std::move(set), std::move(values));
}

PushforwardSides pushforward_check(const ActivationSpec& spec, std::span<const Eigen::VectorXd> xs,
                                   const Eigen::VectorXd& mu, int truncation) {
  if (xs.empty()) throw ValidationError("pushforward_check needs at least one argument vector");
  const auto n = mu.size();
  for (const auto& x : xs) {
    if (x.size() != n) throw ValidationError("pushforward_check arguments must share the metric dimension");
  }
  double arg = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double t = mu[j];
    for (const auto& x : xs) t *= x[j];
    arg += t;
  }
  if (std::abs(arg) >= spec.convergence_radius()) {
    throw DomainError(spec.name() + ": push-forward argument " + std::to_string(arg) +
                      " outside convergence radius");
  }
  PushforwardSides out;
  out.lhs = spec.eval(arg);
  const int nn = static_cast<int>(n);
  const SeriesVector gamma = gamma_weights(spec, nn, truncation);
  const SeriesVector phi_mu = monomial_features(std::span<const double>(mu.data(), mu.size()), truncation);
  std::vector<SeriesVector> phis;
  for (const auto& x : xs) phis.push_back(monomial_features(std::span<const double>(x.data(), x.size()), truncation));
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    double t = gamma[k] * phi_mu[k];
    for (const auto& p : phis) t *= p[k];
    out.rhs += t;
  }
  return out;
}

namespace {

struct Enumerator {
  int n;
  int truncation;
  const std::vector<int>* cdeg;
  std::vector<int> suffix_min;
  std::vector<MultiIndex::Term> stack;
  std::vector<MultiIndex>* out;
  std::size_t budget;
  int level;

  void run(int start, int remaining, int slack) {
    if (remaining == 0) {
      if (out->size() >= budget) {
        throw ValidationError("flat feature space exceeds the budget of " + std::to_string(budget) +
                              " features at level " + std::to_string(level) + "; lower the truncation");
      }
      out->emplace_back(stack);
      return;
    }
    for (int j = start; j < n; ++j) {
      if (static_cast<long long>(suffix_min[static_cast<std::size_t>(j)]) * remaining > slack) break;
      const int c = (*cdeg)[static_cast<std::size_t>(j)];
      const int emax = c > 0 ? std::min(remaining, slack / c) : remaining;
      for (int e = emax; e >= 1; --e) {
        stack.emplace_back(j, e);
        run(j + 1, remaining - e, slack - c * e);
        stack.pop_back();
      }
    }
  }
};

}  // namespace

FlatSpace FlatSpace::build(const Architecture& arch, int truncation, std::size_t budget) {
  if (truncation < 1) throw ValidationError("truncation degree must be at least 1");
  FlatSpace space;
  space.truncation_ = truncation;
  space.input_dim_ = arch.input_dim();
  space.widths_ = arch.widths();

  for (int q = 0; q < arch.depth(); ++q) {
    const ActivationSpec& sigma = arch.activation(q);
    Level level;
    std::vector<int> var_cdeg;
    std::vector<VariableLabel> labels;
    if (q == 0) {
      var_cdeg.assign(static_cast<std::size_t>(arch.input_dim()), 1);
    } else {
      const Level& below = space.levels_.back();
      const int fprev = static_cast<int>(below.metric.size());
      const long long nvars = static_cast<long long>(arch.width(q - 1)) * fprev;
      if (nvars > std::numeric_limits<int>::max()) {
        throw ValidationError("flat feature space too large at level " + std::to_string(q));
      }
      for (int h = 0; h < arch.width(q - 1); ++h) {
        for (int j = 0; j < fprev; ++j) {
          var_cdeg.push_back(below.composed_degree[static_cast<std::size_t>(j)]);
          labels.push_back({h, j});
          level.block.push_back(h);
          level.parent.push_back(j);
        }
      }
    }
    const int n = static_cast<int>(var_cdeg.size());
    if (n == 0) throw ValidationError("flat feature space is empty below level " + std::to_string(q));

    Enumerator en;
    en.n = n;
    en.truncation = truncation;
    en.cdeg = &var_cdeg;
    en.suffix_min.assign(static_cast<std::size_t>(n) + 1, std::numeric_limits<int>::max());
    for (int j = n - 1; j >= 0; --j) {
      en.suffix_min[static_cast<std::size_t>(j)] =
          std::min(en.suffix_min[static_cast<std::size_t>(j) + 1], var_cdeg[static_cast<std::size_t>(j)]);
    }
    std::vector<MultiIndex> indices;
    en.out = &indices;
    en.budget = budget;
    en.level = q;
    const int top = sigma.degree() >= 0 ? std::min(truncation, sigma.degree()) : truncation;
    for (int m = 0; m <= top; ++m) {
      if (sigma.coefficient(m) == 0.0) continue;
      en.run(0, m, truncation);
    }

    const Level* below = q > 0 ? &space.levels_.back() : nullptr;
    level.offset.push_back(0);
    for (const auto& idx : indices) {
      double g = multinomial(idx) * sigma.coefficient(idx.degree());
      int cd = 0;
      for (const auto& [var, e] : idx.terms()) {
        cd += var_cdeg[static_cast<std::size_t>(var)] * e;
        if (below) g *= ipow(below->metric[static_cast<std::size_t>(level.parent[static_cast<std::size_t>(var)])], e);
        level.var.push_back(var);
        level.exp.push_back(e);
      }
      if (!std::isfinite(g)) {
        throw DomainError("metric coefficient overflows; lower the truncation", q);
      }
      level.metric.push_back(g);
      level.composed_degree.push_back(cd);
      level.offset.push_back(level.var.size());
    }
    level.set = std::make_shared<const IndexSet>(n, truncation, std::move(indices), std::move(labels));
    space.levels_.push_back(std::move(level));
  }
  return space;
}

void FlatSpace::feature_map_into(std::span<const double> x, std::vector<double>& prev,
                                 std::vector<double>& cur) const {
  if (static_cast<int>(x.size()) != input_dim_) {
    throw ValidationError("input has dimension " + std::to_string(x.size()) + ", flat space expects " +
                          std::to_string(input_dim_));
  }
  for (std::size_t q = 0; q < levels_.size(); ++q) {
    const Level& lv = levels_[q];
    const std::size_t f = lv.metric.size();
    cur.resize(f);
    for (std::size_t k = 0; k < f; ++k) {
      double v = 1.0;
      for (std::size_t t = lv.offset[k]; t < lv.offset[k + 1]; ++t) {
        const auto var = static_cast<std::size_t>(lv.var[t]);
        const double base = q == 0 ? x[var] : prev[static_cast<std::size_t>(lv.parent[var])];
        v *= ipow(base, lv.exp[t]);
      }
      cur[k] = v;
    }
    std::swap(prev, cur);
  }
  std::swap(prev, cur);
}

std::vector<double> FlatSpace::feature_map(std::span<const double> x) const {
  std::vector<double> prev;
  std::vector<double> cur;
  feature_map_into(x, prev, cur);
  return cur;
}

std::vector<std::vector<double>> FlatSpace::layer_weights(const Architecture& arch, const WeightSet& w) const {
  w.validate(arch);
  if (arch.depth() != depth() || arch.input_dim() != input_dim_ || arch.widths() != widths_) {
    throw ValidationError("weights do not match the architecture of this flat space");
  }
  // head(h, k): stream of the current level's own layer, per output neuron h.
  Eigen::MatrixXd head;
  std::vector<std::vector<double>> streams;  // layers r < q, per feature
  for (int q = 0; q < depth(); ++q) {
    const Level& lv = levels_[static_cast<std::size_t>(q)];
    const auto f = static_cast<Eigen::Index>(lv.metric.size());
    const Eigen::MatrixXd& wq = w.layer(q);
    Eigen::MatrixXd next_head(wq.rows(), f);
    std::vector<std::vector<double>> next_streams(static_cast<std::size_t>(q),
                                                  std::vector<double>(static_cast<std::size_t>(f)));
    for (Eigen::Index k = 0; k < f; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      for (Eigen::Index hp = 0; hp < wq.rows(); ++hp) {
        double v = 1.0;
        for (std::size_t t = lv.offset[ku]; t < lv.offset[ku + 1]; ++t) {
          const auto var = static_cast<std::size_t>(lv.var[t]);
          const int col = q == 0 ? lv.var[t] : lv.block[var];
          v *= ipow(wq(hp, col), lv.exp[t]);
        }
        next_head(hp, k) = v;
      }
      if (q == 0) continue;
      double below = 1.0;
      for (std::size_t t = lv.offset[ku]; t < lv.offset[ku + 1]; ++t) {
        const auto var = static_cast<std::size_t>(lv.var[t]);
        below *= ipow(head(lv.block[var], lv.parent[var]), lv.exp[t]);
      }
      next_streams[static_cast<std::size_t>(q - 1)][ku] = below;
      for (int r = 0; r < q - 1; ++r) {
        double s = 1.0;
        for (std::size_t t = lv.offset[ku]; t < lv.offset[ku + 1]; ++t) {
          const auto var = static_cast<std::size_t>(lv.var[t]);
          s *= ipow(streams[static_cast<std::size_t>(r)][static_cast<std::size_t>(lv.parent[var])], lv.exp[t]);
        }
        next_streams[static_cast<std::size_t>(r)][ku] = s;
      }
    }
    head = std::move(next_head);
    streams = std::move(next_streams);
  }
  std::vector<double> last(static_cast<std::size_t>(head.cols()));
  for (Eigen::Index k = 0; k < head.cols(); ++k) last[static_cast<std::size_t>(k)] = head(0, k);
  streams.push_back(std::move(last));
  return streams;
}

std::vector<double> FlatSpace::flat_weight(const Architecture& arch, const WeightSet& w) const {
  auto layers = layer_weights(arch, w);
  std::vector<double> v = std::move(layers[0]);
  for (std::size_t q = 1; q < layers.size(); ++q) {
    for (std::size_t k = 0; k < v.size(); ++k) v[k] *= layers[q][k];
  }
  return v;
}

Eigen::VectorXd FlatSpace::evaluate_batch_serial(const Eigen::MatrixXd& x, std::span<const double> total_weight) const {
  if (total_weight.size() != size()) throw ValidationError("total weight length does not match the flat space");
  Eigen::VectorXd out(x.rows());
  std::vector<double> prev;
  std::vector<double> cur;
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    feature_map_into(row, prev, cur);
    double s = 0.0;
    for (std::size_t k = 0; k < cur.size(); ++k) s += total_weight[k] * cur[k];
    out[i] = s;
  }
  return out;
}

Eigen::VectorXd FlatSpace::evaluate_batch(const Eigen::MatrixXd& x, std::span<const double> total_weight) const {
  if (total_weight.size() != size()) throw ValidationError("total weight length does not match the flat space");
  if (x.cols() != input_dim_) throw ValidationError("batch has the wrong input dimension");
  Eigen::VectorXd out(x.rows());
  const auto rows = static_cast<long long>(x.rows());
#pragma omp parallel
  {
    std::vector<double> prev;
    std::vector<double> cur;
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
#pragma omp for schedule(static)
    for (long long i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
      feature_map_into(row, prev, cur);
      double s = 0.0;
      for (std::size_t k = 0; k < cur.size(); ++k) s += total_weight[k] * cur[k];
      out[i] = s;
    }
  }
  return out;
}

SeriesVector FlatSpace::as_series(std::vector<double> values) const {
  return SeriesVector(index_set(), std::move(values));
}

double flat_eval(const SeriesVector& v, const SeriesVector& phi, const SeriesVector& g) {
  if (!v.same_indices(phi) || !v.same_indices(g)) {
    throw ValidationError("flat_eval needs series over the same indices");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += g[k] * v[k] * phi[k];
  return s;
}

double semi_flat_eval(std::span<const SeriesVector> v, const SeriesVector& phi, const SeriesVector& g) {
  if (v.empty()) throw ValidationError("semi_flat_eval needs at least one weight vector");
  for (const auto& vq : v) {
    if (!vq.same_indices(phi)) throw ValidationError("semi_flat_eval needs series over the same indices");
  }
  if (!g.same_indices(phi)) throw ValidationError("semi_flat_eval needs series over the same indices");
  double s = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    double t = g[k] * phi[k];
    for (const auto& vq : v) t *= vq[k];
    s += t;
  }
  return s;
}

SeriesVector flatten_feature_map(const Architecture& arch, std::span<const double> x, int truncation) {
  const FlatSpace space = FlatSpace::build(arch, truncation);
  return space.as_series(space.feature_map(x));
}

SeriesVector flatten_metric(const Architecture& arch, int truncation) {
  const FlatSpace space = FlatSpace::build(arch, truncation);
  return space.as_series(space.metric());
}

SeriesVector pushforward_weights(const Architecture& arch, const WeightSet& w, int q, int truncation) {
  if (q < 0 || q >= arch.depth()) throw ValidationError("layer index out of range");
  const FlatSpace space = FlatSpace::build(arch, truncation);
  auto layers = space.layer_weights(arch, w);
  return space.as_series(std::move(layers[static_cast<std::size_t>(q)]));
}

SeriesVector flat_weight(const Architecture& arch, const WeightSet& w, int truncation) {
  const FlatSpace space = FlatSpace::build(arch, truncation);
  return space.as_series(space.flat_weight(arch, w));
}

}  // namespace deepkrein
