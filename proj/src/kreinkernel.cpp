#include "deepkrein/kreinkernel.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "deepkrein/errors.hpp"

namespace deepkrein {

KernelVariant kernel_variant_from_name(const std::string& name) {
  if (name == "krein") return KernelVariant::Krein;
  if (name == "associated") return KernelVariant::Associated;
  throw ValidationError("unknown kernel variant '" + name + "' (expected krein or associated)");
}

std::string kernel_variant_name(KernelVariant variant) {
  return variant == KernelVariant::Krein ? "krein" : "associated";
}

KernelDefinition::KernelDefinition(Architecture arch, KernelVariant variant)
    : arch_(std::move(arch)),
      variant_(variant),
      effective_(variant == KernelVariant::Krein ? arch_ : arch_.associated()) {}

double kernel(const KernelDefinition& def, std::span<const double> x, std::span<const double> xp,
              std::vector<double>* arguments) {
  const Architecture& arch = def.effective();
  if (static_cast<int>(x.size()) != arch.input_dim() || static_cast<int>(xp.size()) != arch.input_dim()) {
    throw ValidationError("kernel inputs must have dimension " + std::to_string(arch.input_dim()));
  }
  if (arguments && static_cast<int>(arguments->size()) != arch.depth()) {
    arguments->assign(static_cast<std::size_t>(arch.depth()), 0.0);
  }
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * xp[j];
  for (int q = 0; q < arch.depth(); ++q) {
    if (q > 0) s *= arch.width(q - 1);
    if (arguments) {
      auto& slot = (*arguments)[static_cast<std::size_t>(q)];
      slot = std::max(slot, std::abs(s));
    }
    const ActivationSpec& sigma = arch.activation(q);
    try {
      s = sigma.eval(s);
    } catch (const DomainError& e) {
      throw DomainError(e.what(), q);
    }
    if (!std::isfinite(s)) throw DomainError(sigma.name() + " overflows in the kernel recursion", q);
  }
  return s;
}

double kernel(const KernelDefinition& def, const Eigen::VectorXd& x, const Eigen::VectorXd& xp) {
  return kernel(def, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                std::span<const double>(xp.data(), static_cast<std::size_t>(xp.size())));
}

double krein_kernel(const Architecture& arch, const Eigen::VectorXd& x, const Eigen::VectorXd& xp) {
  return kernel(KernelDefinition(arch, KernelVariant::Krein), x, xp);
}

double associated_kernel(const Architecture& arch, const Eigen::VectorXd& x, const Eigen::VectorXd& xp) {
  return kernel(KernelDefinition(arch, KernelVariant::Associated), x, xp);
}

KernelParts kernel_parts(const FlatSpace& space, std::span<const double> x, std::span<const double> xp) {
  const auto phi = space.feature_map(x);
  const auto phip = space.feature_map(xp);
  const auto& g = space.metric();
  KernelParts out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = phi[k] * phip[k];
    if (g[k] > 0.0) {
      out.k_plus += g[k] * t;
    } else {
      out.k_minus -= g[k] * t;
    }
  }
  return out;
}

KernelParts kernel_parts(const Architecture& arch, const Eigen::VectorXd& x, const Eigen::VectorXd& xp,
                         int truncation) {
  const FlatSpace space = FlatSpace::build(arch, truncation);
  return kernel_parts(space, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                      std::span<const double>(xp.data(), static_cast<std::size_t>(xp.size())));
}

double feature_kernel(const FlatSpace& space, std::span<const double> x, std::span<const double> xp,
                      bool absolute_metric) {
  const auto phi = space.feature_map(x);
  const auto phip = space.feature_map(xp);
  const auto& g = space.metric();
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) s += (absolute_metric ? std::abs(g[k]) : g[k]) * phi[k] * phip[k];
  return s;
}

namespace {

std::span<const double> row_span(const Eigen::MatrixXd& rowmajor_t, Eigen::Index i) {
  // Columns of the transposed copy are contiguous rows of x.
  return {rowmajor_t.data() + i * rowmajor_t.rows(), static_cast<std::size_t>(rowmajor_t.rows())};
}

struct CellError {
  long long cell = std::numeric_limits<long long>::max();
  std::string what;
  std::optional<int> layer;
  bool domain = false;
};

[[noreturn]] void rethrow(const CellError& err, Eigen::Index n) {
  const long long i = err.cell / n;
  const long long j = err.cell % n;
  const std::string where = "Gram entry (" + std::to_string(i) + ", " + std::to_string(j) + "): " + err.what;
  if (err.domain) throw DomainError::preformatted(where, err.layer);
  throw ValidationError(where);
}

void check_points(const KernelDefinition& def, const Eigen::MatrixXd& x) {
  if (x.rows() == 0) throw ValidationError("gram needs at least one point");
  if (x.cols() != def.architecture().input_dim()) {
    throw ValidationError("gram points must have dimension " + std::to_string(def.architecture().input_dim()));
  }
}

}  // namespace

Eigen::MatrixXd gram_serial(const KernelDefinition& def, const Eigen::MatrixXd& x) {
  check_points(def, x);
  const Eigen::MatrixXd xt = x.transpose();
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      try {
        g(i, j) = kernel(def, row_span(xt, i), row_span(xt, j));
      } catch (const DomainError& e) {
        CellError err{static_cast<long long>(i * n + j), e.what(), e.layer(), true};
        rethrow(err, n);
      }
      g(j, i) = g(i, j);
    }
  }
  return g;
}

Eigen::MatrixXd gram(const KernelDefinition& def, const Eigen::MatrixXd& x) {
  check_points(def, x);
  const Eigen::MatrixXd xt = x.transpose();
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd g(n, n);
  CellError first;
  const auto rows = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < rows; ++i) {
    for (long long j = i; j < rows; ++j) {
      try {
        g(i, j) = kernel(def, row_span(xt, i), row_span(xt, j));
      } catch (const DomainError& e) {
        const long long cell = i * rows + j;
#pragma omp critical(deepkrein_gram_error)
        if (cell < first.cell) first = CellError{cell, e.what(), e.layer(), true};
        break;
      }
    }
  }
  if (first.cell != std::numeric_limits<long long>::max()) rethrow(first, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) g(i, j) = g(j, i);
  }
  return g;
}

}  // namespace deepkrein
