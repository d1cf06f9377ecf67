#include "deepkrein/activations.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "deepkrein/errors.hpp"

namespace deepkrein {

namespace {

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;
constexpr int kTanhTableSize = 64;
constexpr int kLipschitzGrid = 10001;
constexpr double kLipschitzInflation = 1.01;

const std::array<double, kTanhTableSize>& tanh_table() {
  static const std::array<double, kTanhTableSize> table = [] {
    // tanh' = 1 - tanh^2, so (i+1) t_{i+1} = [i == 0] - sum_k t_k t_{i-k}.
    std::array<double, kTanhTableSize> t{};
    t[0] = 0.0;
    for (int i = 0; i + 1 < kTanhTableSize; ++i) {
      double conv = 0.0;
      for (int k = 0; k <= i; ++k) conv += t[k] * t[i - k];
      t[i + 1] = ((i == 0 ? 1.0 : 0.0) - conv) / static_cast<double>(i + 1);
    }
    for (int i = 0; i < kTanhTableSize; i += 2) t[i] = 0.0;
    return t;
  }();
  return table;
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double horner(const std::vector<double>& c, double xi) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * xi + *it;
  return acc;
}

double relu_coefficient(int i, double c, bool absolute) {
  if (i == 1) return 0.5;
  if (i < 2 || i % 2 == 1) return 0.0;
  // xi * erf(xi / c) / 2 contributes a_{j} c^{-j} / 2 at power j + 1 (j odd).
  const int j = i - 1;
  const double e = detail::erf_coefficient(j);
  const double magnitude = std::exp(std::log(std::abs(e)) - j * std::log(c) + std::log(0.5));
  return (absolute || e > 0.0) ? magnitude : -magnitude;
}

}  // namespace

namespace detail {

double tanh_coefficient(int i) {
  if (i < 0 || i % 2 == 0) return 0.0;
  if (i < kTanhTableSize) return tanh_table()[i];
  // |B_2n| / (2n)! = 2 zeta(2n) / (2 pi)^{2n}; zeta(2n) is 1 to double
  // precision here but the first few terms are kept anyway.
  const int n = (i + 1) / 2;
  double zeta = 0.0;
  for (int k = 4; k >= 1; --k) zeta += std::pow(static_cast<double>(k), -2.0 * n);
  const double log_mag = std::log(2.0) + 2.0 * n * std::log(2.0) +
                         std::log1p(-std::pow(2.0, -2.0 * n)) + std::log(zeta) -
                         2.0 * n * std::log(std::numbers::pi);
  const double mag = std::exp(log_mag);
  return (n % 2 == 1) ? mag : -mag;
}

double erf_coefficient(int i) {
  if (i < 0 || i % 2 == 0) return 0.0;
  const int k = (i - 1) / 2;
  const double mag = kTwoOverSqrtPi * std::exp(-log_factorial(k)) / static_cast<double>(i);
  return (k % 2 == 0) ? mag : -mag;
}

double erfi(double x) {
  // 2/sqrt(pi) sum_k x^{2k+1} / (k! (2k+1)); all terms share the sign of x.
  const double x2 = x * x;
  double power = x;  // x^{2k+1} / k!
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double term = power / (2.0 * k + 1.0);
    sum += term;
    if (!std::isfinite(sum)) return sum;
    if (std::abs(term) <= 1e-17 * std::abs(sum) && k > x2) break;
    power *= x2 / (k + 1.0);
  }
  return kTwoOverSqrtPi * sum;
}

}  // namespace detail

ActivationSpec ActivationSpec::linear() { return {ActivationKind::Linear, {}, 0.0}; }
ActivationSpec ActivationSpec::erf() { return {ActivationKind::Erf, {}, 0.0}; }
ActivationSpec ActivationSpec::tanh() { return {ActivationKind::Tanh, {}, 0.0}; }
ActivationSpec ActivationSpec::logistic() { return {ActivationKind::Logistic, {}, 0.0}; }
ActivationSpec ActivationSpec::exp() { return {ActivationKind::Exp, {}, 0.0}; }

ActivationSpec ActivationSpec::polynomial(std::vector<double> coefficients) {
  while (!coefficients.empty() && coefficients.back() == 0.0) coefficients.pop_back();
  for (double c : coefficients) {
    if (!std::isfinite(c)) throw ValidationError("polynomial coefficient is not finite");
  }
  if (coefficients.size() < 2) {
    throw ValidationError("polynomial activation needs a positive linear coefficient");
  }
  if (coefficients[0] < 0.0) throw ValidationError("polynomial activation needs a_0 >= 0");
  if (coefficients[1] <= 0.0) throw ValidationError("polynomial activation needs a_1 > 0");
  return {ActivationKind::Polynomial, std::move(coefficients), 0.0};
}

ActivationSpec ActivationSpec::relu_surrogate(double sharpness) {
  if (!(sharpness > 0.0) || !std::isfinite(sharpness)) {
    throw ValidationError("relu_surrogate sharpness c must be positive and finite");
  }
  return {ActivationKind::ReluSurrogate, {}, sharpness};
}

ActivationSpec ActivationSpec::from_name(std::string_view name,
                                         const std::vector<double>& coefficients,
                                         double sharpness) {
  if (name == "linear") return linear();
  if (name == "erf") return erf();
  if (name == "tanh") return tanh();
  if (name == "logistic") return logistic();
  if (name == "exp") return exp();
  if (name == "polynomial") return polynomial(coefficients);
  if (name == "relu_surrogate") return relu_surrogate(sharpness);
  if (name == "erfi") return erf().associated();
  if (name == "tan") return tanh().associated();
  if (name == "logistic_associated") return logistic().associated();
  if (name == "relu_surrogate_associated") return relu_surrogate(sharpness).associated();
  throw ValidationError("unknown activation kind '" + std::string(name) + "'");
}

std::string ActivationSpec::name() const {
  switch (kind_) {
    case ActivationKind::Linear: return "linear";
    case ActivationKind::Erf: return "erf";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Logistic: return "logistic";
    case ActivationKind::Polynomial: return "polynomial";
    case ActivationKind::Exp: return "exp";
    case ActivationKind::ReluSurrogate: return "relu_surrogate";
    case ActivationKind::Erfi: return "erfi";
    case ActivationKind::Tan: return "tan";
    case ActivationKind::LogisticAssociated: return "logistic_associated";
    case ActivationKind::ReluSurrogateAssociated: return "relu_surrogate_associated";
  }
  return "unknown";
}

ActivationSpec ActivationSpec::with_max_terms(int terms) const {
  if (terms < 1) throw ValidationError("max_terms must be positive");
  ActivationSpec copy = *this;
  copy.max_terms_ = terms;
  return copy;
}

double ActivationSpec::coefficient(int i) const {
  if (i < 0) return 0.0;
  switch (kind_) {
    case ActivationKind::Linear: return i == 1 ? 1.0 : 0.0;
    case ActivationKind::Erf: return detail::erf_coefficient(i);
    case ActivationKind::Erfi: return std::abs(detail::erf_coefficient(i));
    case ActivationKind::Tanh: return detail::tanh_coefficient(i);
    case ActivationKind::Tan: return std::abs(detail::tanh_coefficient(i));
    case ActivationKind::Logistic:
      // 1/(1+e^{-xi}) = 1/2 + tanh(xi/2)/2.
      if (i == 0) return 0.5;
      return detail::tanh_coefficient(i) * std::ldexp(1.0, -(i + 1));
    case ActivationKind::LogisticAssociated:
      if (i == 0) return 0.5;
      return std::abs(detail::tanh_coefficient(i)) * std::ldexp(1.0, -(i + 1));
    case ActivationKind::Exp: return std::exp(-log_factorial(i));
    case ActivationKind::Polynomial:
      return static_cast<std::size_t>(i) < poly_.size() ? poly_[i] : 0.0;
    case ActivationKind::ReluSurrogate: return relu_coefficient(i, sharpness_, false);
    case ActivationKind::ReluSurrogateAssociated: return relu_coefficient(i, sharpness_, true);
  }
  return 0.0;
}

int ActivationSpec::degree() const {
  if (kind_ == ActivationKind::Linear) return 1;
  if (kind_ == ActivationKind::Polynomial) return static_cast<int>(poly_.size()) - 1;
  return -1;
}

double ActivationSpec::convergence_radius() const {
  switch (kind_) {
    case ActivationKind::Tanh:
    case ActivationKind::Tan: return std::numbers::pi / 2.0;
    case ActivationKind::Logistic:
    case ActivationKind::LogisticAssociated: return std::numbers::pi;
    default: return kInfinity;
  }
}

void ActivationSpec::check_radius(double xi) const {
  if (!std::isfinite(xi)) throw DomainError(name() + ": non-finite argument");
  const double r = convergence_radius();
  if (std::abs(xi) >= r) {
    throw DomainError(name() + ": argument " + std::to_string(xi) +
                      " outside convergence radius " + std::to_string(r));
  }
}

double ActivationSpec::eval(double xi) const {
  switch (kind_) {
    case ActivationKind::Linear: return xi;
    case ActivationKind::Erf: return std::erf(xi);
    case ActivationKind::Tanh: return std::tanh(xi);
    case ActivationKind::Logistic:
      return xi >= 0.0 ? 1.0 / (1.0 + std::exp(-xi)) : std::exp(xi) / (1.0 + std::exp(xi));
    case ActivationKind::Exp: return std::exp(xi);
    case ActivationKind::Polynomial: return horner(poly_, xi);
    case ActivationKind::ReluSurrogate: return 0.5 * xi * (1.0 + std::erf(xi / sharpness_));
    case ActivationKind::Erfi: return detail::erfi(xi);
    case ActivationKind::Tan: check_radius(xi); return std::tan(xi);
    case ActivationKind::LogisticAssociated:
      check_radius(xi);
      return 0.5 * (1.0 + std::tan(0.5 * xi));
    case ActivationKind::ReluSurrogateAssociated:
      return 0.5 * xi * (1.0 + detail::erfi(xi / sharpness_));
  }
  return 0.0;
}

double ActivationSpec::derivative(double xi) const {
  switch (kind_) {
    case ActivationKind::Linear: return 1.0;
    case ActivationKind::Erf: return kTwoOverSqrtPi * std::exp(-xi * xi);
    case ActivationKind::Tanh: {
      const double t = std::tanh(xi);
      return 1.0 - t * t;
    }
    case ActivationKind::Logistic: {
      const double s = eval(xi);
      return s * (1.0 - s);
    }
    case ActivationKind::Exp: return std::exp(xi);
    case ActivationKind::Polynomial: {
      double acc = 0.0;
      for (std::size_t i = poly_.size(); i-- > 1;) acc = acc * xi + static_cast<double>(i) * poly_[i];
      return acc;
    }
    case ActivationKind::ReluSurrogate: {
      const double u = xi / sharpness_;
      return 0.5 * (1.0 + std::erf(u)) + u * std::numbers::inv_sqrtpi * std::exp(-u * u);
    }
    case ActivationKind::Erfi: return kTwoOverSqrtPi * std::exp(xi * xi);
    case ActivationKind::Tan: {
      check_radius(xi);
      const double c = std::cos(xi);
      return 1.0 / (c * c);
    }
    case ActivationKind::LogisticAssociated: {
      check_radius(xi);
      const double c = std::cos(0.5 * xi);
      return 0.25 / (c * c);
    }
    case ActivationKind::ReluSurrogateAssociated: {
      const double u = xi / sharpness_;
      return 0.5 * (1.0 + detail::erfi(u)) + u * std::numbers::inv_sqrtpi * std::exp(u * u);
    }
  }
  return 0.0;
}

double ActivationSpec::series_eval(double xi, int terms) const {
  double acc = 0.0;
  for (int i = terms - 1; i >= 0; --i) acc = acc * xi + coefficient(i);
  return acc;
}

ActivationSpec ActivationSpec::associated() const {
  ActivationSpec out = *this;
  switch (kind_) {
    case ActivationKind::Erf: out.kind_ = ActivationKind::Erfi; break;
    case ActivationKind::Tanh: out.kind_ = ActivationKind::Tan; break;
    case ActivationKind::Logistic: out.kind_ = ActivationKind::LogisticAssociated; break;
    case ActivationKind::ReluSurrogate: out.kind_ = ActivationKind::ReluSurrogateAssociated; break;
    case ActivationKind::Polynomial:
      for (double& c : out.poly_) c = std::abs(c);
      break;
    default: break;
  }
  return out;
}

double ActivationSpec::global_lipschitz() const {
  switch (kind_) {
    case ActivationKind::Linear: return 1.0;
    case ActivationKind::Erf: return kTwoOverSqrtPi;
    case ActivationKind::Tanh: return 1.0;
    case ActivationKind::Logistic: return 0.25;
    case ActivationKind::ReluSurrogate:
      // sup_u (1 + erf(u))/2 + u e^{-u^2}/sqrt(pi) is attained at u = 1.
      return 0.5 * (1.0 + std::erf(1.0)) + std::numbers::inv_sqrtpi * std::exp(-1.0);
    case ActivationKind::Polynomial:
      return poly_.size() <= 2 ? std::abs(poly_[1]) : kInfinity;
    default: return kInfinity;
  }
}

double ActivationSpec::lipschitz_on(double m) const {
  if (!(m > 0.0)) throw ValidationError("lipschitz_on needs an interval [0, m] with m > 0");
  if (std::isinf(m)) {
    const double g = global_lipschitz();
    if (std::isinf(g)) throw DomainError(name() + " is not globally Lipschitz on [0, inf)");
    return g;
  }
  const bool series_defined = kind_ == ActivationKind::Tan ||
                              kind_ == ActivationKind::LogisticAssociated;
  if (series_defined && m >= convergence_radius()) {
    throw DomainError(name() + ": Lipschitz interval [0, " + std::to_string(m) +
                      "] reaches the convergence radius");
  }
  double sup = 0.0;
  for (int k = 0; k < kLipschitzGrid; ++k) {
    const double xi = m * static_cast<double>(k) / (kLipschitzGrid - 1);
    sup = std::max(sup, std::abs(derivative(xi)));
  }
  if (!std::isfinite(sup)) throw DomainError(name() + ": derivative overflows on [0, m]");
  return sup * kLipschitzInflation;
}

bool ActivationSpec::is_odd() const {
  switch (kind_) {
    case ActivationKind::Linear:
    case ActivationKind::Erf:
    case ActivationKind::Tanh:
    case ActivationKind::Erfi:
    case ActivationKind::Tan: return true;
    case ActivationKind::Polynomial:
      for (std::size_t i = 0; i < poly_.size(); i += 2) {
        if (poly_[i] != 0.0) return false;
      }
      return true;
    default: return false;
  }
}

bool ActivationSpec::concave_on_positive() const {
  switch (kind_) {
    case ActivationKind::Linear:
    case ActivationKind::Erf:
    case ActivationKind::Tanh: return true;
    case ActivationKind::Polynomial: return poly_.size() <= 2;
    default: return false;
  }
}

bool ActivationSpec::bounded_by_one_on_positive() const {
  return kind_ == ActivationKind::Erf || kind_ == ActivationKind::Tanh ||
         kind_ == ActivationKind::Logistic;
}

bool ActivationSpec::self_associated() const {
  switch (kind_) {
    case ActivationKind::Linear:
    case ActivationKind::Exp:
    case ActivationKind::Erfi:
    case ActivationKind::Tan:
    case ActivationKind::LogisticAssociated:
    case ActivationKind::ReluSurrogateAssociated: return true;
    case ActivationKind::Polynomial:
      return std::all_of(poly_.begin(), poly_.end(), [](double c) { return c >= 0.0; });
    default: return false;
  }
}

double taylor_coefficient(const ActivationSpec& spec, int i) { return spec.coefficient(i); }
double eval(const ActivationSpec& spec, double xi) { return spec.eval(xi); }
ActivationSpec associated(const ActivationSpec& spec) { return spec.associated(); }
double lipschitz_on(const ActivationSpec& spec, double m) { return spec.lipschitz_on(m); }
double convergence_radius(const ActivationSpec& spec) { return spec.convergence_radius(); }

}  // namespace deepkrein
