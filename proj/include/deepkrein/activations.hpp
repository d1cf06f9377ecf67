#pragma once

#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace deepkrein {

enum class ActivationKind {
  Linear,
  Erf,
  Tanh,
  Logistic,
  Polynomial,
  Exp,
  ReluSurrogate,
  // Kinds that only arise as associated (absolute-coefficient) activations.
  Erfi,
  Tan,
  LogisticAssociated,
  ReluSurrogateAssociated,
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// An entire activation sigma(xi) = sum_i a_i xi^i together with the metadata
/// needed by the flattening and bound machinery.
///
/// Specs are immutable values. Every constructible spec has a_0 >= 0 and
/// a_1 > 0; polynomial specs validate this on construction.
class ActivationSpec {
 public:
  static constexpr int kDefaultMaxTerms = 30;
  static constexpr double kDefaultReluSharpness = 0.01;

  static ActivationSpec linear();
  static ActivationSpec erf();
  static ActivationSpec tanh();
  static ActivationSpec logistic();
  static ActivationSpec exp();
  static ActivationSpec polynomial(std::vector<double> coefficients);
  static ActivationSpec relu_surrogate(double sharpness = kDefaultReluSharpness);

  /// Parses the lowercase config name ("tanh", "polynomial", ...). Polynomial
  /// kinds take their coefficients, relu_surrogate its sharpness c.
  static ActivationSpec from_name(std::string_view name,
                                  const std::vector<double>& coefficients = {},
                                  double sharpness = kDefaultReluSharpness);

  ActivationKind kind() const { return kind_; }
  std::string name() const;
  int max_terms() const { return max_terms_; }
  ActivationSpec with_max_terms(int terms) const;

  // Polynomial coefficients (empty for other kinds).
  const std::vector<double>& polynomial_coefficients() const { return poly_; }
  // Sharpness c of the ReLU surrogate kinds (0 otherwise).
  double sharpness() const { return sharpness_; }

  /// a_i. Deterministic and total in i.
  double coefficient(int i) const;

  /// Highest index with a nonzero coefficient, or -1 for infinite series.
  int degree() const;

  double eval(double xi) const;
  double derivative(double xi) const;

  /// Sum_{i < terms} a_i xi^i, no radius check.
  double series_eval(double xi, int terms) const;

  /// The associated activation with coefficients |a_i|.
  ActivationSpec associated() const;

  double convergence_radius() const;

  /// Upper bound on the Lipschitz constant of eval on [0, m]. m = infinity
  /// yields the exact global constant for globally Lipschitz kinds.
  double lipschitz_on(double m) const;

  /// Exact global Lipschitz constant on R_+, or infinity if there is none.
  double global_lipschitz() const;

  bool is_odd() const;
  bool zero_at_origin() const { return coefficient(0) == 0.0; }
  bool concave_on_positive() const;
  bool bounded_by_one_on_positive() const;
  // sigma_bar == sigma.
  bool self_associated() const;

  friend bool operator==(const ActivationSpec& a, const ActivationSpec& b) {
    return a.kind_ == b.kind_ && a.poly_ == b.poly_ && a.sharpness_ == b.sharpness_ &&
           a.max_terms_ == b.max_terms_;
  }

 private:
  ActivationSpec(ActivationKind kind, std::vector<double> poly, double sharpness)
      : kind_(kind), poly_(std::move(poly)), sharpness_(sharpness) {}

  void check_radius(double xi) const;

  ActivationKind kind_;
  std::vector<double> poly_;
  double sharpness_ = 0.0;
  int max_terms_ = kDefaultMaxTerms;
};

double taylor_coefficient(const ActivationSpec& spec, int i);
double eval(const ActivationSpec& spec, double xi);
ActivationSpec associated(const ActivationSpec& spec);
double lipschitz_on(const ActivationSpec& spec, double m);
double convergence_radius(const ActivationSpec& spec);

namespace detail {
// Odd-index Maclaurin coefficients of tanh, from the ODE t' = 1 - t^2.
double tanh_coefficient(int i);
// erf coefficient, for any i.
double erf_coefficient(int i);
// erfi(x) by its everywhere-convergent series.
double erfi(double x);
}  // namespace detail

}  // namespace deepkrein
