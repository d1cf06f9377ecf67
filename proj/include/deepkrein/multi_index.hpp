#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace deepkrein {

/// A multi-index stored sparsely as (variable, exponent) pairs with strictly
/// increasing variables and exponents >= 1.
class MultiIndex {
 public:
  using Term = std::pair<int, int>;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<Term> terms);

  static MultiIndex from_dense(std::span<const int> exponents);

  const std::vector<Term>& terms() const { return terms_; }
  int degree() const { return degree_; }
  int exponent(int variable) const;
  std::vector<int> dense(int n) const;

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.terms_ == b.terms_; }

 private:
  std::vector<Term> terms_;
  int degree_ = 0;
};

/// Graded-lex order: degree ascending, then the exponent vector descending
/// lexicographically, so (2,0) < (1,1) < (0,2).
bool graded_lex_less(const MultiIndex& a, const MultiIndex& b);

/// Where a variable of a composed level comes from: neuron block h and the
/// parent feature j of the level below.
struct VariableLabel {
  int block = 0;
  int parent = 0;
};

/// An immutable, graded-lex sorted collection of multi-indices over n
/// variables with degree <= T.
class IndexSet {
 public:
  IndexSet(int n, int truncation, std::vector<MultiIndex> indices, std::vector<VariableLabel> labels = {});

  /// Every multi-index over n variables with degree <= T.
  static std::shared_ptr<const IndexSet> all_monomials(int n, int truncation);

  int dimension() const { return n_; }
  int truncation() const { return truncation_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t k) const { return indices_[k]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  // Empty for plain coordinate variables.
  const std::vector<VariableLabel>& labels() const { return labels_; }

  std::optional<std::size_t> find(const MultiIndex& index) const;

 private:
  int n_;
  int truncation_;
  std::vector<MultiIndex> indices_;
  std::vector<VariableLabel> labels_;
};

/// Values over an IndexSet. Indices outside the set read as exactly zero.
class SeriesVector {
 public:
  SeriesVector() = default;
  SeriesVector(std::shared_ptr<const IndexSet> set, std::vector<double> values);

  const IndexSet& index_set() const { return *set_; }
  const std::shared_ptr<const IndexSet>& shared_index_set() const { return set_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  double at(const MultiIndex& index) const;

  bool same_indices(const SeriesVector& other) const;

  /// One line per stored index, graded-lex: degree, exponents, block tags,
  /// value with 17 significant digits.
  void dump(std::ostream& out) const;

 private:
  std::shared_ptr<const IndexSet> set_;
  std::vector<double> values_;
};

}  // namespace deepkrein
