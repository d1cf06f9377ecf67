#include "deepkrein/multi_index.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

#include "deepkrein/errors.hpp"

namespace deepkrein {

MultiIndex::MultiIndex(std::vector<Term> terms) : terms_(std::move(terms)) {
  int prev = -1;
  for (const auto& [var, e] : terms_) {
    if (var <= prev) throw ValidationError("multi-index variables must be strictly increasing");
    if (e < 1) throw ValidationError("multi-index exponents must be positive");
    prev = var;
    degree_ += e;
  }
}

MultiIndex MultiIndex::from_dense(std::span<const int> exponents) {
  std::vector<Term> terms;
  for (std::size_t j = 0; j < exponents.size(); ++j) {
    if (exponents[j] < 0) throw ValidationError("multi-index exponents must be nonnegative");
    if (exponents[j] > 0) terms.emplace_back(static_cast<int>(j), exponents[j]);
  }
  return MultiIndex(std::move(terms));
}

int MultiIndex::exponent(int variable) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), variable,
                             [](const Term& t, int v) { return t.first < v; });
  return it != terms_.end() && it->first == variable ? it->second : 0;
}

std::vector<int> MultiIndex::dense(int n) const {
  std::vector<int> out(static_cast<std::size_t>(n), 0);
  for (const auto& [var, e] : terms_) out.at(static_cast<std::size_t>(var)) = e;
  return out;
}

bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  // The first variable where the dense vectors differ decides; larger exponent first.
  std::size_t i = 0;
  for (; i < ta.size() && i < tb.size(); ++i) {
    if (ta[i].first != tb[i].first) return ta[i].first < tb[i].first;
    if (ta[i].second != tb[i].second) return ta[i].second > tb[i].second;
  }
  return i < ta.size() && i == tb.size();
}

IndexSet::IndexSet(int n, int truncation, std::vector<MultiIndex> indices, std::vector<VariableLabel> labels)
    : n_(n), truncation_(truncation), indices_(std::move(indices)), labels_(std::move(labels)) {
  if (n_ < 1) throw ValidationError("index set dimension must be positive");
  if (truncation_ < 0) throw ValidationError("truncation degree must be nonnegative");
  if (!labels_.empty() && static_cast<int>(labels_.size()) != n_) {
    throw ValidationError("index set labels must cover every variable");
  }
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (!indices_[k].terms().empty() && indices_[k].terms().back().first >= n_) {
      throw ValidationError("multi-index variable out of range");
    }
    if (k > 0 && !graded_lex_less(indices_[k - 1], indices_[k])) {
      throw ValidationError("index set must be strictly graded-lex sorted");
    }
  }
}

namespace {

void enumerate_degree(int n, int start, int remaining, std::vector<MultiIndex::Term>& stack,
                      std::vector<MultiIndex>& out) {
  if (remaining == 0) {
    out.emplace_back(stack);
    return;
  }
  for (int j = start; j < n; ++j) {
    for (int e = remaining; e >= 1; --e) {
      stack.emplace_back(j, e);
      enumerate_degree(n, j + 1, remaining - e, stack, out);
      stack.pop_back();
    }
  }
}

}  // namespace

std::shared_ptr<const IndexSet> IndexSet::all_monomials(int n, int truncation) {
  std::vector<MultiIndex> indices;
  std::vector<MultiIndex::Term> stack;
  for (int m = 0; m <= truncation; ++m) enumerate_degree(n, 0, m, stack, indices);
  return std::make_shared<const IndexSet>(n, truncation, std::move(indices));
}

std::optional<std::size_t> IndexSet::find(const MultiIndex& index) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), index, graded_lex_less);
  if (it == indices_.end() || !(*it == index)) return std::nullopt;
  return static_cast<std::size_t>(it - indices_.begin());
}

SeriesVector::SeriesVector(std::shared_ptr<const IndexSet> set, std::vector<double> values)
    : set_(std::move(set)), values_(std::move(values)) {
  if (!set_) throw ValidationError("series vector needs an index set");
  if (values_.size() != set_->size()) throw ValidationError("series vector length does not match its index set");
}

double SeriesVector::at(const MultiIndex& index) const {
  auto k = set_->find(index);
  return k ? values_[*k] : 0.0;
}

bool SeriesVector::same_indices(const SeriesVector& other) const {
  if (set_ == other.set_) return true;
  if (!set_ || !other.set_) return false;
  return set_->dimension() == other.set_->dimension() && set_->indices() == other.set_->indices();
}

void SeriesVector::dump(std::ostream& out) const {
  const auto& labels = set_->labels();
  char buf[64];
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const MultiIndex& idx = (*set_)[k];
    std::string line = std::to_string(idx.degree()) + "\t";
    if (labels.empty()) {
      line += "(";
      const auto dense = idx.dense(set_->dimension());
      for (std::size_t j = 0; j < dense.size(); ++j) {
        if (j) line += ",";
        line += std::to_string(dense[j]);
      }
      line += ")\t-";
    } else {
      std::string exps = "[";
      std::string blocks = "[";
      for (std::size_t t = 0; t < idx.terms().size(); ++t) {
        const auto& [var, e] = idx.terms()[t];
        const auto& label = labels[static_cast<std::size_t>(var)];
        if (t) {
          exps += " ";
          blocks += " ";
        }
        exps += std::to_string(label.parent) + "^" + std::to_string(e);
        blocks += std::to_string(label.block);
      }
      line += exps + "]\t" + blocks + "]";
    }
    std::snprintf(buf, sizeof buf, "\t%.17g\n", values_[k]);
    out << line << buf;
  }
}

}  // namespace deepkrein
