#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace mf {

/// Exponent vector s in N^d; x^s = x_1^{s_1} ... x_d^{s_d}.
class MultiIndex {
public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);

  static MultiIndex zero(int d) { return MultiIndex(std::vector<int>(d, 0)); }
  static MultiIndex unit(int d, int i);

  int size() const { return static_cast<int>(e_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return e_[i]; }
  const std::vector<int> &exponents() const { return e_; }

  MultiIndex operator+(const MultiIndex &other) const;

  /// Coordinates i_1 <= ... <= i_t listed with multiplicity.
  std::vector<int> coordinates() const;

  double evaluate(const Eigen::VectorXd &x) const;

  /// Plain lexicographic order on exponent vectors.
  std::strong_ordering operator<=>(const MultiIndex &other) const {
    return e_ <=> other.e_;
  }
  bool operator==(const MultiIndex &other) const { return e_ == other.e_; }

private:
  std::vector<int> e_;
  int degree_ = 0;
};

/// Graded-lexicographic order: by degree, then lexicographic on exponents.
bool graded_less(const MultiIndex &a, const MultiIndex &b);

/// All multi-indices of length d and degree <= p in graded-lexicographic
/// order. Instances are immutable and shared through get().
class MultiIndexSet {
public:
  static std::shared_ptr<const MultiIndexSet> get(int d, int p);

  int dim() const { return d_; }
  int max_degree() const { return p_; }
  std::size_t size() const { return list_.size(); }
  const MultiIndex &operator[](std::size_t i) const { return list_[i]; }

  std::optional<std::size_t> find(const MultiIndex &s) const;
  /// Throws IncompleteMoments when `s` is not in the set.
  std::size_t index_of(const MultiIndex &s) const;

  /// Positions [begin, end) of the indices of degree exactly t.
  std::size_t degree_begin(int t) const { return offsets_[t]; }
  std::size_t degree_end(int t) const { return offsets_[t + 1]; }

  /// For i > 0: s_i = s_parent(i) + e_var(i), with var(i) the first nonzero
  /// coordinate of s_i.
  std::size_t parent(std::size_t i) const { return parent_[i]; }
  int var(std::size_t i) const { return var_[i]; }

  /// out[i] = x^{s_i} for every index in the set.
  void evaluate_all(const double *x, double *out) const;

  MultiIndexSet(int d, int p);

private:
  int d_;
  int p_;
  std::vector<MultiIndex> list_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> parent_;
  std::vector<int> var_;
  std::map<std::vector<int>, std::size_t> lookup_;
};

class MomentTensor;

/// Sparse real polynomial in d variables keyed by multi-index.
class Polynomial {
public:
  explicit Polynomial(int d) : d_(d) {}

  static Polynomial constant(int d, double c);
  /// sum_i coef_i x_i
  static Polynomial linear(const Eigen::VectorXd &coef);
  /// |x|^2
  static Polynomial squared_norm(int d);

  int dim() const { return d_; }
  const std::map<MultiIndex, double> &terms() const { return terms_; }

  void add(const MultiIndex &s, double c);
  Polynomial operator*(const Polynomial &other) const;
  Polynomial pow(int n) const;
  Polynomial &operator+=(const Polynomial &other);
  Polynomial operator+(const Polynomial &other) const {
    Polynomial out(*this);
    out += other;
    return out;
  }
  Polynomial operator*(double c) const;

  double evaluate(const Eigen::VectorXd &x) const;
  /// sum_s c_s E X^s using the given moments.
  double expectation(const MomentTensor &moments) const;

private:
  int d_;
  std::map<MultiIndex, double> terms_;
};

} // namespace mf
