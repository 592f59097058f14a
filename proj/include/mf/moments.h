#pragma once

#include <memory>
#include <vector>

#include "mf/multi_index.h"

namespace mf {

/// Moments E X^s for every |s| <= p of a random vector in R^d, stored in
/// graded-lexicographic order.
class MomentTensor {
public:
  MomentTensor() = default;
  /// All entries zero except the degree-0 entry, which is 1.
  MomentTensor(int d, int p);

  int dim() const { return index_ ? index_->dim() : 0; }
  int max_degree() const { return index_ ? index_->max_degree() : -1; }
  std::size_t size() const { return values_.size(); }
  const MultiIndexSet &index_set() const { return *index_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double &operator[](std::size_t i) { return values_[i]; }
  double at(const MultiIndex &s) const { return values_[index_->index_of(s)]; }
  double &at(const MultiIndex &s) { return values_[index_->index_of(s)]; }

  const std::vector<double> &values() const { return values_; }
  std::vector<double> &values() { return values_; }

  /// Restriction to degrees <= p.
  MomentTensor truncated(int p) const;

  /// Largest absolute entry-wise difference over degrees in [lo, hi].
  double max_abs_diff(const MomentTensor &other, int lo = 0, int hi = -1) const;

  /// Throws InvariantViolated when the degree-0 entry is not 1 or, for a
  /// sphere-supported tensor, sum_i E X_i^2 differs from 1 by more than tol.
  void validate(double tol = 1e-10) const;

  /// X is known to lie on the unit sphere.
  bool sphere_supported = false;
  /// Produced from a rule whose gap exceeded the exactness tolerance.
  bool approximate = false;
  /// sqrt(gap) of the producing rule when approximate.
  double epsilon = 0.0;

private:
  std::shared_ptr<const MultiIndexSet> index_;
  std::vector<double> values_;
};

enum class Convention { PX, QX };

/// Moments of the measured vectors, one tensor per measurement: either of
/// the d-dimensional P_j X or of the k-dimensional Q_j X.
struct ProjectedMomentSet {
  Convention convention = Convention::PX;
  int p = 0;
  std::vector<MomentTensor> tensors;
  /// Forwarded from the source law; consulted by the sphere fusion path.
  bool sphere_supported = false;

  /// Throws IncompleteMoments when a tensor stops short of degree p.
  void validate() const;
};

} // namespace mf
