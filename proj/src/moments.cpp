#include "mf/moments.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mf/error.h"

namespace mf {

MomentTensor::MomentTensor(int d, int p)
    : index_(MultiIndexSet::get(d, p)), values_(index_->size(), 0.0) {
  values_[0] = 1.0;
}

MomentTensor MomentTensor::truncated(int p) const {
  if (p > max_degree())
    throw Error(ErrorCode::IncompleteMoments, "cannot extend a moment tensor");
  MomentTensor out(dim(), p);
  std::copy_n(values_.begin(), out.size(), out.values_.begin());
  out.sphere_supported = sphere_supported;
  out.approximate = approximate;
  out.epsilon = epsilon;
  return out;
}

double MomentTensor::max_abs_diff(const MomentTensor &other, int lo,
                                  int hi) const {
  if (other.dim() != dim())
    throw Error(ErrorCode::DimensionMismatch, "moment tensors differ in dimension");
  if (hi < 0)
    hi = std::min(max_degree(), other.max_degree());
  if (hi > max_degree() || hi > other.max_degree())
    throw Error(ErrorCode::IncompleteMoments, "degree range exceeds a tensor");
  double m = 0.0;
  for (std::size_t i = index_->degree_begin(lo); i < index_->degree_end(hi); ++i)
    m = std::max(m, std::abs(values_[i] - other.values_[i]));
  return m;
}

void MomentTensor::validate(double tol) const {
  if (!index_)
    throw Error(ErrorCode::InvariantViolated, "empty moment tensor");
  if (std::abs(values_[0] - 1.0) > tol)
    throw Error(ErrorCode::InvariantViolated, "degree-0 moment must equal 1");
  if (sphere_supported && max_degree() >= 2) {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) {
      std::vector<int> e(dim(), 0);
      e[i] = 2;
      s += at(MultiIndex(std::move(e)));
    }
    if (std::abs(s - 1.0) > tol)
      throw Error(ErrorCode::InvariantViolated,
                  "sphere-supported tensor has E|X|^2 = " + std::to_string(s));
  }
}

void ProjectedMomentSet::validate() const {
  for (const auto &t : tensors)
    if (t.max_degree() < p)
      throw Error(ErrorCode::IncompleteMoments,
                  "projected tensor stops below degree " + std::to_string(p));
}

} // namespace mf
