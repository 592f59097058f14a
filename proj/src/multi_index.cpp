#include "mf/multi_index.h"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <string>
#include <utility>

#include "mf/error.h"
#include "mf/moments.h"

namespace mf {

MultiIndex::MultiIndex(std::vector<int> exponents) : e_(std::move(exponents)) {
  for (int v : e_)
    if (v < 0)
      throw Error(ErrorCode::InvalidArgument, "negative exponent in multi-index");
  degree_ = std::accumulate(e_.begin(), e_.end(), 0);
}

MultiIndex MultiIndex::unit(int d, int i) {
  std::vector<int> e(d, 0);
  e.at(i) = 1;
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::operator+(const MultiIndex &other) const {
  if (size() != other.size())
    throw Error(ErrorCode::DimensionMismatch, "multi-index lengths differ");
  std::vector<int> e(e_);
  for (int i = 0; i < size(); ++i)
    e[i] += other.e_[i];
  return MultiIndex(std::move(e));
}

std::vector<int> MultiIndex::coordinates() const {
  std::vector<int> out;
  out.reserve(degree_);
  for (int i = 0; i < size(); ++i)
    for (int r = 0; r < e_[i]; ++r)
      out.push_back(i);
  return out;
}

double MultiIndex::evaluate(const Eigen::VectorXd &x) const {
  double v = 1.0;
  for (int i = 0; i < size(); ++i)
    for (int r = 0; r < e_[i]; ++r)
      v *= x(i);
  return v;
}

bool graded_less(const MultiIndex &a, const MultiIndex &b) {
  if (a.degree() != b.degree())
    return a.degree() < b.degree();
  return a < b;
}

namespace {

void enumerate(int d, int remaining, int pos, std::vector<int> &cur,
               std::vector<MultiIndex> &out) {
  if (pos == d - 1) {
    cur[pos] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    cur[pos] = v;
    enumerate(d, remaining - v, pos + 1, cur, out);
  }
}

} // namespace

MultiIndexSet::MultiIndexSet(int d, int p) : d_(d), p_(p) {
  if (d < 1 || p < 0)
    throw Error(ErrorCode::InvalidArgument, "multi-index set needs d >= 1, p >= 0");
  offsets_.push_back(0);
  std::vector<int> cur(d, 0);
  for (int t = 0; t <= p; ++t) {
    std::vector<MultiIndex> level;
    enumerate(d, t, 0, cur, level);
    std::sort(level.begin(), level.end());
    for (auto &s : level)
      list_.push_back(std::move(s));
    offsets_.push_back(list_.size());
  }
  for (std::size_t i = 0; i < list_.size(); ++i)
    lookup_.emplace(list_[i].exponents(), i);

  parent_.assign(list_.size(), 0);
  var_.assign(list_.size(), -1);
  for (std::size_t i = 1; i < list_.size(); ++i) {
    std::vector<int> e = list_[i].exponents();
    int v = 0;
    while (e[v] == 0)
      ++v;
    --e[v];
    parent_[i] = lookup_.at(e);
    var_[i] = v;
  }
}

std::shared_ptr<const MultiIndexSet> MultiIndexSet::get(int d, int p) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const MultiIndexSet>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto &slot = cache[{d, p}];
  if (!slot)
    slot = std::make_shared<const MultiIndexSet>(d, p);
  return slot;
}

std::optional<std::size_t> MultiIndexSet::find(const MultiIndex &s) const {
  auto it = lookup_.find(s.exponents());
  if (it == lookup_.end())
    return std::nullopt;
  return it->second;
}

std::size_t MultiIndexSet::index_of(const MultiIndex &s) const {
  if (auto i = find(s))
    return *i;
  throw Error(ErrorCode::IncompleteMoments,
              "multi-index of degree " + std::to_string(s.degree()) +
                  " not available (d=" + std::to_string(d_) +
                  ", p=" + std::to_string(p_) + ")");
}

void MultiIndexSet::evaluate_all(const double *x, double *out) const {
  out[0] = 1.0;
  for (std::size_t i = 1; i < list_.size(); ++i)
    out[i] = out[parent_[i]] * x[var_[i]];
}

Polynomial Polynomial::constant(int d, double c) {
  Polynomial p(d);
  p.add(MultiIndex::zero(d), c);
  return p;
}

Polynomial Polynomial::linear(const Eigen::VectorXd &coef) {
  const int d = static_cast<int>(coef.size());
  Polynomial p(d);
  for (int i = 0; i < d; ++i)
    if (coef(i) != 0.0)
      p.add(MultiIndex::unit(d, i), coef(i));
  return p;
}

Polynomial Polynomial::squared_norm(int d) {
  Polynomial p(d);
  for (int i = 0; i < d; ++i) {
    std::vector<int> e(d, 0);
    e[i] = 2;
    p.add(MultiIndex(std::move(e)), 1.0);
  }
  return p;
}

void Polynomial::add(const MultiIndex &s, double c) {
  if (s.size() != d_)
    throw Error(ErrorCode::DimensionMismatch, "polynomial term has wrong length");
  terms_[s] += c;
}

Polynomial Polynomial::operator*(const Polynomial &other) const {
  if (other.d_ != d_)
    throw Error(ErrorCode::DimensionMismatch, "polynomials differ in dimension");
  Polynomial out(d_);
  for (const auto &[sa, ca] : terms_)
    for (const auto &[sb, cb] : other.terms_)
      out.terms_[sa + sb] += ca * cb;
  return out;
}

Polynomial Polynomial::pow(int n) const {
  Polynomial out = constant(d_, 1.0);
  for (int i = 0; i < n; ++i)
    out = out * *this;
  return out;
}

Polynomial &Polynomial::operator+=(const Polynomial &other) {
  if (other.d_ != d_)
    throw Error(ErrorCode::DimensionMismatch, "polynomials differ in dimension");
  for (const auto &[s, c] : other.terms_)
    terms_[s] += c;
  return *this;
}

Polynomial Polynomial::operator*(double c) const {
  Polynomial out(*this);
  for (auto &term : out.terms_)
    term.second *= c;
  return out;
}

double Polynomial::evaluate(const Eigen::VectorXd &x) const {
  double v = 0.0;
  for (const auto &[s, c] : terms_)
    v += c * s.evaluate(x);
  return v;
}

double Polynomial::expectation(const MomentTensor &moments) const {
  if (moments.dim() != d_)
    throw Error(ErrorCode::DimensionMismatch, "moment tensor dimension differs");
  double v = 0.0;
  for (const auto &[s, c] : terms_)
    v += c * moments.at(s);
  return v;
}

} // namespace mf
