#include "mf/empirical.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mf/error.h"
#include "mf/parallel.h"

namespace mf {
namespace {

constexpr std::size_t kChunk = 8192;

/// Weighted moments of the rows of `points` up to degree p.
MomentTensor moments_of_rows(const Matrix &points, const Vector &weights,
                             int p) {
  const int m = static_cast<int>(points.cols());
  MomentTensor out(m, p);
  const MultiIndexSet &set = out.index_set();
  const std::size_t n = points.rows();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<double> acc(set.size(), 0.0), mono(set.size());
    Vector row(m);
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      row = points.row(i).transpose();
      set.evaluate_all(row.data(), mono.data());
      for (std::size_t s = 0; s < set.size(); ++s)
        acc[s] += weights(i) * mono[s];
    }
    partial[c] = std::move(acc);
  });
  std::vector<double> &v = out.values();
  std::fill(v.begin(), v.end(), 0.0);
  for (const auto &acc : partial)
    for (std::size_t s = 0; s < v.size(); ++s)
      v[s] += acc[s];
  v[0] = 1.0;
  return out;
}

Matrix atom_matrix(const DiscreteDistribution &dist) {
  Matrix a(dist.size(), dist.dim());
  for (std::size_t i = 0; i < dist.size(); ++i)
    a.row(i) = dist.atoms[i].transpose();
  return a;
}

Vector prob_vector(const DiscreteDistribution &dist) {
  return Eigen::Map<const Vector>(dist.probs.data(), dist.probs.size());
}

ProjectedMomentSet project_rows(const Matrix &points, const Vector &weights,
                                const std::vector<Matrix> &measurements, int p,
                                Convention convention, bool sphere) {
  ProjectedMomentSet out;
  out.convention = convention;
  out.p = p;
  out.sphere_supported = sphere;
  out.tensors.resize(measurements.size());
  for (std::size_t j = 0; j < measurements.size(); ++j) {
    const Matrix &q = measurements[j];
    if (q.cols() != points.cols())
      throw Error(ErrorCode::DimensionMismatch,
                  "measurement width differs from the data dimension");
    const Matrix map = convention == Convention::QX
                           ? q
                           : projector_from_measurement(q).matrix();
    out.tensors[j] = moments_of_rows(points * map.transpose(), weights, p);
  }
  return out;
}

std::vector<Matrix> measurements_of(const std::vector<Projector> &nodes) {
  std::vector<Matrix> q;
  q.reserve(nodes.size());
  for (const auto &node : nodes)
    q.push_back(node.measurement());
  return q;
}

} // namespace

void DiscreteDistribution::validate() const {
  if (atoms.empty() || atoms.size() != probs.size())
    throw Error(ErrorCode::InvalidArgument,
                "distribution needs equally many atoms and probabilities");
  double total = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].size() != atoms[0].size())
      throw Error(ErrorCode::DimensionMismatch, "atoms differ in dimension");
    if (!atoms[i].allFinite())
      throw Error(ErrorCode::InvalidArgument, "atom has non-finite entries");
    if (!(probs[i] >= 0))
      throw Error(ErrorCode::InvalidArgument, "negative probability");
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument,
                "probabilities sum to " + std::to_string(total));
  if (sphere && !atoms_on_sphere())
    throw Error(ErrorCode::InvariantViolated,
                "sphere-flagged distribution has a non-unit atom");
}

bool DiscreteDistribution::atoms_on_sphere(double tol) const {
  for (const auto &a : atoms)
    if (std::abs(a.norm() - 1.0) > tol)
      return false;
  return !atoms.empty();
}

DiscreteDistribution
DiscreteDistribution::mixed_with(const DiscreteDistribution &other,
                                 double a) const {
  if (other.dim() != dim())
    throw Error(ErrorCode::DimensionMismatch, "mixture components differ in d");
  DiscreteDistribution out;
  out.sphere = sphere && other.sphere;
  for (std::size_t i = 0; i < size(); ++i) {
    out.atoms.push_back(atoms[i]);
    out.probs.push_back(a * probs[i]);
  }
  for (std::size_t i = 0; i < other.size(); ++i) {
    out.atoms.push_back(other.atoms[i]);
    out.probs.push_back((1 - a) * other.probs[i]);
  }
  return out;
}

DiscreteDistribution DiscreteDistribution::scaled(double factor) const {
  DiscreteDistribution out = *this;
  for (auto &a : out.atoms)
    a *= factor;
  out.sphere = sphere && std::abs(std::abs(factor) - 1.0) == 0.0;
  return out;
}

DiscreteDistribution signed_basis(int d) {
  DiscreteDistribution dist;
  dist.sphere = true;
  for (int i = 0; i < d; ++i)
    for (double s : {1.0, -1.0}) {
      Vector e = Vector::Zero(d);
      e(i) = s;
      dist.atoms.push_back(e);
      dist.probs.push_back(0.5 / d);
    }
  return dist;
}

DiscreteDistribution random_atoms(int d, int m, bool sphere, Rng &rng) {
  if (d < 1 || m < 1)
    throw Error(ErrorCode::InvalidArgument, "need d >= 1 and at least one atom");
  DiscreteDistribution dist;
  dist.sphere = sphere;
  double total = 0;
  for (int i = 0; i < m; ++i) {
    Vector a(d);
    for (int r = 0; r < d; ++r)
      a(r) = rng.normal();
    if (sphere)
      a.normalize();
    dist.atoms.push_back(a);
    dist.probs.push_back(0.5 + rng.uniform());
    total += dist.probs.back();
  }
  for (double &p : dist.probs)
    p /= total;
  return dist;
}

NamedLaw parse_law(const std::string &name) {
  if (name == "uniform_sphere")
    return NamedLaw::UniformSphere;
  if (name == "gaussian")
    return NamedLaw::Gaussian;
  if (name == "dirichlet")
    return NamedLaw::Dirichlet;
  throw Error(ErrorCode::InvalidArgument, "unknown law '" + name + "'");
}

std::string to_string(NamedLaw law) {
  switch (law) {
  case NamedLaw::UniformSphere:
    return "uniform_sphere";
  case NamedLaw::Gaussian:
    return "gaussian";
  case NamedLaw::Dirichlet:
    return "dirichlet";
  }
  return "";
}

SampleBatch sample(const DiscreteDistribution &dist, std::size_t n, Rng &rng) {
  dist.validate();
  std::vector<double> cdf(dist.probs.size());
  std::partial_sum(dist.probs.begin(), dist.probs.end(), cdf.begin());
  SampleBatch batch;
  batch.d = dist.dim();
  batch.seed = rng.seed();
  batch.descriptor = "discrete:" + std::to_string(dist.size()) + "-atoms";
  batch.data.resize(n, batch.d);
  for (std::size_t i = 0; i < n; ++i)
  {
    const double u = rng.uniform() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t j = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
    batch.data.row(i) = dist.atoms[j].transpose();
  }
  return batch;
}

SampleBatch sample(NamedLaw law, int d, std::size_t n, Rng &rng) {
  if (d < 1)
    throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  SampleBatch batch;
  batch.d = d;
  batch.seed = rng.seed();
  batch.descriptor = to_string(law) + ":d=" + std::to_string(d);
  batch.data.resize(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    Vector x(d);
    switch (law) {
    case NamedLaw::UniformSphere:
      do {
        for (int r = 0; r < d; ++r)
          x(r) = rng.normal();
      } while (x.norm() == 0.0);
      x.normalize();
      break;
    case NamedLaw::Gaussian:
      for (int r = 0; r < d; ++r)
        x(r) = rng.normal();
      break;
    case NamedLaw::Dirichlet:
      for (int r = 0; r < d; ++r)
        x(r) = -std::log1p(-rng.uniform()); // Exp(1) = Gamma(1)
      x /= x.sum();
      break;
    }
    batch.data.row(i) = x.transpose();
  }
  return batch;
}

MomentTensor true_moments(const DiscreteDistribution &dist, int p) {
  dist.validate();
  MomentTensor m = moments_of_rows(atom_matrix(dist), prob_vector(dist), p);
  m.sphere_supported = dist.sphere;
  return m;
}

MomentTensor law_moments(NamedLaw law, int d, int p) {
  if (d < 1 || p < 0)
    throw Error(ErrorCode::InvalidArgument, "need d >= 1 and p >= 0");
  MomentTensor m(d, p);
  m.sphere_supported = law == NamedLaw::UniformSphere;
  const MultiIndexSet &set = m.index_set();
  auto double_factorial = [](int n) {
    double f = 1;
    for (; n > 1; n -= 2)
      f *= n;
    return f;
  };
  for (std::size_t i = 1; i < set.size(); ++i) {
    const MultiIndex &s = set[i];
    double v = 1;
    switch (law) {
    case NamedLaw::Gaussian:
    case NamedLaw::UniformSphere: {
      bool even = true;
      for (int e : s.exponents()) {
        even = even && e % 2 == 0;
        v *= double_factorial(e - 1);
      }
      if (!even) {
        v = 0;
        break;
      }
      if (law == NamedLaw::UniformSphere)
        for (int j = 0; j < s.degree() / 2; ++j)
          v /= d + 2 * j;
      break;
    }
    case NamedLaw::Dirichlet:
      // (d-1)! prod s_i! / (d-1+|s|)!
      for (int e : s.exponents())
        for (int f = 2; f <= e; ++f)
          v *= f;
      for (int j = 0; j < s.degree(); ++j)
        v /= d + j;
      break;
    }
    m[i] = v;
  }
  return m;
}

MomentTensor estimate_moments(const SampleBatch &batch, int p) {
  if (batch.n_samples() < 1)
    throw Error(ErrorCode::InvalidArgument, "empty sample batch");
  const Vector w = Vector::Constant(batch.n_samples(), 1.0 / batch.n_samples());
  return moments_of_rows(batch.data, w, p);
}

ProjectedMomentSet project_moments(const DiscreteDistribution &dist,
                                   const MeasurementEnsemble &ensemble, int p,
                                   Convention convention) {
  dist.validate();
  ensemble.validate();
  if (ensemble.d != dist.dim())
    throw Error(ErrorCode::DimensionMismatch, "ensemble and law differ in d");
  return project_rows(atom_matrix(dist), prob_vector(dist), ensemble.matrices,
                      p, convention, dist.sphere);
}

ProjectedMomentSet project_moments(const SampleBatch &batch,
                                   const MeasurementEnsemble &ensemble, int p,
                                   Convention convention) {
  ensemble.validate();
  if (ensemble.d != batch.d)
    throw Error(ErrorCode::DimensionMismatch, "ensemble and batch differ in d");
  const Vector w = Vector::Constant(batch.n_samples(), 1.0 / batch.n_samples());
  return project_rows(batch.data, w, ensemble.matrices, p, convention, false);
}

ProjectedMomentSet project_moments(const DiscreteDistribution &dist,
                                   const std::vector<Projector> &nodes, int p,
                                   Convention convention) {
  return project_moments(dist, ensemble_of(nodes), p, convention);
}

ProjectedMomentSet project_moments(const SampleBatch &batch,
                                   const std::vector<Projector> &nodes, int p,
                                   Convention convention) {
  return project_moments(batch, ensemble_of(nodes), p, convention);
}

MeasurementEnsemble ensemble_of(const std::vector<Projector> &nodes) {
  if (nodes.empty())
    throw Error(ErrorCode::InvalidArgument, "no nodes");
  MeasurementEnsemble ens;
  ens.d = nodes.front().dim();
  ens.k = nodes.front().rank();
  ens.matrices = measurements_of(nodes);
  return ens;
}

McEstimate mean_with_stderr(const Vector &values) {
  const auto n = values.size();
  if (n < 2)
    throw Error(ErrorCode::InvalidArgument, "need at least two values");
  const double mean = values.mean();
  const double ss = (values.array() - mean).square().sum();
  return {mean, std::sqrt(ss / (double(n) * double(n - 1)))};
}

Matrix haar_inner_products(const std::vector<SymMatrix> &ms, int k,
                           std::size_t n, const Rng &rng) {
  if (ms.empty())
    throw Error(ErrorCode::InvalidArgument, "no test matrices");
  const int d = ms.front().dim();
  for (const auto &m : ms)
    if (m.dim() != d)
      throw Error(ErrorCode::DimensionMismatch, "test matrices differ in d");
  if (k < 1 || k >= d)
    throw Error(ErrorCode::InvalidArgument, "require 1 <= k < d");

  Matrix out(n, ms.size());
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Rng local = rng.split(c);
    Matrix v(d, k);
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      // Gram-Schmidt on a Gaussian frame spans a Haar-distributed subspace.
      for (;;) {
        for (int col = 0; col < k; ++col)
          for (int r = 0; r < d; ++r)
            v(r, col) = local.normal();
        bool ok = true;
        for (int col = 0; col < k && ok; ++col) {
          for (int prev = 0; prev < col; ++prev)
            v.col(col) -= v.col(prev).dot(v.col(col)) * v.col(prev);
          const double norm = v.col(col).norm();
          ok = norm > 1e-150;
          v.col(col) /= norm;
        }
        if (ok)
          break;
      }
      for (std::size_t m = 0; m < ms.size(); ++m)
        out(i, m) = (v.transpose() * ms[m].matrix() * v).trace();
    }
  });
  return out;
}

McEstimate mc_trace_moment(const std::vector<SymMatrix> &ms, int k, int d,
                           std::size_t n, const Rng &rng) {
  if (n < 1000)
    throw Error(ErrorCode::InvalidArgument, "Monte Carlo needs N >= 1000");
  if (ms.empty() || ms.front().dim() != d)
    throw Error(ErrorCode::DimensionMismatch, "test matrices must be d x d");
  const Matrix ip = haar_inner_products(ms, k, n, rng);
  const Vector prod = ip.rowwise().prod();
  return mean_with_stderr(prod);
}

} // namespace mf
