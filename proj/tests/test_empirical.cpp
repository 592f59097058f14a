#include <gtest/gtest.h>

#include <cmath>

#include "mf/empirical.h"
#include "mf/error.h"
#include "mf/trace_moments.h"

using namespace mf;

TEST(DiscreteDistribution, SignedBasisMoments) {
  const auto m = true_moments(signed_basis(3), 4);
  EXPECT_TRUE(m.sphere_supported);
  m.validate();
  EXPECT_DOUBLE_EQ(m.at(MultiIndex({1, 0, 0})), 0.0);
  EXPECT_NEAR(m.at(MultiIndex({2, 0, 0})), 1.0 / 3, 1e-15);
  EXPECT_DOUBLE_EQ(m.at(MultiIndex({1, 1, 0})), 0.0);
  EXPECT_NEAR(m.at(MultiIndex({0, 0, 4})), 1.0 / 3, 1e-15);
  EXPECT_DOUBLE_EQ(m.at(MultiIndex({2, 2, 0})), 0.0);
}

TEST(DiscreteDistribution, ValidateRejectsBadInput) {
  DiscreteDistribution d = signed_basis(2);
  d.probs[0] += 0.1;
  EXPECT_THROW(d.validate(), Error);
  d = signed_basis(2);
  d.atoms[1] *= 2;
  try {
    d.validate();
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::InvariantViolated);
  }
  d.sphere = false;
  EXPECT_NO_THROW(d.validate());
}

TEST(DiscreteDistribution, ScaledAndMixed) {
  Rng rng(3);
  const auto a = random_atoms(3, 4, true, rng);
  EXPECT_TRUE(a.atoms_on_sphere());
  EXPECT_FALSE(a.scaled(2.0).sphere);
  EXPECT_TRUE(a.scaled(-1.0).sphere);
  const auto mix = a.mixed_with(signed_basis(3), 0.25);
  mix.validate();
  EXPECT_EQ(mix.size(), 10u);
  EXPECT_TRUE(mix.sphere);
}

TEST(Sampling, EmpiricalMomentsConverge) {
  Rng rng(4);
  const auto dist = random_atoms(3, 5, false, rng);
  const auto batch = sample(dist, 200000, rng);
  EXPECT_EQ(batch.n_samples(), 200000u);
  const auto est = estimate_moments(batch, 2);
  EXPECT_LE(est.max_abs_diff(true_moments(dist, 2)), 0.03);
}

TEST(Sampling, NamedLaws) {
  Rng rng(5);
  const auto sphere = sample(NamedLaw::UniformSphere, 4, 50000, rng);
  for (Eigen::Index i = 0; i < 10; ++i)
    EXPECT_NEAR(sphere.data.row(i).norm(), 1.0, 1e-14);
  const auto m = estimate_moments(sphere, 2);
  EXPECT_NEAR(m.at(MultiIndex({2, 0, 0, 0})), 0.25, 0.01);

  const auto dir = sample(NamedLaw::Dirichlet, 3, 50000, rng);
  for (Eigen::Index i = 0; i < 10; ++i) {
    EXPECT_NEAR(dir.data.row(i).sum(), 1.0, 1e-14);
    EXPECT_GE(dir.data.row(i).minCoeff(), 0.0);
  }
  // Flat Dirichlet on three coordinates: E X1 = 1/3, E X1^2 = 1/6.
  const auto md = estimate_moments(dir, 2);
  EXPECT_NEAR(md.at(MultiIndex({1, 0, 0})), 1.0 / 3, 0.01);
  EXPECT_NEAR(md.at(MultiIndex({2, 0, 0})), 1.0 / 6, 0.01);

  const auto g = estimate_moments(sample(NamedLaw::Gaussian, 2, 50000, rng), 2);
  EXPECT_NEAR(g.at(MultiIndex({2, 0})), 1.0, 0.03);
  EXPECT_NEAR(g.at(MultiIndex({1, 1})), 0.0, 0.03);
}

TEST(Sampling, LawNamesRoundTrip) {
  for (auto law : {NamedLaw::UniformSphere, NamedLaw::Gaussian, NamedLaw::Dirichlet})
    EXPECT_EQ(parse_law(to_string(law)), law);
  EXPECT_THROW(parse_law("cauchy"), Error);
}

TEST(Sampling, DeterministicForSeed) {
  Rng a(9), b(9);
  EXPECT_EQ(sample(NamedLaw::Gaussian, 3, 100, a).data,
            sample(NamedLaw::Gaussian, 3, 100, b).data);
}

TEST(ProjectMoments, CoordinateMeasurement) {
  MeasurementEnsemble ens;
  ens.d = 3;
  ens.k = 1;
  Matrix q = Matrix::Zero(1, 3);
  q(0, 2) = 2.0; // not normalized: QX = 2 X3, PX = (0, 0, X3)
  ens.matrices.push_back(q);
  DiscreteDistribution dist;
  dist.atoms = {Vector::Constant(3, 1.0), Vector::Constant(3, -0.5)};
  dist.probs = {0.5, 0.5};
  const auto qx = project_moments(dist, ens, 2, Convention::QX);
  EXPECT_EQ(qx.tensors[0].dim(), 1);
  EXPECT_NEAR(qx.tensors[0].at(MultiIndex({1})), 0.5, 1e-15);
  EXPECT_NEAR(qx.tensors[0].at(MultiIndex({2})), 2.5, 1e-15);
  const auto px = project_moments(dist, ens, 2, Convention::PX);
  EXPECT_EQ(px.tensors[0].dim(), 3);
  EXPECT_NEAR(px.tensors[0].at(MultiIndex({0, 0, 2})), 0.625, 1e-15);
  EXPECT_DOUBLE_EQ(px.tensors[0].at(MultiIndex({1, 0, 0})), 0.0);
}

TEST(ProjectMoments, SampleBatchMatchesLawOnAtoms) {
  // A batch listing every atom once is the uniform law on those atoms.
  Rng rng(6);
  DiscreteDistribution dist = random_atoms(4, 6, false, rng);
  dist.probs.assign(6, 1.0 / 6);
  SampleBatch batch;
  batch.d = 4;
  batch.data.resize(6, 4);
  for (int i = 0; i < 6; ++i)
    batch.data.row(i) = dist.atoms[i].transpose();
  std::vector<Projector> nodes;
  for (int j = 0; j < 3; ++j)
    nodes.push_back(haar_sample(4, 2, rng));
  const auto a = project_moments(dist, nodes, 3, Convention::PX);
  const auto b = project_moments(batch, nodes, 3, Convention::PX);
  for (int j = 0; j < 3; ++j)
    EXPECT_LE(a.tensors[j].max_abs_diff(b.tensors[j]), 1e-14);
  EXPECT_EQ(ensemble_of(nodes).k, 2);
}

TEST(MonteCarlo, StandardErrorFormula) {
  Vector v(4);
  v << 1, 2, 3, 4;
  const auto e = mean_with_stderr(v);
  EXPECT_DOUBLE_EQ(e.estimate, 2.5);
  EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 12.0), 1e-15);
}

TEST(MonteCarlo, TraceMomentAgreesWithClosedForm) {
  Rng rng(7);
  Vector x(4), y(4);
  for (int i = 0; i < 4; ++i) {
    x(i) = rng.normal();
    y(i) = rng.normal();
  }
  const SymMatrix m = e_matrix(x, y);
  const auto mc = mc_trace_moment({m, m}, 2, 4, 100000, Rng(8));
  const double exact = mu_t(m, 2, 2);
  EXPECT_LE(std::abs(mc.estimate - exact), 5 * mc.std_error + 1e-12);
}

TEST(MonteCarlo, ThreadIndependentChunks) {
  const SymMatrix m(Matrix::Identity(3, 3));
  const Matrix a = haar_inner_products({m}, 1, 20000, Rng(11));
  const Matrix b = haar_inner_products({m}, 1, 20000, Rng(11));
  EXPECT_EQ(a, b);
  EXPECT_NEAR(a.col(0).minCoeff(), 1.0, 1e-12);
  EXPECT_NEAR(a.col(0).maxCoeff(), 1.0, 1e-12);
}

TEST(MonteCarlo, RejectsTinySamples) {
  const SymMatrix m(Matrix::Identity(3, 3));
  EXPECT_THROW(mc_trace_moment({m}, 1, 3, 10, Rng(1)), Error);
}

TEST(LawMoments, ClosedFormsMatchSampling) {
  Rng rng(12);
  for (auto law : {NamedLaw::UniformSphere, NamedLaw::Gaussian, NamedLaw::Dirichlet}) {
    const auto exact = law_moments(law, 3, 4);
    const auto est = estimate_moments(sample(law, 3, 200000, rng), 4);
    EXPECT_LE(est.max_abs_diff(exact), 0.1) << to_string(law);
  }
  const auto s = law_moments(NamedLaw::UniformSphere, 3, 4);
  s.validate();
  EXPECT_NEAR(s.at(MultiIndex({4, 0, 0})), 0.2, 1e-15);
  EXPECT_NEAR(s.at(MultiIndex({2, 2, 0})), 1.0 / 15, 1e-15);
  EXPECT_DOUBLE_EQ(law_moments(NamedLaw::Gaussian, 2, 4).at(MultiIndex({4, 0})), 3.0);
  EXPECT_NEAR(law_moments(NamedLaw::Dirichlet, 3, 2).at(MultiIndex({1, 1, 0})),
              1.0 / 12, 1e-15);
}
