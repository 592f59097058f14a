#include <gtest/gtest.h>

#include <cmath>

#include "mf/error.h"
#include "mf/trace_moments.h"

using namespace mf;

namespace {

Matrix random_sym(int d, Rng &rng) {
  Matrix a(d, d);
  for (int i = 0; i < a.size(); ++i)
    a.data()[i] = rng.normal();
  return 0.5 * (a + a.transpose());
}

Vector random_unit(int d, Rng &rng) {
  Vector v(d);
  for (int i = 0; i < d; ++i)
    v(i) = rng.normal();
  return v.normalized();
}

struct McEstimate {
  double mean, se;
};

McEstimate haar_mc(const std::vector<Matrix> &ms, int k, int n, Rng &rng) {
  const int d = static_cast<int>(ms.front().rows());
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const Matrix p = haar_sample(d, k, rng).matrix();
    double v = 1;
    for (const auto &m : ms)
      v *= trace_inner(p, m);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  return {mean, std::sqrt(std::max(0.0, s2 / n - mean * mean) / n)};
}

} // namespace

TEST(Coefficients, FirstDegree) {
  const auto c = coefficients(1, 3, 1);
  EXPECT_EQ(c.q, 3);
  EXPECT_EQ(c.alpha_1, 1);
  const auto c2 = coefficients(4, 9, 1);
  EXPECT_EQ(c2.q, 9);
  EXPECT_EQ(c2.alpha_1, 4);
}

TEST(Coefficients, SecondDegreeRankOneInThree) {
  const auto c = coefficients(1, 3, 2);
  EXPECT_EQ(c.q, 30);
  EXPECT_EQ(c.alpha_11, 2);
  EXPECT_EQ(c.alpha_2, 4);
}

TEST(Coefficients, ThirdDegreeRankOneInThree) {
  const auto c = coefficients(1, 3, 3);
  EXPECT_EQ(c.q, 210);
  EXPECT_EQ(c.alpha_111, 2);
  EXPECT_EQ(c.alpha_21, 12);
  EXPECT_EQ(c.alpha_3, 16);
}

TEST(Coefficients, PlaneSpecialCase) {
  const auto c = coefficients(1, 2, 3);
  EXPECT_EQ(c.q, 48);
  EXPECT_EQ(c.alpha_111, 1);
  EXPECT_EQ(c.alpha_21, 6);
  EXPECT_EQ(c.alpha_3, 8);
}

TEST(Coefficients, Errors) {
  try {
    coefficients(1, 3, 4);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedDegree);
  }
  EXPECT_THROW(coefficients(3, 3, 1), Error);
  EXPECT_THROW(coefficients(0, 3, 1), Error);
}

TEST(MuT, FirstDegreeIsScaledTrace) {
  Rng rng(20);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix m = random_sym(5, rng);
    EXPECT_NEAR(mu_t(SymMatrix(m), 2, 1), 0.4 * m.trace(), 1e-14);
  }
}

TEST(MuT, ProjectorArgumentGivesLambda) {
  Rng rng(21);
  for (int d = 3; d <= 7; ++d)
    for (int k = 1; k < d; ++k)
      for (int t = 1; t <= 3; ++t) {
        const Projector p = haar_sample(d, k, rng);
        EXPECT_NEAR(mu_t(p.as_sym(), k, t), lambda_t(k, d, t),
                    1e-12 * lambda_t(k, d, t));
      }
}

TEST(MuT, MonteCarloSecondDegreeDiagonal) {
  Rng rng(22);
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = 1;
  const auto mc = haar_mc({m, m}, 1, 200000, rng);
  const double exact = mu_t(SymMatrix(m), 1, 2);
  EXPECT_NEAR(mc.mean, exact, std::max(1e-2 * exact, 3 * mc.se));
}

TEST(MuT, MonteCarloThirdDegree) {
  Rng rng(23);
  for (auto [d, k] : {std::pair{2, 1}, {4, 2}, {5, 3}}) {
    const Matrix m = random_sym(d, rng);
    const auto mc = haar_mc({m, m, m}, k, 200000, rng);
    const double exact = mu_t(SymMatrix(m), k, 3);
    EXPECT_NEAR(mc.mean, exact, std::max(1e-2 * std::abs(exact), 3 * mc.se))
        << "d=" << d << " k=" << k;
  }
}

TEST(MuT, PositiveOnPsd) {
  Rng rng(24);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix a(4, 3);
    for (int i = 0; i < a.size(); ++i)
      a.data()[i] = rng.normal();
    EXPECT_GE(mu_t(SymMatrix(a * a.transpose()), 2, 2), 0.0);
  }
}

TEST(MuMixed, DiagonalConsistency) {
  Rng rng(25);
  const SymMatrix m(random_sym(5, rng));
  EXPECT_NEAR(mu_mixed(m, 2), mu_t(m, 2, 1), 1e-14);
  const double m2 = mu_t(m, 2, 2);
  EXPECT_NEAR(mu_mixed(m, m, 2), m2, 1e-12 * std::abs(m2));
  const double m3 = mu_t(m, 2, 3);
  EXPECT_NEAR(mu_mixed(m, m, m, 2), m3, 1e-12 * std::abs(m3));
}

TEST(MuMixed, EMatrixAgainstOuterProduct) {
  Rng rng(26);
  for (int d = 3; d <= 6; ++d)
    for (int k = 1; k < d; ++k) {
      const Vector x = random_unit(d, rng) * 1.7;
      const Vector y = random_unit(d, rng);
      const double got = mu_mixed(e_matrix(x, y), SymMatrix(x * x.transpose()), k);
      const double want = double(k * (k + 2)) / (d * (d + 2)) * x.dot(y) *
                          x.squaredNorm();
      EXPECT_NEAR(got, want, 1e-12 * (1 + std::abs(want)));
    }
}

TEST(MuMixed, BilinearMonteCarlo) {
  Rng rng(27);
  const Matrix a = random_sym(4, rng), b = random_sym(4, rng);
  const auto mc = haar_mc({a, b}, 2, 200000, rng);
  const double exact = mu_mixed(SymMatrix(a), SymMatrix(b), 2);
  EXPECT_NEAR(mc.mean, exact, std::max(1e-2 * std::abs(exact), 3 * mc.se));
}

TEST(MuMixed, TrilinearNeedsThreeDimensions) {
  const SymMatrix m(Matrix::Identity(2, 2));
  EXPECT_THROW(mu_mixed(m, m, m, 1), Error);
}

TEST(GaussianPairMoment, SmallCases) {
  EXPECT_DOUBLE_EQ(gaussian_pair_moment(2, 0, {1, 0, 1}), 1);
  EXPECT_DOUBLE_EQ(gaussian_pair_moment(1, 1, {1, 0.3, 1}), 0.3);
  EXPECT_DOUBLE_EQ(gaussian_pair_moment(4, 0, {1, 0, 1}), 3);
  EXPECT_DOUBLE_EQ(gaussian_pair_moment(0, 4, {1, 0, 2}), 12);
  EXPECT_DOUBLE_EQ(gaussian_pair_moment(3, 2, {1, 0.5, 1}), 0);
  // E[s^2 t^2] = xx yy + 2 xy^2.
  EXPECT_DOUBLE_EQ(gaussian_pair_moment(2, 2, {2, 0.5, 3}), 6.5);
}

TEST(GaussianPairMoment, IsserlisCount) {
  for (int a = 0; a <= 8; ++a)
    for (int b = 0; b <= 8; ++b) {
      if ((a + b) % 2)
        continue;
      double dfact = 1;
      for (int i = a + b - 1; i > 1; i -= 2)
        dfact *= i;
      EXPECT_DOUBLE_EQ(gaussian_pair_moment(a, b, {1, 1, 1}), dfact);
    }
}

TEST(SphereIntegral, Examples) {
  for (int d = 2; d <= 9; ++d) {
    EXPECT_NEAR(sphere_bilinear_integral(2, 0, {1, 0.2, 1}, d), 1.0 / d, 1e-16);
    EXPECT_NEAR(sphere_bilinear_integral(1, 1, {1, 0.4, 1}, d), 0.4 / d, 1e-16);
    EXPECT_EQ(sphere_bilinear_integral(2, 1, {1, 0.4, 1}, d), 0.0);
  }
}

TEST(SphereIntegral, EvenPowersMatchRisingFactorials) {
  for (int d = 2; d <= 10; ++d)
    for (int l = 0; l <= 8; ++l) {
      const double want = rising_factorial(0.5, l) / rising_factorial(0.5 * d, l);
      EXPECT_NEAR(sphere_bilinear_integral(2 * l, 0, {1, 0, 1}, d), want,
                  1e-14 * want);
    }
}

TEST(SphereIntegral, MonteCarlo) {
  Rng rng(28);
  const int d = 4, n = 200000;
  Vector x(d), y(d);
  x << 1, 0.5, 0, 0;
  y << 0.2, 1, -0.3, 0.4;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const Vector u = random_unit(d, rng);
    const double v = std::pow(u.dot(x), 3) * u.dot(y);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, sphere_bilinear_integral(3, 1, GramPair::of(x, y), d),
              3 * se);
}

TEST(MuRank1, Examples) {
  EXPECT_NEAR(mu_rank1(0, 1, {1, 0.3, 1}, 5), 0.2, 1e-16);
  EXPECT_NEAR(mu_rank1(1, 0, {1, 0.3, 1}, 5), 0.06, 1e-16);
}

TEST(MuRank1, AgreesWithClosedForms) {
  Rng rng(29);
  for (int d = 3; d <= 6; ++d)
    for (int rep = 0; rep < 5; ++rep) {
      const Vector x = random_unit(d, rng), y = random_unit(d, rng);
      const auto g = GramPair::of(x, y);
      for (int t = 1; t <= 3; ++t) {
        const double closed = mu_t(e_matrix(x, y), 1, t);
        EXPECT_NEAR(mu_rank1(t, 0, g, d), closed,
                    1e-12 * std::max(1e-3, std::abs(closed)));
      }
    }
}

TEST(SphereQuadraticMoment, AgreesWithClosedForms) {
  Rng rng(30);
  for (int d = 2; d <= 6; ++d) {
    const SymMatrix m(random_sym(d, rng));
    for (int t = 1; t <= 3; ++t) {
      const double closed = mu_t(m, 1, t);
      EXPECT_NEAR(sphere_quadratic_moment(m, t), closed,
                  1e-12 * (1 + std::abs(closed)));
    }
  }
}

TEST(SphereQuadraticMoment, RankOneMatchesSphereIntegral) {
  for (int d = 3; d <= 7; ++d)
    for (int t = 1; t <= 6; ++t) {
      Vector v = Vector::Zero(d);
      v(0) = 1;
      const double got = sphere_quadratic_moment(SymMatrix(v * v.transpose()), t);
      EXPECT_NEAR(got, lambda_t(1, d, t), 1e-14);
    }
}

TEST(LambdaT, Examples) {
  EXPECT_NEAR(lambda_t(2, 4, 1), 1.0, 1e-15);
  EXPECT_NEAR(lambda_t(1, 3, 2), 0.2, 1e-15);
  EXPECT_NEAR(lambda_t(1, 3, 4), 1.0 / 9, 1e-15);
  EXPECT_NEAR(lambda_t(1, 2, 3), 5.0 / 16, 1e-15);
  try {
    lambda_t(2, 5, 4);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedDegree);
  }
}

TEST(LambdaT, StrictlyBetweenZeroAndPower) {
  for (int d = 2; d <= 8; ++d)
    for (int k = 1; k < d; ++k)
      for (int t = 1; t <= 3; ++t) {
        if (t == 3 && d == 2 && k != 1)
          continue;
        const double l = lambda_t(k, d, t);
        EXPECT_GT(l, 0.0);
        EXPECT_LT(l, std::pow(k, t));
      }
}

TEST(LambdaT, RankOneClosedFormsAgreeWithSphere) {
  for (int d = 2; d <= 8; ++d)
    for (int t = 1; t <= 3; ++t)
      EXPECT_NEAR(lambda_t(1, d, t),
                  sphere_bilinear_integral(t, t, {1, 1, 1}, d), 1e-15);
}
