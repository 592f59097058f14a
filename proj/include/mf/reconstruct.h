#pragma once

#include <vector>

#include "mf/cubature.h"
#include "mf/grassmann.h"
#include "mf/moments.h"
#include "mf/multi_index.h"

namespace mf {

/// One term c * <x, y>^t of a polarization expansion. The direction is an
/// integer combination of standard basis vectors, stored primitive with its
/// first nonzero entry positive.
struct PolarizationTerm {
  double coefficient = 0;
  Vector direction;
};

/// x^alpha = sum_terms c <x, y>^t with t = |alpha|, by inclusion-exclusion
/// over subsets of the repeated coordinate list. Collinear directions are
/// merged and vanishing terms dropped. Throws DegreeZero for |alpha| = 0.
std::vector<PolarizationTerm> polarize(const MultiIndex &alpha);

/// Moments of P X from moments of Q X (ambient dimension k) via
/// P X = Z Q X with Z = Q^T (Q Q^T)^{-1}.
MomentTensor pushforward(const Matrix &q, const MomentTensor &qx, int p);

/// Moments of A X up to degree p from moments of X.
MomentTensor linear_image(const Matrix &a, const MomentTensor &m, int p);

/// Converts a QX-convention set to PX using the given measurement matrices;
/// PX-convention input is returned unchanged.
ProjectedMomentSet to_px(const ProjectedMomentSet &projected,
                         const std::vector<Matrix> &measurements);

/// Reconstruction constants for rank k in dimension d (d >= 3).
struct FusionConstants {
  double a1 = 0, a2 = 0, b2 = 0, a3 = 0, b3 = 0;
  double c1 = 0, c2 = 0;
};
FusionConstants fusion_constants(int k, int d);

/// Gap above which reconstructed tensors are flagged approximate.
inline constexpr double kExactGapTol = 1e-8;

/// Moments of X on the unit sphere up to degree t <= 3. QX-convention input
/// refers to the canonical measurement matrices Projector::measurement() of
/// the rule nodes.
MomentTensor reconstruct_sphere(const CubatureRule &rule,
                                const ProjectedMomentSet &projected, int t,
                                double tol = kExactGapTol);

/// Moments of X in R^d up to degree t <= 3.
MomentTensor reconstruct_general(const CubatureRule &rule,
                                 const ProjectedMomentSet &projected, int t,
                                 double tol = kExactGapTol);

/// a_0..a_{t/2} with sum_i a_i mu_rank1(t-2i, i, (1,c,1), d) = c^t for all c.
/// Throws DimensionTooSmall for t > d and IllConditioned if the fit residual
/// at held-out points exceeds 1e-10.
std::vector<double> rank1_coefficients(int t, int d);

/// Largest residual of the rank1_coefficients fit over `points` evaluation
/// values of c spread over (-1, 1).
double rank1_fit_residual(int t, int d, const std::vector<double> &a,
                          int points = 50);

/// Moments of X in R^d of every degree up to t from a rank-one rule
/// (t <= d), through polarization and the rank-one trace moments.
MomentTensor reconstruct_rank1(const CubatureRule &rule,
                               const ProjectedMomentSet &projected, int t,
                               double tol = kExactGapTol);

/// Coordinate measurement families whose projected monomials span all
/// polynomials of degree <= p: k = 1 with p <= 4, or k = 2 with p <= 2.
MeasurementEnsemble spanning_family(int p, int d, int k);

/// Least-squares recovery of all moments of degree <= p from QX-convention
/// moments of a spanning ensemble. Throws SpanDeficient when the projected
/// monomials do not span some degree.
MomentTensor spanning_reconstruct(const MeasurementEnsemble &ensemble,
                                  const ProjectedMomentSet &projected, int p);

} // namespace mf
