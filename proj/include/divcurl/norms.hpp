#pragma once

#include <vector>

#include "divcurl/grid.hpp"

namespace divcurl {

/* Finite decreasing dyadic scale set for the grand maximal function. Scales
   live in (0,1); the smallest must resolve the grid (>= 2 cells, default
   chooser keeps >= 4). */
struct MollifierSpec {
  std::vector<double> scales;
};

MollifierSpec make_scales(const GridSpec& g, int K);
MollifierSpec default_scales(const GridSpec& g);  // K largest with 2^-K >= 4*max spacing

/* radial profile exp(-1/(1-r^2)) on r < 1, zero outside */
double mollifier_profile(double r);
/* normalizer c_N with integral over the unit ball of c_N*profile equal to 1,
   radial quadrature, checked to 1e-6 by tests */
double mollifier_normalizer(int N);

double unit_ball_volume(int N);
double ball_volume(int N, double r);

/* m_phi f = max_t |phi_t * f| over the scale set; each sampled phi_t is
   renormalized to unit discrete mass so constants are reproduced exactly */
ScalarField grand_maximal(const ScalarField& f, const MollifierSpec& m);

/* local Hardy space norm surrogate: L^1 of the grand maximal function */
double h1_norm(const ScalarField& f, const MollifierSpec& m);

struct BallSpec {
  std::vector<double> center;  // physical coordinates in [0, box)
  double radius = 0.0;
};

struct BallFamily {
  std::vector<BallSpec> balls;
};

/* centers on a stride sublattice of the grid, one ball per (center, radius);
   every radius must fit the torus (<= min box / 2) */
BallFamily make_ball_family(const GridSpec& g, int stride,
                            const std::vector<double>& radii);

/* max over family balls containing x of the in-ball average of |f|; points
   covered by no ball get 0. Ball membership uses the torus metric, boundary
   ties included. */
ScalarField hl_maximal(const ScalarField& f, const BallFamily& balls);

/* sup over balls of volume <= 1 of mean oscillation plus sup over balls of
   volume > 1 of the average modulus; requires both regimes present */
double bmo_norm(const ScalarField& g, const BallFamily& balls);

/* midpoint quadrature L^p norms, p in (1, inf); modulus is Euclidean for
   vectors and Frobenius for matrices */
double lp_norm(const ScalarField& f, double p);
double lp_norm(const VectorField& f, double p);
double lp_norm(const MatrixField& f, double p);

double l1_norm(const ScalarField& f);

/* integral of g * conj(f) */
cdouble pair_fields(const ScalarField& g, const ScalarField& f);

}  // namespace divcurl
