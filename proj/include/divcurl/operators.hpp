#pragma once

#include "divcurl/elliptic.hpp"
#include "divcurl/grid.hpp"

namespace divcurl {

enum class Pairing { bilinear, sesquilinear };

/* L_j u for one j (multiplier i*lambda_j) */
ScalarField apply_L(const EllipticSystem& sys, int j, const ScalarField& u);
/* L_j* u = -conj(L_j) u (multiplier -i*conj(lambda_j) at real xi) */
ScalarField apply_Lstar(const EllipticSystem& sys, int j, const ScalarField& u);

/* plain coordinate derivative d/dx_a (multiplier i*xi_a) */
ScalarField apply_partial(const GridSpec& g, int axis, const ScalarField& u);

VectorField grad_L(const EllipticSystem& sys, const ScalarField& u);
VectorField grad_Lstar(const EllipticSystem& sys, const ScalarField& u);
VectorField grad_plain(const ScalarField& u);  // all N coordinate derivatives

ScalarField div_Lstar(const EllipticSystem& sys, const VectorField& V);

/* entries (i,j) = L_i W_j - L_j W_i; lower triangle is the exact negation of
   the upper so antisymmetry holds bitwise */
MatrixField curl_L(const EllipticSystem& sys, const VectorField& W);

/* pointwise product; sesquilinear conjugates the second factor */
ScalarField dot(const VectorField& V, const VectorField& W,
                Pairing pairing = Pairing::sesquilinear);

/* symbol of [L_i, L_j]; identically zero for constant coefficients, exposed so
   tests can assert it on the frequency lattice */
cdouble commutator_symbol(const EllipticSystem& sys, int i, int j,
                          std::span<const double> xi);

/* dimensionless cancellation metrics: how strongly the combination vanishes
   against the size of its individual derivative terms */
double div_cancellation_residual(const EllipticSystem& sys, const VectorField& V);
double curl_cancellation_residual(const EllipticSystem& sys, const VectorField& W);

}  // namespace divcurl
