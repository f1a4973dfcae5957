#pragma once

#include <functional>
#include <vector>

#include "divcurl/elliptic.hpp"
#include "divcurl/grid.hpp"

namespace divcurl {

/* Coefficients c_k = (1/M) sum_x f(x) exp(-i xi_k . x), so that
   f(x) = sum_k c_k exp(i xi_k . x) and inverse_transform is the exact inverse.
   Layout matches the grid (row-major over DFT-ordered integer frequencies). */
std::vector<cdouble> forward_transform(const ScalarField& f);
ScalarField inverse_transform(const GridSpec& g, const std::vector<cdouble>& coeffs);

/* multiplier values tabulated over the frequency lattice, same layout */
std::vector<cdouble> tabulate_multiplier(
    const GridSpec& g, const std::function<cdouble(std::span<const double>)>& mult);

ScalarField apply_multiplier_array(const ScalarField& f, std::span<const cdouble> mult);
ScalarField apply_multiplier(const ScalarField& f,
                             const std::function<cdouble(std::span<const double>)>& mult);

/* Zero-mean solution of (sum_j L_j* L_j) u = f: divides by laplacian_symbol at
   every nonzero frequency, kills the mean. Throws ConstraintError if the
   symbol degenerates (non-elliptic system) at some nonzero grid frequency. */
ScalarField inverse_laplacian(const EllipticSystem& sys, const ScalarField& f);

double linf_norm(const ScalarField& f);
double l2_norm(const ScalarField& f);  // integral quadrature norm, not coefficient norm

}  // namespace divcurl
