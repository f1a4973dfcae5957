#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "divcurl/errors.hpp"

namespace divcurl {

using cdouble = std::complex<double>;

/* System of n constant-coefficient complex vector fields in R^N,
     L_j = d/dx_j + sum_k a_jk d/dx_{n+k},   m = N - n columns,
   with N/2 <= n <= N and n >= 2. Symbol lambda_j(xi) = xi_j + sum_k a_jk xi_{n+k}. */
class EllipticSystem {
 public:
  static EllipticSystem create(int n, int N, std::vector<cdouble> coeffs_row_major);

  int n() const { return n_; }
  int N() const { return N_; }
  int m() const { return N_ - n_; }
  cdouble coeff(int j, int k) const { return coeffs_[j * m() + k]; }
  std::span<const cdouble> coeffs() const { return coeffs_; }

  void symbol(std::span<const double> xi, cdouble* lambda_out) const;
  std::vector<cdouble> symbol(std::span<const double> xi) const;

  /* sum_j |lambda_j(xi)|^2, the second-order symbol of sum_j L_j* L_j */
  double laplacian_symbol(std::span<const double> xi) const;

  /* max_{j,k} |a_jk|, 0 when m = 0 */
  double max_coeff_abs() const;

 private:
  int n_ = 0, N_ = 0;
  std::vector<cdouble> coeffs_;
};

struct EllipticityCertificate {
  double constant = 0.0;            // min over sampled unit directions of laplacian_symbol
  bool elliptic = false;            // constant > tol
  double tol = 0.0;
  int sphere_samples = 0;
  std::vector<double> witness_direction;  // direction attaining the minimum
};

inline constexpr int kMinSphereResolution = 16;

/* Deterministic lower-bound estimate of min_{|xi|=1} sum_j |lambda_j(xi)|^2:
   low-discrepancy sphere sample (Halton + Box-Muller) plus the coordinate
   axes, then local refinement around the best direction. */
EllipticityCertificate certify_ellipticity(const EllipticSystem& sys,
                                           int sphere_resolution = 4096,
                                           double tol = 1e-9);

/* gradient system: n = N, m = 0 */
EllipticSystem gradient_system(int N);

std::string to_json_string(const EllipticSystem& sys);
EllipticSystem system_from_json_string(const std::string& text);

}  // namespace divcurl
