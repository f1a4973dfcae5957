#include "divcurl/hodge.hpp"

#include <cmath>

#include "divcurl/norms.hpp"
#include "divcurl/operators.hpp"
#include "divcurl/spectral.hpp"

namespace divcurl {

HodgeResult hodge_decompose(const EllipticSystem& sys, const VectorField& V,
                            const std::vector<double>& p_list) {
  const GridSpec& g = V.grid();
  if (sys.N() != g.N) throw DimensionError("hodge_decompose: system/grid dimension");
  if (V.components() != sys.n())
    throw DimensionError("hodge_decompose: field must have n components");
  const int n = sys.n();
  const std::size_t M = g.size();

  std::vector<std::vector<cdouble>> vhat(n);
  for (int c = 0; c < n; ++c) vhat[c] = forward_transform(V[c]);

  /* per-frequency projection onto span{lambda(xi)}; the zero mode stays in V1 */
  std::vector<std::vector<cdouble>> v2hat(n, std::vector<cdouble>(M));
  std::vector<cdouble> phihat(M);
  double xi[16];
  cdouble lam[64];
  for_each_point(g, [&](std::size_t flat, const int* idx) {
    g.frequency(idx, xi);
    double xi2 = 0.0;
    for (int a = 0; a < g.N; ++a) xi2 += xi[a] * xi[a];
    if (xi2 == 0.0) {
      for (int c = 0; c < n; ++c) v2hat[c][flat] = 0.0;
      phihat[flat] = 0.0;
      return;
    }
    sys.symbol(std::span<const double>(xi, g.N), lam);
    double lam2 = 0.0;
    for (int c = 0; c < n; ++c) lam2 += std::norm(lam[c]);
    if (!(lam2 > 1e-12 * xi2))
      throw ConstraintError("hodge_decompose: degenerate symbol (system not elliptic)");
    cdouble proj = 0.0;
    for (int c = 0; c < n; ++c) proj += vhat[c][flat] * std::conj(lam[c]);
    proj /= lam2;
    for (int c = 0; c < n; ++c) v2hat[c][flat] = proj * lam[c];
    phihat[flat] = cdouble(0.0, -1.0) * proj;  // V2 = grad_L phi2 per mode
  });

  HodgeResult result;
  std::vector<ScalarField> v2comps, v1comps;
  v2comps.reserve(n);
  v1comps.reserve(n);
  for (int c = 0; c < n; ++c) {
    ScalarField v2c = inverse_transform(g, v2hat[c]);
    ScalarField v1c = ScalarField::zeros(g);
    auto v1 = v1c.values();
    auto v2 = v2c.values();
    auto v = V[c].values();
    for (std::size_t s = 0; s < M; ++s) v1[s] = v[s] - v2[s];
    v2comps.push_back(std::move(v2c));
    v1comps.push_back(std::move(v1c));
  }
  result.V1 = VectorField(g, std::move(v1comps));
  result.V2 = VectorField(g, std::move(v2comps));
  result.phi2 = inverse_transform(g, phihat);

  double vnorm2 = 0.0;
  for (int c = 0; c < n; ++c) {
    const double t = l2_norm(V[c]);
    vnorm2 += t * t;
  }
  vnorm2 = std::sqrt(vnorm2);
  ScalarField div1 = div_Lstar(sys, result.V1);
  result.residual_div = vnorm2 > 0.0 ? l2_norm(div1) / vnorm2 : 0.0;

  for (double p : p_list) {
    const double vn = lp_norm(V, p);
    if (vn == 0.0) {
      result.norm_ratios[p] = {0.0, 0.0};
      continue;
    }
    result.norm_ratios[p] = {lp_norm(result.V1, p) / vn, lp_norm(result.V2, p) / vn};
  }
  return result;
}

}  // namespace divcurl
