#pragma once

#include <map>
#include <utility>
#include <vector>

#include "divcurl/elliptic.hpp"
#include "divcurl/grid.hpp"

namespace divcurl {

struct HodgeResult {
  VectorField V1;          // div_{L*}-free part (keeps the mean mode)
  VectorField V2;          // exact part, V2 = grad_L phi2
  ScalarField phi2;        // zero-mean potential
  double residual_div = 0.0;  // ||div_{L*} V1||_2 / ||V||_2
  /* p -> (||V1||_p/||V||_p, ||V2||_p/||V||_p) */
  std::map<double, std::pair<double, double>> norm_ratios;
};

/* Per-frequency orthogonal projection onto span{lambda(xi)}:
   V2_hat = lambda <V_hat, lambda> / |lambda|^2, V1 = V - V2,
   phi2_hat = -i <V_hat, lambda> / |lambda|^2. The sum V1 + V2 = V is exact up
   to roundoff and both parts inherit the grid. */
HodgeResult hodge_decompose(const EllipticSystem& sys, const VectorField& V,
                            const std::vector<double>& p_list = {});

}  // namespace divcurl
