#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "divcurl/elliptic.hpp"
#include "divcurl/grid.hpp"
#include "divcurl/norms.hpp"
#include "divcurl/operators.hpp"

namespace divcurl {

/* C-infinity ramp: 1 for s <= 0, 0 for s >= 1, exponential smoothstep between
   (all one-sided derivatives vanish at the endpoints, so the plateau values
   are exact and spectral residuals of sampled cutoffs decay near-exponentially) */
double smoothstep_ramp(double s);
double smoothstep_ramp_deriv(double s);

/* radial cutoff: 1 on the closed ball B(center,r), 0 outside B(center,2r);
   center in box-centered coordinates */
ScalarField make_cutoff(const GridSpec& g, std::span<const double> center, double r);

/* closed-form complex scalar with known gradient, evaluated in box-centered
   coordinates; the one shape witness constructions need */
struct AnalyticGaussian {
  std::vector<double> center;
  double width = 1.0;
  cdouble amplitude = 1.0;

  cdouble eval(std::span<const double> y) const;
  void grad(std::span<const double> y, cdouble* out) const;  // plain gradient
  ScalarField sample(const GridSpec& g) const;
};

/* amplitude chosen by quadrature so ||grad u||_{L^q} = 1 */
AnalyticGaussian normalized_gradient_bump(const GridSpec& g,
                                          std::span<const double> center,
                                          double width, double q = 2.0);

enum class WitnessKind { small_p, large_p, unit_ball, factor_grad, factor_div };
enum class FactorSide { grad, div };

const char* to_string(WitnessKind k);

struct CertEntry {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct WitnessCertificate {
  std::vector<CertEntry> entries;
  std::map<std::string, double> constants;
  bool pass() const;
  const CertEntry* find(const std::string& name) const;
};

struct WitnessTolerances {
  double residual = 1e-9;  // vanishing-side relative residual
  double budget = 1e-6;    // norm budgets <= 1 + budget
  double product = 1e-8;   // product identity residual, relative to sup |rhs|
  double support = 1e-8;   // relative leakage outside the stated support
  double equality = 1e-12; // exact-by-construction equalities
  bool enforce = true;     // throw HypothesisError when input hypotheses fail
};

struct WitnessPair {
  WitnessKind kind = WitnessKind::small_p;
  EllipticSystem sys;
  GridSpec grid;
  VectorField V, W;
  Pairing product_convention = Pairing::sesquilinear;
  int i = 0, j = 1;
  double p = 2.0;
  std::vector<double> center;  // ball center, box-centered coordinates
  double radius = 1.0;
  AnalyticGaussian input;      // u (pair kinds) or phi (factor kinds)
  double extra_scale_V = 1.0;  // rescaling prefactors composed on top of the
  double extra_scale_W = 1.0;  // analytic construction
  WitnessCertificate cert;
};

/* V = (|B|^{1/2-1/p}/2C)(conj(L_i u) e_j - conj(L_j u) e_i),
   W = gamma |B|^{-1/p'} grad_L((x_j - x0_j) eta_B); 1 < p <= 2;
   requires ||grad u||_{L^2} <= 1 and supp u inside B */
WitnessPair witness_small_p(const EllipticSystem& sys, const GridSpec& g,
                            const AnalyticGaussian& u, const BallSpec& B, int i,
                            int j, double p, const WitnessTolerances& tol = {});

/* V = gamma' |B|^{-1/p} (L_i*(psi) e_j - L_j*(psi) e_i) with
   psi = (x_j - x0_j) eta_B, W = (|B|^{1/2-1/p'}/C) grad_L u; p > 2 */
WitnessPair witness_large_p(const EllipticSystem& sys, const GridSpec& g,
                            const AnalyticGaussian& u, const BallSpec& B, int i,
                            int j, double p, const WitnessTolerances& tol = {});

/* unit ball at the box center, requires ||grad u||_{L^{p'}} <= 1;
   W = C^{-1} grad_L u, V as in witness_large_p without the W-side |B| factor */
WitnessPair witness_unit_ball(const EllipticSystem& sys, const GridSpec& g,
                              const AnalyticGaussian& u, int i, int j, double p,
                              const WitnessTolerances& tol = {});

/* side=grad: V1 = phi e_1, W1 = grad_L(x_1 eta), product = phi;
   side=div:  V2 = L_2*(x_1 eta) e_1 - L_1*(x_1 eta) e_2, W2 = phi e_2.
   The div-side product equals phi under the bilinear convention (the grad side
   is exact under both); the convention is recorded on the pair. phi must be
   supported in the unit ball at the box center. */
WitnessPair factorize_phi(const EllipticSystem& sys, const GridSpec& g,
                          const AnalyticGaussian& phi, FactorSide side, double p,
                          const WitnessTolerances& tol = {});

/* V(x) = R^{-N/p} V~((x-x0)/R), W(x) = R^{-N/p'} W~((x-x0)/R), realized by
   re-instantiating the construction on the scaled ball. The input bump moves
   with the change of variables and is re-normalized by quadrature at the new
   geometry, so the input hypothesis holds exactly after the move; the
   re-normalization differs from the closed-form amplitude transfer only by
   the quadrature error of the two widths (recorded in the certificate
   constants). L^p/L^{p'} norms are preserved up to that same transfer error.
   x0 is given in box-centered coordinates; p must match the pair. */
WitnessPair rescale_to_ball(const WitnessPair& base, std::span<const double> x0,
                            double R, double p, const WitnessTolerances& tol = {});

/* recompute the full certificate from the stored fields */
WitnessCertificate verify(const WitnessPair& pair, const WitnessTolerances& tol = {});

/* membership scaling of Lemma-type factorizations: the scalar multiples putting
   (V1,W1) into (DC_L)^p_{1,0} resp. (V2,W2) into (DC_L)^p_{0,1}; all three
   defining budgets of the scaled pair are <= 1 (reported in the certificate) */
struct MembershipScaling {
  double scale_V = 1.0;
  double scale_W = 1.0;
  double budget_V = 0.0, budget_W = 0.0, budget_structure = 0.0;
};
MembershipScaling membership_scaling(const WitnessPair& factor_pair);

}  // namespace divcurl
