#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "divcurl/grid.hpp"
#include "divcurl/norms.hpp"
#include "divcurl/operators.hpp"
#include "divcurl/witness.hpp"

using namespace divcurl;

namespace {

const cdouble I(0.0, 1.0);

// 64 samples across the cutoff transition keeps the spectral residual of the
// sampled cutoff below the 1e-9 certificate tolerance; fine_grid reaches that
// for radius-2 balls, unit_grid for the radius-1 constructions
GridSpec fine_grid() { return make_grid(2, {256, 256}, {8.0, 8.0}); }
GridSpec unit_grid() { return make_grid(2, {256, 256}, {4.0, 4.0}); }

EllipticSystem grad2() { return gradient_system(2); }
EllipticSystem cr_system() {
  return EllipticSystem::create(2, 3, {I, cdouble(0.0)});
}

const CertEntry* need(const WitnessCertificate& c, const std::string& name) {
  const CertEntry* e = c.find(name);
  REQUIRE(e != nullptr);
  return e;
}

}  // namespace

TEST_CASE("smoothstep ramp endpoints, symmetry, and derivative") {
  CHECK(smoothstep_ramp(-1.0) == 1.0);
  CHECK(smoothstep_ramp(0.0) == 1.0);
  CHECK(smoothstep_ramp(1.0) == 0.0);
  CHECK(smoothstep_ramp(2.0) == 0.0);
  CHECK(smoothstep_ramp(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  // f(s) + f(1-s) = 1 by construction
  for (double s : {0.1, 0.3, 0.42, 0.77}) {
    CHECK(smoothstep_ramp(s) + smoothstep_ramp(1.0 - s) ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(smoothstep_ramp(s) > smoothstep_ramp(s + 0.01));
  }
  CHECK(smoothstep_ramp_deriv(0.0) == 0.0);
  CHECK(smoothstep_ramp_deriv(1.0) == 0.0);
  for (double s : {0.2, 0.5, 0.8}) {
    const double h = 1e-6;
    const double fd = (smoothstep_ramp(s + h) - smoothstep_ramp(s - h)) / (2 * h);
    CHECK(smoothstep_ramp_deriv(s) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("radial cutoff: plateau and support are exact") {
  GridSpec g = fine_grid();
  const std::vector<double> c = {0.5, -1.0};
  ScalarField eta = make_cutoff(g, c, 1.0);
  double y[2];
  for_each_point(g, [&](std::size_t flat, const int* idx) {
    g.centered_point(idx, y);
    const double d = std::hypot(y[0] - c[0], y[1] - c[1]);
    const double v = eta[flat].real();
    CHECK(eta[flat].imag() == 0.0);
    if (d <= 1.0) {
      CHECK(v == 1.0);
    } else if (d >= 2.0) {
      CHECK(v == 0.0);
    } else {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      // the exponential ramp saturates to exactly 0/1 in double precision
      // near the transition edges; strictness holds on the interior band
      if (d >= 1.1 && d <= 1.9) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
      }
    }
  });
}

TEST_CASE("analytic bump: gradient agrees with finite differences") {
  AnalyticGaussian u;
  u.center = {0.25, -0.5};
  u.width = 0.7;
  u.amplitude = cdouble(1.3, -0.4);
  const double h = 1e-6;
  for (auto y0 : {std::vector<double>{0.0, 0.0}, {0.3, -0.8}, {1.0, 0.2}}) {
    cdouble grad[2];
    u.grad(y0, grad);
    for (int a = 0; a < 2; ++a) {
      std::vector<double> yp = y0, ym = y0;
      yp[a] += h;
      ym[a] -= h;
      const cdouble fd = (u.eval(yp) - u.eval(ym)) / (2 * h);
      CHECK(std::abs(grad[a] - fd) < 1e-7 * std::abs(u.amplitude));
    }
  }
  GridSpec g = fine_grid();
  ScalarField s = u.sample(g);
  double y[2];
  int idx[2] = {17, 203};
  g.centered_point(idx, y);
  CHECK(s[g.flatten(idx)] == u.eval(std::span<const double>(y, 2)));
}

TEST_CASE("normalized bump has unit gradient norm by quadrature") {
  GridSpec g = fine_grid();
  const std::vector<double> c = {0.0, 0.0};
  for (double q : {2.0, 4.0 / 3.0, 4.0}) {
    AnalyticGaussian u = normalized_gradient_bump(g, c, 0.24, q);
    double acc = 0.0;
    double y[2];
    cdouble grad[2];
    for_each_point(g, [&](std::size_t, const int* idx) {
      g.centered_point(idx, y);
      u.grad(std::span<const double>(y, 2), grad);
      acc += std::pow(std::norm(grad[0]) + std::norm(grad[1]), 0.5 * q);
    });
    CHECK(std::pow(acc * g.cell_volume(), 1.0 / q) ==
          doctest::Approx(1.0).epsilon(1e-13));
  }
  CHECK_THROWS_AS(normalized_gradient_bump(g, c, 0.0, 2.0), ConstraintError);
  CHECK_THROWS_AS(normalized_gradient_bump(g, c, 0.2, 1.0), ConstraintError);
  CHECK_THROWS_AS(
      normalized_gradient_bump(g, std::vector<double>{0.0}, 0.2, 2.0),
      DimensionError);
}

TEST_CASE("all witness kinds pass their full certificates on a fine grid") {
  GridSpec g = fine_grid();
  GridSpec gu = unit_grid();
  EllipticSystem sys = grad2();
  const std::vector<double> c0 = {0.0, 0.0};
  const BallSpec B{c0, 2.0};

  struct Combo {
    WitnessKind kind;
    double p;
  };
  const std::vector<Combo> combos = {
      {WitnessKind::small_p, 4.0 / 3.0}, {WitnessKind::small_p, 2.0},
      {WitnessKind::large_p, 4.0},       {WitnessKind::unit_ball, 4.0 / 3.0},
      {WitnessKind::unit_ball, 4.0},     {WitnessKind::factor_grad, 2.0},
      {WitnessKind::factor_div, 2.0}};

  for (const Combo& combo : combos) {
    CAPTURE(to_string(combo.kind));
    CAPTURE(combo.p);
    const double pp = combo.p / (combo.p - 1.0);
    WitnessPair P;
    switch (combo.kind) {
      case WitnessKind::small_p:
        P = witness_small_p(sys, g, normalized_gradient_bump(g, c0, 0.24, 2.0),
                            B, 0, 1, combo.p);
        break;
      case WitnessKind::large_p:
        P = witness_large_p(sys, g, normalized_gradient_bump(g, c0, 0.24, 2.0),
                            B, 0, 1, combo.p);
        break;
      case WitnessKind::unit_ball:
        P = witness_unit_ball(sys, gu,
                              normalized_gradient_bump(gu, c0, 0.12, pp),
                              0, 1, combo.p);
        break;
      case WitnessKind::factor_grad:
      case WitnessKind::factor_div: {
        AnalyticGaussian phi;
        phi.center = c0;
        phi.width = 0.12;
        phi.amplitude = 1.0;
        P = factorize_phi(sys, gu, phi,
                          combo.kind == WitnessKind::factor_grad
                              ? FactorSide::grad
                              : FactorSide::div,
                          combo.p);
        break;
      }
    }
    for (const CertEntry& e : P.cert.entries) {
      CAPTURE(e.name);
      CHECK(e.pass);
    }
    CHECK(P.cert.pass());
    CHECK(P.kind == combo.kind);
    CHECK(P.p == combo.p);
    CHECK(P.V.components() == 2);
    CHECK(P.W.components() == 2);

    // the certificate is reproducible from the stored fields alone
    WitnessCertificate again = verify(P);
    CHECK(again.pass());
    CHECK(again.entries.size() == P.cert.entries.size());
  }
}

TEST_CASE("pair kinds: vanishing sides and budgets are the advertised ones") {
  GridSpec g = fine_grid();
  EllipticSystem sys = grad2();
  const std::vector<double> c0 = {0.0, 0.0};
  const BallSpec B{c0, 2.0};
  AnalyticGaussian u = normalized_gradient_bump(g, c0, 0.24, 2.0);

  WitnessPair sp = witness_small_p(sys, g, u, B, 0, 1, 4.0 / 3.0);
  CHECK(div_cancellation_residual(sys, sp.V) < 1e-9);
  CHECK(need(sp.cert, "div_V_residual")->value < 1e-9);
  CHECK(need(sp.cert, "norm_V_budget")->value <= 1.0 + 1e-6);
  CHECK(need(sp.cert, "norm_W_budget")->value <= 1.0 + 1e-6);
  CHECK(need(sp.cert, "hypothesis_grad_u")->value <= 1.0 + 1e-9);

  WitnessPair lp = witness_large_p(sys, g, u, B, 0, 1, 4.0);
  CHECK(curl_cancellation_residual(sys, lp.W) < 1e-9);
  CHECK(need(lp.cert, "curl_W_residual")->value < 1e-9);
}

TEST_CASE("construction domains and geometry are validated") {
  GridSpec g = fine_grid();
  EllipticSystem sys = grad2();
  const std::vector<double> c0 = {0.0, 0.0};
  AnalyticGaussian u = normalized_gradient_bump(g, c0, 0.24, 2.0);

  CHECK_THROWS_AS(witness_small_p(sys, g, u, BallSpec{c0, 2.0}, 0, 1, 4.0),
                  ConstraintError);
  CHECK_THROWS_AS(witness_large_p(sys, g, u, BallSpec{c0, 2.0}, 0, 1, 2.0),
                  ConstraintError);
  CHECK_THROWS_AS(witness_small_p(sys, g, u, BallSpec{c0, 3.0}, 0, 1, 2.0),
                  ConstraintError);  // cutoff support would leave the box
  CHECK_THROWS_AS(witness_small_p(sys, g, u, BallSpec{{3.5, 0.0}, 1.0}, 0, 1, 2.0),
                  ConstraintError);
  CHECK_THROWS_AS(witness_small_p(sys, g, u, BallSpec{c0, 2.0}, 1, 1, 2.0),
                  DimensionError);
  CHECK_THROWS_AS(witness_small_p(sys, g, u, BallSpec{c0, 2.0}, 0, 2, 2.0),
                  DimensionError);
}

TEST_CASE("input hypotheses are enforced or reported") {
  GridSpec g = fine_grid();
  EllipticSystem sys = grad2();
  const std::vector<double> c0 = {0.0, 0.0};
  AnalyticGaussian u = normalized_gradient_bump(g, c0, 0.24, 2.0);
  u.amplitude *= 10.0;  // gradient norm 10, violating the <= 1 hypothesis

  CHECK_THROWS_AS(witness_small_p(sys, g, u, BallSpec{c0, 2.0}, 0, 1, 2.0),
                  HypothesisError);

  WitnessTolerances loose;
  loose.enforce = false;
  WitnessPair P = witness_small_p(sys, g, u, BallSpec{c0, 2.0}, 0, 1, 2.0, loose);
  CHECK_FALSE(P.cert.pass());
  CHECK_FALSE(need(P.cert, "hypothesis_grad_u")->pass);
}

TEST_CASE("tampered fields fail re-verification") {
  GridSpec g = unit_grid();
  WitnessPair P = witness_unit_ball(grad2(), g,
                                    normalized_gradient_bump(g, std::vector<double>{0.0, 0.0}, 0.12, 2.0),
                                    0, 1, 2.0);
  REQUIRE(P.cert.pass());
  // push the measured L^p norm to exactly 2, past the <= 1 budget
  const double scale = 2.0 / need(P.cert, "norm_V_budget")->value;
  for (int c = 0; c < 2; ++c)
    for (std::size_t s = 0; s < g.size(); ++s) P.V[c][s] *= scale;
  WitnessTolerances tol;
  tol.enforce = false;
  WitnessCertificate cert = verify(P, tol);
  CHECK_FALSE(cert.pass());
  CHECK_FALSE(need(cert, "norm_V_budget")->pass);
}

TEST_CASE("rescale: identity move leaves the pair unchanged") {
  GridSpec g = fine_grid();
  WitnessPair base = witness_small_p(grad2(), g,
                                     normalized_gradient_bump(g, std::vector<double>{0.0, 0.0}, 0.24, 2.0),
                                     BallSpec{{0.0, 0.0}, 2.0}, 0, 1, 2.0);
  const std::vector<double> same = {0.0, 0.0};
  WitnessPair moved = rescale_to_ball(base, same, 1.0, 2.0);
  CHECK(moved.cert.pass());
  CHECK(need(moved.cert, "rescale_norm_V_drift")->value == 0.0);
  CHECK(need(moved.cert, "rescale_norm_W_drift")->value == 0.0);
  CHECK(moved.cert.constants.at("rescale_R") == 1.0);
  CHECK(moved.cert.constants.at("rescale_input_renorm_drift") <= 1e-13);
  for (int c = 0; c < 2; ++c)
    for (std::size_t s = 0; s < g.size(); ++s) {
      CHECK(moved.V[c][s] == base.V[c][s]);
      CHECK(moved.W[c][s] == base.W[c][s]);
    }
}

TEST_CASE("rescale by R = 2 realizes the dilation on mapped grid points") {
  GridSpec g = fine_grid();
  // base ball radius 1 so the doubled support still fits the box; at this
  // resolution the base cutoff transition is undersampled for the 1e-9
  // residual tier, which is not what this test measures
  WitnessTolerances tol;
  tol.residual = 1e-4;
  const double p = 2.0;
  WitnessPair base = witness_unit_ball(grad2(), g,
                                       normalized_gradient_bump(g, std::vector<double>{0.0, 0.0}, 0.12, 2.0),
                                       0, 1, p, tol);
  const std::vector<double> x0 = {0.0, 0.0};
  WitnessPair out = rescale_to_ball(base, x0, 2.0, p, tol);
  CHECK(out.cert.pass());
  CHECK(out.radius == 2.0);
  CHECK(need(out.cert, "hypothesis_grad_u")->pass);
  CHECK(need(out.cert, "rescale_norm_V_drift")->value < 1e-4);
  CHECK(need(out.cert, "rescale_norm_W_drift")->value < 1e-4);

  // V(x) = R^{-N/p} V~(x/R) at grid points x = 2y (exact index arithmetic)
  const double scaleV = std::pow(2.0, -2.0 / p);
  const double pp = p / (p - 1.0);
  const double scaleW = std::pow(2.0, -2.0 / pp);
  double supV = 0.0, supdiffV = 0.0, supdiffW = 0.0;
  for (int i = 64; i < 192; ++i) {
    for (int j = 64; j < 192; ++j) {
      int src[2] = {i, j};
      int dst[2] = {2 * i - 128, 2 * j - 128};
      const std::size_t a = g.flatten(src), b = g.flatten(dst);
      for (int c = 0; c < 2; ++c) {
        supV = std::max(supV, std::abs(base.V[c][a]));
        supdiffV = std::max(supdiffV,
                            std::abs(out.V[c][b] - scaleV * base.V[c][a]));
        supdiffW = std::max(supdiffW,
                            std::abs(out.W[c][b] - scaleW * base.W[c][a]));
      }
    }
  }
  CHECK(supdiffV < 1e-6 * supV);
  CHECK(supdiffW < 1e-6 * supV);
}

TEST_CASE("rescale argument validation") {
  GridSpec g = fine_grid();
  WitnessPair base = witness_small_p(grad2(), g,
                                     normalized_gradient_bump(g, std::vector<double>{0.0, 0.0}, 0.12, 2.0),
                                     BallSpec{{0.0, 0.0}, 1.0}, 0, 1, 2.0,
                                     WitnessTolerances{.residual = 1e-4});
  const std::vector<double> ok = {0.0, 0.0};
  CHECK_THROWS_AS(rescale_to_ball(base, ok, 0.5, 2.0), ConstraintError);
  CHECK_THROWS_AS(rescale_to_ball(base, ok, 1.0, 4.0), ConstraintError);
  CHECK_THROWS_AS(rescale_to_ball(base, std::vector<double>{0.0}, 1.0, 2.0),
                  DimensionError);
  CHECK_THROWS_AS(rescale_to_ball(base, std::vector<double>{3.5, 0.0}, 2.0, 2.0),
                  ConstraintError);
}

TEST_CASE("factorizations: the product reproduces phi on the ball") {
  GridSpec g = unit_grid();
  EllipticSystem sys = grad2();
  AnalyticGaussian phi;
  phi.center = {0.0, 0.0};
  phi.width = 0.12;
  phi.amplitude = cdouble(0.8, 0.3);

  for (FactorSide side : {FactorSide::grad, FactorSide::div}) {
    WitnessPair P = factorize_phi(sys, g, phi, side, 2.0);
    CHECK(P.cert.pass());
    ScalarField prod = dot(P.V, P.W, P.product_convention);
    ScalarField want = phi.sample(g);
    double sup = 0.0, diff = 0.0;
    double y[2];
    for_each_point(g, [&](std::size_t flat, const int* idx) {
      g.centered_point(idx, y);
      if (y[0] * y[0] + y[1] * y[1] > 1.0) return;
      sup = std::max(sup, std::abs(want[flat]));
      diff = std::max(diff, std::abs(prod[flat] - want[flat]));
    });
    CHECK(diff < 1e-8 * sup);
  }

  MembershipScaling ms =
      membership_scaling(factorize_phi(sys, g, phi, FactorSide::grad, 2.0));
  CHECK(ms.budget_V <= 1.0 + 1e-9);
  CHECK(ms.budget_W <= 1.0 + 1e-9);
  CHECK(ms.budget_structure <= 1.0 + 1e-9);

  WitnessPair pairkind = witness_unit_ball(sys, g,
                                           normalized_gradient_bump(g, std::vector<double>{0.0, 0.0}, 0.12, 2.0),
                                           0, 1, 2.0);
  CHECK_THROWS_AS(membership_scaling(pairkind), ConstraintError);
}

TEST_CASE("witness construction on the Cauchy-Riemann-type system") {
  // 3-D run at half the transition sampling of the fine 2-D grid; the
  // vanishing-side tolerance scales with the measured aliasing level there
  GridSpec g = make_grid(3, {128, 128, 128}, {8.0, 8.0, 8.0});
  EllipticSystem sys = cr_system();
  WitnessTolerances tol;
  tol.residual = 1e-4;
  const std::vector<double> c0 = {0.0, 0.0, 0.0};
  WitnessPair P = witness_small_p(sys, g, normalized_gradient_bump(g, c0, 0.3, 2.0),
                                  BallSpec{c0, 2.0}, 0, 1, 2.0, tol);
  for (const CertEntry& e : P.cert.entries) {
    CAPTURE(e.name);
    CHECK(e.pass);
  }
  CHECK(P.V.components() == 2);  // n components in R^3
  CHECK(P.W.components() == 2);
}
