#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "divcurl/grid.hpp"
#include "divcurl/norms.hpp"
#include "divcurl/operators.hpp"
#include "divcurl/spectral.hpp"

using namespace divcurl;

namespace {

const cdouble I(0.0, 1.0);

ScalarField plane_wave(const GridSpec& g, const std::vector<int>& k) {
  ScalarField f = ScalarField::zeros(g);
  auto v = f.values();
  for_each_point(g, [&](std::size_t flat, const int* idx) {
    double phase = 0.0;
    for (int a = 0; a < g.N; ++a)
      phase += 2.0 * std::numbers::pi * k[a] * idx[a] / g.dims[a];
    v[flat] = std::polar(1.0, phase);
  });
  return f;
}

std::vector<double> physical_frequency(const GridSpec& g, const std::vector<int>& k) {
  std::vector<double> xi(g.N);
  for (int a = 0; a < g.N; ++a) xi[a] = 2.0 * std::numbers::pi * k[a] / g.box[a];
  return xi;
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

// band-limited deterministic test field: a handful of modes with fixed weights
ScalarField mixed_field(const GridSpec& g) {
  ScalarField f = ScalarField::zeros(g);
  const std::vector<std::pair<std::vector<int>, cdouble>> modes = {
      {{1, 0}, cdouble(0.7, 0.1)},
      {{2, 3}, cdouble(-0.4, 0.9)},
      {{-3, 1}, cdouble(0.2, -0.5)},
      {{0, -2}, cdouble(1.1, 0.0)}};
  for (const auto& [k, w] : modes) {
    ScalarField pw = plane_wave(g, k);
    for (std::size_t s = 0; s < f.size(); ++s) f[s] += w * pw[s];
  }
  return f;
}

EllipticSystem cr_system() {
  return EllipticSystem::create(2, 3, {I, cdouble(0.0)});
}

ScalarField mixed_field_3d(const GridSpec& g) {
  ScalarField f = ScalarField::zeros(g);
  const std::vector<std::pair<std::vector<int>, cdouble>> modes = {
      {{1, 0, 2}, cdouble(0.7, 0.1)},
      {{0, 2, -1}, cdouble(-0.4, 0.9)},
      {{-2, 1, 1}, cdouble(0.2, -0.5)}};
  for (const auto& [k, w] : modes) {
    ScalarField pw = plane_wave(g, k);
    for (std::size_t s = 0; s < f.size(); ++s) f[s] += w * pw[s];
  }
  return f;
}

}  // namespace

TEST_CASE("L_j, L_j*, and plain partials act by their symbols on plane waves") {
  EllipticSystem cr = cr_system();
  GridSpec g = make_grid(3, {12, 12, 12}, {4.0, 4.0, 4.0});
  const std::vector<int> k = {2, -1, 3};
  ScalarField u = plane_wave(g, k);
  const std::vector<double> xi = physical_frequency(g, k);
  std::vector<cdouble> lam = cr.symbol(xi);

  for (int j = 0; j < 2; ++j) {
    ScalarField Lu = apply_L(cr, j, u);
    ScalarField Lsu = apply_Lstar(cr, j, u);
    for (std::size_t s = 0; s < u.size(); ++s) {
      CHECK(std::abs(Lu[s] - I * lam[j] * u[s]) < 1e-12);
      CHECK(std::abs(Lsu[s] - (-I) * std::conj(lam[j]) * u[s]) < 1e-12);
    }
  }
  for (int a = 0; a < 3; ++a) {
    ScalarField da = apply_partial(g, a, u);
    for (std::size_t s = 0; s < u.size(); ++s)
      CHECK(std::abs(da[s] - I * xi[a] * u[s]) < 1e-12);
  }
  CHECK_THROWS_AS(apply_L(cr, 2, u), DimensionError);
  CHECK_THROWS_AS(apply_partial(g, 3, u), DimensionError);
}

TEST_CASE("spectral derivative reproduces hand derivatives of trig fields") {
  GridSpec g = make_grid(2, {32, 24}, {2.0, 3.0});
  ScalarField f = ScalarField::zeros(g);
  ScalarField dfdx = ScalarField::zeros(g);
  ScalarField dfdy = ScalarField::zeros(g);
  const double w0 = 2.0 * std::numbers::pi / g.box[0];
  const double w1 = 2.0 * std::numbers::pi / g.box[1];
  for_each_point(g, [&](std::size_t flat, const int* idx) {
    const double x = idx[0] * g.spacing(0);
    const double y = idx[1] * g.spacing(1);
    f[flat] = std::sin(3.0 * w0 * x) * std::cos(2.0 * w1 * y);
    dfdx[flat] = 3.0 * w0 * std::cos(3.0 * w0 * x) * std::cos(2.0 * w1 * y);
    dfdy[flat] = -2.0 * w1 * std::sin(3.0 * w0 * x) * std::sin(2.0 * w1 * y);
  });
  CHECK(sup_diff(apply_partial(g, 0, f), dfdx) < 1e-11);
  CHECK(sup_diff(apply_partial(g, 1, f), dfdy) < 1e-11);
}

TEST_CASE("grad_L collects the structured derivatives; grad_plain all of them") {
  EllipticSystem cr = cr_system();
  GridSpec g = make_grid(3, {8, 8, 8}, {2.0, 2.0, 2.0});
  ScalarField u = mixed_field_3d(g);
  VectorField gl = grad_L(cr, u);
  VectorField gs = grad_Lstar(cr, u);
  VectorField gp = grad_plain(u);
  CHECK(gl.components() == 2);
  CHECK(gs.components() == 2);
  CHECK(gp.components() == 3);
  for (int j = 0; j < 2; ++j) {
    CHECK(sup_diff(gl[j], apply_L(cr, j, u)) == 0.0);
    CHECK(sup_diff(gs[j], apply_Lstar(cr, j, u)) == 0.0);
  }
  for (int a = 0; a < 3; ++a) CHECK(sup_diff(gp[a], apply_partial(g, a, u)) == 0.0);

  // for the gradient system the structured and plain gradients coincide
  EllipticSystem g2 = gradient_system(2);
  GridSpec gg = make_grid(2, {16, 16}, {2.0, 2.0});
  ScalarField v = mixed_field(gg);
  VectorField a = grad_L(g2, v);
  VectorField b = grad_plain(v);
  for (int j = 0; j < 2; ++j) CHECK(sup_diff(a[j], b[j]) < 1e-13);
}

TEST_CASE("div_Lstar of grad_L is the structured Laplacian") {
  EllipticSystem cr = cr_system();
  GridSpec g = make_grid(3, {12, 12, 12}, {4.0, 4.0, 4.0});
  const std::vector<int> k = {1, 2, -2};
  ScalarField u = plane_wave(g, k);
  ScalarField lap = div_Lstar(cr, grad_L(cr, u));
  const double sym = cr.laplacian_symbol(physical_frequency(g, k));
  for (std::size_t s = 0; s < u.size(); ++s)
    CHECK(std::abs(lap[s] - sym * u[s]) < 1e-11);

  VectorField wrong(g, 3);
  CHECK_THROWS_AS(div_Lstar(cr, wrong), DimensionError);
}

TEST_CASE("curl_L entries follow L_i W_j - L_j W_i and antisymmetry is bitwise") {
  EllipticSystem cr = cr_system();
  GridSpec g = make_grid(3, {8, 8, 8}, {2.0, 2.0, 2.0});
  ScalarField u = mixed_field_3d(g);
  ScalarField v = mixed_field_3d(g);
  for (std::size_t s = 0; s < v.size(); ++s) v[s] *= cdouble(0.3, -1.2);
  VectorField W(g, {u, v});

  MatrixField C = curl_L(cr, W);
  CHECK(C.n() == 2);
  CHECK(C.antisymmetric_exact());

  ScalarField want = apply_L(cr, 0, v);
  ScalarField t = apply_L(cr, 1, u);
  for (std::size_t s = 0; s < want.size(); ++s) want[s] -= t[s];
  CHECK(sup_diff(C.at(0, 1), want) < 1e-12);
}

TEST_CASE("curl_L annihilates structured gradients") {
  for (int which = 0; which < 2; ++which) {
    EllipticSystem sys = which == 0 ? gradient_system(2) : cr_system();
    GridSpec g = which == 0 ? make_grid(2, {16, 16}, {2.0, 2.0})
                            : make_grid(3, {12, 12, 12}, {4.0, 4.0, 4.0});
    ScalarField u = which == 0 ? mixed_field(g) : mixed_field_3d(g);
    VectorField gu = grad_L(sys, u);
    MatrixField C = curl_L(sys, gu);
    double sup = 0.0, scale = 0.0;
    for (int i = 0; i < C.n(); ++i) {
      for (int j = 0; j < C.n(); ++j)
        for (std::size_t s = 0; s < g.size(); ++s)
          sup = std::max(sup, std::abs(C.at(i, j)[s]));
    }
    for (int j = 0; j < gu.components(); ++j)
      for (std::size_t s = 0; s < g.size(); ++s)
        scale = std::max(scale, std::abs(gu[j][s]));
    CHECK(sup < 1e-12 * scale);
  }
}

TEST_CASE("commutator symbol vanishes on the frequency lattice") {
  EllipticSystem sys =
      EllipticSystem::create(2, 4, {cdouble(0.4, 1.0), cdouble(-0.3, 0.2),
                                    cdouble(0.0, -1.5), cdouble(2.0, 0.7)});
  GridSpec g = make_grid(4, {6, 6, 6, 6}, {1.0, 2.0, 3.0, 4.0});
  double xi[4];
  for_each_point(g, [&](std::size_t, const int* idx) {
    g.frequency(idx, xi);
    CHECK(std::abs(commutator_symbol(sys, 0, 1, std::span<const double>(xi, 4))) ==
          0.0);
  });
}

TEST_CASE("dot pairing conventions") {
  GridSpec g = make_grid(2, {4, 4}, {1.0, 1.0});
  VectorField V(g, 2), W(g, 2);
  const cdouble a(1.0, 2.0), b(0.5, -1.0), c(-2.0, 0.25), d(3.0, 1.0);
  for (std::size_t s = 0; s < g.size(); ++s) {
    V[0][s] = a;
    V[1][s] = b;
    W[0][s] = c;
    W[1][s] = d;
  }
  ScalarField sesq = dot(V, W);  // default convention conjugates W
  ScalarField bil = dot(V, W, Pairing::bilinear);
  const cdouble want_sesq = a * std::conj(c) + b * std::conj(d);
  const cdouble want_bil = a * c + b * d;
  for (std::size_t s = 0; s < g.size(); ++s) {
    CHECK(std::abs(sesq[s] - want_sesq) < 1e-15);
    CHECK(std::abs(bil[s] - want_bil) < 1e-15);
  }
  VectorField U(g, 3);
  CHECK_THROWS_AS(dot(V, U), DimensionError);
}

TEST_CASE("adjointness: <grad_L u, V> = <u, div_Lstar V>") {
  EllipticSystem cr = cr_system();
  GridSpec g = make_grid(3, {12, 12, 12}, {4.0, 4.0, 4.0});
  ScalarField u = mixed_field_3d(g);
  VectorField V(g, 2);
  ScalarField w = mixed_field_3d(g);
  for (std::size_t s = 0; s < g.size(); ++s) {
    V[0][s] = w[s] * cdouble(0.2, 0.4);
    V[1][s] = w[s] * w[s];
  }
  VectorField gu = grad_L(cr, u);
  cdouble lhs = 0.0;
  for (int j = 0; j < 2; ++j) lhs += pair_fields(gu[j], V[j]);
  cdouble rhs = pair_fields(u, div_Lstar(cr, V));
  CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
}

TEST_CASE("cancellation residuals separate exact structure from noise") {
  EllipticSystem g2 = gradient_system(2);
  GridSpec g = make_grid(2, {16, 16}, {2.0, 2.0});
  ScalarField u = mixed_field(g);

  // div-free by construction: (conj L_2 u) e_1 - (conj L_1 u) e_2
  ScalarField l1 = apply_L(g2, 0, u);
  ScalarField l2 = apply_L(g2, 1, u);
  VectorField V(g, 2);
  for (std::size_t s = 0; s < g.size(); ++s) {
    V[0][s] = std::conj(l2[s]);
    V[1][s] = -std::conj(l1[s]);
  }
  CHECK(div_cancellation_residual(g2, V) < 1e-12);

  // curl-free: a structured gradient
  VectorField gu = grad_L(g2, u);
  CHECK(curl_cancellation_residual(g2, gu) < 1e-12);

  // generic fields have O(1) residuals
  VectorField R(g, 2);
  for (std::size_t s = 0; s < g.size(); ++s) {
    R[0][s] = u[s];
    R[1][s] = u[s] * u[s] - cdouble(0.3, 0.1);
  }
  CHECK(div_cancellation_residual(g2, R) > 0.05);
  CHECK(curl_cancellation_residual(g2, R) > 0.05);

  // the zero field is not spuriously "cancelling"
  VectorField Z(g, 2);
  CHECK(div_cancellation_residual(g2, Z) == 0.0);
  CHECK(curl_cancellation_residual(g2, Z) == 0.0);
}
