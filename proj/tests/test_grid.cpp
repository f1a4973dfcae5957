#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <set>

#include "divcurl/grid.hpp"

using namespace divcurl;

TEST_CASE("make_grid validates shape and limits") {
  CHECK_NOTHROW(make_grid(2, {8, 8}, {1.0, 2.0}));
  CHECK_THROWS_AS(make_grid(0, {}, {}), DimensionError);
  CHECK_THROWS_AS(make_grid(16, std::vector<int>(16, 4), std::vector<double>(16, 1.0)),
                  DimensionError);
  CHECK_THROWS_AS(make_grid(2, {8}, {1.0, 1.0}), DimensionError);
  CHECK_THROWS_AS(make_grid(2, {8, 8}, {1.0}), DimensionError);
  CHECK_THROWS_AS(make_grid(2, {3, 8}, {1.0, 1.0}), ConstraintError);
  CHECK_THROWS_AS(make_grid(2, {8, 8}, {0.0, 1.0}), ConstraintError);
  CHECK_THROWS_AS(make_grid(2, {8, 8}, {-1.0, 1.0}), ConstraintError);
  CHECK_THROWS_AS(make_grid(2, {1 << 13, 1 << 13}, {1.0, 1.0}, 1 << 24),
                  ConstraintError);  // 2^26 points > 2^24 cap
  CHECK_NOTHROW(make_grid(2, {1 << 12, 1 << 12}, {1.0, 1.0}, 1 << 24));
}

TEST_CASE("grid geometry: spacing, volumes, min_box") {
  GridSpec g = make_grid(2, {256, 128}, {8.0, 16.0});
  CHECK(g.size() == 256u * 128u);
  CHECK(g.spacing(0) == doctest::Approx(8.0 / 256).epsilon(1e-15));
  CHECK(g.spacing(1) == doctest::Approx(16.0 / 128).epsilon(1e-15));
  CHECK(g.cell_volume() == doctest::Approx((8.0 / 256) * (16.0 / 128)).epsilon(1e-15));
  CHECK(g.volume() == doctest::Approx(128.0).epsilon(1e-15));
  CHECK(g.min_box() == 8.0);
}

TEST_CASE("flatten/unflatten roundtrip, row-major last axis fastest") {
  GridSpec g = make_grid(3, {5, 4, 6}, {1.0, 1.0, 1.0});
  int idx[3];
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, idx);
    CHECK(g.flatten(idx) == flat);
  }
  // incrementing the last index advances flat by exactly one
  int a[3] = {2, 1, 3};
  int b[3] = {2, 1, 4};
  CHECK(g.flatten(b) == g.flatten(a) + 1);
  // incrementing the first index advances by the product of trailing dims
  int c[3] = {3, 1, 3};
  CHECK(g.flatten(c) == g.flatten(a) + 4 * 6);
}

TEST_CASE("for_each_point enumerates every point in flat order") {
  GridSpec g = make_grid(2, {4, 7}, {1.0, 1.0});
  std::size_t count = 0;
  for_each_point(g, [&](std::size_t flat, const int* idx) {
    CHECK(flat == count);
    CHECK(g.flatten(idx) == flat);
    ++count;
  });
  CHECK(count == g.size());
}

TEST_CASE("DFT frequency ordering") {
  // even dim 8: 0,1,2,3,-4,-3,-2,-1
  CHECK(GridSpec::freq_index(8, 0) == 0);
  CHECK(GridSpec::freq_index(8, 3) == 3);
  CHECK(GridSpec::freq_index(8, 4) == -4);
  CHECK(GridSpec::freq_index(8, 7) == -1);
  // odd dim 7: 0,1,2,3,-3,-2,-1
  CHECK(GridSpec::freq_index(7, 3) == 3);
  CHECK(GridSpec::freq_index(7, 4) == -3);
  CHECK(GridSpec::freq_index(7, 6) == -1);

  GridSpec g = make_grid(2, {8, 8}, {2.0, 4.0});
  int idx[2] = {1, 5};
  double xi[2];
  g.frequency(idx, xi);
  CHECK(xi[0] == doctest::Approx(2.0 * std::numbers::pi * 1 / 2.0).epsilon(1e-15));
  CHECK(xi[1] == doctest::Approx(2.0 * std::numbers::pi * (-3) / 4.0).epsilon(1e-15));
}

TEST_CASE("point and centered_point") {
  GridSpec g = make_grid(1, {8}, {8.0});
  int idx[1];
  double x[1], y[1];
  idx[0] = 3;
  g.point(idx, x);
  CHECK(x[0] == 3.0);
  // centered coordinates live in [-box/2, box/2): index 0 maps to -4
  idx[0] = 0;
  g.centered_point(idx, y);
  CHECK(y[0] == -4.0);
  idx[0] = 4;
  g.centered_point(idx, y);
  CHECK(y[0] == 0.0);
  idx[0] = 7;
  g.centered_point(idx, y);
  CHECK(y[0] == 3.0);
}

TEST_CASE("torus distance wraps around") {
  GridSpec g = make_grid(2, {8, 8}, {8.0, 8.0});
  double a[2] = {0.5, 0.0};
  double b[2] = {7.5, 0.0};
  CHECK(g.torus_dist2(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  double c[2] = {1.0, 2.0};
  double d[2] = {2.0, 4.0};
  CHECK(g.torus_dist2(c, d) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("field containers validate their shapes") {
  GridSpec g = make_grid(2, {4, 4}, {1.0, 1.0});
  GridSpec h = make_grid(2, {4, 5}, {1.0, 1.0});
  CHECK_THROWS_AS(ScalarField(g, std::vector<cdouble>(7)), DimensionError);
  CHECK_NOTHROW(ScalarField(g, std::vector<cdouble>(16)));
  CHECK_THROWS_AS(VectorField(g, 0), DimensionError);
  CHECK_THROWS_AS(VectorField(g, {ScalarField::zeros(h)}), DimensionError);
  CHECK_THROWS_AS(MatrixField(g, 0), DimensionError);
  CHECK_THROWS_AS(check_same_grid(g, h, "test"), DimensionError);
  CHECK_NOTHROW(check_same_grid(g, g, "test"));

  ScalarField f = ScalarField::zeros(g);
  CHECK(f.size() == 16u);
  for (std::size_t s = 0; s < f.size(); ++s) CHECK(f[s] == cdouble(0.0, 0.0));
  VectorField V(g, 3);
  CHECK(V.components() == 3);
  MatrixField A(g, 2);
  CHECK(A.n() == 2);
}

TEST_CASE("matrix antisymmetry check is bitwise") {
  GridSpec g = make_grid(2, {4, 4}, {1.0, 1.0});
  MatrixField A(g, 2);
  for (std::size_t s = 0; s < g.size(); ++s) {
    const cdouble v(0.1 * static_cast<double>(s), -0.3);
    A.at(0, 1)[s] = v;
    A.at(1, 0)[s] = -v;
  }
  CHECK(A.antisymmetric_exact());
  // diagonal must be exactly zero (x != -x for x != 0)
  A.at(0, 0)[5] = cdouble(1e-300, 0.0);
  CHECK_FALSE(A.antisymmetric_exact());
  A.at(0, 0)[5] = 0.0;
  // one ulp of asymmetry is detected
  A.at(1, 0)[3] += cdouble(0.0, 1e-16);
  CHECK_FALSE(A.antisymmetric_exact());
}
