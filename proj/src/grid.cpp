#include "divcurl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace divcurl {

double GridSpec::min_box() const {
  return *std::min_element(box.begin(), box.end());
}

void GridSpec::frequency(const int* idx, double* out) const {
  for (int a = 0; a < N; ++a) {
    out[a] = 2.0 * std::numbers::pi * freq_index(dims[a], idx[a]) / box[a];
  }
}

double GridSpec::torus_dist2(const double* x, const double* c) const {
  double s = 0.0;
  for (int a = 0; a < N; ++a) {
    double d = std::fmod(x[a] - c[a], box[a]);
    if (d < -0.5 * box[a]) d += box[a];
    if (d > 0.5 * box[a]) d -= box[a];
    s += d * d;
  }
  return s;
}

GridSpec make_grid(int N, std::vector<int> dims, std::vector<double> box,
                   std::size_t point_cap) {
  if (N < 1 || N > 15) throw DimensionError("make_grid: N out of range");
  if (static_cast<int>(dims.size()) != N || static_cast<int>(box.size()) != N)
    throw DimensionError("make_grid: dims/box size must equal N");
  std::size_t total = 1;
  for (int a = 0; a < N; ++a) {
    if (dims[a] < 4) throw ConstraintError("make_grid: need >= 4 samples per axis");
    if (!(box[a] > 0.0) || !std::isfinite(box[a]))
      throw ConstraintError("make_grid: box lengths must be positive");
    total *= static_cast<std::size_t>(dims[a]);
    if (total > point_cap) throw ConstraintError("make_grid: grid exceeds point cap");
  }
  GridSpec g;
  g.N = N;
  g.dims = std::move(dims);
  g.box = std::move(box);
  return g;
}

ScalarField::ScalarField(GridSpec grid, std::vector<cdouble> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw DimensionError("ScalarField: value count does not match grid");
}

VectorField::VectorField(GridSpec grid, int n_components) : grid_(std::move(grid)) {
  if (n_components < 1) throw DimensionError("VectorField: need >= 1 component");
  comps_.reserve(n_components);
  for (int c = 0; c < n_components; ++c) comps_.push_back(ScalarField::zeros(grid_));
}

VectorField::VectorField(GridSpec grid, std::vector<ScalarField> components)
    : grid_(std::move(grid)), comps_(std::move(components)) {
  if (comps_.empty()) throw DimensionError("VectorField: need >= 1 component");
  for (const auto& c : comps_) check_same_grid(grid_, c.grid(), "VectorField");
}

MatrixField::MatrixField(GridSpec grid, int n) : grid_(std::move(grid)), n_(n) {
  if (n < 1) throw DimensionError("MatrixField: need n >= 1");
  entries_.reserve(static_cast<std::size_t>(n) * n);
  for (int e = 0; e < n * n; ++e) entries_.push_back(ScalarField::zeros(grid_));
}

bool MatrixField::antisymmetric_exact() const {
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      const auto a = at(i, j).values();
      const auto b = at(j, i).values();
      for (std::size_t s = 0; s < a.size(); ++s) {
        if (a[s] != -b[s]) return false;
      }
    }
  }
  return true;
}

void check_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
  if (!(a == b)) throw DimensionError(std::string(where) + ": grid mismatch");
}

}  // namespace divcurl
