#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "divcurl/errors.hpp"

namespace divcurl {

using cdouble = std::complex<double>;

inline constexpr std::size_t kDefaultPointCap = std::size_t(1) << 24;

/* Periodic sampling box. dims[a] samples on axis a covering physical length
   box[a]; sample i sits at i*box[a]/dims[a]. Storage is row-major, last axis
   fastest. Integer frequency k on an axis follows DFT order
   (0,1,...,ceil(d/2)-1, -floor(d/2),...,-1); physical frequency is 2*pi*k/box. */
struct GridSpec {
  int N = 0;
  std::vector<int> dims;
  std::vector<double> box;

  std::size_t size() const {
    std::size_t s = 1;
    for (int d : dims) s *= static_cast<std::size_t>(d);
    return s;
  }
  double spacing(int axis) const { return box[axis] / dims[axis]; }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < N; ++a) v *= spacing(a);
    return v;
  }
  double volume() const {
    double v = 1.0;
    for (double b : box) v *= b;
    return v;
  }
  double min_box() const;

  bool operator==(const GridSpec&) const = default;

  void unflatten(std::size_t flat, int* idx) const {
    for (int a = N - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(flat % dims[a]);
      flat /= dims[a];
    }
  }
  std::size_t flatten(const int* idx) const {
    std::size_t f = 0;
    for (int a = 0; a < N; ++a) f = f * dims[a] + static_cast<std::size_t>(idx[a]);
    return f;
  }

  static int freq_index(int dim, int i) { return i <= (dim - 1) / 2 ? i : i - dim; }

  void point(const int* idx, double* out) const {
    for (int a = 0; a < N; ++a) out[a] = idx[a] * spacing(a);
  }
  /* min-image displacement from the box center, in [-box/2, box/2) per axis */
  void centered_point(const int* idx, double* out) const {
    for (int a = 0; a < N; ++a) {
      double d = idx[a] * spacing(a) - 0.5 * box[a];
      if (d < -0.5 * box[a]) d += box[a];
      if (d >= 0.5 * box[a]) d -= box[a];
      out[a] = d;
    }
  }
  void frequency(const int* idx, double* out) const;

  /* squared torus distance between physical points x and c */
  double torus_dist2(const double* x, const double* c) const;
};

GridSpec make_grid(int N, std::vector<int> dims, std::vector<double> box,
                   std::size_t point_cap = kDefaultPointCap);

/* visit every grid point: fn(flat, idx) with idx the integer multi-index */
template <typename Fn>
void for_each_point(const GridSpec& g, Fn&& fn) {
  const std::size_t M = g.size();
  int idx[16] = {0};
  for (std::size_t flat = 0; flat < M; ++flat) {
    fn(flat, static_cast<const int*>(idx));
    for (int a = g.N - 1; a >= 0; --a) {
      if (++idx[a] < g.dims[a]) break;
      idx[a] = 0;
    }
  }
}

class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridSpec grid, std::vector<cdouble> values);
  static ScalarField zeros(const GridSpec& g) {
    return ScalarField(g, std::vector<cdouble>(g.size()));
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const cdouble> values() const { return values_; }
  std::span<cdouble> values() { return values_; }
  cdouble operator[](std::size_t i) const { return values_[i]; }
  cdouble& operator[](std::size_t i) { return values_[i]; }

 private:
  GridSpec grid_;
  std::vector<cdouble> values_;
};

class VectorField {
 public:
  VectorField() = default;
  VectorField(GridSpec grid, int n_components);
  VectorField(GridSpec grid, std::vector<ScalarField> components);

  const GridSpec& grid() const { return grid_; }
  int components() const { return static_cast<int>(comps_.size()); }
  const ScalarField& operator[](int c) const { return comps_[c]; }
  ScalarField& operator[](int c) { return comps_[c]; }

 private:
  GridSpec grid_;
  std::vector<ScalarField> comps_;
};

/* n x n matrix of scalar fields, row-major entries */
class MatrixField {
 public:
  MatrixField() = default;
  MatrixField(GridSpec grid, int n);

  const GridSpec& grid() const { return grid_; }
  int n() const { return n_; }
  const ScalarField& at(int i, int j) const { return entries_[i * n_ + j]; }
  ScalarField& at(int i, int j) { return entries_[i * n_ + j]; }
  bool antisymmetric_exact() const;

 private:
  GridSpec grid_;
  int n_ = 0;
  std::vector<ScalarField> entries_;
};

void check_same_grid(const GridSpec& a, const GridSpec& b, const char* where);

}  // namespace divcurl
