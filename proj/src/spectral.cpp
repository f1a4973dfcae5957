#include "divcurl/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace divcurl {

namespace {

/* FFTW's planner is not thread-safe; plan creation/destruction is serialized.
   Executing distinct plans on distinct arrays is safe. FFTW_ESTIMATE keeps
   plans deterministic and leaves the arrays untouched during planning. */
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void run_dft(const GridSpec& g, std::vector<cdouble>& data, int sign) {
  std::vector<int> dims(g.dims.begin(), g.dims.end());
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(g.N, dims.data(), ptr, ptr, sign, FFTW_ESTIMATE);
  }
  if (!plan) throw Error("fftw plan creation failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
}

}  // namespace

std::vector<cdouble> forward_transform(const ScalarField& f) {
  std::vector<cdouble> data(f.values().begin(), f.values().end());
  run_dft(f.grid(), data, FFTW_FORWARD);
  const double inv = 1.0 / static_cast<double>(f.grid().size());
  for (auto& c : data) c *= inv;
  return data;
}

ScalarField inverse_transform(const GridSpec& g, const std::vector<cdouble>& coeffs) {
  if (coeffs.size() != g.size())
    throw DimensionError("inverse_transform: coefficient count mismatch");
  std::vector<cdouble> data = coeffs;
  run_dft(g, data, FFTW_BACKWARD);
  return ScalarField(g, std::move(data));
}

std::vector<cdouble> tabulate_multiplier(
    const GridSpec& g, const std::function<cdouble(std::span<const double>)>& mult) {
  std::vector<cdouble> table(g.size());
  double xi[16];
  for_each_point(g, [&](std::size_t flat, const int* idx) {
    g.frequency(idx, xi);
    table[flat] = mult(std::span<const double>(xi, g.N));
  });
  return table;
}

ScalarField apply_multiplier_array(const ScalarField& f, std::span<const cdouble> mult) {
  if (mult.size() != f.size())
    throw DimensionError("apply_multiplier_array: multiplier table size mismatch");
  for (const cdouble& m : mult) {
    if (!std::isfinite(m.real()) || !std::isfinite(m.imag()))
      throw ConstraintError("apply_multiplier: non-finite multiplier on the grid");
  }
  std::vector<cdouble> data(f.values().begin(), f.values().end());
  run_dft(f.grid(), data, FFTW_FORWARD);
  const double inv = 1.0 / static_cast<double>(f.grid().size());
  for (std::size_t s = 0; s < data.size(); ++s) data[s] *= inv * mult[s];
  run_dft(f.grid(), data, FFTW_BACKWARD);
  return ScalarField(f.grid(), std::move(data));
}

ScalarField apply_multiplier(const ScalarField& f,
                             const std::function<cdouble(std::span<const double>)>& mult) {
  return apply_multiplier_array(f, tabulate_multiplier(f.grid(), mult));
}

ScalarField inverse_laplacian(const EllipticSystem& sys, const ScalarField& f) {
  const GridSpec& g = f.grid();
  if (sys.N() != g.N) throw DimensionError("inverse_laplacian: system/grid dimension");
  std::vector<cdouble> table(g.size());
  double xi[16];
  for_each_point(g, [&](std::size_t flat, const int* idx) {
    g.frequency(idx, xi);
    double xi2 = 0.0;
    for (int a = 0; a < g.N; ++a) xi2 += xi[a] * xi[a];
    if (xi2 == 0.0) {
      table[flat] = 0.0;  // mean mode projected out
      return;
    }
    const double sym = sys.laplacian_symbol(std::span<const double>(xi, g.N));
    if (!(sym > 1e-12 * xi2))
      throw ConstraintError("inverse_laplacian: degenerate symbol (system not elliptic)");
    table[flat] = 1.0 / sym;
  });
  return apply_multiplier_array(f, table);
}

double linf_norm(const ScalarField& f) {
  double m = 0.0;
  for (const cdouble& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double l2_norm(const ScalarField& f) {
  double s = 0.0;
  for (const cdouble& v : f.values()) s += std::norm(v);
  return std::sqrt(s * f.grid().cell_volume());
}

}  // namespace divcurl
