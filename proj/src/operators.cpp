#include "divcurl/operators.hpp"

#include <cmath>

#include "divcurl/spectral.hpp"

namespace divcurl {

namespace {

void check_component_index(const EllipticSystem& sys, int j, const char* where) {
  if (j < 0 || j >= sys.n()) throw DimensionError(std::string(where) + ": bad index");
}

void check_field(const EllipticSystem& sys, const GridSpec& g, const char* where) {
  if (sys.N() != g.N) throw DimensionError(std::string(where) + ": system/grid dimension");
}

std::vector<cdouble> symbol_table(const EllipticSystem& sys, const GridSpec& g, int j,
                                  bool star) {
  std::vector<cdouble> table(g.size());
  double xi[16];
  cdouble lam[64];
  for_each_point(g, [&](std::size_t flat, const int* idx) {
    g.frequency(idx, xi);
    sys.symbol(std::span<const double>(xi, g.N), lam);
    /* L_j multiplies by i*lambda_j; L_j* = -conj(L_j) by -i*conj(lambda_j) */
    table[flat] = star ? cdouble(0.0, -1.0) * std::conj(lam[j])
                       : cdouble(0.0, 1.0) * lam[j];
  });
  return table;
}

}  // namespace

ScalarField apply_L(const EllipticSystem& sys, int j, const ScalarField& u) {
  check_component_index(sys, j, "apply_L");
  check_field(sys, u.grid(), "apply_L");
  return apply_multiplier_array(u, symbol_table(sys, u.grid(), j, false));
}

ScalarField apply_Lstar(const EllipticSystem& sys, int j, const ScalarField& u) {
  check_component_index(sys, j, "apply_Lstar");
  check_field(sys, u.grid(), "apply_Lstar");
  return apply_multiplier_array(u, symbol_table(sys, u.grid(), j, true));
}

ScalarField apply_partial(const GridSpec& g, int axis, const ScalarField& u) {
  if (axis < 0 || axis >= g.N) throw DimensionError("apply_partial: bad axis");
  std::vector<cdouble> table(g.size());
  double xi[16];
  for_each_point(g, [&](std::size_t flat, const int* idx) {
    g.frequency(idx, xi);
    table[flat] = cdouble(0.0, xi[axis]);
  });
  return apply_multiplier_array(u, table);
}

VectorField grad_L(const EllipticSystem& sys, const ScalarField& u) {
  check_field(sys, u.grid(), "grad_L");
  std::vector<ScalarField> comps;
  comps.reserve(sys.n());
  for (int j = 0; j < sys.n(); ++j) comps.push_back(apply_L(sys, j, u));
  return VectorField(u.grid(), std::move(comps));
}

VectorField grad_Lstar(const EllipticSystem& sys, const ScalarField& u) {
  check_field(sys, u.grid(), "grad_Lstar");
  std::vector<ScalarField> comps;
  comps.reserve(sys.n());
  for (int j = 0; j < sys.n(); ++j) comps.push_back(apply_Lstar(sys, j, u));
  return VectorField(u.grid(), std::move(comps));
}

VectorField grad_plain(const ScalarField& u) {
  std::vector<ScalarField> comps;
  comps.reserve(u.grid().N);
  for (int a = 0; a < u.grid().N; ++a) comps.push_back(apply_partial(u.grid(), a, u));
  return VectorField(u.grid(), std::move(comps));
}

ScalarField div_Lstar(const EllipticSystem& sys, const VectorField& V) {
  check_field(sys, V.grid(), "div_Lstar");
  if (V.components() != sys.n())
    throw DimensionError("div_Lstar: field must have n components");
  ScalarField out = ScalarField::zeros(V.grid());
  for (int j = 0; j < sys.n(); ++j) {
    ScalarField term = apply_Lstar(sys, j, V[j]);
    auto o = out.values();
    auto t = term.values();
    for (std::size_t s = 0; s < o.size(); ++s) o[s] += t[s];
  }
  return out;
}

MatrixField curl_L(const EllipticSystem& sys, const VectorField& W) {
  check_field(sys, W.grid(), "curl_L");
  if (W.components() != sys.n())
    throw DimensionError("curl_L: field must have n components");
  MatrixField out(W.grid(), sys.n());
  for (int i = 0; i < sys.n(); ++i) {
    for (int j = i + 1; j < sys.n(); ++j) {
      ScalarField a = apply_L(sys, i, W[j]);
      ScalarField b = apply_L(sys, j, W[i]);
      auto av = a.values();
      auto bv = b.values();
      auto lo = out.at(j, i).values();
      for (std::size_t s = 0; s < av.size(); ++s) {
        av[s] -= bv[s];
        lo[s] = -av[s];  // exact negation keeps antisymmetry bitwise
      }
      out.at(i, j) = std::move(a);
    }
  }
  return out;
}

ScalarField dot(const VectorField& V, const VectorField& W, Pairing pairing) {
  check_same_grid(V.grid(), W.grid(), "dot");
  if (V.components() != W.components())
    throw DimensionError("dot: component count mismatch");
  ScalarField out = ScalarField::zeros(V.grid());
  auto o = out.values();
  for (int c = 0; c < V.components(); ++c) {
    auto v = V[c].values();
    auto w = W[c].values();
    if (pairing == Pairing::sesquilinear) {
      for (std::size_t s = 0; s < o.size(); ++s) o[s] += v[s] * std::conj(w[s]);
    } else {
      for (std::size_t s = 0; s < o.size(); ++s) o[s] += v[s] * w[s];
    }
  }
  return out;
}

cdouble commutator_symbol(const EllipticSystem& sys, int i, int j,
                          std::span<const double> xi) {
  check_component_index(sys, i, "commutator_symbol");
  check_component_index(sys, j, "commutator_symbol");
  cdouble lam[64];
  sys.symbol(xi, lam);
  const cdouble a = cdouble(0.0, 1.0) * lam[i];
  const cdouble b = cdouble(0.0, 1.0) * lam[j];
  return a * b - b * a;  // constant coefficients commute; stays for assertions
}

double div_cancellation_residual(const EllipticSystem& sys, const VectorField& V) {
  ScalarField sum = ScalarField::zeros(V.grid());
  auto o = sum.values();
  double den = 0.0;
  for (int j = 0; j < sys.n(); ++j) {
    ScalarField term = apply_Lstar(sys, j, V[j]);
    den += l2_norm(term);
    auto t = term.values();
    for (std::size_t s = 0; s < o.size(); ++s) o[s] += t[s];
  }
  if (den <= 0.0) return 0.0;
  return l2_norm(sum) / den;
}

double curl_cancellation_residual(const EllipticSystem& sys, const VectorField& W) {
  double num2 = 0.0, den = 0.0;
  for (int i = 0; i < sys.n(); ++i) {
    for (int j = i + 1; j < sys.n(); ++j) {
      ScalarField a = apply_L(sys, i, W[j]);
      ScalarField b = apply_L(sys, j, W[i]);
      den = std::max(den, std::max(l2_norm(a), l2_norm(b)));
      auto av = a.values();
      auto bv = b.values();
      for (std::size_t s = 0; s < av.size(); ++s) av[s] -= bv[s];
      const double e = l2_norm(a);
      num2 += 2.0 * e * e;  // both triangle entries
    }
  }
  if (den <= 0.0) return 0.0;
  return std::sqrt(num2) / den;
}

}  // namespace divcurl
