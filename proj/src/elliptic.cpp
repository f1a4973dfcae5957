#include "divcurl/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "json.hpp"

namespace divcurl {

EllipticSystem EllipticSystem::create(int n, int N, std::vector<cdouble> coeffs) {
  if (n < 2) throw ConstraintError("EllipticSystem: need n >= 2");
  if (n > N) throw ConstraintError("EllipticSystem: n exceeds N");
  if (2 * n < N) throw ConstraintError("EllipticSystem: need n >= N/2");
  const int m = N - n;
  if (static_cast<int>(coeffs.size()) != n * m)
    throw DimensionError("EllipticSystem: coefficient matrix must be n x (N-n)");
  for (const cdouble& a : coeffs) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw DimensionError("EllipticSystem: non-finite coefficient");
  }
  EllipticSystem sys;
  sys.n_ = n;
  sys.N_ = N;
  sys.coeffs_ = std::move(coeffs);
  return sys;
}

void EllipticSystem::symbol(std::span<const double> xi, cdouble* out) const {
  if (static_cast<int>(xi.size()) != N_)
    throw DimensionError("symbol: frequency dimension mismatch");
  const int mm = m();
  for (int j = 0; j < n_; ++j) {
    cdouble v = xi[j];
    for (int k = 0; k < mm; ++k) v += coeffs_[j * mm + k] * xi[n_ + k];
    out[j] = v;
  }
}

std::vector<cdouble> EllipticSystem::symbol(std::span<const double> xi) const {
  std::vector<cdouble> out(n_);
  symbol(xi, out.data());
  return out;
}

double EllipticSystem::laplacian_symbol(std::span<const double> xi) const {
  cdouble lam[64];
  symbol(xi, lam);
  double s = 0.0;
  for (int j = 0; j < n_; ++j) s += std::norm(lam[j]);
  return s;
}

double EllipticSystem::max_coeff_abs() const {
  double m = 0.0;
  for (const cdouble& a : coeffs_) m = std::max(m, std::abs(a));
  return m;
}

EllipticSystem gradient_system(int N) {
  return EllipticSystem::create(N, N, {});
}

namespace {

double halton(std::size_t index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

/* deterministic near-uniform unit direction from Halton points via Box-Muller */
void halton_direction(std::size_t index, int N, double* out) {
  double norm2 = 0.0;
  for (int a = 0; a < N; a += 2) {
    const double u1 = std::max(halton(index + 1, kPrimes[a]), 1e-16);
    const double u2 = halton(index + 1, kPrimes[a + 1]);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    out[a] = rad * std::cos(2.0 * std::numbers::pi * u2);
    if (a + 1 < N) out[a + 1] = rad * std::sin(2.0 * std::numbers::pi * u2);
  }
  for (int a = 0; a < N; ++a) norm2 += out[a] * out[a];
  const double inv = 1.0 / std::sqrt(std::max(norm2, 1e-300));
  for (int a = 0; a < N; ++a) out[a] *= inv;
}

}  // namespace

EllipticityCertificate certify_ellipticity(const EllipticSystem& sys,
                                           int sphere_resolution, double tol) {
  if (sphere_resolution < kMinSphereResolution)
    throw ConstraintError("certify_ellipticity: sphere_resolution below minimum");
  const int N = sys.N();
  std::vector<double> best(N, 0.0), cand(N, 0.0);
  double best_val = std::numeric_limits<double>::infinity();

  auto consider = [&](const double* d) {
    const double v = sys.laplacian_symbol(std::span<const double>(d, N));
    if (v < best_val) {
      best_val = v;
      std::copy(d, d + N, best.begin());
    }
  };

  /* coordinate axes first: degenerate minima often sit there exactly */
  for (int a = 0; a < N; ++a) {
    std::fill(cand.begin(), cand.end(), 0.0);
    cand[a] = 1.0;
    consider(cand.data());
    cand[a] = -1.0;
    consider(cand.data());
  }
  for (int s = 0; s < sphere_resolution; ++s) {
    halton_direction(static_cast<std::size_t>(s), N, cand.data());
    consider(cand.data());
  }

  /* local refinement: coordinate perturbations with shrinking step */
  double step = 0.5;
  while (step > 1e-13) {
    bool improved = false;
    for (int a = 0; a < N; ++a) {
      for (double sign : {1.0, -1.0}) {
        std::copy(best.begin(), best.end(), cand.begin());
        cand[a] += sign * step;
        double norm2 = 0.0;
        for (double c : cand) norm2 += c * c;
        if (norm2 <= 0.0) continue;
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& c : cand) c *= inv;
        const double v = sys.laplacian_symbol(cand);
        if (v < best_val) {
          best_val = v;
          std::copy(cand.begin(), cand.end(), best.begin());
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }

  EllipticityCertificate cert;
  cert.constant = best_val;
  cert.tol = tol;
  cert.elliptic = best_val > tol;
  cert.sphere_samples = sphere_resolution;
  cert.witness_direction = best;
  return cert;
}

std::string to_json_string(const EllipticSystem& sys) {
  nlohmann::ordered_json j;
  j["n"] = sys.n();
  j["N"] = sys.N();
  auto coeffs = nlohmann::ordered_json::array();
  for (const cdouble& a : sys.coeffs())
    coeffs.push_back(nlohmann::ordered_json::array({a.real(), a.imag()}));
  j["coeffs"] = coeffs;
  return j.dump(2);
}

EllipticSystem system_from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("system JSON parse error: ") + e.what());
  }
  if (!j.contains("n") || !j.contains("N"))
    throw IoError("system JSON: need fields n and N");
  const int n = j.at("n").get<int>();
  const int N = j.at("N").get<int>();
  std::vector<cdouble> coeffs;
  if (j.contains("coeffs")) {
    for (const auto& e : j.at("coeffs")) {
      if (e.is_array() && e.size() == 2)
        coeffs.emplace_back(e[0].get<double>(), e[1].get<double>());
      else if (e.is_number())
        coeffs.emplace_back(e.get<double>(), 0.0);
      else
        throw IoError("system JSON: coefficient entries must be [re, im] or numbers");
    }
  }
  return EllipticSystem::create(n, N, std::move(coeffs));
}

}  // namespace divcurl
