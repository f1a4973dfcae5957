#include "divcurl/norms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "divcurl/spectral.hpp"

namespace divcurl {

double mollifier_profile(double r) {
  if (r >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r * r));
}

double unit_ball_volume(int N) {
  return std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N + 1.0);
}

double ball_volume(int N, double r) { return unit_ball_volume(N) * std::pow(r, N); }

double mollifier_normalizer(int N) {
  /* integral over the unit ball = surface(S^{N-1}) * int_0^1 r^{N-1} profile dr,
     composite Simpson; integrand is smooth and vanishes at r = 1 */
  const int M = 20000;
  const double h = 1.0 / M;
  double sum = 0.0;
  for (int s = 0; s <= M; ++s) {
    const double r = s * h;
    const double w = (s == 0 || s == M) ? 1.0 : (s % 2 == 1 ? 4.0 : 2.0);
    sum += w * std::pow(r, N - 1) * mollifier_profile(r);
  }
  sum *= h / 3.0;
  const double surface =
      2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
  return 1.0 / (surface * sum);
}

MollifierSpec make_scales(const GridSpec& g, int K) {
  if (K < 1) throw ConstraintError("make_scales: need K >= 1");
  double hmax = 0.0;
  for (int a = 0; a < g.N; ++a) hmax = std::max(hmax, g.spacing(a));
  MollifierSpec m;
  for (int k = 1; k <= K; ++k) {
    const double t = std::ldexp(1.0, -k);
    if (t < 2.0 * hmax)
      throw ConstraintError("make_scales: scale below grid resolution");
    m.scales.push_back(t);
  }
  return m;
}

MollifierSpec default_scales(const GridSpec& g) {
  double hmax = 0.0;
  for (int a = 0; a < g.N; ++a) hmax = std::max(hmax, g.spacing(a));
  int K = 0;
  while (std::ldexp(1.0, -(K + 1)) >= 4.0 * hmax) ++K;
  if (K < 1) throw ConstraintError("default_scales: grid too coarse for any scale");
  return make_scales(g, K);
}

namespace {

void validate_scales(const GridSpec& g, const MollifierSpec& m) {
  if (m.scales.empty()) throw ConstraintError("grand_maximal: empty scale set");
  double hmax = 0.0;
  for (int a = 0; a < g.N; ++a) hmax = std::max(hmax, g.spacing(a));
  double prev = 1.0;
  for (double t : m.scales) {
    if (!(t > 0.0 && t < 1.0)) throw ConstraintError("grand_maximal: scales must lie in (0,1)");
    if (t >= prev) throw ConstraintError("grand_maximal: scales must decrease");
    prev = t;
    if (t < 2.0 * hmax)
      throw ConstraintError("grand_maximal: scale below grid resolution");
  }
}

/* dilated mollifier sampled about grid origin with min-image radius,
   renormalized to unit discrete mass so constants are reproduced exactly */
std::vector<cdouble> sampled_mollifier(const GridSpec& g, double t) {
  std::vector<cdouble> phi(g.size());
  double acc = 0.0;
  for_each_point(g, [&](std::size_t flat, const int* idx) {
    double r2 = 0.0;
    for (int a = 0; a < g.N; ++a) {
      double d = idx[a] * g.spacing(a);
      if (d > 0.5 * g.box[a]) d -= g.box[a];
      r2 += d * d;
    }
    const double v = mollifier_profile(std::sqrt(r2) / t);
    phi[flat] = v;
    acc += v;
  });
  const double mass = acc * g.cell_volume();
  if (!(mass > 0.0)) throw ConstraintError("grand_maximal: mollifier mass vanished");
  for (auto& v : phi) v /= mass;
  return phi;
}

}  // namespace

ScalarField grand_maximal(const ScalarField& f, const MollifierSpec& m) {
  const GridSpec& g = f.grid();
  validate_scales(g, m);
  const std::size_t M = g.size();
  std::vector<cdouble> fhat = forward_transform(f);
  ScalarField out = ScalarField::zeros(g);
  auto o = out.values();
  const double vol = g.volume();
  for (double t : m.scales) {
    ScalarField phi(g, sampled_mollifier(g, t));
    std::vector<cdouble> phihat = forward_transform(phi);
    std::vector<cdouble> conv(M);
    for (std::size_t s = 0; s < M; ++s) conv[s] = vol * phihat[s] * fhat[s];
    ScalarField ct = inverse_transform(g, conv);
    auto cv = ct.values();
    for (std::size_t s = 0; s < M; ++s)
      o[s] = std::max(o[s].real(), std::abs(cv[s]));
  }
  return out;
}

double h1_norm(const ScalarField& f, const MollifierSpec& m) {
  return l1_norm(grand_maximal(f, m));
}

BallFamily make_ball_family(const GridSpec& g, int stride,
                            const std::vector<double>& radii) {
  if (stride < 1) throw ConstraintError("make_ball_family: stride must be >= 1");
  if (radii.empty()) throw ConstraintError("make_ball_family: no radii");
  for (double r : radii) {
    if (!(r > 0.0) || 2.0 * r > g.min_box())
      throw ConstraintError("make_ball_family: ball does not fit the box");
  }
  BallFamily fam;
  int idx[16] = {0};
  std::vector<int> strided(g.N);
  for (int a = 0; a < g.N; ++a) strided[a] = (g.dims[a] + stride - 1) / stride;
  std::size_t centers = 1;
  for (int a = 0; a < g.N; ++a) centers *= static_cast<std::size_t>(strided[a]);
  for (std::size_t c = 0; c < centers; ++c) {
    std::size_t rem = c;
    for (int a = g.N - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % strided[a]) * stride;
      rem /= strided[a];
    }
    std::vector<double> center(g.N);
    for (int a = 0; a < g.N; ++a) center[a] = idx[a] * g.spacing(a);
    for (double r : radii) fam.balls.push_back(BallSpec{center, r});
  }
  return fam;
}

namespace {

/* integer offsets within torus distance r of a center; offsets are exact for
   dyadic spacings so boundary ties match a direct loop bit-for-bit */
void ball_offsets(const GridSpec& g, double r, std::vector<std::vector<int>>& coords) {
  std::vector<int> lo(g.N), hi(g.N);
  for (int a = 0; a < g.N; ++a) {
    const int reach = static_cast<int>(std::floor(r / g.spacing(a)));
    lo[a] = -reach;
    hi[a] = reach;
  }
  coords.clear();
  std::vector<int> cur(g.N, 0);
  const double r2 = r * r;
  std::function<void(int)> rec = [&](int axis) {
    if (axis == g.N) {
      double d2 = 0.0;
      for (int a = 0; a < g.N; ++a) {
        const double d = cur[a] * g.spacing(a);
        d2 += d * d;
      }
      if (d2 <= r2) coords.push_back(cur);
      return;
    }
    for (int v = lo[axis]; v <= hi[axis]; ++v) {
      cur[axis] = v;
      rec(axis + 1);
    }
  };
  rec(0);
}

template <typename PerPoint>
void visit_ball(const GridSpec& g, const BallSpec& b,
                const std::vector<std::vector<int>>& offsets, PerPoint&& fn) {
  int cidx[16];
  for (int a = 0; a < g.N; ++a) {
    const double pos = b.center[a] / g.spacing(a);
    cidx[a] = static_cast<int>(std::llround(pos));
  }
  int idx[16];
  for (const auto& off : offsets) {
    for (int a = 0; a < g.N; ++a) {
      int v = (cidx[a] + off[a]) % g.dims[a];
      if (v < 0) v += g.dims[a];
      idx[a] = v;
    }
    fn(g.flatten(idx));
  }
}

void check_center_on_grid(const GridSpec& g, const BallSpec& b) {
  if (static_cast<int>(b.center.size()) != g.N)
    throw DimensionError("ball center dimension mismatch");
  for (int a = 0; a < g.N; ++a) {
    const double pos = b.center[a] / g.spacing(a);
    if (std::abs(pos - std::llround(pos)) > 1e-9)
      throw ConstraintError("ball centers must sit on grid points");
  }
}

}  // namespace

ScalarField hl_maximal(const ScalarField& f, const BallFamily& balls) {
  const GridSpec& g = f.grid();
  if (balls.balls.empty()) throw ConstraintError("hl_maximal: empty ball family");
  ScalarField out = ScalarField::zeros(g);
  auto o = out.values();
  auto fv = f.values();

  std::map<double, std::vector<std::vector<int>>> offset_cache;
  for (const BallSpec& b : balls.balls) {
    check_center_on_grid(g, b);
    if (2.0 * b.radius > g.min_box())
      throw ConstraintError("hl_maximal: ball does not fit the box");
    auto it = offset_cache.find(b.radius);
    if (it == offset_cache.end()) {
      std::vector<std::vector<int>> coords;
      ball_offsets(g, b.radius, coords);
      it = offset_cache.emplace(b.radius, std::move(coords)).first;
    }
    double sum = 0.0;
    std::size_t count = 0;
    visit_ball(g, b, it->second, [&](std::size_t flat) {
      sum += std::abs(fv[flat]);
      ++count;
    });
    if (count == 0) continue;
    const double avg = sum / static_cast<double>(count);
    visit_ball(g, b, it->second, [&](std::size_t flat) {
      o[flat] = std::max(o[flat].real(), avg);
    });
  }
  return out;
}

double bmo_norm(const ScalarField& gfield, const BallFamily& balls) {
  const GridSpec& g = gfield.grid();
  if (balls.balls.empty()) throw ConstraintError("bmo_norm: empty ball family");
  auto gv = gfield.values();

  std::map<double, std::vector<std::vector<int>>> offset_cache;
  double sup_osc = -1.0, sup_avg = -1.0;
  for (const BallSpec& b : balls.balls) {
    check_center_on_grid(g, b);
    if (2.0 * b.radius > g.min_box())
      throw ConstraintError("bmo_norm: ball does not fit the box");
    auto it = offset_cache.find(b.radius);
    if (it == offset_cache.end()) {
      std::vector<std::vector<int>> coords;
      ball_offsets(g, b.radius, coords);
      it = offset_cache.emplace(b.radius, std::move(coords)).first;
    }
    cdouble mean = 0.0;
    double abs_sum = 0.0;
    std::size_t count = 0;
    visit_ball(g, b, it->second, [&](std::size_t flat) {
      mean += gv[flat];
      abs_sum += std::abs(gv[flat]);
      ++count;
    });
    if (count == 0) continue;
    mean /= static_cast<double>(count);
    if (ball_volume(g.N, b.radius) <= 1.0) {
      double osc = 0.0;
      visit_ball(g, b, it->second,
                 [&](std::size_t flat) { osc += std::abs(gv[flat] - mean); });
      sup_osc = std::max(sup_osc, osc / static_cast<double>(count));
    } else {
      sup_avg = std::max(sup_avg, abs_sum / static_cast<double>(count));
    }
  }
  if (sup_osc < 0.0 || sup_avg < 0.0)
    throw ConstraintError("bmo_norm: ball family must cover both volume regimes");
  return sup_osc + sup_avg;
}

double lp_norm(const ScalarField& f, double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw DimensionError("lp_norm: p must be finite and > 1");
  double s = 0.0;
  for (const cdouble& v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double lp_norm(const VectorField& f, double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw DimensionError("lp_norm: p must be finite and > 1");
  double s = 0.0;
  const std::size_t M = f.grid().size();
  for (std::size_t i = 0; i < M; ++i) {
    double mod2 = 0.0;
    for (int c = 0; c < f.components(); ++c) mod2 += std::norm(f[c][i]);
    s += std::pow(mod2, 0.5 * p);
  }
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double lp_norm(const MatrixField& f, double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw DimensionError("lp_norm: p must be finite and > 1");
  double s = 0.0;
  const std::size_t M = f.grid().size();
  for (std::size_t i = 0; i < M; ++i) {
    double mod2 = 0.0;
    for (int a = 0; a < f.n(); ++a)
      for (int b = 0; b < f.n(); ++b) mod2 += std::norm(f.at(a, b)[i]);
    s += std::pow(mod2, 0.5 * p);
  }
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double l1_norm(const ScalarField& f) {
  double s = 0.0;
  for (const cdouble& v : f.values()) s += std::abs(v);
  return s * f.grid().cell_volume();
}

cdouble pair_fields(const ScalarField& g, const ScalarField& f) {
  check_same_grid(g.grid(), f.grid(), "pair_fields");
  cdouble s = 0.0;
  auto gv = g.values();
  auto fv = f.values();
  for (std::size_t i = 0; i < gv.size(); ++i) s += gv[i] * std::conj(fv[i]);
  return s * g.grid().cell_volume();
}

}  // namespace divcurl
