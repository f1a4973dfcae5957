#include "divcurl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "divcurl/hodge.hpp"
#include "divcurl/spectral.hpp"

namespace divcurl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, int index, int component) {
  std::uint64_t u = splitmix64(seed);
  u = splitmix64(u ^ (0xA0761D6478BD642FULL + static_cast<std::uint64_t>(index)));
  u = splitmix64(u ^ (0xE7037ED1A0B428DBULL + static_cast<std::uint64_t>(component)));
  return u;
}

struct Gauss {
  std::mt19937_64 eng;
  explicit Gauss(std::uint64_t s) : eng(s) {}
  /* one complex standard normal via Box-Muller, fixed draw order */
  cdouble next() {
    const double u1 = (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * 3.14159265358979323846 * u2;
    return cdouble(r * std::cos(th), r * std::sin(th));
  }
};

/* band-limited draw: coefficients over the |k|_inf <= B lattice in fixed
   lexicographic order, weighted 1/(1+|k|^2); independent of grid dims */
ScalarField raw_band_limited(const GridSpec& g, std::uint64_t seed, int index,
                             int component, int band) {
  if (band < 0) throw ConstraintError("random field: negative band_limit");
  for (int a = 0; a < g.N; ++a) {
    if (2 * band + 1 > g.dims[a])
      throw ConstraintError("random field: band_limit exceeds the grid Nyquist range");
  }
  std::vector<cdouble> coeffs(g.size(), cdouble(0.0, 0.0));
  Gauss rng(stream_seed(seed, index, component));
  std::vector<int> k(g.N, -band);
  std::vector<int> idx(g.N, 0);
  while (true) {
    double k2 = 0.0;
    for (int a = 0; a < g.N; ++a) {
      k2 += static_cast<double>(k[a]) * k[a];
      idx[a] = k[a] >= 0 ? k[a] : k[a] + g.dims[a];
    }
    coeffs[g.flatten(idx.data())] = rng.next() / (1.0 + k2);
    int a = g.N - 1;
    while (a >= 0 && ++k[a] > band) {
      k[a] = -band;
      --a;
    }
    if (a < 0) break;
  }
  return inverse_transform(g, coeffs);
}

void multiply_window(ScalarField& f, const ScalarField& w) {
  auto fv = f.values();
  auto wv = w.values();
  for (std::size_t s = 0; s < fv.size(); ++s) fv[s] *= wv[s];
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

FieldKind field_kind_from_string(const std::string& s) {
  if (s == "scalar") return FieldKind::scalar;
  if (s == "vector") return FieldKind::vector;
  if (s == "grad_exact") return FieldKind::grad_exact;
  if (s == "div_free") return FieldKind::div_free;
  throw IoError("unknown field kind: " + s);
}

const char* to_string(FieldKind k) {
  switch (k) {
    case FieldKind::scalar: return "scalar";
    case FieldKind::vector: return "vector";
    case FieldKind::grad_exact: return "grad_exact";
    case FieldKind::div_free: return "div_free";
  }
  return "?";
}

ScalarField localization_window(const GridSpec& g) {
  ScalarField w = ScalarField::zeros(g);
  auto wv = w.values();
  double y[16];
  for_each_point(g, [&](std::size_t flat, const int* idx) {
    g.centered_point(idx, y);
    double v = 1.0;
    for (int a = 0; a < g.N; ++a) {
      const double L = g.box[a];
      v *= smoothstep_ramp((std::abs(y[a]) - 0.25 * L) / (0.125 * L));
    }
    wv[flat] = v;
  });
  return w;
}

ScalarField random_scalar_field(const GridSpec& g, const EnsembleSpec& spec,
                                int index) {
  ScalarField f = raw_band_limited(g, spec.seed, index, 0, spec.band_limit);
  if (spec.localize) multiply_window(f, localization_window(g));
  return f;
}

VectorField random_vector_field(const EllipticSystem& sys, const GridSpec& g,
                                const EnsembleSpec& spec, int index) {
  if (sys.N() != g.N)
    throw DimensionError("random_vector_field: system/grid dimension");
  const int n = sys.n();
  switch (spec.kind) {
    case FieldKind::scalar:
      throw ConstraintError("random_vector_field: scalar kind requested");
    case FieldKind::vector:
    case FieldKind::div_free: {
      VectorField V(g, n);
      ScalarField w = spec.localize ? localization_window(g) : ScalarField();
      for (int c = 0; c < n; ++c) {
        ScalarField f = raw_band_limited(g, spec.seed, index, c, spec.band_limit);
        if (spec.localize) multiply_window(f, w);
        V[c] = std::move(f);
      }
      if (spec.kind == FieldKind::vector) return V;
      return hodge_decompose(sys, V).V1;
    }
    case FieldKind::grad_exact: {
      ScalarField f = raw_band_limited(g, spec.seed, index, 0, spec.band_limit);
      if (spec.localize) multiply_window(f, localization_window(g));
      return grad_L(sys, f);
    }
  }
  throw ConstraintError("random_vector_field: unhandled kind");
}

namespace {

void check_not_degenerate(double lhs, double rhs) {
  if (!(rhs > 1e-12 * (1.0 + lhs)))
    throw DegenerateTrial("ratio denominator vanished");
}

}  // namespace

RatioBreakdown ratio_theorem_A(const EllipticSystem& sys, const VectorField& V,
                               const VectorField& W, double p,
                               const MollifierSpec& m, Pairing pairing) {
  const double pp = p / (p - 1.0);
  RatioBreakdown out;
  ScalarField prod = dot(V, W, pairing);
  out.lhs = h1_norm(prod, m);
  const double nv = lp_norm(V, p);
  const double nw = lp_norm(W, pp);
  const double ndiv = lp_norm(div_Lstar(sys, V), p);
  const double ncurl = lp_norm(curl_L(sys, W), pp);
  out.rhs = nv * nw + ndiv * nw + nv * ncurl;
  check_not_degenerate(out.lhs, out.rhs);
  out.ratio = out.lhs / out.rhs;
  out.parts = {{"norm_V", nv}, {"norm_W", nw}, {"div_V", ndiv}, {"curl_W", ncurl}};
  return out;
}

RatioBreakdown ratio_theorem_12(const EllipticSystem& sys, const VectorField& V,
                                const ScalarField& phi, double p,
                                const MollifierSpec& m, Pairing pairing) {
  const double pp = p / (p - 1.0);
  RatioBreakdown out;
  VectorField W = grad_L(sys, phi);
  ScalarField prod = dot(V, W, pairing);
  out.lhs = h1_norm(prod, m);
  const double nv = lp_norm(V, p);
  const double ndiv = lp_norm(div_Lstar(sys, V), p);
  const double nw = lp_norm(W, pp);
  out.rhs = (nv + ndiv) * nw;
  check_not_degenerate(out.lhs, out.rhs);
  out.ratio = out.lhs / out.rhs;
  out.parts = {{"norm_V", nv}, {"div_V", ndiv}, {"norm_gradL_phi", nw}};
  return out;
}

RatioBreakdown ratio_theorem_13(const EllipticSystem& sys, const VectorField& V,
                                const VectorField& W, double p,
                                const MollifierSpec& m, Pairing pairing,
                                double div_tol) {
  const double resid = div_cancellation_residual(sys, V);
  if (resid > div_tol)
    throw HypothesisError("ratio_theorem_13: V is not div_Lstar-free");
  const double pp = p / (p - 1.0);
  RatioBreakdown out;
  ScalarField prod = dot(V, W, pairing);
  out.lhs = h1_norm(prod, m);
  const double nv = lp_norm(V, p);
  const double nw = lp_norm(W, pp);
  const double ncurl = lp_norm(curl_L(sys, W), pp);
  out.rhs = nv * (nw + ncurl);
  check_not_degenerate(out.lhs, out.rhs);
  out.ratio = out.lhs / out.rhs;
  out.parts = {{"norm_V", nv}, {"norm_W", nw}, {"curl_W", ncurl},
               {"div_residual", resid}};
  return out;
}

RatioBreakdown ratio_calderon(const EllipticSystem& sys, const ScalarField& phi,
                              double p) {
  RatioBreakdown out;
  out.lhs = lp_norm(grad_plain(phi), p);
  out.rhs = lp_norm(grad_L(sys, phi), p);
  check_not_degenerate(out.lhs, out.rhs);
  out.ratio = out.lhs / out.rhs;
  return out;
}

double calderon_frequency_bound(const EllipticSystem& sys, const GridSpec& g,
                                int band_limit) {
  if (band_limit < 1)
    throw ConstraintError("calderon_frequency_bound: need band_limit >= 1");
  std::vector<int> k(g.N, -band_limit);
  std::vector<double> xi(g.N, 0.0);
  double best = 0.0;
  while (true) {
    bool zero = true;
    for (int a = 0; a < g.N; ++a) {
      xi[a] = 2.0 * 3.14159265358979323846 * k[a] / g.box[a];
      if (k[a] != 0) zero = false;
    }
    if (!zero) {
      double xi2 = 0.0;
      for (int a = 0; a < g.N; ++a) xi2 += xi[a] * xi[a];
      const double sym = sys.laplacian_symbol(xi);
      if (!(sym > 0.0))
        throw ConstraintError("calderon_frequency_bound: degenerate symbol");
      best = std::max(best, std::sqrt(xi2 / sym));
    }
    int a = g.N - 1;
    while (a >= 0 && ++k[a] > band_limit) {
      k[a] = -band_limit;
      --a;
    }
    if (a < 0) break;
  }
  return best;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int T = std::max(1, std::min(threads, count));
  if (T == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mtx;
  std::exception_ptr err;
  auto body = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= count) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mtx);
        if (!err) err = std::current_exception();
        break;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(T);
  for (int t = 0; t < T; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

/* ---- Theorem B witness family -------------------------------------------- */

namespace {

struct FamilyEntry {
  ThmBRow row;
  ScalarField product;  // membership-scaled V.W under the pair's convention
};

/* Witness products over (center, radius, width) combinations: the p-matched
   direct pair, the rescaled unit-ball pair, and both factorizations. Scales
   each pair into its membership family: norms clamped to at most 1. */
std::vector<FamilyEntry> build_family(const EllipticSystem& sys, const GridSpec& g,
                                      double p, const WitnessFamilySpec& fam) {
  WitnessTolerances tol;
  tol.enforce = false;  // coarse suites: certificates recorded, not gating
  const double pp = p / (p - 1.0);
  std::vector<FamilyEntry> out;

  auto scaled_product = [](const WitnessPair& pair, double sv, double sw) {
    ScalarField prod = dot(pair.V, pair.W, pair.product_convention);
    auto v = prod.values();
    const double s = sv * sw;
    for (std::size_t t = 0; t < v.size(); ++t) v[t] *= s;
    return prod;
  };
  auto clamp_scales = [&](const WitnessPair& pair) {
    const double sv = 1.0 / std::max(1.0, lp_norm(pair.V, p));
    const double sw = 1.0 / std::max(1.0, lp_norm(pair.W, pp));
    return std::pair<double, double>(sv, sw);
  };
  auto fits = [&](const std::vector<double>& c, double r) {
    for (int a = 0; a < g.N; ++a)
      if (std::abs(c[a]) + 2.0 * r > 0.5 * g.box[a]) return false;
    return true;
  };

  const std::vector<double> origin(g.N, 0.0);
  for (double width : fam.widths) {
    /* reference constructions on the unit ball at the box center */
    WitnessPair unit_base, fgrad_base, fdiv_base;
    if (fam.include_pair_kinds) {
      AnalyticGaussian ub = normalized_gradient_bump(g, origin, width, pp);
      unit_base = witness_unit_ball(sys, g, ub, 0, 1, p, tol);
    }
    if (fam.include_factor_kinds) {
      AnalyticGaussian phi;
      phi.center = origin;
      phi.width = width;
      phi.amplitude = 1.0;
      fgrad_base = factorize_phi(sys, g, phi, FactorSide::grad, p, tol);
      fdiv_base = factorize_phi(sys, g, phi, FactorSide::div, p, tol);
    }

    for (const auto& center : fam.centers) {
      for (double r : fam.radii) {
        if (static_cast<int>(center.size()) != g.N || !fits(center, r)) continue;
        auto emit = [&](const WitnessPair& pair, double sv, double sw) {
          FamilyEntry e;
          e.row.kind = to_string(pair.kind);
          e.row.i = pair.i;
          e.row.j = pair.j;
          e.row.center = center;
          e.row.radius = r;
          e.row.width = width * r;
          e.product = scaled_product(pair, sv, sw);
          out.push_back(std::move(e));
        };

        if (fam.include_pair_kinds) {
          BallSpec B{center, r};
          AnalyticGaussian u = normalized_gradient_bump(g, center, width * r, 2.0);
          WitnessPair direct =
              p <= 2.0 ? witness_small_p(sys, g, u, B, 0, 1, p, tol)
                       : witness_large_p(sys, g, u, B, 0, 1, p, tol);
          auto [sv, sw] = clamp_scales(direct);
          emit(direct, sv, sw);

          if (r >= 1.0) {
            WitnessPair scaled = rescale_to_ball(unit_base, center, r, p, tol);
            auto [sv2, sw2] = clamp_scales(scaled);
            emit(scaled, sv2, sw2);
          }
        }
        if (fam.include_factor_kinds && r >= 1.0) {
          WitnessPair fg = rescale_to_ball(fgrad_base, center, r, p, tol);
          MembershipScaling mg = membership_scaling(fg);
          emit(fg, mg.scale_V, mg.scale_W);
          WitnessPair fd = rescale_to_ball(fdiv_base, center, r, p, tol);
          MembershipScaling md = membership_scaling(fd);
          emit(fd, md.scale_V, md.scale_W);
        }
      }
    }
  }
  if (out.empty()) throw ConstraintError("witness family is empty");
  return out;
}

}  // namespace

ThmBResult thmB_lower(const EllipticSystem& sys, const ScalarField& g, double p,
                      const WitnessFamilySpec& family, const BallFamily& balls) {
  std::vector<FamilyEntry> entries = build_family(sys, g.grid(), p, family);
  ThmBResult res;
  for (auto& e : entries) {
    e.row.pairing_abs = std::abs(pair_fields(g, e.product));
    res.lower = std::max(res.lower, e.row.pairing_abs);
    res.rows.push_back(e.row);
  }
  res.bmo = bmo_norm(g, balls);
  res.ratio = res.bmo > 1e-300 ? res.lower / res.bmo : 0.0;
  return res;
}

/* ---- experiments ---------------------------------------------------------- */

namespace {

using ojson = nlohmann::ordered_json;

struct TrialCell {
  bool present = false;
  bool degenerate = false;
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;
  double cross_dev = -1.0;  // alternate-path ratio deviation when applicable
};

struct GridRun {
  std::vector<int> dims;
  std::vector<std::vector<TrialCell>> cells;  // [p_index][trial]
  int gate_failures = 0;
  double oracle = 0.0;  // lemma-21 frequency bound
};

EnsembleSpec parse_ensemble(const nlohmann::json& e) {
  EnsembleSpec spec;
  spec.seed = e.at("seed").get<std::uint64_t>();
  spec.count = e.at("count").get<int>();
  spec.band_limit = e.at("band_limit").get<int>();
  spec.kind = field_kind_from_string(e.at("kind").get<std::string>());
  spec.localize = e.at("localize").get<bool>();
  if (spec.count < 1) throw IoError("config: ensemble.count must be >= 1");
  return spec;
}

GridSpec parse_grid(const nlohmann::json& cfg, int N, int refine_factor) {
  std::vector<int> dims = cfg.at("grid").at("dims").get<std::vector<int>>();
  std::vector<double> box = cfg.at("grid").at("box").get<std::vector<double>>();
  if (static_cast<int>(dims.size()) != N || static_cast<int>(box.size()) != N)
    throw IoError("config: grid dims/box must match the system dimension");
  for (int& d : dims) d *= refine_factor;
  return make_grid(N, dims, box);
}

std::vector<double> parse_p_list(const nlohmann::json& cfg) {
  std::vector<double> p = cfg.at("p_list").get<std::vector<double>>();
  if (p.empty()) throw IoError("config: p_list must be nonempty");
  for (double v : p)
    if (!(v > 1.0) || !std::isfinite(v)) throw IoError("config: p must be finite > 1");
  return p;
}

std::string iso_timestamp() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

/* ratio experiments: thm-a, thm-12, thm-13 */
GridRun run_ratio_grid(const std::string& name, const EllipticSystem& sys,
                       const GridSpec& g, const EnsembleSpec& ens,
                       const std::vector<double>& p_list, int K, int threads) {
  MollifierSpec m = make_scales(g, K);
  GridRun run;
  run.dims = g.dims;
  run.cells.assign(p_list.size(), std::vector<TrialCell>(ens.count));
  std::atomic<int> gate{0};

  parallel_for(ens.count, threads, [&](int t) {
    EnsembleSpec first = ens, second = ens;
    second.kind = FieldKind::vector;
    if (name == "thm-a") {
      VectorField V = random_vector_field(sys, g, first, 2 * t);
      VectorField W = random_vector_field(sys, g, second, 2 * t + 1);
      for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
        TrialCell& c = run.cells[pi][t];
        try {
          RatioBreakdown r = ratio_theorem_A(sys, V, W, p_list[pi], m);
          c.present = true;
          c.lhs = r.lhs;
          c.rhs = r.rhs;
          c.ratio = r.ratio;
        } catch (const DegenerateTrial&) {
          c.degenerate = true;
        }
      }
    } else if (name == "thm-12") {
      VectorField V = random_vector_field(sys, g, first, 2 * t);
      EnsembleSpec sc = ens;
      sc.kind = FieldKind::scalar;
      ScalarField phi = random_scalar_field(g, sc, 2 * t + 1);
      VectorField W = grad_L(sys, phi);
      for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
        TrialCell& c = run.cells[pi][t];
        try {
          RatioBreakdown r = ratio_theorem_12(sys, V, phi, p_list[pi], m);
          RatioBreakdown alt = ratio_theorem_A(sys, V, W, p_list[pi], m);
          c.present = true;
          c.lhs = r.lhs;
          c.rhs = r.rhs;
          c.ratio = r.ratio;
          c.cross_dev = std::abs(r.ratio - alt.ratio) / std::max(r.ratio, 1e-300);
        } catch (const DegenerateTrial&) {
          c.degenerate = true;
        }
      }
    } else {  // thm-13
      VectorField V = random_vector_field(sys, g, first, 2 * t);
      VectorField W = random_vector_field(sys, g, second, 2 * t + 1);
      for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
        TrialCell& c = run.cells[pi][t];
        try {
          RatioBreakdown r = ratio_theorem_13(sys, V, W, p_list[pi], m);
          RatioBreakdown alt = ratio_theorem_A(sys, V, W, p_list[pi], m);
          c.present = true;
          c.lhs = r.lhs;
          c.rhs = r.rhs;
          c.ratio = r.ratio;
          c.cross_dev = std::abs(r.ratio - alt.ratio) / std::max(r.ratio, 1e-300);
        } catch (const DegenerateTrial&) {
          c.degenerate = true;
        } catch (const HypothesisError&) {
          gate.fetch_add(1);
          c.degenerate = true;
        }
      }
    }
  });
  run.gate_failures = gate.load();
  return run;
}

GridRun run_calderon_grid(const EllipticSystem& sys, const GridSpec& g,
                          const EnsembleSpec& ens,
                          const std::vector<double>& p_list, int threads) {
  GridRun run;
  run.dims = g.dims;
  run.cells.assign(p_list.size(), std::vector<TrialCell>(ens.count));
  run.oracle = calderon_frequency_bound(sys, g, std::max(1, ens.band_limit));

  parallel_for(ens.count, threads, [&](int t) {
    ScalarField phi = random_scalar_field(g, ens, t);
    /* real part, mean removed: keeps the plain and structured gradient
       moduli comparable pointwise for the reference systems */
    auto v = phi.values();
    cdouble mean = 0.0;
    for (auto& z : v) {
      z = cdouble(z.real(), 0.0);
      mean += z;
    }
    mean /= static_cast<double>(v.size());
    for (auto& z : v) z -= mean;
    for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
      TrialCell& c = run.cells[pi][t];
      try {
        RatioBreakdown r = ratio_calderon(sys, phi, p_list[pi]);
        c.present = true;
        c.lhs = r.lhs;
        c.rhs = r.rhs;
        c.ratio = r.ratio;
      } catch (const DegenerateTrial&) {
        c.degenerate = true;
      }
    }
  });
  return run;
}

ojson cells_to_trials(const std::vector<double>& p_list, const GridRun& run) {
  ojson rows = ojson::array();
  for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
    for (std::size_t t = 0; t < run.cells[pi].size(); ++t) {
      const TrialCell& c = run.cells[pi][t];
      if (!c.present) continue;
      ojson row;
      row["trial"] = static_cast<int>(t);
      row["p"] = p_list[pi];
      row["lhs"] = c.lhs;
      row["rhs"] = c.rhs;
      row["ratio"] = c.ratio;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

struct PSummary {
  int retained = 0, excluded = 0;
  double max_ratio = 0.0, median_ratio = 0.0, cross_max = -1.0;
};

std::vector<PSummary> summarize(const std::vector<double>& p_list,
                                const GridRun& run) {
  std::vector<PSummary> out(p_list.size());
  for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
    std::vector<double> ratios;
    for (const TrialCell& c : run.cells[pi]) {
      if (!c.present) {
        out[pi].excluded += c.degenerate ? 1 : 0;
        continue;
      }
      out[pi].retained += 1;
      ratios.push_back(c.ratio);
      out[pi].max_ratio = std::max(out[pi].max_ratio, c.ratio);
      if (c.cross_dev >= 0.0)
        out[pi].cross_max = std::max(out[pi].cross_max, c.cross_dev);
    }
    out[pi].median_ratio = median_of(std::move(ratios));
  }
  return out;
}

ojson summaries_to_json(const std::vector<double>& p_list,
                        const std::vector<PSummary>& sums) {
  ojson arr = ojson::array();
  for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
    ojson s;
    s["p"] = p_list[pi];
    s["retained"] = sums[pi].retained;
    s["excluded"] = sums[pi].excluded;
    s["max_ratio"] = sums[pi].max_ratio;
    s["median_ratio"] = sums[pi].median_ratio;
    if (sums[pi].cross_max >= 0.0) s["cross_check_max_dev"] = sums[pi].cross_max;
    arr.push_back(std::move(s));
  }
  return arr;
}

void push_assertion(ojson& assertions, const std::string& name, double p,
                    double value, double bound, bool pass) {
  ojson a;
  a["name"] = name;
  if (p > 0.0) a["p"] = p;
  a["value"] = value;
  a["bound"] = bound;
  a["pass"] = pass;
  assertions.push_back(std::move(a));
}

/* thm-b machinery */

struct ThmBGridOut {
  std::vector<int> dims;
  /* [p_index][trial] */
  std::vector<std::vector<ThmBResult>> results;
};

WitnessFamilySpec family_from_config(const nlohmann::json& cfg, double p) {
  WitnessFamilySpec fam;
  fam.p = p;
  if (cfg.contains("family")) {
    const auto& f = cfg.at("family");
    if (f.contains("centers"))
      fam.centers = f.at("centers").get<std::vector<std::vector<double>>>();
    if (f.contains("radii")) fam.radii = f.at("radii").get<std::vector<double>>();
    if (f.contains("widths")) fam.widths = f.at("widths").get<std::vector<double>>();
  }
  return fam;
}

ThmBGridOut run_thmb_grid(const EllipticSystem& sys, const GridSpec& g,
                          const nlohmann::json& cfg, const EnsembleSpec& ens,
                          const std::vector<double>& p_list, int threads) {
  const int stride = cfg.at("ball").at("stride").get<int>();
  const std::vector<double> radii =
      cfg.at("ball").at("radii").get<std::vector<double>>();
  BallFamily balls = make_ball_family(g, stride, radii);

  ThmBGridOut out;
  out.dims = g.dims;
  out.results.assign(p_list.size(), std::vector<ThmBResult>(ens.count));
  EnsembleSpec sc = ens;
  sc.kind = FieldKind::scalar;
  for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
    WitnessFamilySpec fam = family_from_config(cfg, p_list[pi]);
    parallel_for(ens.count, threads, [&](int t) {
      ScalarField gf = random_scalar_field(g, sc, t);
      out.results[pi][t] = thmB_lower(sys, gf, p_list[pi], fam, balls);
    });
  }
  return out;
}

}  // namespace

nlohmann::ordered_json run_experiment(const nlohmann::json& user_config,
                                      int threads) {
  if (!user_config.is_object() || !user_config.contains("experiment"))
    throw IoError("config: missing experiment name");
  const std::string name = user_config.at("experiment").get<std::string>();

  nlohmann::json config = default_experiment_config(name);
  config.merge_patch(user_config);

  EllipticSystem sys = system_from_json_string(config.at("system").dump());
  const bool refine = config.value("refine", false);
  GridSpec g = parse_grid(config, sys.N(), 1);
  std::vector<double> p_list = parse_p_list(config);
  EnsembleSpec ens = parse_ensemble(config.at("ensemble"));

  ojson report;
  report["experiment"] = name;
  report["config"] = config;
  {
    ojson gj;
    gj["dims"] = g.dims;
    gj["box"] = g.box;
    report["grid"] = std::move(gj);
  }
  ojson assertions = ojson::array();

  if (name == "thm-a" || name == "thm-12" || name == "thm-13") {
    const int K = config.at("scales").get<int>();
    GridRun base = run_ratio_grid(name, sys, g, ens, p_list, K, threads);
    std::vector<PSummary> sums = summarize(p_list, base);
    report["trials"] = cells_to_trials(p_list, base);
    report["summary"] = summaries_to_json(p_list, sums);

    for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
      const bool finite = sums[pi].retained > 0 &&
                          std::isfinite(sums[pi].max_ratio) &&
                          sums[pi].max_ratio > 0.0;
      push_assertion(assertions, "max_ratio_finite", p_list[pi],
                     sums[pi].max_ratio, 1e308, finite);
      if (name != "thm-a")
        push_assertion(assertions, "cross_check", p_list[pi], sums[pi].cross_max,
                       1e-9, sums[pi].cross_max <= 1e-9);
    }
    if (name == "thm-13")
      push_assertion(assertions, "hypothesis_gate_failures", 0.0,
                     base.gate_failures, 0.0, base.gate_failures == 0);

    if (refine) {
      GridSpec g2 = parse_grid(config, sys.N(), 2);
      GridRun fine = run_ratio_grid(name, sys, g2, ens, p_list, K, threads);
      std::vector<PSummary> fsums = summarize(p_list, fine);
      ojson ref;
      ref["dims"] = g2.dims;
      ref["trials"] = cells_to_trials(p_list, fine);
      ref["summary"] = summaries_to_json(p_list, fsums);
      report["refinement"] = std::move(ref);
      for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
        const double b = sums[pi].max_ratio;
        const double f = fsums[pi].max_ratio;
        const double drift = std::abs(f - b) / std::max(b, 1e-300);
        push_assertion(assertions, "refinement_drift_max_ratio", p_list[pi],
                       drift, 0.25, drift <= 0.25);
      }
    }
  } else if (name == "lemma-21") {
    GridRun base = run_calderon_grid(sys, g, ens, p_list, threads);
    std::vector<PSummary> sums = summarize(p_list, base);
    report["trials"] = cells_to_trials(p_list, base);
    report["summary"] = summaries_to_json(p_list, sums);
    report["frequency_oracle"] = base.oracle;

    double worst_vs_oracle = 0.0, worst_vs_one = 0.0;
    int retained = 0;
    for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
      for (const TrialCell& c : base.cells[pi]) {
        if (!c.present) continue;
        retained += 1;
        worst_vs_oracle = std::max(worst_vs_oracle, c.ratio / base.oracle);
        worst_vs_one = std::max(worst_vs_one, std::abs(c.ratio - 1.0));
      }
    }
    push_assertion(assertions, "ratio_within_frequency_oracle", 0.0,
                   worst_vs_oracle, 1.0 + 1e-9,
                   retained > 0 && worst_vs_oracle <= 1.0 + 1e-9);
    if (sys.m() == 0)
      push_assertion(assertions, "gradient_ratio_is_one", 0.0, worst_vs_one,
                     1e-10, worst_vs_one <= 1e-10);

    if (refine) {
      GridSpec g2 = parse_grid(config, sys.N(), 2);
      GridRun fine = run_calderon_grid(sys, g2, ens, p_list, threads);
      std::vector<PSummary> fsums = summarize(p_list, fine);
      ojson ref;
      ref["dims"] = g2.dims;
      ref["trials"] = cells_to_trials(p_list, fine);
      ref["summary"] = summaries_to_json(p_list, fsums);
      report["refinement"] = std::move(ref);
      for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
        const double b = sums[pi].max_ratio;
        const double f = fsums[pi].max_ratio;
        const double drift = std::abs(f - b) / std::max(b, 1e-300);
        push_assertion(assertions, "refinement_drift_max_ratio", p_list[pi],
                       drift, 0.10, drift <= 0.10);
      }
    }
  } else if (name == "thm-b") {
    ThmBGridOut base = run_thmb_grid(sys, g, config, ens, p_list, threads);

    ojson trials = ojson::array();
    ojson details = ojson::array();
    ojson summary = ojson::array();
    std::vector<double> cgrid(p_list.size(), 0.0);
    for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (int t = 0; t < ens.count; ++t) {
        const ThmBResult& r = base.results[pi][t];
        ojson row;
        row["trial"] = t;
        row["p"] = p_list[pi];
        row["lhs"] = r.lower;
        row["rhs"] = r.bmo;
        row["ratio"] = r.ratio;
        trials.push_back(std::move(row));
        cgrid[pi] = std::max(cgrid[pi], r.ratio);
        lo = std::min(lo, r.ratio);
        hi = std::max(hi, r.ratio);
        for (const ThmBRow& w : r.rows) {
          ojson d;
          d["trial"] = t;
          d["p"] = p_list[pi];
          d["kind"] = w.kind;
          d["center"] = w.center;
          d["radius"] = w.radius;
          d["width"] = w.width;
          d["pairing_abs"] = w.pairing_abs;
          details.push_back(std::move(d));
        }
      }
      ojson s;
      s["p"] = p_list[pi];
      s["C_grid"] = cgrid[pi];
      s["band_low"] = lo;
      s["band_high"] = hi;
      s["witnesses_per_field"] =
          ens.count > 0 ? static_cast<int>(base.results[pi][0].rows.size()) : 0;
      summary.push_back(std::move(s));

      /* duality direction, executed per (field, witness) */
      double worst = 0.0;
      for (int t = 0; t < ens.count; ++t) {
        const ThmBResult& r = base.results[pi][t];
        for (const ThmBRow& w : r.rows)
          worst = std::max(worst,
                           w.pairing_abs / std::max(cgrid[pi] * r.bmo, 1e-300));
      }
      push_assertion(assertions, "pair_bounded_by_Cgrid_bmo", p_list[pi], worst,
                     1.0 + 1e-12, worst <= 1.0 + 1e-12);
    }
    report["trials"] = std::move(trials);
    report["summary"] = std::move(summary);
    report["details"] = std::move(details);

    if (refine) {
      GridSpec g2 = parse_grid(config, sys.N(), 2);
      ThmBGridOut fine = run_thmb_grid(sys, g2, config, ens, p_list, threads);
      ojson ref;
      ref["dims"] = g2.dims;
      ojson ftrials = ojson::array();
      ojson fsummary = ojson::array();
      for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
        double fc = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        double worst_field_drift = 0.0;
        for (int t = 0; t < ens.count; ++t) {
          const ThmBResult& r = fine.results[pi][t];
          ojson row;
          row["trial"] = t;
          row["p"] = p_list[pi];
          row["lhs"] = r.lower;
          row["rhs"] = r.bmo;
          row["ratio"] = r.ratio;
          ftrials.push_back(std::move(row));
          fc = std::max(fc, r.ratio);
          lo = std::min(lo, r.ratio);
          hi = std::max(hi, r.ratio);
          const double b = base.results[pi][t].ratio;
          worst_field_drift = std::max(
              worst_field_drift, std::abs(r.ratio - b) / std::max(b, 1e-300));
        }
        ojson s;
        s["p"] = p_list[pi];
        s["C_grid"] = fc;
        s["band_low"] = lo;
        s["band_high"] = hi;
        fsummary.push_back(std::move(s));
        const double cdrift = std::abs(fc - cgrid[pi]) / std::max(cgrid[pi], 1e-300);
        push_assertion(assertions, "refinement_drift_C_grid", p_list[pi], cdrift,
                       0.20, cdrift <= 0.20);
        push_assertion(assertions, "refinement_drift_ratio_per_field", p_list[pi],
                       worst_field_drift, 0.25, worst_field_drift <= 0.25);
      }
      ref["trials"] = std::move(ftrials);
      ref["summary"] = std::move(fsummary);
      report["refinement"] = std::move(ref);
    }
  } else {
    throw IoError("unknown experiment: " + name);
  }

  bool all = true;
  for (const auto& a : assertions) all = all && a.at("pass").get<bool>();
  report["assertions"] = std::move(assertions);
  report["pass"] = all;
  report["timestamp"] = iso_timestamp();
  return report;
}

bool report_passed(const nlohmann::ordered_json& report) {
  return report.contains("pass") && report.at("pass").get<bool>();
}

nlohmann::ordered_json default_experiment_config(const std::string& name) {
  ojson cfg;
  cfg["experiment"] = name;
  cfg["system"] = nlohmann::json::parse(to_json_string(gradient_system(2)));
  ojson grid;
  ojson ensemble;
  ensemble["seed"] = 42;
  ensemble["count"] = 100;
  ensemble["band_limit"] = 8;
  ensemble["kind"] = "vector";
  ensemble["localize"] = true;
  cfg["p_list"] = std::vector<double>{4.0 / 3.0, 2.0, 4.0};
  cfg["scales"] = 4;
  cfg["refine"] = false;

  if (name == "thm-a" || name == "thm-12" || name == "thm-13") {
    grid["dims"] = std::vector<int>{64, 64};
    grid["box"] = std::vector<double>{1.0, 1.0};
    if (name == "thm-13") ensemble["kind"] = "div_free";
  } else if (name == "lemma-21") {
    grid["dims"] = std::vector<int>{64, 64};
    grid["box"] = std::vector<double>{1.0, 1.0};
    ensemble["kind"] = "scalar";
    ensemble["localize"] = false;
  } else if (name == "thm-b") {
    grid["dims"] = std::vector<int>{64, 64};
    grid["box"] = std::vector<double>{8.0, 8.0};
    ensemble["kind"] = "scalar";
    ensemble["localize"] = false;
    ensemble["count"] = 10;
    ensemble["band_limit"] = 4;
    cfg["p_list"] = std::vector<double>{2.0};
    ojson ball;
    ball["stride"] = 2;
    ball["radii"] = std::vector<double>{0.25, 0.5, 1.0, 2.0};
    cfg["ball"] = std::move(ball);
    ojson fam;
    fam["centers"] = std::vector<std::vector<double>>{{0.0, 0.0}, {1.5, 1.5}};
    fam["radii"] = std::vector<double>{1.0, 2.0};
    fam["widths"] = std::vector<double>{0.25, 0.35};
    cfg["family"] = std::move(fam);
  } else {
    throw IoError("unknown experiment: " + name);
  }
  cfg["grid"] = std::move(grid);
  cfg["ensemble"] = std::move(ensemble);
  return cfg;
}

std::string report_to_csv(const nlohmann::ordered_json& report) {
  std::string out = "trial,p,lhs,rhs,ratio\n";
  if (!report.contains("trials")) return out;
  char buf[160];
  for (const auto& row : report.at("trials")) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n",
                  row.at("trial").get<int>(), row.at("p").get<double>(),
                  row.at("lhs").get<double>(), row.at("rhs").get<double>(),
                  row.at("ratio").get<double>());
    out += buf;
  }
  return out;
}

}  // namespace divcurl
