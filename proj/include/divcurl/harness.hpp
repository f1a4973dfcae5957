#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "divcurl/elliptic.hpp"
#include "divcurl/grid.hpp"
#include "divcurl/norms.hpp"
#include "divcurl/operators.hpp"
#include "divcurl/witness.hpp"

#include "json.hpp"

namespace divcurl {

enum class FieldKind { scalar, vector, grad_exact, div_free };

FieldKind field_kind_from_string(const std::string& s);
const char* to_string(FieldKind k);

/* Deterministic band-limited random fields. Coefficients are complex Gaussian
   draws over the |k|_inf <= band_limit lattice in a fixed lexicographic order,
   seeded per (seed, index, component), so a draw is identical for any grid
   that can host it and any thread count. */
struct EnsembleSpec {
  std::uint64_t seed = 42;
  int count = 100;
  int band_limit = 8;
  FieldKind kind = FieldKind::vector;
  bool localize = true;
};

ScalarField random_scalar_field(const GridSpec& g, const EnsembleSpec& spec,
                                int index);
VectorField random_vector_field(const EllipticSystem& sys, const GridSpec& g,
                                const EnsembleSpec& spec, int index);

/* central plateau window used for localization: product over axes, 1 on
   |d_a| <= box/4, 0 for |d_a| >= 3 box/8 */
ScalarField localization_window(const GridSpec& g);

struct RatioBreakdown {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::map<std::string, double> parts;
};

/* h1(V.W) / (||V||_p ||W||_p' + ||div_Lstar V||_p ||W||_p' + ||V||_p ||curl_L W||_p') */
RatioBreakdown ratio_theorem_A(const EllipticSystem& sys, const VectorField& V,
                               const VectorField& W, double p,
                               const MollifierSpec& m,
                               Pairing pairing = Pairing::sesquilinear);

/* h1(V.grad_L phi) / ((||V||_p + ||div_Lstar V||_p) ||grad_L phi||_p') */
RatioBreakdown ratio_theorem_12(const EllipticSystem& sys, const VectorField& V,
                                const ScalarField& phi, double p,
                                const MollifierSpec& m,
                                Pairing pairing = Pairing::sesquilinear);

/* h1(V.W) / (||V||_p (||W||_p' + ||curl_L W||_p')); requires V div-free */
RatioBreakdown ratio_theorem_13(const EllipticSystem& sys, const VectorField& V,
                                const VectorField& W, double p,
                                const MollifierSpec& m,
                                Pairing pairing = Pairing::sesquilinear,
                                double div_tol = 1e-9);

/* ||grad phi||_p / ||grad_L phi||_p, plain over structured gradient */
RatioBreakdown ratio_calderon(const EllipticSystem& sys, const ScalarField& phi,
                              double p);

/* max over nonzero |k|_inf <= band_limit of |xi_k| / sqrt(laplacian_symbol);
   a provable bound on the p = 2 Calderon ratio by Parseval */
double calderon_frequency_bound(const EllipticSystem& sys, const GridSpec& g,
                                int band_limit);

struct WitnessFamilySpec {
  double p = 2.0;
  std::vector<std::vector<double>> centers = {{0.0, 0.0}};  // box-centered
  std::vector<double> radii = {1.0, 2.0};
  std::vector<double> widths = {0.10, 0.15};  // bump width / ball radius
  bool include_pair_kinds = true;   // small_p (p<=2) or large_p (p>2), plus unit
  bool include_factor_kinds = true;
};

struct ThmBRow {
  std::string kind;
  int i = 0, j = 1;
  std::vector<double> center;
  double radius = 1.0;
  double width = 0.0;
  double pairing_abs = 0.0;
};

struct ThmBResult {
  double lower = 0.0;  // max over the family of |pair(g, V.W)|
  double bmo = 0.0;
  double ratio = 0.0;
  std::vector<ThmBRow> rows;
};

ThmBResult thmB_lower(const EllipticSystem& sys, const ScalarField& g, double p,
                      const WitnessFamilySpec& family, const BallFamily& balls);

/* index-ordered parallel map; results identical for any thread count */
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

/* Named experiments: thm-a, thm-12, thm-13, lemma-21, thm-b.
   Config: {"experiment", "system", "grid":{"dims","box"},
            "ensemble":{"seed","count","band_limit","kind","localize"},
            "p_list", "scales", "ball":{"stride","radii"}, "refine"}.
   The report carries the resolved config, per-trial rows, per-p summaries,
   declared assertions with pass flags, and (in refine mode) the paired-grid
   comparison. Byte-identical for fixed config across thread counts. */
nlohmann::ordered_json run_experiment(const nlohmann::json& config, int threads);

bool report_passed(const nlohmann::ordered_json& report);

nlohmann::ordered_json default_experiment_config(const std::string& name);

std::string report_to_csv(const nlohmann::ordered_json& report);

}  // namespace divcurl
