#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "divcurl/elliptic.hpp"
#include "divcurl/grid.hpp"
#include "divcurl/harness.hpp"
#include "divcurl/hodge.hpp"
#include "divcurl/io.hpp"
#include "divcurl/norms.hpp"
#include "divcurl/operators.hpp"
#include "divcurl/witness.hpp"

namespace dc = divcurl;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

using cdouble = dc::cdouble;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dc::IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/* temp-file + rename so failures leave no partial output */
void write_text(const std::string& path, const std::string& text, bool force) {
  namespace fs = std::filesystem;
  if (!force && fs::exists(path))
    throw dc::IoError("refusing to overwrite " + path + " (use --force)");
  const std::string tmp = path + ".divcurl.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw dc::IoError("cannot open " + tmp + " for writing");
    out << text;
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw dc::IoError("write failed for " + tmp);
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ec2;
    fs::remove(tmp, ec2);
    throw dc::IoError("cannot move output into place at " + path);
  }
}

dc::EllipticSystem load_system(const std::string& path) {
  return dc::system_from_json_string(slurp(path));
}

struct GlobalOpts {
  std::uint64_t seed = 42;
  int threads = 1;
  bool tol_report = false;
  bool quiet = false;
};

std::ostream& info(const GlobalOpts& g) {
  static std::ofstream sink;  // never opened: a silent stream
  return g.quiet ? static_cast<std::ostream&>(sink) : std::cout;
}

std::vector<double> zeros_if_empty(std::vector<double> v, int N) {
  if (v.empty()) v.assign(N, 0.0);
  if (static_cast<int>(v.size()) != N)
    throw dc::DimensionError("coordinate list length must match the dimension");
  return v;
}

dc::GridSpec grid_from(const std::vector<int>& dims, const std::vector<double>& box) {
  return dc::make_grid(static_cast<int>(dims.size()), dims, box);
}

/* ---- elliptic check -------------------------------------------------------- */

struct EllipticOpts {
  std::string system_path;
  int resolution = 4096;
  double tol = 1e-9;
  std::string json_path;
  bool force = false;
};

int run_elliptic(const GlobalOpts& g, const EllipticOpts& o) {
  dc::EllipticSystem sys = load_system(o.system_path);
  dc::EllipticityCertificate cert = dc::certify_ellipticity(sys, o.resolution, o.tol);
  info(g) << "system n=" << sys.n() << " N=" << sys.N()
          << (cert.elliptic ? " elliptic" : " NOT elliptic")
          << ", constant=" << cert.constant << " (tol " << cert.tol << ", "
          << cert.sphere_samples << " directions)\n";
  if (g.tol_report) {
    info(g) << "  witness direction:";
    for (double x : cert.witness_direction) info(g) << " " << x;
    info(g) << "\n";
  }
  if (!o.json_path.empty()) {
    ojson r;
    r["config"] = {{"system", json::parse(dc::to_json_string(sys))},
                   {"resolution", o.resolution},
                   {"tol", o.tol}};
    r["constant"] = cert.constant;
    r["elliptic"] = cert.elliptic;
    r["sphere_samples"] = cert.sphere_samples;
    r["witness_direction"] = cert.witness_direction;
    write_text(o.json_path, r.dump(2) + "\n", o.force);
  }
  return cert.elliptic ? 0 : 1;
}

/* ---- op -------------------------------------------------------------------- */

struct OpOpts {
  std::string which;
  std::string system_path, in_path, in2_path, out_path;
  std::string pairing = "sesq";
  bool force = false;
};

int run_op(const GlobalOpts& g, const OpOpts& o) {
  dc::EllipticSystem sys = load_system(o.system_path);
  dc::CvfData in = dc::read_cvf(o.in_path);
  if (in.grid.N != sys.N())
    throw dc::DimensionError("input field dimension does not match the system");

  if (o.which == "grad") {
    dc::VectorField out = dc::grad_L(sys, dc::as_scalar(in));
    dc::write_cvf(o.out_path, out, o.force);
    info(g) << "grad_L: wrote " << out.components() << " components to "
            << o.out_path << "\n";
  } else if (o.which == "div") {
    dc::ScalarField out = dc::div_Lstar(sys, dc::as_vector(in));
    dc::write_cvf(o.out_path, out, o.force);
    info(g) << "div_Lstar: wrote " << o.out_path << "\n";
  } else if (o.which == "curl") {
    dc::MatrixField out = dc::curl_L(sys, dc::as_vector(in));
    std::vector<const dc::ScalarField*> comps;
    for (int i = 0; i < out.n(); ++i)
      for (int j = 0; j < out.n(); ++j) comps.push_back(&out.at(i, j));
    dc::write_cvf(o.out_path, in.grid, comps, o.force);
    info(g) << "curl_L: wrote " << comps.size() << " components (row-major "
            << out.n() << "x" << out.n() << ") to " << o.out_path << "\n";
  } else {  // dot
    if (o.in2_path.empty())
      throw dc::IoError("op dot needs --in2 for the second field");
    dc::CvfData in2 = dc::read_cvf(o.in2_path);
    const dc::Pairing pr = o.pairing == "bilin" ? dc::Pairing::bilinear
                                                : dc::Pairing::sesquilinear;
    dc::ScalarField out = dc::dot(dc::as_vector(in), dc::as_vector(in2), pr);
    dc::write_cvf(o.out_path, out, o.force);
    info(g) << "dot (" << o.pairing << "): wrote " << o.out_path << "\n";
  }
  return 0;
}

/* ---- hodge ------------------------------------------------------------------ */

struct HodgeOpts {
  std::string system_path, in_path, out1_path, out2_path, report_path;
  bool force = false;
};

int run_hodge(const GlobalOpts& g, const HodgeOpts& o) {
  dc::EllipticSystem sys = load_system(o.system_path);
  dc::CvfData in = dc::read_cvf(o.in_path);
  dc::HodgeResult r = dc::hodge_decompose(sys, dc::as_vector(in), {2.0});
  dc::write_cvf(o.out1_path, r.V1, o.force);
  dc::write_cvf(o.out2_path, r.V2, o.force);
  info(g) << "hodge: residual_div=" << r.residual_div << ", wrote "
          << o.out1_path << " and " << o.out2_path << "\n";
  if (!o.report_path.empty()) {
    ojson rep;
    rep["config"] = {{"system", json::parse(dc::to_json_string(sys))},
                     {"in", o.in_path}};
    rep["grid"] = {{"dims", in.grid.dims}, {"box", in.grid.box}};
    rep["residual_div"] = r.residual_div;
    ojson ratios = ojson::array();
    for (const auto& [p, pr] : r.norm_ratios)
      ratios.push_back({{"p", p}, {"V1_over_V", pr.first}, {"V2_over_V", pr.second}});
    rep["norm_ratios"] = std::move(ratios);
    write_text(o.report_path, rep.dump(2) + "\n", o.force);
  }
  return 0;
}

/* ---- norm ------------------------------------------------------------------- */

struct NormOpts {
  std::string which;
  std::string in_path;
  double p = 2.0;
  int scales = 5;
  int stride = 2;
  std::vector<double> radii = {0.5, 1.0};
  std::string json_path;
  bool force = false;
};

int run_norm(const GlobalOpts& g, const NormOpts& o) {
  dc::CvfData in = dc::read_cvf(o.in_path);
  double value = 0.0;
  ojson cfg;
  cfg["in"] = o.in_path;
  if (o.which == "lp") {
    value = in.components.size() == 1 ? dc::lp_norm(dc::as_scalar(in), o.p)
                                      : dc::lp_norm(dc::as_vector(in), o.p);
    cfg["p"] = o.p;
  } else if (o.which == "h1") {
    dc::MollifierSpec m = dc::make_scales(in.grid, o.scales);
    value = dc::h1_norm(dc::as_scalar(in), m);
    cfg["scales"] = o.scales;
  } else {  // bmo
    dc::BallFamily balls = dc::make_ball_family(in.grid, o.stride, o.radii);
    value = dc::bmo_norm(dc::as_scalar(in), balls);
    cfg["stride"] = o.stride;
    cfg["radii"] = o.radii;
  }
  info(g) << o.which << " norm = " << value << "\n";
  if (!o.json_path.empty()) {
    ojson r;
    r["config"] = std::move(cfg);
    r["grid"] = {{"dims", in.grid.dims}, {"box", in.grid.box}};
    r["norm"] = o.which;
    r["value"] = value;
    write_text(o.json_path, r.dump(2) + "\n", o.force);
  }
  return 0;
}

/* ---- witness ----------------------------------------------------------------- */

struct WitnessOpts {
  std::string which;
  std::string system_path;
  double p = 2.0;
  int i = 1, j = 2;  // 1-based on the command line
  std::vector<int> dims = {256, 256};
  std::vector<double> box = {8.0, 8.0};
  std::vector<double> center;
  double radius = 1.0;
  double width = 0.15;
  double R = 0.0;  // 0: no rescale
  std::vector<double> x0;
  std::string out_v, out_w, cert_path;
  bool force = false;
};

dc::WitnessPair build_witness(const dc::EllipticSystem& sys, const dc::GridSpec& g,
                              const std::string& kind, double p, int i, int j,
                              const std::vector<double>& center, double radius,
                              double width, const dc::WitnessTolerances& tol) {
  const double pp = p / (p - 1.0);
  if (kind == "small-p") {
    dc::AnalyticGaussian u = dc::normalized_gradient_bump(g, center, width, 2.0);
    return dc::witness_small_p(sys, g, u, dc::BallSpec{center, radius}, i, j, p, tol);
  }
  if (kind == "large-p") {
    dc::AnalyticGaussian u = dc::normalized_gradient_bump(g, center, width, 2.0);
    return dc::witness_large_p(sys, g, u, dc::BallSpec{center, radius}, i, j, p, tol);
  }
  if (kind == "unit") {
    dc::AnalyticGaussian u = dc::normalized_gradient_bump(g, center, width, pp);
    return dc::witness_unit_ball(sys, g, u, i, j, p, tol);
  }
  dc::AnalyticGaussian phi;
  phi.center = center;
  phi.width = width;
  phi.amplitude = 1.0;
  const dc::FactorSide side =
      kind == "factor-grad" ? dc::FactorSide::grad : dc::FactorSide::div;
  return dc::factorize_phi(sys, g, phi, side, p, tol);
}

int run_witness(const GlobalOpts& g, const WitnessOpts& o) {
  dc::EllipticSystem sys = load_system(o.system_path);
  if (o.i < 1 || o.j < 1 || o.i >= o.j || o.j > sys.n())
    throw dc::DimensionError(
        "witness components are 1-based and need 1 <= i < j <= n");
  dc::GridSpec grid = grid_from(o.dims, o.box);
  if (grid.N != sys.N())
    throw dc::DimensionError("grid dimension does not match the system");
  std::vector<double> center = zeros_if_empty(o.center, grid.N);

  dc::WitnessTolerances tol;
  dc::WitnessPair pair = build_witness(sys, grid, o.which, o.p, o.i - 1, o.j - 1,
                                       center, o.radius, o.width, tol);
  if (o.R > 0.0) {
    std::vector<double> x0 = zeros_if_empty(o.x0, grid.N);
    pair = dc::rescale_to_ball(pair, x0, o.R, o.p, tol);
  }

  dc::write_cvf(o.out_v, pair.V, o.force);
  dc::write_cvf(o.out_w, pair.W, o.force);

  ojson cert;
  cert["config"] = {{"system", json::parse(dc::to_json_string(sys))},
                    {"kind", o.which},
                    {"p", o.p},
                    {"i", o.i},
                    {"j", o.j},
                    {"dims", grid.dims},
                    {"box", grid.box},
                    {"center", center},
                    {"radius", o.radius},
                    {"width", o.width},
                    {"R", o.R},
                    {"x0", o.x0}};
  cert["product_convention"] =
      pair.product_convention == dc::Pairing::bilinear ? "bilinear" : "sesquilinear";
  ojson entries = ojson::array();
  int failures = 0;
  for (const dc::CertEntry& e : pair.cert.entries) {
    entries.push_back({{"name", e.name},
                       {"value", e.value},
                       {"bound", e.bound},
                       {"pass", e.pass}});
    failures += e.pass ? 0 : 1;
    if (g.tol_report || !e.pass)
      info(g) << (e.pass ? "  PASS " : "  FAIL ") << e.name << ": " << e.value
              << " vs " << e.bound << "\n";
  }
  cert["entries"] = std::move(entries);
  ojson constants;
  for (const auto& [k, v] : pair.cert.constants) constants[k] = v;
  cert["constants"] = std::move(constants);
  cert["pass"] = pair.cert.pass();
  write_text(o.cert_path, cert.dump(2) + "\n", o.force);

  info(g) << "witness " << o.which << ": " << pair.cert.entries.size()
          << " certificate entries, " << failures << " failed; wrote " << o.out_v
          << ", " << o.out_w << ", " << o.cert_path << "\n";
  return pair.cert.pass() ? 0 : 1;
}

/* ---- verify ------------------------------------------------------------------ */

struct VerifyOpts {
  std::string which;
  std::string system_path, config_path, json_path, csv_path;
  bool refine = false;
  bool force = false;
  bool seed_set = false;
};

int run_verify(const GlobalOpts& g, const VerifyOpts& o) {
  json cfg;
  cfg["experiment"] = o.which;
  /* precedence: built-in defaults < flags < config file */
  if (!o.system_path.empty()) cfg["system"] = json::parse(slurp(o.system_path));
  if (o.seed_set) cfg["ensemble"] = {{"seed", g.seed}};
  if (o.refine) cfg["refine"] = true;
  if (!o.config_path.empty()) {
    json file_cfg = json::parse(slurp(o.config_path));
    cfg.merge_patch(file_cfg);
    cfg["experiment"] = o.which;
  }

  ojson report = dc::run_experiment(cfg, g.threads);

  for (const auto& a : report.at("assertions")) {
    const bool pass = a.at("pass").get<bool>();
    info(g) << (pass ? "  PASS " : "  FAIL ") << a.at("name").get<std::string>();
    if (a.contains("p")) info(g) << " (p=" << a.at("p").get<double>() << ")";
    info(g) << ": " << a.at("value").get<double>() << " vs bound "
            << a.at("bound").get<double>() << "\n";
  }
  if (g.tol_report) {
    for (const auto& s : report.at("summary")) info(g) << "  summary: " << s.dump() << "\n";
  }
  const bool pass = dc::report_passed(report);
  info(g) << "verify " << o.which << ": " << (pass ? "PASS" : "FAIL") << "\n";

  if (!o.json_path.empty()) write_text(o.json_path, report.dump(2) + "\n", o.force);
  if (!o.csv_path.empty()) write_text(o.csv_path, dc::report_to_csv(report), o.force);
  return pass ? 0 : 1;
}

/* ---- field generation ---------------------------------------------------------- */

struct FieldOpts {
  std::string which;
  std::string out_path, system_path;
  std::vector<int> dims = {64, 64};
  std::vector<double> box = {1.0, 1.0};
  std::vector<double> center;
  double width = 0.5;
  double mass = 1.0;
  double radius = 1.0;
  std::vector<int> wave_k;
  std::string kind = "scalar";
  int band = 8;
  int index = 0;
  bool localize = true;
  bool force = false;
};

int run_field(const GlobalOpts& g, const FieldOpts& o) {
  dc::GridSpec grid = grid_from(o.dims, o.box);
  if (o.which == "bump") {
    std::vector<double> center = zeros_if_empty(o.center, grid.N);
    dc::AnalyticGaussian bump;
    bump.center = center;
    bump.width = o.width;
    /* amplitude from the closed-form integral, so the discrete mass matches
       the declared one up to quadrature error */
    bump.amplitude = o.mass / (std::pow(2.0 * 3.14159265358979323846, 0.5 * grid.N) *
                               std::pow(o.width, grid.N));
    dc::write_cvf(o.out_path, bump.sample(grid), o.force);
  } else if (o.which == "plane-wave") {
    std::vector<int> k = o.wave_k;
    if (k.empty()) {
      k.assign(grid.N, 0);
      k[0] = 1;
    }
    if (static_cast<int>(k.size()) != grid.N)
      throw dc::DimensionError("--wave-k length must match the dimension");
    dc::ScalarField f = dc::ScalarField::zeros(grid);
    auto v = f.values();
    dc::for_each_point(grid, [&](std::size_t flat, const int* idx) {
      double phase = 0.0;
      for (int a = 0; a < grid.N; ++a)
        phase += 2.0 * 3.14159265358979323846 * k[a] * idx[a] / grid.dims[a];
      v[flat] = cdouble(std::cos(phase), std::sin(phase));
    });
    dc::write_cvf(o.out_path, f, o.force);
  } else if (o.which == "cutoff") {
    std::vector<double> center = zeros_if_empty(o.center, grid.N);
    dc::write_cvf(o.out_path, dc::make_cutoff(grid, center, o.radius), o.force);
  } else {  // random
    dc::EnsembleSpec spec;
    spec.seed = g.seed;
    spec.band_limit = o.band;
    spec.kind = dc::field_kind_from_string(o.kind);
    spec.localize = o.localize;
    if (spec.kind == dc::FieldKind::scalar) {
      dc::write_cvf(o.out_path, dc::random_scalar_field(grid, spec, o.index), o.force);
    } else {
      if (o.system_path.empty())
        throw dc::IoError("field random with a vector kind needs --system");
      dc::EllipticSystem sys = load_system(o.system_path);
      dc::write_cvf(o.out_path, dc::random_vector_field(sys, grid, spec, o.index),
                    o.force);
    }
  }
  info(g) << "field " << o.which << ": wrote " << o.out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"div-curl estimates for elliptic systems of vector fields"};
  app.require_subcommand(1);

  GlobalOpts gopt;
  app.add_option("--seed", gopt.seed, "global random seed")->capture_default_str();
  app.add_option("--threads", gopt.threads, "worker thread count")
      ->capture_default_str();
  app.add_flag("--tol-report", gopt.tol_report,
               "print every tolerance comparison, not only failures");
  app.add_flag("--quiet", gopt.quiet, "suppress human-readable output");

  /* elliptic check */
  EllipticOpts eopt;
  auto* elliptic = app.add_subcommand("elliptic", "system ellipticity certificate");
  elliptic->require_subcommand(1);
  auto* echeck = elliptic->add_subcommand("check", "certify ellipticity");
  echeck->fallthrough();
  echeck->add_option("--system", eopt.system_path, "system JSON file")->required();
  echeck->add_option("--resolution", eopt.resolution, "unit-sphere sampling")
      ->capture_default_str();
  echeck->add_option("--tol", eopt.tol, "ellipticity threshold")
      ->capture_default_str();
  echeck->add_option("--json", eopt.json_path, "write certificate JSON here");
  echeck->add_flag("--force", eopt.force, "overwrite existing outputs");

  /* op */
  OpOpts oopt;
  auto* op = app.add_subcommand("op", "apply a structured operator to a field");
  op->require_subcommand(1);
  for (const char* name : {"grad", "div", "curl", "dot"}) {
    auto* sub = op->add_subcommand(name);
    sub->fallthrough();
  }
  op->fallthrough();
  op->add_option("--system", oopt.system_path, "system JSON file")->required();
  op->add_option("--in", oopt.in_path, "input CVF1 field")->required();
  op->add_option("--in2", oopt.in2_path, "second input (dot)");
  op->add_option("--out", oopt.out_path, "output CVF1 field")->required();
  op->add_option("--pairing", oopt.pairing, "dot pairing: sesq|bilin")
      ->check(CLI::IsMember({"sesq", "bilin"}))
      ->capture_default_str();
  op->add_flag("--force", oopt.force, "overwrite existing outputs");

  /* hodge */
  HodgeOpts hopt;
  auto* hodge = app.add_subcommand("hodge", "split V into div-free + exact parts");
  hodge->fallthrough();
  hodge->add_option("--system", hopt.system_path, "system JSON file")->required();
  hodge->add_option("--in", hopt.in_path, "input CVF1 vector field")->required();
  hodge->add_option("--out1", hopt.out1_path, "div-free part output")->required();
  hodge->add_option("--out2", hopt.out2_path, "exact part output")->required();
  hodge->add_option("--report", hopt.report_path, "write residual report JSON");
  hodge->add_flag("--force", hopt.force, "overwrite existing outputs");

  /* norm */
  NormOpts nopt;
  auto* norm = app.add_subcommand("norm", "norm estimators on CVF1 fields");
  norm->require_subcommand(1);
  for (const char* name : {"lp", "h1", "bmo"}) norm->add_subcommand(name)->fallthrough();
  norm->fallthrough();
  norm->add_option("--in", nopt.in_path, "input CVF1 field")->required();
  norm->add_option("--p", nopt.p, "exponent for lp")->capture_default_str();
  norm->add_option("--scales", nopt.scales, "dyadic scale count for h1")
      ->capture_default_str();
  norm->add_option("--stride", nopt.stride, "ball center stride for bmo")
      ->capture_default_str();
  norm->add_option("--radii", nopt.radii, "ball radii for bmo")
      ->delimiter(',')
      ->capture_default_str();
  norm->add_option("--json", nopt.json_path, "write result JSON here");
  norm->add_flag("--force", nopt.force, "overwrite existing outputs");

  /* witness */
  WitnessOpts wopt;
  auto* witness = app.add_subcommand("witness", "certified witness pair builders");
  witness->require_subcommand(1);
  for (const char* name : {"small-p", "large-p", "unit", "factor-grad", "factor-div"})
    witness->add_subcommand(name)->fallthrough();
  witness->fallthrough();
  witness->add_option("--system", wopt.system_path, "system JSON file")->required();
  witness->add_option("--p", wopt.p, "Lebesgue exponent")->capture_default_str();
  witness->add_option("--i", wopt.i, "first component (1-based)")
      ->capture_default_str();
  witness->add_option("--j", wopt.j, "second component (1-based)")
      ->capture_default_str();
  witness->add_option("--dims", wopt.dims, "grid samples per axis")
      ->delimiter(',')
      ->capture_default_str();
  witness->add_option("--box", wopt.box, "box lengths")
      ->delimiter(',')
      ->capture_default_str();
  witness->add_option("--center", wopt.center, "ball center (box-centered coords)")
      ->delimiter(',');
  witness->add_option("--radius", wopt.radius, "ball radius")->capture_default_str();
  witness->add_option("--width", wopt.width, "input bump width")
      ->capture_default_str();
  witness->add_option("--R", wopt.R, "rescale factor (>= 1) applied after building");
  witness->add_option("--x0", wopt.x0, "rescale target center")->delimiter(',');
  witness->add_option("--out-v", wopt.out_v, "output CVF1 for V")->required();
  witness->add_option("--out-w", wopt.out_w, "output CVF1 for W")->required();
  witness->add_option("--cert", wopt.cert_path, "output certificate JSON")
      ->required();
  witness->add_flag("--force", wopt.force, "overwrite existing outputs");

  /* verify */
  VerifyOpts vopt;
  auto* verify = app.add_subcommand("verify", "named verification experiments");
  verify->require_subcommand(1);
  for (const char* name : {"thm-a", "thm-12", "thm-13", "lemma-21", "thm-b"})
    verify->add_subcommand(name)->fallthrough();
  verify->fallthrough();
  verify->add_option("--system", vopt.system_path,
                     "system JSON file (config file wins over this)");
  verify->add_option("--config", vopt.config_path, "experiment config JSON");
  verify->add_option("--json", vopt.json_path, "write the full report here");
  verify->add_option("--csv", vopt.csv_path, "write per-trial rows here");
  verify->add_flag("--refine", vopt.refine, "also run the doubled grid");
  verify->add_flag("--force", vopt.force, "overwrite existing outputs");

  /* field */
  FieldOpts fopt;
  auto* field = app.add_subcommand("field", "generate CVF1 fields");
  field->require_subcommand(1);
  for (const char* name : {"bump", "plane-wave", "cutoff", "random"})
    field->add_subcommand(name)->fallthrough();
  field->fallthrough();
  field->add_option("--out", fopt.out_path, "output CVF1 path")->required();
  field->add_option("--dims", fopt.dims, "grid samples per axis")
      ->delimiter(',')
      ->capture_default_str();
  field->add_option("--box", fopt.box, "box lengths")
      ->delimiter(',')
      ->capture_default_str();
  field->add_option("--center", fopt.center, "center (box-centered coords)")
      ->delimiter(',');
  field->add_option("--width", fopt.width, "bump width")->capture_default_str();
  field->add_option("--mass", fopt.mass, "bump integral")->capture_default_str();
  field->add_option("--radius", fopt.radius, "cutoff inner radius")
      ->capture_default_str();
  field->add_option("--wave-k", fopt.wave_k, "plane-wave integer frequency")
      ->delimiter(',');
  field->add_option("--kind", fopt.kind, "random kind: scalar|vector|grad_exact|div_free")
      ->capture_default_str();
  field->add_option("--system", fopt.system_path, "system JSON (random vector kinds)");
  field->add_option("--band", fopt.band, "random band limit")->capture_default_str();
  field->add_option("--index", fopt.index, "random stream index")
      ->capture_default_str();
  field->add_flag("--localize,!--no-localize", fopt.localize,
                  "window the random field to the box core");
  field->add_flag("--force", fopt.force, "overwrite existing outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto selected = [](CLI::App* parent) {
    for (CLI::App* sub : parent->get_subcommands()) return sub->get_name();
    return std::string();
  };

  try {
    if (echeck->parsed()) return run_elliptic(gopt, eopt);
    if (op->parsed()) {
      oopt.which = selected(op);
      return run_op(gopt, oopt);
    }
    if (hodge->parsed()) return run_hodge(gopt, hopt);
    if (norm->parsed()) {
      nopt.which = selected(norm);
      return run_norm(gopt, nopt);
    }
    if (witness->parsed()) {
      wopt.which = selected(witness);
      return run_witness(gopt, wopt);
    }
    if (verify->parsed()) {
      vopt.which = selected(verify);
      vopt.seed_set = app.count("--seed") > 0;
      return run_verify(gopt, vopt);
    }
    if (field->parsed()) {
      fopt.which = selected(field);
      return run_field(gopt, fopt);
    }
  } catch (const dc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "error: no subcommand selected\n";
  return 2;
}
