#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <vector>

#include "divcurl/elliptic.hpp"
#include "divcurl/grid.hpp"
#include "divcurl/harness.hpp"
#include "divcurl/hodge.hpp"
#include "divcurl/io.hpp"
#include "divcurl/norms.hpp"
#include "divcurl/operators.hpp"
#include "divcurl/spectral.hpp"
#include "divcurl/witness.hpp"

namespace py = pybind11;
using namespace divcurl;

namespace {

using carray =
    py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

ScalarField to_scalar(const GridSpec& g, const carray& a) {
  if (a.ndim() != g.N)
    throw DimensionError("scalar array rank must equal the grid dimension");
  for (int i = 0; i < g.N; ++i)
    if (a.shape(i) != g.dims[i])
      throw DimensionError("scalar array shape must match grid dims");
  std::vector<cdouble> v(a.data(), a.data() + a.size());
  return ScalarField(g, std::move(v));
}

VectorField to_vector(const GridSpec& g, const carray& a) {
  if (a.ndim() != g.N + 1)
    throw DimensionError("vector array rank must be grid dimension + 1");
  for (int i = 0; i < g.N; ++i)
    if (a.shape(i + 1) != g.dims[i])
      throw DimensionError("vector array shape must match grid dims");
  const int nc = static_cast<int>(a.shape(0));
  VectorField V(g, nc);
  const std::size_t M = g.size();
  const cdouble* src = a.data();
  for (int c = 0; c < nc; ++c) {
    auto dst = V[c].values();
    std::copy(src + c * M, src + (c + 1) * M, dst.begin());
  }
  return V;
}

py::array from_scalar(const ScalarField& f) {
  std::vector<py::ssize_t> shape(f.grid().dims.begin(), f.grid().dims.end());
  py::array_t<std::complex<double>> out(shape);
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return std::move(out);
}

py::array from_vector(const VectorField& V) {
  std::vector<py::ssize_t> shape;
  shape.push_back(V.components());
  for (int d : V.grid().dims) shape.push_back(d);
  py::array_t<std::complex<double>> out(shape);
  std::complex<double>* dst = out.mutable_data();
  const std::size_t M = V.grid().size();
  for (int c = 0; c < V.components(); ++c) {
    auto src = V[c].values();
    std::copy(src.begin(), src.end(), dst + c * M);
  }
  return std::move(out);
}

py::array from_matrix(const MatrixField& A) {
  const int n = A.n();
  std::vector<py::ssize_t> shape;
  shape.push_back(n);
  shape.push_back(n);
  for (int d : A.grid().dims) shape.push_back(d);
  py::array_t<std::complex<double>> out(shape);
  std::complex<double>* dst = out.mutable_data();
  const std::size_t M = A.grid().size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto src = A.at(i, j).values();
      std::copy(src.begin(), src.end(), dst + (i * n + j) * M);
    }
  return std::move(out);
}

py::dict cert_to_dict(const WitnessCertificate& cert) {
  py::list entries;
  for (const CertEntry& e : cert.entries) {
    py::dict d;
    d["name"] = e.name;
    d["value"] = e.value;
    d["bound"] = e.bound;
    d["pass"] = e.pass;
    entries.append(std::move(d));
  }
  py::dict constants;
  for (const auto& [k, v] : cert.constants) constants[py::str(k)] = v;
  py::dict out;
  out["entries"] = std::move(entries);
  out["constants"] = std::move(constants);
  out["pass"] = cert.pass();
  return out;
}

py::dict pair_to_dict(const WitnessPair& P) {
  py::dict out;
  out["kind"] = std::string(to_string(P.kind));
  out["i"] = P.i;
  out["j"] = P.j;
  out["p"] = P.p;
  out["center"] = P.center;
  out["radius"] = P.radius;
  out["product_convention"] =
      P.product_convention == Pairing::bilinear ? "bilinear" : "sesquilinear";
  out["V"] = from_vector(P.V);
  out["W"] = from_vector(P.W);
  out["cert"] = cert_to_dict(P.cert);
  return out;
}

WitnessPair build_witness_pair(const EllipticSystem& sys, const GridSpec& g,
                               const std::string& kind, double p, int i, int j,
                               const std::vector<double>& center, double radius,
                               double width, bool enforce) {
  WitnessTolerances tol;
  tol.enforce = enforce;
  const double pp = p / (p - 1.0);
  if (kind == "small_p") {
    AnalyticGaussian u = normalized_gradient_bump(g, center, width, 2.0);
    return witness_small_p(sys, g, u, BallSpec{center, radius}, i, j, p, tol);
  }
  if (kind == "large_p") {
    AnalyticGaussian u = normalized_gradient_bump(g, center, width, 2.0);
    return witness_large_p(sys, g, u, BallSpec{center, radius}, i, j, p, tol);
  }
  if (kind == "unit_ball") {
    AnalyticGaussian u = normalized_gradient_bump(g, center, width, pp);
    return witness_unit_ball(sys, g, u, i, j, p, tol);
  }
  if (kind == "factor_grad" || kind == "factor_div") {
    AnalyticGaussian phi;
    phi.center = center;
    phi.width = width;
    phi.amplitude = 1.0;
    const FactorSide side =
        kind == "factor_grad" ? FactorSide::grad : FactorSide::div;
    return factorize_phi(sys, g, phi, side, p, tol);
  }
  throw IoError("unknown witness kind: " + kind);
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "div-curl estimates for first-order elliptic systems";

  py::register_exception<DimensionError>(mod, "DimensionError");
  py::register_exception<ConstraintError>(mod, "ConstraintError");
  py::register_exception<HypothesisError>(mod, "HypothesisError");
  py::register_exception<DegenerateTrial>(mod, "DegenerateTrial");
  py::register_exception<IoError>(mod, "IoError");

  py::class_<GridSpec>(mod, "Grid")
      .def(py::init([](std::vector<int> dims, std::vector<double> box) {
             // take the size before the move: argument evaluation order is
             // unspecified, so passing dims.size() alongside std::move(dims)
             // can read from the already-moved-from vector
             const int N = static_cast<int>(dims.size());
             return make_grid(N, std::move(dims), std::move(box));
           }),
           py::arg("dims"), py::arg("box"))
      .def_readonly("N", &GridSpec::N)
      .def_readonly("dims", &GridSpec::dims)
      .def_readonly("box", &GridSpec::box)
      .def_property_readonly("size", [](const GridSpec& g) { return g.size(); })
      .def("spacing", &GridSpec::spacing, py::arg("axis"))
      .def("__repr__", [](const GridSpec& g) {
        std::string s = "Grid(dims=[";
        for (int i = 0; i < g.N; ++i)
          s += (i ? "," : "") + std::to_string(g.dims[i]);
        s += "], box=[";
        for (int i = 0; i < g.N; ++i) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%g", g.box[i]);
          s += std::string(i ? "," : "") + buf;
        }
        return s + "])";
      });

  py::class_<EllipticSystem>(mod, "System")
      .def_static(
          "create",
          [](int n, int N, const carray& coeffs) {
            if (coeffs.ndim() != 2 || coeffs.shape(0) != n ||
                coeffs.shape(1) != N - n)
              throw DimensionError("coefficient array must have shape (n, N-n)");
            std::vector<cdouble> c(coeffs.data(), coeffs.data() + coeffs.size());
            return EllipticSystem::create(n, N, std::move(c));
          },
          py::arg("n"), py::arg("N"), py::arg("coeffs"))
      .def_static("gradient", &gradient_system, py::arg("N"))
      .def_static("from_json", &system_from_json_string, py::arg("text"))
      .def("to_json", [](const EllipticSystem& s) { return to_json_string(s); })
      .def_property_readonly("n", &EllipticSystem::n)
      .def_property_readonly("N", &EllipticSystem::N)
      .def_property_readonly("m", &EllipticSystem::m)
      .def("coeff", &EllipticSystem::coeff, py::arg("j"), py::arg("k"))
      .def("__repr__", [](const EllipticSystem& s) {
        return "System(n=" + std::to_string(s.n()) +
               ", N=" + std::to_string(s.N()) + ")";
      });

  mod.def(
      "certify_ellipticity",
      [](const EllipticSystem& sys, int resolution, double tol) {
        EllipticityCertificate c = certify_ellipticity(sys, resolution, tol);
        py::dict d;
        d["constant"] = c.constant;
        d["elliptic"] = c.elliptic;
        d["tol"] = c.tol;
        d["sphere_samples"] = c.sphere_samples;
        d["witness_direction"] = c.witness_direction;
        return d;
      },
      py::arg("system"), py::arg("resolution") = 4096, py::arg("tol") = 1e-9);

  mod.def(
      "grad_L",
      [](const EllipticSystem& sys, const GridSpec& g, const carray& u) {
        return from_vector(grad_L(sys, to_scalar(g, u)));
      },
      py::arg("system"), py::arg("grid"), py::arg("u"));
  mod.def(
      "grad_plain",
      [](const GridSpec& g, const carray& u) {
        return from_vector(grad_plain(to_scalar(g, u)));
      },
      py::arg("grid"), py::arg("u"));
  mod.def(
      "div_Lstar",
      [](const EllipticSystem& sys, const GridSpec& g, const carray& V) {
        return from_scalar(div_Lstar(sys, to_vector(g, V)));
      },
      py::arg("system"), py::arg("grid"), py::arg("V"));
  mod.def(
      "curl_L",
      [](const EllipticSystem& sys, const GridSpec& g, const carray& W) {
        return from_matrix(curl_L(sys, to_vector(g, W)));
      },
      py::arg("system"), py::arg("grid"), py::arg("W"));
  mod.def(
      "dot",
      [](const GridSpec& g, const carray& V, const carray& W, bool bilinear) {
        return from_scalar(dot(to_vector(g, V), to_vector(g, W),
                               bilinear ? Pairing::bilinear
                                        : Pairing::sesquilinear));
      },
      py::arg("grid"), py::arg("V"), py::arg("W"), py::arg("bilinear") = false);

  mod.def(
      "hodge_decompose",
      [](const EllipticSystem& sys, const GridSpec& g, const carray& V) {
        HodgeResult r = hodge_decompose(sys, to_vector(g, V));
        py::dict d;
        d["V1"] = from_vector(r.V1);
        d["V2"] = from_vector(r.V2);
        d["phi2"] = from_scalar(r.phi2);
        d["residual_div"] = r.residual_div;
        return d;
      },
      py::arg("system"), py::arg("grid"), py::arg("V"));

  mod.def(
      "lp_norm",
      [](const GridSpec& g, const carray& f, double p) {
        if (f.ndim() == g.N) return lp_norm(to_scalar(g, f), p);
        return lp_norm(to_vector(g, f), p);
      },
      py::arg("grid"), py::arg("f"), py::arg("p"));
  mod.def(
      "h1_norm",
      [](const GridSpec& g, const carray& f, int scales) {
        MollifierSpec m = scales > 0 ? make_scales(g, scales) : default_scales(g);
        return h1_norm(to_scalar(g, f), m);
      },
      py::arg("grid"), py::arg("f"), py::arg("scales") = 0);
  mod.def(
      "bmo_norm",
      [](const GridSpec& g, const carray& f, int stride,
         const std::vector<double>& radii) {
        return bmo_norm(to_scalar(g, f), make_ball_family(g, stride, radii));
      },
      py::arg("grid"), py::arg("f"), py::arg("stride"), py::arg("radii"));
  mod.def(
      "grand_maximal",
      [](const GridSpec& g, const carray& f, int scales) {
        MollifierSpec m = scales > 0 ? make_scales(g, scales) : default_scales(g);
        return from_scalar(grand_maximal(to_scalar(g, f), m));
      },
      py::arg("grid"), py::arg("f"), py::arg("scales") = 0);

  mod.def(
      "witness_pair",
      [](const EllipticSystem& sys, const GridSpec& g, const std::string& kind,
         double p, int i, int j, const std::vector<double>& center,
         double radius, double width, bool enforce) {
        return pair_to_dict(build_witness_pair(sys, g, kind, p, i, j, center,
                                               radius, width, enforce));
      },
      py::arg("system"), py::arg("grid"), py::arg("kind"), py::arg("p"),
      py::arg("i") = 0, py::arg("j") = 1,
      py::arg("center") = std::vector<double>{0.0, 0.0},
      py::arg("radius") = 1.0, py::arg("width") = 0.15,
      py::arg("enforce") = true);

  mod.def(
      "rescaled_witness_pair",
      [](const EllipticSystem& sys, const GridSpec& g, const std::string& kind,
         double p, int i, int j, const std::vector<double>& base_center,
         double base_radius, double width, const std::vector<double>& x0,
         double R, bool enforce) {
        WitnessPair base = build_witness_pair(sys, g, kind, p, i, j, base_center,
                                              base_radius, width, enforce);
        WitnessTolerances tol;
        tol.enforce = enforce;
        return pair_to_dict(rescale_to_ball(base, x0, R, p, tol));
      },
      py::arg("system"), py::arg("grid"), py::arg("kind"), py::arg("p"),
      py::arg("i"), py::arg("j"), py::arg("base_center"),
      py::arg("base_radius"), py::arg("width"), py::arg("x0"), py::arg("R"),
      py::arg("enforce") = true);

  mod.def(
      "run_experiment_json",
      [](const std::string& config_json, int threads) {
        nlohmann::json cfg = nlohmann::json::parse(config_json);
        return run_experiment(cfg, threads).dump();
      },
      py::arg("config_json"), py::arg("threads") = 1);
  mod.def(
      "default_experiment_config_json",
      [](const std::string& name) { return default_experiment_config(name).dump(); },
      py::arg("name"));

  mod.def(
      "write_cvf",
      [](const std::string& path, const GridSpec& g, const carray& f,
         bool overwrite) {
        if (f.ndim() == g.N)
          write_cvf(path, to_scalar(g, f), overwrite);
        else
          write_cvf(path, to_vector(g, f), overwrite);
      },
      py::arg("path"), py::arg("grid"), py::arg("f"),
      py::arg("overwrite") = false);
  mod.def(
      "read_cvf",
      [](const std::string& path) {
        CvfData data = read_cvf(path);
        py::dict d;
        d["dims"] = data.grid.dims;
        d["box"] = data.grid.box;
        if (data.components.size() == 1)
          d["field"] = from_scalar(as_scalar(data));
        else
          d["field"] = from_vector(as_vector(data));
        return d;
      },
      py::arg("path"));

  mod.def(
      "random_scalar_field",
      [](const GridSpec& g, std::uint64_t seed, int band_limit, bool localize,
         int index) {
        EnsembleSpec spec;
        spec.seed = seed;
        spec.band_limit = band_limit;
        spec.kind = FieldKind::scalar;
        spec.localize = localize;
        return from_scalar(random_scalar_field(g, spec, index));
      },
      py::arg("grid"), py::arg("seed") = 42, py::arg("band_limit") = 8,
      py::arg("localize") = true, py::arg("index") = 0);
  mod.def(
      "random_vector_field",
      [](const EllipticSystem& sys, const GridSpec& g, std::uint64_t seed,
         int band_limit, const std::string& kind, bool localize, int index) {
        EnsembleSpec spec;
        spec.seed = seed;
        spec.band_limit = band_limit;
        spec.kind = field_kind_from_string(kind);
        spec.localize = localize;
        return from_vector(random_vector_field(sys, g, spec, index));
      },
      py::arg("system"), py::arg("grid"), py::arg("seed") = 42,
      py::arg("band_limit") = 8, py::arg("kind") = "vector",
      py::arg("localize") = true, py::arg("index") = 0);
}
