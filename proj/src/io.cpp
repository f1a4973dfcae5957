#include "divcurl/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace divcurl {

namespace {

constexpr char kMagic[4] = {'C', 'V', 'F', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError("cvf: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw IoError("cvf: truncated data");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace

void write_cvf(const std::string& path, const GridSpec& g,
               const std::vector<const ScalarField*>& components, bool overwrite) {
  if (components.empty()) throw IoError("cvf: nothing to write");
  for (const ScalarField* f : components) {
    if (f == nullptr || !(f->grid() == g))
      throw IoError("cvf: component grid mismatch");
  }
  namespace fs = std::filesystem;
  if (!overwrite && fs::exists(path))
    throw IoError("cvf: refusing to overwrite " + path);

  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cvf: cannot open " + tmp.string() + " for writing");
    os.write(kMagic, 4);
    put_u32(os, static_cast<std::uint32_t>(g.N));
    put_u32(os, static_cast<std::uint32_t>(components.size()));
    for (int a = 0; a < g.N; ++a) put_u32(os, static_cast<std::uint32_t>(g.dims[a]));
    for (int a = 0; a < g.N; ++a) put_f64(os, g.box[a]);
    for (const ScalarField* f : components) {
      for (const cdouble& z : f->values()) {
        put_f64(os, z.real());
        put_f64(os, z.imag());
      }
    }
    if (!os) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("cvf: write failed for " + path);
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cvf: cannot move output into place at " + path);
  }
}

void write_cvf(const std::string& path, const ScalarField& f, bool overwrite) {
  write_cvf(path, f.grid(), {&f}, overwrite);
}

void write_cvf(const std::string& path, const VectorField& f, bool overwrite) {
  std::vector<const ScalarField*> comps;
  for (int c = 0; c < f.components(); ++c) comps.push_back(&f[c]);
  write_cvf(path, f.grid(), comps, overwrite);
}

CvfData read_cvf(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cvf: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("cvf: bad magic in " + path);
  const std::uint32_t N = get_u32(is);
  const std::uint32_t nc = get_u32(is);
  if (N == 0 || N > 15) throw IoError("cvf: unreasonable dimension in " + path);
  if (nc == 0 || nc > 4096) throw IoError("cvf: unreasonable component count");
  std::vector<int> dims(N);
  std::vector<double> box(N);
  for (std::uint32_t a = 0; a < N; ++a) {
    const std::uint32_t d = get_u32(is);
    if (d < 1 || d > (1u << 24)) throw IoError("cvf: unreasonable dims");
    dims[a] = static_cast<int>(d);
  }
  for (std::uint32_t a = 0; a < N; ++a) box[a] = get_f64(is);

  CvfData out;
  try {
    out.grid = make_grid(static_cast<int>(N), dims, box);
  } catch (const Error& e) {
    throw IoError("cvf: invalid grid in " + path + ": " + e.what());
  }
  const std::size_t M = out.grid.size();
  out.components.reserve(nc);
  for (std::uint32_t c = 0; c < nc; ++c) {
    ScalarField f = ScalarField::zeros(out.grid);
    auto v = f.values();
    for (std::size_t s = 0; s < M; ++s) {
      const double re = get_f64(is);
      const double im = get_f64(is);
      v[s] = cdouble(re, im);
    }
    out.components.push_back(std::move(f));
  }
  /* no trailing garbage */
  char extra;
  is.read(&extra, 1);
  if (is.gcount() != 0) throw IoError("cvf: trailing bytes in " + path);
  return out;
}

ScalarField as_scalar(const CvfData& data) {
  if (data.components.size() != 1)
    throw IoError("cvf: expected a single-component field");
  return data.components[0];
}

VectorField as_vector(const CvfData& data) {
  if (data.components.empty()) throw IoError("cvf: empty container");
  return VectorField(data.grid, data.components);
}

}  // namespace divcurl
