#pragma once

#include <string>
#include <vector>

#include "divcurl/grid.hpp"

namespace divcurl {

/* CVF1: little-endian binary container for complex fields on a periodic box.
     bytes 0..3   magic "CVF1"
     u32          N (spatial dimension)
     u32          n_components
     u32 * N      dims
     f64 * N      box lengths
     payload      n_components blocks, each dims-product complex128 samples
                  (re, im doubles), row-major with the last axis fastest.
   Writes go to a temp file and rename into place, so failures leave no
   partial output. */
struct CvfData {
  GridSpec grid;
  std::vector<ScalarField> components;
};

void write_cvf(const std::string& path, const GridSpec& g,
               const std::vector<const ScalarField*>& components,
               bool overwrite = false);
void write_cvf(const std::string& path, const ScalarField& f, bool overwrite = false);
void write_cvf(const std::string& path, const VectorField& f, bool overwrite = false);

CvfData read_cvf(const std::string& path);

ScalarField as_scalar(const CvfData& data);
VectorField as_vector(const CvfData& data);

}  // namespace divcurl
