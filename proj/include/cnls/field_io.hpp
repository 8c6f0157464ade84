// Binary field dumps.  Little-endian layout:
//
//   char[4]  "NLSB"
//   u32      version (1)
//   u32      N
//   u32      k
//   f64[N]   extents (half-widths)
//   f64[N]   spacings
//   f64[k * points^N]  component-major, each component row-major over the grid
#pragma once

#include "cnls/model.hpp"

#include <string>

namespace cnls {

void write_fields(const std::string& path, const FieldVector& u);
FieldVector read_fields(const std::string& path);

}  // namespace cnls
