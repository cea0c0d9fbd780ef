#pragma once

#include <string>

#include "nlslab/field.hpp"

namespace nlslab {

// Binary field file, little-endian:
//   int32 dim, float64 rmax, uint64 n, then n pairs of float64 (re, im).
void write_field(const std::string& path, const RadialField& f);
RadialField read_field(const std::string& path);

}  // namespace nlslab
