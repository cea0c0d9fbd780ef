#include "nlslab/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "nlslab/error.hpp"

static_assert(std::endian::native == std::endian::little, "field files assume a little-endian host");

namespace nlslab {

namespace {

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void write_field(const std::string& path, const RadialField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  put<std::int32_t>(out, f.grid.dim());
  put<double>(out, f.grid.rmax());
  put<std::uint64_t>(out, f.grid.n());
  for (const auto& z : f.values) {
    put<double>(out, z.real());
    put<double>(out, z.imag());
  }
  if (!out) throw Error(ErrorKind::Io, "short write to " + path);
}

RadialField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  const auto dim = get<std::int32_t>(in);
  const auto rmax = get<double>(in);
  const auto n = get<std::uint64_t>(in);
  if (!in) throw Error(ErrorKind::Io, "truncated header in " + path);
  RadialField f(build_grid(dim, rmax, static_cast<std::size_t>(n)));
  for (auto& z : f.values) {
    const double re = get<double>(in);
    const double im = get<double>(in);
    z = cplx(re, im);
  }
  if (!in) throw Error(ErrorKind::Io, "truncated data in " + path);
  return f;
}

}  // namespace nlslab
