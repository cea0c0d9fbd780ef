#include "nlslab/field.hpp"

#include <cmath>
#include <string>

#include "nlslab/error.hpp"

namespace nlslab {

void require_same_grid(const RadialGrid& a, const RadialGrid& b, const char* where) {
  if (!a.valid() || !b.valid() || a != b)
    throw Error(ErrorKind::GridMismatch, std::string(where) + ": fields live on different grids");
}

RadialField::RadialField(RadialGrid g, CVec v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid.valid() || values.size() != grid.n())
    throw Error(ErrorKind::GridMismatch, "field size does not match grid");
}

RadialField::RadialField(RadialGrid g) : grid(std::move(g)), values(grid.n()) {}

bool RadialField::finite() const {
  for (const auto& z : values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

RadialField& RadialField::operator+=(const RadialField& o) {
  require_same_grid(grid, o.grid, "add");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
  return *this;
}

RadialField& RadialField::operator-=(const RadialField& o) {
  require_same_grid(grid, o.grid, "subtract");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
  return *this;
}

RadialField& RadialField::operator*=(cplx s) {
  for (auto& z : values) z *= s;
  return *this;
}

RadialField operator+(RadialField a, const RadialField& b) { return a += b; }
RadialField operator-(RadialField a, const RadialField& b) { return a -= b; }
RadialField operator*(cplx s, RadialField a) { return a *= s; }

SpectralField::SpectralField(RadialGrid g, CVec c) : grid(std::move(g)), coeffs(std::move(c)) {
  if (!grid.valid() || coeffs.size() != grid.n())
    throw Error(ErrorKind::GridMismatch, "spectral field size does not match grid");
}

SpectralField::SpectralField(RadialGrid g) : grid(std::move(g)), coeffs(grid.n()) {}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same_grid(grid, o.grid, "add");
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same_grid(grid, o.grid, "subtract");
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
  return *this;
}

SpectralField& SpectralField::operator*=(cplx s) {
  for (auto& z : coeffs) z *= s;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(cplx s, SpectralField a) { return a *= s; }

}  // namespace nlslab
