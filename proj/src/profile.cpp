#include "sipx/profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sipx {

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::Constant: return "Constant";
    case ProfileKind::GaussianBump: return "GaussianBump";
    case ProfileKind::Tabulated: return "Tabulated";
  }
  return "?";
}

ProfileKind profile_kind_from_string(const std::string& s) {
  if (s == "Constant") return ProfileKind::Constant;
  if (s == "GaussianBump") return ProfileKind::GaussianBump;
  if (s == "Tabulated") return ProfileKind::Tabulated;
  throw std::invalid_argument("unknown profile kind '" + s + "'");
}

double periodized_gaussian(std::array<double, 2> x, std::array<double, 2> c, double width, int dim) {
  constexpr int images = 3;
  const double inv = 1.0 / (2.0 * width * width);
  auto axis = [&](double a, double b) {
    double s = 0.0;
    for (int m = -images; m <= images; ++m) {
      const double d = a - b + m;
      s += std::exp(-d * d * inv);
    }
    return s;
  };
  double v = axis(x[0], c[0]);
  if (dim == 2) v *= axis(x[1], c[1]);
  return v;
}

namespace {

int table_cells(const InitialProfile& p, int dim) {
  const auto n = p.table.size();
  if (dim == 1) return static_cast<int>(n);
  const int c = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (static_cast<std::size_t>(c) * static_cast<std::size_t>(c) != n)
    throw std::invalid_argument("2-d profile table must have a square number of cells");
  return c;
}

}  // namespace

void validate(const InitialProfile& p, int dim) {
  switch (p.kind) {
    case ProfileKind::Constant:
      if (!(p.level >= 0.0) || !std::isfinite(p.level)) throw std::invalid_argument("profile level must be finite and nonnegative");
      break;
    case ProfileKind::GaussianBump:
      if (!(p.level >= 0.0) || !(p.amplitude >= 0.0) || !std::isfinite(p.level + p.amplitude))
        throw std::invalid_argument("Gaussian bump needs nonnegative finite level and amplitude");
      if (!(p.width > 0.0)) throw std::invalid_argument("Gaussian bump width must be positive");
      if (p.center.size() != static_cast<std::size_t>(dim)) throw std::invalid_argument("Gaussian bump center must have d components");
      break;
    case ProfileKind::Tabulated:
      if (p.table.empty()) throw std::invalid_argument("tabulated profile needs values");
      table_cells(p, dim);
      for (double v : p.table)
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("profile values must be finite and nonnegative");
      break;
  }
}

double InitialProfile::value(std::array<double, 2> x, int dim) const {
  switch (kind) {
    case ProfileKind::Constant: return level;
    case ProfileKind::GaussianBump: {
      std::array<double, 2> c{center.empty() ? 0.5 : center[0], center.size() > 1 ? center[1] : 0.5};
      return level + amplitude * periodized_gaussian(x, c, width, dim);
    }
    case ProfileKind::Tabulated: {
      const int cells = table_cells(*this, dim);
      auto cell = [&](double u) {
        u -= std::floor(u);
        return std::min(cells - 1, static_cast<int>(u * cells));
      };
      std::size_t idx = static_cast<std::size_t>(cell(x[0]));
      if (dim == 2) idx += static_cast<std::size_t>(cells) * static_cast<std::size_t>(cell(x[1]));
      return table[idx];
    }
  }
  return 0.0;
}

std::vector<double> InitialProfile::on_lattice(const Lattice& lattice) const {
  validate(*this, lattice.dim());
  std::vector<double> v(lattice.sites());
  const double h = 1.0 / lattice.side();
  for (std::size_t s = 0; s < v.size(); ++s) {
    const auto c = lattice.coords(s);
    v[s] = value({c[0] * h, c[1] * h}, lattice.dim());
  }
  return v;
}

double InitialProfile::sup(int dim) const {
  switch (kind) {
    case ProfileKind::Constant: return level;
    case ProfileKind::GaussianBump: {
      std::array<double, 2> c{center.empty() ? 0.5 : center[0], center.size() > 1 ? center[1] : 0.5};
      return level + amplitude * periodized_gaussian(c, c, width, dim);
    }
    case ProfileKind::Tabulated: return *std::max_element(table.begin(), table.end());
  }
  return 0.0;
}

}  // namespace sipx
