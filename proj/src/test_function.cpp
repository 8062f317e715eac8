#include "sipx/test_function.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "sipx/profile.hpp"

namespace sipx {

std::string to_string(TestKind k) {
  switch (k) {
    case TestKind::FourierMode: return "FourierMode";
    case TestKind::GaussianBump: return "GaussianBump";
    case TestKind::Tabulated: return "Tabulated";
  }
  return "?";
}

TestKind test_kind_from_string(const std::string& s) {
  if (s == "FourierMode") return TestKind::FourierMode;
  if (s == "GaussianBump") return TestKind::GaussianBump;
  if (s == "Tabulated") return TestKind::Tabulated;
  throw std::invalid_argument("unknown test function kind '" + s + "'");
}

void validate(const TestFunction& phi, int dim) {
  if (!std::isfinite(phi.amplitude)) throw std::invalid_argument("test function amplitude must be finite");
  switch (phi.kind) {
    case TestKind::FourierMode:
      if (dim == 1 && phi.mode[1] != 0) throw std::invalid_argument("1-d Fourier mode must have zero second component");
      break;
    case TestKind::GaussianBump:
      if (!(phi.width > 0.0)) throw std::invalid_argument("Gaussian test function width must be positive");
      if (phi.center.size() != static_cast<std::size_t>(dim)) throw std::invalid_argument("Gaussian test function center must have d components");
      break;
    case TestKind::Tabulated: {
      if (phi.table.empty()) throw std::invalid_argument("tabulated test function needs values");
      for (double v : phi.table)
        if (!std::isfinite(v)) throw std::invalid_argument("tabulated test function values must be finite");
      if (dim == 2) {
        const auto c = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(phi.table.size()))));
        if (c * c != phi.table.size()) throw std::invalid_argument("2-d test function table must be square");
      }
      break;
    }
  }
}

double TestFunction::operator()(std::array<double, 2> x, int dim) const {
  switch (kind) {
    case TestKind::FourierMode: {
      const double arg = 2.0 * std::numbers::pi * (mode[0] * x[0] + (dim == 2 ? mode[1] * x[1] : 0.0));
      return amplitude * (sine ? std::sin(arg) : std::cos(arg));
    }
    case TestKind::GaussianBump: {
      std::array<double, 2> c{center.empty() ? 0.5 : center[0], center.size() > 1 ? center[1] : 0.5};
      return amplitude * periodized_gaussian(x, c, width, dim);
    }
    case TestKind::Tabulated: {
      const std::size_t cells = dim == 1 ? table.size() : static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(table.size()))));
      auto cell = [&](double u) {
        u -= std::floor(u);
        return std::min(cells - 1, static_cast<std::size_t>(u * static_cast<double>(cells)));
      };
      std::size_t idx = cell(x[0]);
      if (dim == 2) idx += cells * cell(x[1]);
      return amplitude * table[idx];
    }
  }
  return 0.0;
}

std::vector<double> TestFunction::on_grid(const Lattice& lattice) const {
  validate(*this, lattice.dim());
  std::vector<double> v(lattice.sites());
  const double h = 1.0 / lattice.side();
  for (std::size_t s = 0; s < v.size(); ++s) {
    const auto c = lattice.coords(s);
    v[s] = (*this)({c[0] * h, c[1] * h}, lattice.dim());
  }
  return v;
}

FourierTerms TestFunction::fourier_terms(int dim, double cutoff) const {
  validate(*this, dim);
  FourierTerms out;
  switch (kind) {
    case TestKind::FourierMode: {
      std::array<int, 2> j = mode;
      if (dim == 1) j[1] = 0;
      const std::array<int, 2> mj{-j[0], -j[1]};
      if (j[0] == 0 && j[1] == 0) {
        if (!sine) out.push_back({j, {amplitude, 0.0}});
        return out;
      }
      if (sine) {
        out.push_back({j, {0.0, -0.5 * amplitude}});
        out.push_back({mj, {0.0, 0.5 * amplitude}});
      } else {
        out.push_back({j, {0.5 * amplitude, 0.0}});
        out.push_back({mj, {0.5 * amplitude, 0.0}});
      }
      return out;
    }
    case TestKind::GaussianBump: {
      const double w2 = width * width;
      const double pref = amplitude * std::pow(2.0 * std::numbers::pi * w2, 0.5 * dim);
      const double decay = 2.0 * std::numbers::pi * std::numbers::pi * w2;
      // Keep |j|^2 up to where the Gaussian factor drops below the cutoff.
      const int jmax = static_cast<int>(std::ceil(std::sqrt(-std::log(cutoff) / decay)));
      std::array<double, 2> c{center[0], dim == 2 ? center[1] : 0.0};
      const int j1max = dim == 2 ? jmax : 0;
      for (int j1 = -j1max; j1 <= j1max; ++j1)
        for (int j0 = -jmax; j0 <= jmax; ++j0) {
          const double r2 = static_cast<double>(j0) * j0 + static_cast<double>(j1) * j1;
          const double mag = std::exp(-decay * r2);
          if (mag < cutoff) continue;
          const double phase = -2.0 * std::numbers::pi * (j0 * c[0] + j1 * c[1]);
          out.push_back({{j0, j1}, pref * mag * std::complex<double>(std::cos(phase), std::sin(phase))});
        }
      return out;
    }
    case TestKind::Tabulated:
      throw std::invalid_argument("tabulated test functions have no closed-form Fourier coefficients");
  }
  return out;
}

std::vector<double> synthesize(const FourierTerms& terms, const Lattice& lattice) {
  std::vector<double> v(lattice.sites(), 0.0);
  const double h = 1.0 / lattice.side();
  for (std::size_t s = 0; s < v.size(); ++s) {
    const auto c = lattice.coords(s);
    double acc = 0.0;
    for (const auto& [j, coef] : terms) {
      const double arg = 2.0 * std::numbers::pi * (j[0] * c[0] + j[1] * c[1]) * h;
      acc += coef.real() * std::cos(arg) - coef.imag() * std::sin(arg);
    }
    v[s] = acc;
  }
  return v;
}

FourierTerms multiply_terms(const FourierTerms& a, const FourierTerms& b, double cutoff) {
  std::map<std::array<int, 2>, std::complex<double>> acc;
  double scale = 0.0;
  for (const auto& [ja, ca] : a)
    for (const auto& [jb, cb] : b) {
      auto& slot = acc[{ja[0] + jb[0], ja[1] + jb[1]}];
      slot += ca * cb;
    }
  for (const auto& [j, c] : acc) scale = std::max(scale, std::abs(c));
  FourierTerms out;
  for (const auto& [j, c] : acc)
    if (std::abs(c) > cutoff * scale) out.push_back({j, c});
  return out;
}

}  // namespace sipx
