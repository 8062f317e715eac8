#include "sipx/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sipx/hydro.hpp"

namespace sipx {

double discrete_form(std::span<const double> phi, const DiscreteKernel& kernel) {
  const auto g = discrete_gamma(phi, kernel);
  double s = 0.0;
  for (double v : g) s += v;
  return s / static_cast<double>(g.size());
}

std::vector<double> discrete_gamma(std::span<const double> phi, const DiscreteKernel& kernel) {
  const Lattice& lat = kernel.lattice();
  if (phi.size() != lat.sites()) throw std::invalid_argument("test function grid does not match kernel");
  const double speed = std::pow(static_cast<double>(lat.side()), kernel.beta());
  std::vector<double> out(phi.size(), 0.0);
  for (std::size_t x = 0; x < out.size(); ++x) {
    double acc = 0.0;
    for (std::size_t disp : kernel.support()) {
      const double d = phi[lat.shift(x, disp)] - phi[x];
      acc += kernel.probability(disp) * d * d;
    }
    out[x] = speed * acc;
  }
  return out;
}

namespace {

std::vector<double> symbol_for(const FourierTerms& terms, const LimitSymbol& symbol) {
  std::vector<std::array<int, 2>> modes;
  modes.reserve(terms.size());
  for (const auto& t : terms) modes.push_back(t.first);
  return symbol.values(modes);
}

FourierTerms apply_symbol(FourierTerms terms, const LimitSymbol& symbol) {
  const auto psi = symbol_for(terms, symbol);
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i].second *= psi[i];
  return terms;
}

}  // namespace

double continuum_form(const TestFunction& phi, const LimitSymbol& symbol, int dim) {
  const auto terms = phi.fourier_terms(dim);
  const auto psi = symbol_for(terms, symbol);
  double s = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) s += -2.0 * psi[i] * std::norm(terms[i].second);
  return s;
}

std::vector<double> continuum_generator(const TestFunction& phi, const LimitSymbol& symbol, const Lattice& lattice) {
  return synthesize(apply_symbol(phi.fourier_terms(lattice.dim()), symbol), lattice);
}

std::vector<double> continuum_gamma(const TestFunction& phi, const LimitSymbol& symbol, const Lattice& lattice) {
  const auto terms = phi.fourier_terms(lattice.dim());
  const auto l_sq = synthesize(apply_symbol(multiply_terms(terms, terms), symbol), lattice);
  const auto l_phi = synthesize(apply_symbol(terms, symbol), lattice);
  const auto phi_grid = phi.on_grid(lattice);
  std::vector<double> g(l_sq.size());
  for (std::size_t x = 0; x < g.size(); ++x) g[x] = l_sq[x] - 2.0 * phi_grid[x] * l_phi[x];
  return g;
}

GeneratorResiduals generator_residuals(const TestFunction& phi, const DiscreteKernel& kernel, const LimitSymbol& symbol) {
  const Lattice& lat = kernel.lattice();
  const auto grid = phi.on_grid(lat);
  const auto ln = apply_L_quadrature(make_field(lat, grid), kernel).values;
  const auto l = continuum_generator(phi, symbol, lat);
  const auto gn = discrete_gamma(grid, kernel);
  const auto g = continuum_gamma(phi, symbol, lat);
  GeneratorResiduals r;
  double l2 = 0.0;
  for (std::size_t x = 0; x < grid.size(); ++x) {
    const double d = std::abs(ln[x] - l[x]);
    r.l1 += d;
    r.sup = std::max(r.sup, d);
    const double e = gn[x] - g[x];
    l2 += e * e;
  }
  const double vol = static_cast<double>(grid.size());
  r.l1 /= vol;
  r.gamma_l2 = std::sqrt(l2 / vol);
  return r;
}

double hilbert_norm(std::span<const double> phi) { return std::sqrt(grid_inner(phi, phi)); }

double l2_norm(const TestFunction& phi, int dim) {
  double s = 0.0;
  for (const auto& [j, c] : phi.fourier_terms(dim)) s += std::norm(c);
  return std::sqrt(s);
}

FormReport form_report(const std::vector<TestFunction>& phis, const KernelSpec& spec, const std::vector<int>& ladder,
                       const LimitSymbol& symbol) {
  FormReport rep;
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (ladder[i] <= ladder[i - 1]) throw std::invalid_argument("n ladder must be increasing");
  for (const auto& phi : phis) {
    const double cont = continuum_form(phi, symbol, spec.dimension);
    const double l2 = l2_norm(phi, spec.dimension);
    for (int n : ladder) {
      const auto kernel = build_discrete_kernel(spec, n);
      const auto grid = phi.on_grid(kernel.lattice());
      FormRow row;
      row.phi = phi.name;
      row.n = n;
      row.discrete = discrete_form(grid, kernel);
      row.continuum = cont;
      row.relative_error = cont != 0.0 ? std::abs(row.discrete - cont) / std::abs(cont) : std::abs(row.discrete);
      row.residuals = generator_residuals(phi, kernel, symbol);
      row.hilbert = hilbert_norm(grid);
      row.l2 = l2;
      rep.rows.push_back(row);
    }
    const std::size_t first = rep.rows.size() - ladder.size();
    for (std::size_t k = first + 1; k < rep.rows.size(); ++k) {
      const auto& a = rep.rows[k - 1];
      const auto& b = rep.rows[k];
      if (b.relative_error > a.relative_error || b.residuals.l1 > a.residuals.l1 || b.residuals.sup > a.residuals.sup ||
          b.residuals.gamma_l2 > a.residuals.gamma_l2)
        rep.monotone = false;
    }
  }
  return rep;
}

}  // namespace sipx
