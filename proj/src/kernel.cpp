#include "sipx/kernel.hpp"

#include "sipx/spectral.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sipx {

std::string to_string(KernelFamily f) {
  return f == KernelFamily::PowerLawLattice ? "PowerLawLattice" : "CustomTabulated";
}

KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "PowerLawLattice") return KernelFamily::PowerLawLattice;
  if (s == "CustomTabulated") return KernelFamily::CustomTabulated;
  throw std::invalid_argument("unknown kernel family '" + s + "'");
}

void validate(const KernelSpec& spec) {
  if (spec.dimension != 1 && spec.dimension != 2)
    throw std::invalid_argument("kernel dimension must be 1 or 2");
  if (!(spec.beta > 0.0 && spec.beta < 2.0))
    throw std::invalid_argument("kernel exponent beta must lie in (0, 2)");
  if (spec.window < 0) throw std::invalid_argument("kernel window must be positive (0 selects the default)");
  if (spec.image_folds < 0) throw std::invalid_argument("image_folds must be nonnegative");
  if (spec.family == KernelFamily::CustomTabulated && spec.table.empty())
    throw std::invalid_argument("CustomTabulated kernel requires a weight table");
}

double power_law_weight(int dim, double beta, std::array<long, 2> v) {
  const double r2 = static_cast<double>(v[0]) * static_cast<double>(v[0]) +
                    (dim == 2 ? static_cast<double>(v[1]) * static_cast<double>(v[1]) : 0.0);
  return std::pow(r2, -0.5 * (dim + beta));
}

namespace {

std::vector<double> power_law_table(const KernelSpec& spec, const Lattice& lat, int window) {
  const int side = lat.side();
  const int folds = spec.image_folds;
  std::vector<double> weights(lat.sites(), 0.0);
  for (std::size_t disp = 1; disp < lat.sites(); ++disp) {
    const auto z = lat.signed_coords(disp);
    if (std::abs(z[0]) > window || std::abs(z[1]) > window) continue;
    double w = 0.0;
    if (spec.dimension == 1) {
      // Far images first so small terms are accumulated before large ones.
      for (int m = folds; m >= 0; --m) {
        if (m == 0) {
          w += power_law_weight(1, spec.beta, {z[0], 0});
        } else {
          w += power_law_weight(1, spec.beta, {z[0] + static_cast<long>(m) * side, 0});
          w += power_law_weight(1, spec.beta, {z[0] - static_cast<long>(m) * side, 0});
        }
      }
    } else {
      for (int m1 = -folds; m1 <= folds; ++m1)
        for (int m0 = -folds; m0 <= folds; ++m0)
          w += power_law_weight(2, spec.beta,
                                {z[0] + static_cast<long>(m0) * side, z[1] + static_cast<long>(m1) * side});
    }
    weights[disp] = w;
  }
  return weights;
}

std::vector<double> custom_table(const KernelSpec& spec, const Lattice& lat) {
  if (spec.table.size() != lat.sites())
    throw std::invalid_argument("custom kernel table size must equal side^d");
  if (spec.table[0] != 0.0) throw std::invalid_argument("custom kernel must put zero weight on the null displacement");
  double scale = 0.0;
  for (double w : spec.table) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("custom kernel weights must be finite and nonnegative");
    scale = std::max(scale, w);
  }
  if (!(scale > 0.0)) throw std::invalid_argument("custom kernel has zero mass");
  for (std::size_t disp = 1; disp < lat.sites(); ++disp)
    if (std::abs(spec.table[disp] - spec.table[lat.negate(disp)]) > 1e-12 * scale)
      throw std::invalid_argument("custom kernel table is not symmetric");
  return spec.table;
}

// -2 sin^2(pi k / M) = cos(2 pi k / M) - 1, mirrored so entries k and M-k are identical.
std::vector<double> cosine_minus_one_table(int side) {
  std::vector<double> t(static_cast<std::size_t>(side), 0.0);
  for (int k = 0; 2 * k <= side; ++k) {
    const double s = std::sin(std::numbers::pi * k / side);
    t[k] = -2.0 * s * s;
    t[(side - k) % side] = t[k];
  }
  return t;
}

}  // namespace

DiscreteKernel build_discrete_kernel(const KernelSpec& spec, int side) {
  validate(spec);
  DiscreteKernel k;
  k.spec_ = spec;
  k.lattice_ = Lattice(spec.dimension, side);

  std::vector<double> weights;
  if (spec.family == KernelFamily::PowerLawLattice) {
    if (side % 2 != 0) throw std::invalid_argument("torus side must be even");
    const int window = spec.window == 0 ? side / 2 - 1 : spec.window;
    if (window < 1) throw std::invalid_argument("torus too small for a nonempty kernel window");
    if (side < 2 * window + 2) throw std::invalid_argument("kernel window exceeds the torus half-side");
    k.window_ = window;
    weights = power_law_table(spec, k.lattice_, window);
  } else {
    weights = custom_table(spec, k.lattice_);
    k.window_ = side / 2;
  }

  // Summation order differs between z and -z; make the pair bitwise equal.
  for (std::size_t disp = 1; disp < weights.size(); ++disp) {
    const std::size_t mirror = k.lattice_.negate(disp);
    if (mirror > disp) weights[disp] = weights[mirror] = 0.5 * (weights[disp] + weights[mirror]);
  }
  double total = 0.0;
  for (double w : weights) total += w;
  k.total_mass_ = total;
  k.prob_.resize(weights.size());
  std::vector<double> support_weights;
  for (std::size_t disp = 0; disp < weights.size(); ++disp) {
    k.prob_[disp] = weights[disp] / total;
    if (weights[disp] > 0.0) {
      k.support_.push_back(disp);
      support_weights.push_back(weights[disp]);
    }
  }
  k.alias_ = AliasTable(support_weights);
  return k;
}

FourierSymbol discrete_symbol(const DiscreteKernel& kernel, int n) {
  if (n != kernel.side()) throw std::invalid_argument("discrete_symbol requires n equal to the torus side");
  const Lattice& lat = kernel.lattice();
  const int side = lat.side();
  const auto table = cosine_minus_one_table(side);
  const double speed = std::pow(static_cast<double>(n), kernel.beta());

  FourierSymbol sym;
  sym.lattice = lat;
  sym.beta = kernel.beta();
  sym.scale = n;
  sym.values.assign(lat.sites(), 0.0);

  if (lat.dim() == 2) {
    // Direct sums are O(sites^2) in d = 2; use the DFT of q instead.
    const auto q = Spectral::for_lattice(lat).forward(kernel.probabilities());
    for (std::size_t mode = 1; mode < lat.sites(); ++mode) sym.values[mode] = speed * (q[mode].real() - 1.0);
    for (std::size_t mode = 1; mode < lat.sites(); ++mode) {
      const std::size_t mirror = lat.negate(mode);
      if (mirror > mode) sym.values[mode] = sym.values[mirror] = 0.5 * (sym.values[mode] + sym.values[mirror]);
    }
    return sym;
  }

  const auto support = kernel.support();
  std::vector<std::array<int, 2>> zc(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) zc[i] = lat.coords(support[i]);

  for (std::size_t mode = 1; mode < lat.sites(); ++mode) {
    const auto j = lat.coords(mode);
    double acc = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      const long phase = (static_cast<long>(j[0]) * zc[i][0] + static_cast<long>(j[1]) * zc[i][1]) % side;
      acc += kernel.probability(support[i]) * table[static_cast<std::size_t>(phase)];
    }
    sym.values[mode] = speed * acc;
  }
  return sym;
}

double symbol_value(const DiscreteKernel& kernel, int n, std::array<int, 2> mode) {
  const Lattice& lat = kernel.lattice();
  const int side = lat.side();
  const int j0 = lat.wrap(mode[0]);
  const int j1 = lat.dim() == 2 ? lat.wrap(mode[1]) : 0;
  if (j0 == 0 && j1 == 0) return 0.0;
  const double speed = std::pow(static_cast<double>(n), kernel.beta());
  double acc = 0.0;
  for (std::size_t disp : kernel.support()) {
    const auto z = lat.coords(disp);
    const long phase = (static_cast<long>(j0) * z[0] + static_cast<long>(j1) * z[1]) % side;
    const double s = std::sin(std::numbers::pi * static_cast<double>(phase) / side);
    acc += kernel.probability(disp) * (-2.0 * s * s);
  }
  return speed * acc;
}

namespace {

// Aitken delta-squared on the last three ladder values.
void extrapolate(SymbolConvergence& c) {
  const auto& v = c.values;
  const std::size_t m = v.size();
  for (std::size_t i = 2; i < m; ++i)
    if (std::abs(v[i] - v[i - 1]) > std::abs(v[i - 1] - v[i - 2])) c.monotone_tail = false;
  if (m == 0) return;
  c.limit = v.back();
  if (m < 3) return;
  const double d1 = v[m - 2] - v[m - 3];
  const double d2 = v[m - 1] - v[m - 2];
  if (d1 * d2 > 0.0 && std::abs(d2) < std::abs(d1)) {
    c.limit = v[m - 1] - d2 * d2 / (d2 - d1);
  } else if (d2 != 0.0) {
    c.monotone_tail = false;
  }
}

std::vector<int> default_ladder(const KernelSpec& spec, int max_mode, int steps, int min_scale) {
  const int factor = spec.dimension == 1 ? 16 : 4;
  int n0 = min_scale;
  while (n0 < factor * std::max(1, max_mode)) n0 *= 2;
  std::vector<int> ladder;
  for (int k = 0; k < steps; ++k) ladder.push_back(n0 << k);
  return ladder;
}

}  // namespace

SymbolConvergence symbol_limit_estimate(const KernelSpec& spec, std::array<int, 2> mode,
                                        std::span<const int> scales) {
  SymbolConvergence c;
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (scales[i] <= scales[i - 1]) throw std::invalid_argument("scale ladder must be increasing");
  for (int n : scales) {
    const auto kernel = build_discrete_kernel(spec, n);
    c.scales.push_back(n);
    c.values.push_back(symbol_value(kernel, n, mode));
  }
  extrapolate(c);
  return c;
}

LimitSymbol::LimitSymbol(KernelSpec spec, int ladder_steps, int min_scale) : spec_(std::move(spec)) {
  validate(spec_);
  ladder_steps_ = ladder_steps > 0 ? ladder_steps : (spec_.dimension == 1 ? 5 : 4);
  min_scale_ = min_scale > 0 ? min_scale : (spec_.dimension == 1 ? 256 : 32);
}

double LimitSymbol::operator()(std::array<int, 2> mode) const {
  const std::array<int, 2> one[1] = {mode};
  return values(one)[0];
}

std::vector<double> LimitSymbol::values(std::span<const std::array<int, 2>> modes) const {
  std::vector<double> out(modes.size(), 0.0);
  std::vector<std::size_t> todo;
  std::vector<std::array<int, 2>> keys(modes.size());
  {
    std::lock_guard lock(mutex_);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      auto j = modes[m];
      if (spec_.dimension == 1) j[1] = 0;
      keys[m] = j;
      if (j[0] == 0 && j[1] == 0) continue;
      if (auto it = cache_.find(j); it != cache_.end())
        out[m] = it->second;
      else
        todo.push_back(m);
    }
  }
  if (todo.empty()) return out;

  int max_mode = 1;
  for (std::size_t m : todo) max_mode = std::max({max_mode, std::abs(keys[m][0]), std::abs(keys[m][1])});
  const auto ladder = default_ladder(spec_, max_mode, ladder_steps_, min_scale_);
  std::vector<SymbolConvergence> conv(todo.size());
  for (int n : ladder) {
    const auto kernel = build_discrete_kernel(spec_, n);
    if (spec_.dimension == 1) {
      for (std::size_t i = 0; i < todo.size(); ++i) {
        conv[i].scales.push_back(n);
        conv[i].values.push_back(symbol_value(kernel, n, keys[todo[i]]));
      }
    } else {
      const auto full = discrete_symbol(kernel, n);
      for (std::size_t i = 0; i < todo.size(); ++i) {
        conv[i].scales.push_back(n);
        conv[i].values.push_back(full[kernel.lattice().index(keys[todo[i]])]);
      }
    }
  }
  std::lock_guard lock(mutex_);
  for (std::size_t i = 0; i < todo.size(); ++i) {
    extrapolate(conv[i]);
    out[todo[i]] = conv[i].limit;
    cache_[keys[todo[i]]] = conv[i].limit;
  }
  return out;
}

FourierSymbol LimitSymbol::on_lattice(const Lattice& lattice) const {
  if (lattice.dim() != spec_.dimension) throw std::invalid_argument("lattice dimension does not match kernel");
  FourierSymbol sym;
  sym.lattice = lattice;
  sym.beta = spec_.beta;
  sym.scale = std::numeric_limits<double>::infinity();
  std::vector<std::array<int, 2>> modes(lattice.sites());
  for (std::size_t m = 0; m < modes.size(); ++m) modes[m] = lattice.signed_coords(m);
  sym.values = values(modes);
  sym.values[0] = 0.0;
  // Enforce exact evenness: average each mode with its mirror.
  for (std::size_t m = 1; m < lattice.sites(); ++m) {
    const std::size_t mirror = lattice.negate(m);
    if (mirror > m) {
      const double avg = 0.5 * (sym.values[m] + sym.values[mirror]);
      sym.values[m] = sym.values[mirror] = avg;
    }
  }
  return sym;
}

}  // namespace sipx
