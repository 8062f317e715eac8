#include "sipx/alias_table.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sipx {

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw std::invalid_argument("alias table needs at least one outcome");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("alias weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("alias weights sum to zero");

  prob_.assign(n, 0.0);
  alias_.resize(n);
  std::iota(alias_.begin(), alias_.end(), 0u);

  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (auto l : large) prob_[l] = 1.0;
  for (auto s : small) prob_[s] = 1.0;
}

double AliasTable::mass(std::size_t i) const {
  const double n = static_cast<double>(prob_.size());
  double m = prob_[i];
  for (std::size_t c = 0; c < prob_.size(); ++c)
    if (alias_[c] == i && c != i) m += 1.0 - prob_[c];
  return m / n;
}

}  // namespace sipx
