// Walker/Vose alias table: O(n) build, O(1) draws.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sipx/random.hpp"

namespace sipx {

class AliasTable {
 public:
  AliasTable() = default;
  /// Weights need not be normalized; all must be finite and nonnegative with positive sum.
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const { return prob_.size(); }

  std::size_t operator()(Rng& g) const {
    const double u = uniform01(g) * static_cast<double>(prob_.size());
    const auto col = static_cast<std::size_t>(u);
    return (u - static_cast<double>(col)) < prob_[col] ? col : alias_[col];
  }

  /// Probability mass the table assigns to outcome i (for verification).
  double mass(std::size_t i) const;

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace sipx
