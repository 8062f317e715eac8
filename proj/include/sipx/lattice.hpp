// Periodic lattice (discrete torus) with flat site indexing.
#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>

namespace sipx {

/// Torus with `side` sites per dimension; site and displacement indices are
/// flat, first coordinate fastest. Macroscopic position of coordinate i is i/side.
class Lattice {
 public:
  Lattice() = default;
  Lattice(int dim, int side) : dim_(dim), side_(side) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("lattice dimension must be 1 or 2");
    if (side < 1) throw std::invalid_argument("lattice side must be positive");
  }

  int dim() const { return dim_; }
  int side() const { return side_; }
  std::size_t sites() const {
    return dim_ == 1 ? static_cast<std::size_t>(side_)
                     : static_cast<std::size_t>(side_) * static_cast<std::size_t>(side_);
  }

  std::array<int, 2> coords(std::size_t site) const {
    if (dim_ == 1) return {static_cast<int>(site), 0};
    return {static_cast<int>(site % side_), static_cast<int>(site / side_)};
  }

  std::size_t index(std::array<int, 2> c) const {
    const int a = wrap(c[0]);
    if (dim_ == 1) return static_cast<std::size_t>(a);
    return static_cast<std::size_t>(a) + static_cast<std::size_t>(side_) * static_cast<std::size_t>(wrap(c[1]));
  }

  /// Site reached from `site` by the displacement class `disp` (also a flat index).
  std::size_t shift(std::size_t site, std::size_t disp) const {
    if (dim_ == 1) {
      std::size_t y = site + disp;
      return y >= static_cast<std::size_t>(side_) ? y - side_ : y;
    }
    const auto a = coords(site);
    const auto z = coords(disp);
    return index({a[0] + z[0], a[1] + z[1]});
  }

  /// Displacement class of -disp.
  std::size_t negate(std::size_t disp) const {
    const auto z = coords(disp);
    return index({-z[0], -z[1]});
  }

  /// Displacement class taking `from` to `to`.
  std::size_t difference(std::size_t from, std::size_t to) const {
    const auto a = coords(from);
    const auto b = coords(to);
    return index({b[0] - a[0], b[1] - a[1]});
  }

  /// Signed representative in (-side/2, side/2] per component.
  std::array<int, 2> signed_coords(std::size_t disp) const {
    auto c = coords(disp);
    for (int k = 0; k < dim_; ++k)
      if (2 * c[k] > side_) c[k] -= side_;
    return c;
  }

  int wrap(int a) const {
    a %= side_;
    return a < 0 ? a + side_ : a;
  }

  bool operator==(const Lattice&) const = default;

 private:
  int dim_ = 1;
  int side_ = 1;
};

}  // namespace sipx
