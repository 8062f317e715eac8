// Exact generator of SIP on a tiny torus in a fixed particle-number sector.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sipx/kernel.hpp"

namespace sipx {

class ExactModel {
 public:
  /// Enumerates all configurations with `particles` particles; throws if there are more than max_states.
  ExactModel(const DiscreteKernel& kernel, double alpha, int particles, std::size_t max_states = 100000);

  std::size_t size() const { return states_.size(); }
  int particles() const { return particles_; }
  double alpha() const { return alpha_; }
  std::span<const std::uint32_t> state(std::size_t i) const;
  /// Throws std::out_of_range if the occupations are not in the sector.
  std::size_t index_of(std::span<const std::uint32_t> eta) const;

  /// Generator in CSR form (diagonal included).
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& cols() const { return cols_; }
  const std::vector<double>& vals() const { return vals_; }
  /// Uniformization rate: largest diagonal magnitude.
  double lambda() const { return lambda_; }
  /// Largest absolute row sum (zero up to rounding).
  double max_row_sum() const;

  std::vector<double> tabulate(const std::function<double(std::span<const std::uint32_t>)>& f) const;

  /// (e^{tQ} f) for all start states, by uniformization with Poisson tail mass <= tol.
  std::vector<double> semigroup(std::span<const double> f, double t, double tol = 1e-10) const;
  /// E_start[f(eta_t)].
  double expectation(std::span<const double> f, std::size_t start, double t, double tol = 1e-10) const;
  /// Law of eta_t from `start` (row of e^{tQ}).
  std::vector<double> distribution(std::size_t start, double t, double tol = 1e-10) const;

  Eigen::MatrixXd dense_generator() const;
  /// Same expectation through a dense scaling-and-squaring matrix exponential (<= 1000 states).
  double expectation_dense(std::span<const double> f, std::size_t start, double t) const;

 private:
  std::vector<double> apply(std::span<const double> v) const;
  std::vector<double> apply_transpose(std::span<const double> v) const;
  template <class Step>
  std::vector<double> uniformize(std::vector<double> v, double t, double tol, Step step) const;

  int sites_ = 0;
  int particles_ = 0;
  double alpha_ = 1.0;
  std::vector<std::vector<std::uint32_t>> states_;
  std::map<std::vector<std::uint32_t>, std::size_t> lookup_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
  double lambda_ = 0.0;
};

}  // namespace sipx
