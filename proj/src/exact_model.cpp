#include "sipx/exact_model.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace sipx {

namespace {

void enumerate(std::vector<std::uint32_t>& cur, std::size_t site, std::uint32_t left,
               std::vector<std::vector<std::uint32_t>>& out, std::size_t cap) {
  if (site + 1 == cur.size()) {
    cur[site] = left;
    out.push_back(cur);
    if (out.size() > cap) throw std::length_error("exact model state space too large");
    return;
  }
  for (std::uint32_t k = left + 1; k-- > 0;) {
    cur[site] = k;
    enumerate(cur, site + 1, left - k, out, cap);
  }
  cur[site] = 0;
}

}  // namespace

ExactModel::ExactModel(const DiscreteKernel& kernel, double alpha, int particles, std::size_t max_states)
    : sites_(static_cast<int>(kernel.lattice().sites())), particles_(particles), alpha_(alpha) {
  if (particles < 0) throw std::invalid_argument("particle count must be nonnegative");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  std::vector<std::uint32_t> cur(static_cast<std::size_t>(sites_), 0);
  enumerate(cur, 0, static_cast<std::uint32_t>(particles), states_, max_states);
  for (std::size_t i = 0; i < states_.size(); ++i) lookup_.emplace(states_[i], i);

  const Lattice& lat = kernel.lattice();
  const double speed = std::pow(static_cast<double>(kernel.side()), kernel.beta());
  row_ptr_.push_back(0);
  std::map<std::size_t, double> row;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    row.clear();
    std::vector<std::uint32_t> next = states_[i];
    double out_rate = 0.0;
    for (std::size_t x = 0; x < next.size(); ++x) {
      if (next[x] == 0) continue;
      for (std::size_t disp : kernel.support()) {
        const std::size_t y = lat.shift(x, disp);
        const double rate = speed * next[x] * (alpha + next[y]) * kernel.probability(disp);
        --next[x];
        ++next[y];
        row[lookup_.at(next)] += rate;
        ++next[x];
        --next[y];
        out_rate += rate;
      }
    }
    row[i] -= out_rate;
    for (const auto& [j, v] : row) {
      cols_.push_back(j);
      vals_.push_back(v);
    }
    row_ptr_.push_back(cols_.size());
    lambda_ = std::max(lambda_, out_rate);
  }
}

std::span<const std::uint32_t> ExactModel::state(std::size_t i) const { return states_.at(i); }

std::size_t ExactModel::index_of(std::span<const std::uint32_t> eta) const {
  auto it = lookup_.find(std::vector<std::uint32_t>(eta.begin(), eta.end()));
  if (it == lookup_.end()) throw std::out_of_range("configuration not in the exact model sector");
  return it->second;
}

double ExactModel::max_row_sum() const {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < row_ptr_.size(); ++i) {
    double s = 0.0;
    for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) s += vals_[e];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

std::vector<double> ExactModel::tabulate(const std::function<double(std::span<const std::uint32_t>)>& f) const {
  std::vector<double> v(states_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(states_[i]);
  return v;
}

std::vector<double> ExactModel::apply(std::span<const double> v) const {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    double s = 0.0;
    for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) s += vals_[e] * v[cols_[e]];
    out[i] = s;
  }
  return out;
}

std::vector<double> ExactModel::apply_transpose(std::span<const double> v) const {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) out[cols_[e]] += vals_[e] * v[i];
  return out;
}

// sum_k Pois(lambda t; k) P^k v with P = I + Q / lambda.
template <class Step>
std::vector<double> ExactModel::uniformize(std::vector<double> v, double t, double tol, Step step) const {
  if (t < 0.0) throw std::invalid_argument("time must be nonnegative");
  if (t == 0.0 || lambda_ == 0.0) return v;
  const double mu = lambda_ * t;
  const std::size_t max_terms = static_cast<std::size_t>(mu + 50.0 * std::sqrt(mu) + 200.0);
  if (max_terms > 5'000'000) throw std::runtime_error("uniformization needs too many terms");
  std::vector<double> acc(v.size(), 0.0);
  double weight_sum = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double w = std::exp(-mu + static_cast<double>(k) * std::log(mu) - std::lgamma(k + 1.0));
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += w * v[i];
    weight_sum += w;
    if (1.0 - weight_sum <= tol && static_cast<double>(k) > mu) break;
    if (k >= max_terms) throw std::runtime_error("uniformization failed to reach the requested tail tolerance");
    const auto qv = step(v);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += qv[i] / lambda_;
  }
  return acc;
}

std::vector<double> ExactModel::semigroup(std::span<const double> f, double t, double tol) const {
  if (f.size() != states_.size()) throw std::invalid_argument("function table does not match state space");
  return uniformize(std::vector<double>(f.begin(), f.end()), t, tol, [&](const std::vector<double>& v) { return apply(v); });
}

double ExactModel::expectation(std::span<const double> f, std::size_t start, double t, double tol) const {
  const auto law = distribution(start, t, tol);
  double s = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) s += law[i] * f[i];
  return s;
}

std::vector<double> ExactModel::distribution(std::size_t start, double t, double tol) const {
  if (start >= states_.size()) throw std::out_of_range("start state out of range");
  std::vector<double> p(states_.size(), 0.0);
  p[start] = 1.0;
  return uniformize(std::move(p), t, tol, [&](const std::vector<double>& v) { return apply_transpose(v); });
}

Eigen::MatrixXd ExactModel::dense_generator() const {
  const auto n = static_cast<Eigen::Index>(states_.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i + 1 < row_ptr_.size(); ++i)
    for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
      q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols_[e])) = vals_[e];
  return q;
}

double ExactModel::expectation_dense(std::span<const double> f, std::size_t start, double t) const {
  if (states_.size() > 1000) throw std::length_error("dense matrix exponential limited to 1000 states");
  if (f.size() != states_.size()) throw std::invalid_argument("function table does not match state space");
  const Eigen::MatrixXd p = (dense_generator() * t).exp();
  Eigen::Map<const Eigen::VectorXd> fv(f.data(), static_cast<Eigen::Index>(f.size()));
  return p.row(static_cast<Eigen::Index>(start)).dot(fv);
}

}  // namespace sipx
