// Single-pass cross-replica moment accumulators.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace sipx {

/// Running count, mean and central moments up to order four; mergeable.
class ReplicaStats {
 public:
  void add(double x) {
    const double n1 = static_cast<double>(n_);
    ++n_;
    const double n = static_cast<double>(n_);
    const double delta = x - mean_;
    const double dn = delta / n;
    const double dn2 = dn * dn;
    const double term = delta * dn * n1;
    mean_ += dn;
    m4_ += term * dn2 * (n * n - 3 * n + 3) + 6 * dn2 * m2_ - 4 * dn * m3_;
    m3_ += term * dn * (n - 2) - 3 * dn * m2_;
    m2_ += term;
  }

  void merge(const ReplicaStats& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double d = o.mean_ - mean_;
    const double d2 = d * d, d3 = d2 * d, d4 = d2 * d2;
    const double m2 = m2_ + o.m2_ + d2 * na * nb / n;
    const double m3 = m3_ + o.m3_ + d3 * na * nb * (na - nb) / (n * n) + 3 * d * (na * o.m2_ - nb * m2_) / n;
    const double m4 = m4_ + o.m4_ + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                      6 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) + 4 * d * (na * o.m3_ - nb * m3_) / n;
    mean_ += d * nb / n;
    m2_ = m2;
    m3_ = m3;
    m4_ = m4;
    n_ += o.n_;
  }

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance.
  double variance() const { return n_ > 1 ? std::max(0.0, m2_ / static_cast<double>(n_ - 1)) : 0.0; }
  /// Standard error of the mean.
  double se() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }
  /// Large-sample standard error of the sample variance, from the fourth central moment.
  double variance_se() const {
    if (n_ < 2) return 0.0;
    const double n = static_cast<double>(n_);
    const double mu2 = m2_ / n;
    const double mu4 = m4_ / n;
    return std::sqrt(std::max(0.0, (mu4 - mu2 * mu2 * (n - 3) / (n - 1)) / n));
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;
};

}  // namespace sipx
