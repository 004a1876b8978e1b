#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace blurdiff {

/// Elementwise running mean and variance (Welford) over equally shaped
/// arrays.
class GridMoments {
 public:
  GridMoments(Eigen::Index rows, Eigen::Index cols)
      : mean_(Eigen::ArrayXXd::Zero(rows, cols)), m2_(Eigen::ArrayXXd::Zero(rows, cols)) {}

  template <typename Derived>
  void add(const Eigen::ArrayBase<Derived>& x) {
    ++n_;
    const Eigen::ArrayXXd delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  long count() const { return n_; }
  const Eigen::ArrayXXd& mean() const { return mean_; }
  Eigen::ArrayXXd variance() const { return m2_ / static_cast<double>(n_ - 1); }

  /// Standard error of the mean given the true variance.
  static Eigen::ArrayXXd mean_se(const Eigen::ArrayXXd& true_var, long n) {
    return (true_var / static_cast<double>(n)).sqrt();
  }
  /// Standard error of the sample variance of Gaussian data.
  static Eigen::ArrayXXd var_se(const Eigen::ArrayXXd& true_var, long n) {
    return true_var * std::sqrt(2.0 / static_cast<double>(n - 1));
  }

 private:
  long n_ = 0;
  Eigen::ArrayXXd mean_;
  Eigen::ArrayXXd m2_;
};

}  // namespace blurdiff
