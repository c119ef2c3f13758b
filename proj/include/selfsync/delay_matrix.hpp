#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace selfsync {

// Per-link delays tau_ij (receiver i, transmitter j), in time units.
class DelayMatrix {
 public:
  DelayMatrix() = default;
  // Throws ValidationError for non-square, negative or non-finite entries.
  explicit DelayMatrix(Eigen::MatrixXd tau);

  static DelayMatrix zeros(std::size_t n);
  static DelayMatrix uniform(std::size_t n, double tau);

  std::size_t size() const noexcept { return static_cast<std::size_t>(tau_.rows()); }
  const Eigen::MatrixXd& tau() const noexcept { return tau_; }
  double operator()(std::size_t i, std::size_t j) const {
    return tau_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  // Largest off-diagonal delay.
  double tau_max() const noexcept { return tau_max_; }

  DelayMatrix scaled(double factor) const;
  // Rounds every delay to the nearest multiple of `t_step`, the lag the
  // discrete-time simulator actually applies.
  DelayMatrix quantized(double t_step) const;

 private:
  Eigen::MatrixXd tau_;
  double tau_max_ = 0.0;
};

}  // namespace selfsync
