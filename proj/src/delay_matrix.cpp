#include "selfsync/delay_matrix.hpp"

#include "selfsync/error.hpp"

#include <cmath>
#include <string>

namespace selfsync {

DelayMatrix::DelayMatrix(Eigen::MatrixXd tau) : tau_(std::move(tau)) {
  if (tau_.rows() != tau_.cols()) throw ValidationError("delay matrix must be square");
  for (Eigen::Index i = 0; i < tau_.rows(); ++i) {
    for (Eigen::Index j = 0; j < tau_.cols(); ++j) {
      const double t = tau_(i, j);
      if (!std::isfinite(t) || t < 0.0) {
        throw ValidationError("delay at (" + std::to_string(i) + "," + std::to_string(j) +
                              ") must be finite and nonnegative");
      }
      if (i != j && t > tau_max_) tau_max_ = t;
    }
  }
}

DelayMatrix DelayMatrix::zeros(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return DelayMatrix(Eigen::MatrixXd::Zero(m, m));
}

DelayMatrix DelayMatrix::uniform(std::size_t n, double tau) {
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd t = Eigen::MatrixXd::Constant(m, m, tau);
  t.diagonal().setZero();
  return DelayMatrix(std::move(t));
}

DelayMatrix DelayMatrix::scaled(double factor) const {
  if (!(factor >= 0.0)) throw ValidationError("delay scale factor must be nonnegative");
  return DelayMatrix(tau_ * factor);
}

DelayMatrix DelayMatrix::quantized(double t_step) const {
  if (!(t_step > 0.0)) throw ValidationError("time step must be positive");
  return DelayMatrix(tau_.unaryExpr([t_step](double t) { return std::round(t / t_step) * t_step; }));
}

}  // namespace selfsync
