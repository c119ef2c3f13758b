#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace selfsync {

// Linear observation y_i = A_i xi + w_i, w_i ~ N(0, R_i).
struct LinearObsModel {
  Eigen::MatrixXd a_mat;  // M x L, full column rank
  Eigen::MatrixXd r_cov;  // M x M, symmetric positive definite
  Eigen::VectorXd y;      // M
};

struct BlueLocal {
  Eigen::VectorXd g_vec;  // C_i^{-1} A_i^T R_i^{-1} y_i
  Eigen::MatrixXd c_mat;  // A_i^T R_i^{-1} A_i
};

BlueLocal blue_local(const LinearObsModel& m);

// (sum C_i)^{-1} sum C_i g_i.
Eigen::VectorXd centralized_blue(const std::vector<LinearObsModel>& models);

struct GlrtModel {
  std::vector<double> samples;
  double sigma_w2 = 1.0;
};

struct GlrtLocal {
  double g = 0.0;
  double power_estimate = 0.0;  // clamped ML signal-power estimate
};

GlrtLocal glrt_local(const GlrtModel& m);

// sum_i g_i over the network (c_i = 1).
double glrt_statistic(const std::vector<GlrtModel>& models);

// h(sum c_i g_i / sum c_i).
double consensus_function(const std::function<double(double)>& h, const Eigen::VectorXd& g_values,
                          const Eigen::VectorXd& c);

// (sum C_i)^{-1} sum C_i g_i, the vector form.
Eigen::VectorXd consensus_function(const std::vector<Eigen::VectorXd>& g_vecs,
                                   const std::vector<Eigen::MatrixXd>& c_mats);

}  // namespace selfsync
