#pragma once

#include "selfsync/dde_sim.hpp"
#include "selfsync/delay_matrix.hpp"
#include "selfsync/digraph.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace selfsync {

enum class GammaNormalization { SumOne, InfNormOne };

// Left zero-eigenvector of a Laplacian, supported on root-SCC nodes only.
struct GammaVector {
  Eigen::VectorXd gamma;
  std::vector<std::size_t> support;  // nodes with gamma_i > 0, ascending
  GammaNormalization normalization = GammaNormalization::SumOne;
  double residual = 0.0;             // ||gamma^T L||_inf
};

enum class RateMethod { NoDelaySpectrum, KappaBound, EmpiricalFit };

const char* to_string(RateMethod m) noexcept;

struct RateEstimate {
  double value = 0.0;  // exponential rate, <= 0
  RateMethod method = RateMethod::NoDelaySpectrum;
  double residual = 0.0;  // RMS of the log-linear fit (empirical method only)
  bool degenerate = false;
  std::size_t fit_samples = 0;
};

// Laplacian of the coupling actually applied, diag(k) L with k_i = K / c_i.
// It is the Laplacian of the digraph with row-scaled weights k_i a_ij.
Laplacian coupling_laplacian(const SensorDigraph& g, const Eigen::VectorXd& k);

// Multiplicity of the zero eigenvalue, from the number of root components of
// the condensation.
std::size_t zero_eigen_multiplicity(const Laplacian& L);

// Default residual tolerance for gamma^T L = 0 relative to ||L||_inf.
constexpr double kGammaResidualRel = 1e-10;

// Global gamma for a QSC digraph. Throws TopologyError if the condensation
// has more than one root.
GammaVector gamma_left_eigenvector(const Laplacian& L, const SccDecomposition& scc,
                                   GammaNormalization norm = GammaNormalization::SumOne);

// One gamma per root component (in scc.root_components order), each solved on
// its own block and zero elsewhere.
std::vector<GammaVector> gamma_per_root(const Laplacian& L, const SccDecomposition& scc,
                                        GammaNormalization norm = GammaNormalization::SumOne);

// Left null vector of an irreducible Laplacian block, sum-normalized.
// Gaussian elimination with partial pivoting on the bordered system.
Eigen::VectorXd block_left_null_vector(const Eigen::MatrixXd& block);

// r = -min{Re(lambda) : lambda an eigenvalue of L, lambda != 0}. QSC only.
RateEstimate rate_no_delay(const Laplacian& L);

// kappa = -lambda_2((D_gamma L + L^T D_gamma) / 2) with ||gamma||_inf = 1.
// SC only. Throws NumericalError if the no-delay rate exceeds kappa.
RateEstimate rate_kappa_bound(const Laplacian& L, const GammaVector& gamma);

// p(s) = det(sI + Delta - H(s)), Delta = diag(k_i deg_i), H_ij = k_i a_ij e^{-s tau_ij}.
std::complex<double> characteristic_function(std::complex<double> s, const SensorDigraph& g,
                                             const DelayMatrix& delays, const Eigen::VectorXd& k);

// prod_i max(1, 2 k_i deg_i): scale used when judging |p(0)| against zero.
double characteristic_scale(const SensorDigraph& g, const Eigen::VectorXd& k);

// ||(j omega I + Delta)^{-1} H(j omega)||_inf, the max row-sum gain of the
// delayed loop on the imaginary axis.
double delayed_loop_row_gain(double omega, const SensorDigraph& g, const DelayMatrix& delays,
                             const Eigen::VectorXd& k);

// Least-squares slope of log ||x'(t) - omega*||_inf after the transient.
// Requires traj.sync to be set and global.
RateEstimate empirical_rate(const Trajectory& traj, const Eigen::VectorXd& omega_star);

}  // namespace selfsync
