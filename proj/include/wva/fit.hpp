#pragma once

#include <Eigen/Dense>

#include <span>

namespace wva {

/// Linear weighted least squares y ~ design * coefficients with per-point
/// standard deviations sigma. Covariance is (A^T W A)^{-1} with W = diag(1/sigma^2),
/// i.e. not rescaled by the reduced chi-squared.
struct LinearFit {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;
  double chi_squared = 0;
  int dof = 0;
};

/// Throws DegenerateFit for rank-deficient designs or dof < 1 and InvalidInput
/// for non-positive sigmas. If every sigma is zero, unit weights are used.
LinearFit weighted_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& sigma);

struct FitResult {
  double parameter = 0;
  double std_error = 0;
  double chi_squared = 0;
  int dof = 0;
  double intercept = 0;  // only set by fit_per_photon_phase
};

struct PhasePoint {
  double n_bar;
  double phase;
  double sigma;
};

/// phase = c + phi0 * n_bar; returns phi0. Needs three or more points.
FitResult fit_per_photon_phase(std::span<const PhasePoint> points);

struct DifferentialPoint {
  double delta;
  double differential;
  double sigma;
};

/// differential = phi_bar_fixed + delta_phi / (2 delta); returns delta_phi.
FitResult fit_differential(std::span<const DifferentialPoint> points, double phi_bar_fixed);

}  // namespace wva
