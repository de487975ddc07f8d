#include "wva/fit.hpp"

#include <cmath>
#include <string>

#include "wva/errors.hpp"

namespace wva {

LinearFit weighted_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& sigma) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (y.size() != n || sigma.size() != n) throw InvalidInput("fit: inconsistent point counts");
  if (n - p < 1) {
    throw DegenerateFit("fit: " + std::to_string(n) + " points for " + std::to_string(p) +
                        " parameters leaves no degrees of freedom");
  }

  Eigen::VectorXd weight_sqrt(n);
  if ((sigma.array() == 0.0).all()) {
    weight_sqrt.setOnes();
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(sigma(i) > 0.0) || !std::isfinite(sigma(i))) {
        throw InvalidInput("fit: sigma of point " + std::to_string(i) + " must be positive");
      }
      weight_sqrt(i) = 1.0 / sigma(i);
    }
  }

  const Eigen::MatrixXd a = weight_sqrt.asDiagonal() * design;
  const Eigen::VectorXd b = weight_sqrt.cwiseProduct(y);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < p) throw DegenerateFit("fit: degenerate abscissas");

  LinearFit fit;
  fit.coefficients = qr.solve(b);
  fit.covariance = (a.transpose() * a).inverse();
  fit.chi_squared = (a * fit.coefficients - b).squaredNorm();
  fit.dof = static_cast<int>(n - p);
  return fit;
}

FitResult fit_per_photon_phase(std::span<const PhasePoint> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 3) throw DegenerateFit("per-photon fit needs at least 3 points");
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  Eigen::VectorXd sigma(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = points[i].n_bar;
    y(i) = points[i].phase;
    sigma(i) = points[i].sigma;
  }
  const LinearFit fit = weighted_least_squares(design, y, sigma);
  return {fit.coefficients(1), std::sqrt(fit.covariance(1, 1)), fit.chi_squared, fit.dof,
          fit.coefficients(0)};
}

FitResult fit_differential(std::span<const DifferentialPoint> points, double phi_bar_fixed) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 2) throw DegenerateFit("differential fit needs at least 2 points");
  Eigen::MatrixXd design(n, 1);
  Eigen::VectorXd y(n);
  Eigen::VectorXd sigma(n);
  bool distinct = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(points[i].delta > 0.0)) throw InvalidInput("differential fit: delta must be > 0");
    design(i, 0) = 1.0 / (2.0 * points[i].delta);
    y(i) = points[i].differential - phi_bar_fixed;
    sigma(i) = points[i].sigma;
    distinct = distinct || points[i].delta != points[0].delta;
  }
  if (!distinct) throw DegenerateFit("differential fit: all points share one delta");
  const LinearFit fit = weighted_least_squares(design, y, sigma);
  return {fit.coefficients(0), std::sqrt(fit.covariance(0, 0)), fit.chi_squared, fit.dof, 0.0};
}

}  // namespace wva
