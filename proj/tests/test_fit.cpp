#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wva/errors.hpp"
#include "wva/fit.hpp"

namespace wva {
namespace {

constexpr double kUrad = 1e-6;

TEST(Wls, MatchesNormalEquations) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(8, 3);
  Eigen::VectorXd y(8), sigma(8);
  for (int i = 0; i < 8; ++i) {
    a(i, 0) = 1;
    a(i, 1) = i;
    a(i, 2) = i * i;
    y(i) = 2 - 0.5 * i + 0.1 * i * i + 0.3 * g(rng);
    sigma(i) = 0.2 + 0.05 * i;
  }
  const auto fit = weighted_least_squares(a, y, sigma);
  const Eigen::MatrixXd w = sigma.array().inverse().square().matrix().asDiagonal();
  const Eigen::MatrixXd normal = a.transpose() * w * a;
  const Eigen::VectorXd expected = normal.ldlt().solve(a.transpose() * w * y);
  EXPECT_LT((fit.coefficients - expected).norm(), 1e-10);
  EXPECT_LT((fit.covariance - normal.inverse()).norm(), 1e-10);
  const Eigen::VectorXd r = (a * expected - y).cwiseQuotient(sigma);
  EXPECT_NEAR(fit.chi_squared, r.squaredNorm(), 1e-10);
  EXPECT_EQ(fit.dof, 5);
}

TEST(Wls, ZeroSigmasFallBackToUnitWeights) {
  Eigen::MatrixXd a(3, 2);
  a << 1, 0, 1, 1, 1, 2;
  Eigen::VectorXd y(3);
  y << 1, 3, 5;
  const auto fit = weighted_least_squares(a, y, Eigen::VectorXd::Zero(3));
  EXPECT_NEAR(fit.coefficients(0), 1, 1e-12);
  EXPECT_NEAR(fit.coefficients(1), 2, 1e-12);
  Eigen::VectorXd mixed(3);
  mixed << 1, 0, 1;
  EXPECT_THROW(weighted_least_squares(a, y, mixed), InvalidInput);
}

TEST(PerPhoton, ExactLine) {
  std::vector<PhasePoint> pts;
  for (double n : {95.0, 45.0, 20.0, 10.0, 40.0}) pts.push_back({n, 1e-6 + 5.59 * kUrad * n, 1e-6});
  const auto fit = fit_per_photon_phase(pts);
  EXPECT_NEAR(fit.parameter, 5.59 * kUrad, 1e-15);
  EXPECT_NEAR(fit.intercept, 1e-6, 1e-13);
  EXPECT_NEAR(fit.chi_squared, 0.0, 1e-12);
  EXPECT_EQ(fit.dof, 3);
  EXPECT_GT(fit.std_error, 0.0);
}

TEST(PerPhoton, StderrMatchesClosedForm) {
  // Unweighted straight line: var(slope) = sigma^2 / sum (x - xbar)^2.
  std::vector<PhasePoint> pts{{1, 0.1, 0.5}, {2, 0.4, 0.5}, {4, 0.2, 0.5}, {7, 0.9, 0.5}};
  double xbar = (1 + 2 + 4 + 7) / 4.0, sxx = 0;
  for (const auto& p : pts) sxx += (p.n_bar - xbar) * (p.n_bar - xbar);
  EXPECT_NEAR(fit_per_photon_phase(pts).std_error, 0.5 / std::sqrt(sxx), 1e-12);
}

TEST(PerPhoton, Degenerate) {
  std::vector<PhasePoint> two{{1, 1, 1}, {2, 2, 1}};
  EXPECT_THROW(fit_per_photon_phase(two), DegenerateFit);
  std::vector<PhasePoint> same{{3, 1, 1}, {3, 2, 1}, {3, 3, 1}};
  EXPECT_THROW(fit_per_photon_phase(same), DegenerateFit);
}

TEST(Differential, RecoversNoiselessInput) {
  const double phi_bar = 5.59 * kUrad, dphi = 8.7 * kUrad;
  std::vector<DifferentialPoint> pts;
  for (double d : {0.1, 0.14, 0.22, 0.32}) pts.push_back({d, phi_bar + dphi / (2 * d), 3 * kUrad});
  const auto fit = fit_differential(pts, phi_bar);
  EXPECT_NEAR(fit.parameter / kUrad, 8.7, 1e-9);
  EXPECT_NEAR(fit.chi_squared, 0.0, 1e-12);
  EXPECT_EQ(fit.dof, 3);
  double info = 0;
  for (const auto& p : pts) info += std::pow(1 / (2 * p.delta) / p.sigma, 2);
  EXPECT_NEAR(fit.std_error, 1 / std::sqrt(info), 1e-18);
}

TEST(Differential, Degenerate) {
  std::vector<DifferentialPoint> one{{0.1, 1, 1}};
  EXPECT_THROW(fit_differential(one, 0.0), DegenerateFit);
  std::vector<DifferentialPoint> same{{0.1, 1, 1}, {0.1, 2, 1}};
  EXPECT_THROW(fit_differential(same, 0.0), DegenerateFit);
  std::vector<DifferentialPoint> bad{{0.0, 1, 1}, {0.1, 2, 1}};
  EXPECT_THROW(fit_differential(bad, 0.0), InvalidInput);
}

}  // namespace
}  // namespace wva
