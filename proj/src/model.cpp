#include "wva/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "wva/errors.hpp"

namespace wva {

namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw InvalidInput(std::string(field) + ": " + what);
}

}  // namespace

void InterferometerParams::validate() const {
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha", "must be finite and >= 0");
  require(std::isfinite(beta) && beta >= 0.0, "beta", "must be finite and >= 0");
  require(std::isfinite(delta) && delta > 0.0 && delta <= 1.0, "delta", "must lie in (0, 1]");
  require(std::isfinite(eta) && eta >= 0.0 && eta <= 1.0, "eta", "must lie in [0, 1]");
  require(std::isfinite(phi_plus), "phi_plus", "must be finite");
  require(std::isfinite(phi_minus), "phi_minus", "must be finite");
}

double InterferometerParams::theta() const { return std::atan2(-(1.0 + delta), 1.0 - delta); }

double delta_from_theta(double theta) {
  const double t = std::tan(theta);
  return (t + 1.0) / (t - 1.0);
}

WeakValues weak_value_photon_number(double n_bar, double delta) {
  if (delta == 0.0) throw DivergentWeakValue("weak value diverges at delta = 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("delta: must lie in (0, 1]");
  // n_minus is taken as the remainder so that n_plus + n_minus == n_bar + 1.
  const double total = n_bar + 1.0;
  const double plus = 0.5 * total + 0.5 / delta;
  return {plus, total - plus};
}

WeakValues weak_value_finite_efficiency(double alpha, double theta, double eta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double sum = c + s;
  if (std::abs(sum) <= 64.0 * std::numeric_limits<double>::epsilon()) {
    throw DivergentWeakValue("perfectly dark port: cos(theta) + sin(theta) = 0");
  }
  const double n = alpha * alpha;
  return {n / 2.0 + s / sum - eta * n / 2.0 * (s * sum),
          n / 2.0 + c / sum - eta * n / 2.0 * (c * sum)};
}

PhasePrediction predict_phases(const InterferometerParams& params) {
  params.validate();
  const double phi_bar = params.phi_bar();
  const double amplified = params.delta_phi() / (2.0 * params.delta);
  PhasePrediction p{};
  p.phase_noclick = params.n_bar() * phi_bar;
  p.phase_click = p.phase_noclick + (phi_bar + amplified);
  p.differential = p.phase_click - p.phase_noclick;
  p.p_click = params.eta * params.delta * params.delta * params.n_bar();
  p.amplification_factor = phi_bar != 0.0 ? p.differential / phi_bar
                                           : std::numeric_limits<double>::quiet_NaN();
  return p;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::valid:
      return "valid";
    case Verdict::marginal:
      return "marginal";
    case Verdict::invalid:
      return "invalid";
  }
  return "invalid";
}

ValidityReport check_validity(const InterferometerParams& params) {
  ValidityReport r{};
  r.ratio_backaction = params.beta * params.beta * std::abs(params.delta_phi()) / params.delta;
  r.ratio_darkport = params.alpha * params.alpha * params.delta * params.delta;
  const double worst = std::max(r.ratio_backaction, r.ratio_darkport);
  if (worst < kValidThreshold) {
    r.verdict = Verdict::valid;
  } else if (worst < kMarginalThreshold) {
    r.verdict = Verdict::marginal;
  } else {
    r.verdict = Verdict::invalid;
  }
  return r;
}

}  // namespace wva
