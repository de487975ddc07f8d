#pragma once

// Closed-form weak-value predictions for the post-selected cross-Kerr
// interferometer: weak values of photon number, click / no-click probe phases,
// post-selection probability and validity diagnostics.

#include <string_view>
#include <utility>

namespace wva {

/// Scalar physics knobs of one interferometer configuration.
///
/// Arm 1 couples to the probe with phase phi_plus per photon pair, arm 2 with
/// phi_minus. delta is the overlap between pre- and post-selected single-photon
/// polarization states; the dark-port beam splitter angle follows from it.
struct InterferometerParams {
  double alpha = 0.0;  // signal coherent amplitude, n_bar = alpha^2
  double beta = 0.0;   // probe coherent amplitude
  double delta = 1.0;  // post-selection overlap, (0, 1]
  double eta = 1.0;    // detection efficiency, [0, 1]
  double phi_plus = 0.0;
  double phi_minus = 0.0;

  /// Throws InvalidInput naming the first offending field.
  void validate() const;

  double n_bar() const { return alpha * alpha; }
  double phi_bar() const { return 0.5 * (phi_plus + phi_minus); }
  double delta_phi() const { return phi_plus - phi_minus; }

  /// Beam-splitter angle with tan(theta) = -(1 + delta) / (1 - delta).
  ///
  /// The post-selected single-photon state is proportional to
  /// (1 + delta)|1> - (1 - delta)|2>, so the dark-port amplitude of a coherent
  /// input is -alpha delta / sqrt(1 + delta^2).
  double theta() const;
};

struct WeakValues {
  double first;
  double second;
};

/// <n_plus>, <n_minus> = (n_bar + 1 +- 1/delta) / 2.
WeakValues weak_value_photon_number(double n_bar, double delta);

/// Weak values of arms 1 and 2 with a detector of efficiency eta on the dark
/// port, for beam-splitter angle theta.
WeakValues weak_value_finite_efficiency(double alpha, double theta, double eta);

/// Overlap delta implied by a beam-splitter angle (inverse of
/// InterferometerParams::theta on (-pi/2, -pi/4)).
double delta_from_theta(double theta);

struct PhasePrediction {
  double phase_click;
  double phase_noclick;
  double differential;  // phase_click - phase_noclick
  double p_click;       // eta delta^2 n_bar
  double amplification_factor;  // differential / phi_bar
};

PhasePrediction predict_phases(const InterferometerParams& params);

enum class Verdict { valid, marginal, invalid };

std::string_view to_string(Verdict v);

struct ValidityReport {
  double ratio_backaction;  // beta^2 |delta_phi| / delta
  double ratio_darkport;    // alpha^2 delta^2
  Verdict verdict;
};

inline constexpr double kValidThreshold = 0.1;
inline constexpr double kMarginalThreshold = 0.3;

ValidityReport check_validity(const InterferometerParams& params);

}  // namespace wva
