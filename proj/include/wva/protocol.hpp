#pragma once

// Exact truncated-Fock-space run of the full interferometer: coherent signal
// split over two arms, cross-Kerr coupling of each arm to a coherent probe,
// recombination on the imbalanced beam splitter, a detector modeled as a beam
// splitter of transmissivity eta onto a vacuum ancilla, and projection of the
// detected mode onto |0> (no click) or |1> (click).

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wva/fock.hpp"
#include "wva/model.hpp"

namespace wva {

// Register slots. After recombination slot 0 holds the bright output and
// slot 1 the dark port; after the detector beam splitter slot 1 is the
// detected mode and slot 3 the undetected one.
inline constexpr int kArm1Mode = 0;
inline constexpr int kArm2Mode = 1;
inline constexpr int kProbeMode = 2;
inline constexpr int kAncillaMode = 3;

struct ProtocolCutoffs {
  int arm = 1;
  int probe = 1;
  int ancilla = 1;

  static ProtocolCutoffs defaults_for(const InterferometerParams& params);
};

// Branch probability below which a conditioned phase is reported as undefined.
inline constexpr double kDegenerateBranchProbability = 1e-24;

struct ProtocolResult {
  double p_click = 0;
  double p_noclick = 0;
  double p_multi = 0;  // two or more photons in the detected mode
  std::optional<double> phase_click_exact;
  std::optional<double> phase_noclick_exact;
  std::complex<double> probe_amplitude_click;  // <a_pr> in the click branch
  double truncation_deficit = 0;
  TruncationDiagnostics<double> diagnostics;
};

/// Phases are arg<a_pr> in each branch relative to arg<a_pr> of the same
/// pipeline run with alpha = 0.
ProtocolResult run_protocol(const InterferometerParams& params, const ProtocolCutoffs& cutoffs,
                            const TruncationPolicy& policy = {});
ProtocolResult run_protocol(const InterferometerParams& params);

/// Joint state after the detector beam splitter, before any projection.
FockRegisterd evolve_protocol(const InterferometerParams& params, const ProtocolCutoffs& cutoffs,
                              const TruncationPolicy& policy = {});

struct RelativeError {
  double value = 0;
  bool exact_match = false;  // analytic and exact both zero
};

RelativeError relative_error(double exact, double analytic);

struct SweepRow {
  InterferometerParams params;
  PhasePrediction analytic{};
  ValidityReport validity{};
  std::optional<ProtocolResult> exact;
  RelativeError click_error;
  RelativeError noclick_error;
  RelativeError differential_error;
  std::string error;  // non-empty if this point failed
};

/// Runs every grid point; per-point failures are recorded in the row.
/// With no cutoffs given, each point uses ProtocolCutoffs::defaults_for.
std::vector<SweepRow> sweep_validity(std::span<const InterferometerParams> grid,
                                     const std::optional<ProtocolCutoffs>& cutoffs = std::nullopt,
                                     int workers = 1);

}  // namespace wva
