#pragma once

// Monte Carlo model of the measurement campaign. Each trial draws a signal
// click (probability p_s), an independent background click (probability b)
// and a Gaussian phase-noise sample; the true probe phase is the analytic click
// phase only for signal clicks.

#include <cstdint>
#include <optional>
#include <vector>

#include "wva/model.hpp"

namespace wva {

struct NoiseModel {
  double phase_sigma = 0.100;           // rad per shot
  double background_click_rate = 0.06;  // false tags per shot

  void validate() const;
};

struct TrialBatch {
  std::int64_t n_trials = 0;
  std::vector<std::uint8_t> clicks;  // recorded click (signal or background)
  std::vector<double> phases;        // measured phase, rad
  std::uint64_t seed = 0;
};

struct SimulationOptions {
  int workers = 1;
  // Replaces eta delta^2 n_bar as the signal click probability.
  std::optional<double> signal_click_probability;
};

/// Trials are generated in fixed blocks of this many; block boundaries, not
/// worker count, fix the reduction order.
inline constexpr std::int64_t kTrialBlock = std::int64_t{1} << 16;

TrialBatch simulate_trials(const InterferometerParams& params, const NoiseModel& noise,
                           std::int64_t n_trials, std::uint64_t seed,
                           const SimulationOptions& options = {});

struct MeanWithError {
  double mean = 0;
  double sem = 0;  // sample std / sqrt(count)
};

struct EstimatorResult {
  MeanWithError phi_click;
  MeanWithError phi_noclick;
  MeanWithError differential;  // sems combined in quadrature
  double click_fraction = 0;
  std::int64_t n_click = 0;
  std::int64_t n_noclick = 0;
};

/// Throws InsufficientData unless both groups hold at least two trials.
EstimatorResult estimate_phases(const TrialBatch& batch);

/// Same numbers as estimate_phases(simulate_trials(...)) without storing the
/// trials.
EstimatorResult simulate_and_estimate(const InterferometerParams& params, const NoiseModel& noise,
                                      std::int64_t n_trials, std::uint64_t seed,
                                      const SimulationOptions& options = {});

/// Click-group mean expected with background dilution
/// f_b = b (1 - p_s) / (p_s + b (1 - p_s)).
double expected_click_mean(double phase_click, double phase_noclick, double p_signal,
                           double background);

struct SchemeConfig {
  InterferometerParams params;
  NoiseModel noise;
  std::optional<double> signal_click_probability;
};

inline constexpr double kSnrCap = 1e12;

struct SnrReport {
  double snr_wva = 0;
  double snr_direct = 0;
  double ratio = 0;  // snr_wva / snr_direct
  EstimatorResult wva;
  EstimatorResult direct;
};

/// SNR = |differential| / sem for each scheme over the same trial budget,
/// capped at kSnrCap when the sem vanishes.
SnrReport snr_compare(const SchemeConfig& wva, const SchemeConfig& direct, std::int64_t n_trials,
                      std::uint64_t seed, int workers = 1);

/// One row of the published parameter table.
struct CampaignRow {
  int point = 0;
  double n_bar = 0;
  double delta = 1;
  double eta = 0;
  std::int64_t n_total = 0;
  double measured_click_fraction = 0;
  double background = 0;
  std::optional<double> signal_click_probability;
};

inline constexpr double kPublishedPhiBar = 5.59e-6;
inline constexpr double kPublishedDeltaPhi = 8.7e-6;
inline constexpr double kPublishedPhaseSigma = 0.100;

/// Rows 1-5 of the published parameters. Row 5's eta delta^2 n_bar exceeds 1,
/// so it carries the stated design click probability of 0.19.
std::vector<CampaignRow> table1_rows();

InterferometerParams campaign_params(const CampaignRow& row, double phi_bar, double delta_phi);

std::int64_t scaled_trials(std::int64_t n_total, double scale);

struct CampaignPointResult {
  CampaignRow row;
  InterferometerParams params;
  PhasePrediction prediction{};
  std::int64_t n_trials = 0;
  EstimatorResult estimate;
};

/// Simulates one table row on the child stream derive_seed(seed, row.point).
CampaignPointResult run_campaign_point(const CampaignRow& row, double phi_bar, double delta_phi,
                                       double phase_sigma, double trials_scale,
                                       std::uint64_t seed, int workers = 1);

}  // namespace wva
