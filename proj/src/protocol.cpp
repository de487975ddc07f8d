#include "wva/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "wva/errors.hpp"

namespace wva {

ProtocolCutoffs ProtocolCutoffs::defaults_for(const InterferometerParams& params) {
  // Each arm starts with alpha/sqrt(2) but the bright output can carry the
  // full alpha, so size both arms (and the ancilla) for alpha.
  const int arm = default_cutoff(params.alpha);
  return {arm, default_cutoff(params.beta), arm};
}

FockRegisterd evolve_protocol(const InterferometerParams& params, const ProtocolCutoffs& cutoffs,
                              const TruncationPolicy& policy) {
  params.validate();
  const std::complex<double> arm_amp(params.alpha / std::sqrt(2.0), 0.0);
  auto arm1 = make_coherent(arm_amp, cutoffs.arm).state;
  auto arm2 = make_coherent(arm_amp, cutoffs.arm).state;
  auto probe = make_coherent(std::complex<double>(params.beta, 0.0), cutoffs.probe).state;
  auto ancilla = FockRegisterd::vacuum({ModeSpec{cutoffs.ancilla}});

  FockRegisterd psi = tensor(tensor(tensor(arm1, arm2), probe), ancilla);
  psi = apply_cross_kerr(psi, kArm1Mode, kProbeMode, params.phi_plus);
  psi = apply_cross_kerr(psi, kArm2Mode, kProbeMode, params.phi_minus);
  psi = apply_beam_splitter(psi, kArm1Mode, kArm2Mode, params.theta(), policy);
  // Dark port keeps sqrt(eta) of its field, the ancilla slot takes the rest.
  return apply_rotation(psi, kArm2Mode, kAncillaMode, std::sqrt(params.eta),
                        std::sqrt(1.0 - params.eta), policy);
}

namespace {

constexpr int kDetectedMode = kArm2Mode;
constexpr int kProbeAfterProjection = 1;

std::optional<double> relative_phase(const FockRegisterd& branch, double probability,
                                     std::complex<double> reference) {
  if (probability < kDegenerateBranchProbability) return std::nullopt;
  const auto mf = mean_field(branch, kProbeAfterProjection);
  return std::arg(mf * std::conj(reference));
}

}  // namespace

ProtocolResult run_protocol(const InterferometerParams& params, const ProtocolCutoffs& cutoffs,
                            const TruncationPolicy& policy) {
  const FockRegisterd psi = evolve_protocol(params, cutoffs, policy);

  InterferometerParams dark = params;
  dark.alpha = 0.0;
  const std::complex<double> reference =
      mean_field(evolve_protocol(dark, cutoffs, policy), kProbeMode);

  ProtocolResult r;
  r.diagnostics = psi.diagnostics();
  const auto weights = photon_number_weights(psi, kDetectedMode);
  double total = 0.0;
  for (double w : weights) total += w;
  r.truncation_deficit = 1.0 - total;
  r.p_noclick = weights[0];
  r.p_click = weights.size() > 1 ? weights[1] : 0.0;
  r.p_multi = 0.0;
  for (std::size_t n = 2; n < weights.size(); ++n) r.p_multi += weights[n];

  const auto noclick = project_fock(psi, kDetectedMode, 0);
  r.phase_noclick_exact = relative_phase(noclick.state, noclick.probability, reference);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.probe_amplitude_click = {nan, nan};
  if (weights.size() > 1) {
    const auto click = project_fock(psi, kDetectedMode, 1);
    r.phase_click_exact = relative_phase(click.state, click.probability, reference);
    if (r.phase_click_exact) r.probe_amplitude_click = mean_field(click.state, kProbeAfterProjection);
  }
  return r;
}

ProtocolResult run_protocol(const InterferometerParams& params) {
  return run_protocol(params, ProtocolCutoffs::defaults_for(params));
}

RelativeError relative_error(double exact, double analytic) {
  if (analytic == 0.0) {
    if (std::abs(exact) <= 1e-15) return {0.0, true};
    return {std::numeric_limits<double>::infinity(), false};
  }
  return {std::abs(exact - analytic) / std::abs(analytic), false};
}

namespace {

SweepRow evaluate_point(const InterferometerParams& params,
                        const std::optional<ProtocolCutoffs>& cutoffs) {
  SweepRow row;
  row.params = params;
  try {
    row.analytic = predict_phases(params);
    row.validity = check_validity(params);
    const ProtocolResult exact =
        run_protocol(params, cutoffs ? *cutoffs : ProtocolCutoffs::defaults_for(params));
    row.exact = exact;
    if (!exact.phase_click_exact || !exact.phase_noclick_exact) {
      row.error = "degenerate branch: conditioned phase undefined";
      return row;
    }
    row.click_error = relative_error(*exact.phase_click_exact, row.analytic.phase_click);
    row.noclick_error = relative_error(*exact.phase_noclick_exact, row.analytic.phase_noclick);
    row.differential_error = relative_error(
        *exact.phase_click_exact - *exact.phase_noclick_exact, row.analytic.differential);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

std::vector<SweepRow> sweep_validity(std::span<const InterferometerParams> grid,
                                     const std::optional<ProtocolCutoffs>& cutoffs, int workers) {
  if (grid.empty()) throw InvalidInput("sweep grid is empty");
  std::vector<SweepRow> rows(grid.size());
  const int n_workers = std::clamp<int>(workers, 1, static_cast<int>(grid.size()));
  if (n_workers == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) rows[i] = evaluate_point(grid[i], cutoffs);
    return rows;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < grid.size(); i += n_workers) {
        rows[i] = evaluate_point(grid[i], cutoffs);
      }
    });
  }
  for (auto& t : pool) t.join();
  return rows;
}

}  // namespace wva
