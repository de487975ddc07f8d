#include "wva/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "wva/errors.hpp"
#include "wva/rng.hpp"

namespace wva {

void NoiseModel::validate() const {
  if (!(std::isfinite(phase_sigma) && phase_sigma >= 0.0)) {
    throw InvalidInput("phase_sigma: must be finite and >= 0");
  }
  if (!(background_click_rate >= 0.0 && background_click_rate < 1.0)) {
    throw InvalidInput("background_click_rate: must lie in [0, 1)");
  }
}

namespace {

struct TrialModel {
  double p_signal;
  double background;
  double phase_click;
  double phase_noclick;
  double sigma;
};

TrialModel make_model(const InterferometerParams& params, const NoiseModel& noise,
                      std::int64_t n_trials, const SimulationOptions& options) {
  params.validate();
  noise.validate();
  if (n_trials < 1) throw InvalidInput("n_trials: must be >= 1");
  const PhasePrediction pred = predict_phases(params);
  const double p_signal = options.signal_click_probability.value_or(pred.p_click);
  if (!(p_signal >= 0.0 && p_signal <= 1.0)) {
    throw InvalidRegime("signal click probability " + std::to_string(p_signal) +
                        " outside [0, 1]");
  }
  if (p_signal + noise.background_click_rate >= 1.0) {
    throw InvalidRegime("signal click probability " + std::to_string(p_signal) +
                        " plus background " + std::to_string(noise.background_click_rate) +
                        " reaches 1");
  }
  return {p_signal, noise.background_click_rate, pred.phase_click, pred.phase_noclick,
          noise.phase_sigma};
}

struct Trial {
  bool click;
  double phase;
};

Trial draw_trial(const TrialModel& m, std::uint64_t seed, std::int64_t index) {
  CounterRng rng(seed, static_cast<std::uint64_t>(index));
  const bool signal = rng.uniform() < m.p_signal;
  const bool background = rng.uniform() < m.background;
  const double truth = signal ? m.phase_click : m.phase_noclick;
  return {signal || background, truth + m.sigma * rng.normal()};
}

// Welford accumulator with Chan's pairwise merge; exact for constant data.
struct GroupStats {
  std::int64_t count = 0;
  double mean = 0;
  double m2 = 0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / double(count);
    m2 += d * (x - mean);
  }

  void merge(const GroupStats& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const std::int64_t n = count + o.count;
    const double d = o.mean - mean;
    mean += d * (double(o.count) / double(n));
    m2 += o.m2 + d * d * (double(count) * double(o.count) / double(n));
    count = n;
  }

  MeanWithError summary() const {
    return {mean, std::sqrt(std::max(m2, 0.0) / double(count - 1) / double(count))};
  }
};

struct BlockStats {
  GroupStats click;
  GroupStats noclick;

  void merge(const BlockStats& o) {
    click.merge(o.click);
    noclick.merge(o.noclick);
  }
};

std::int64_t block_count(std::int64_t n_trials) { return (n_trials + kTrialBlock - 1) / kTrialBlock; }

// Runs fn(block) for every block, spreading blocks over workers.
template <typename Fn>
void for_each_block(std::int64_t n_blocks, int workers, Fn&& fn) {
  const int n_workers = static_cast<int>(std::clamp<std::int64_t>(workers, 1, n_blocks));
  if (n_workers == 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::int64_t b = w; b < n_blocks; b += n_workers) fn(b);
    });
  }
  for (auto& t : pool) t.join();
}

EstimatorResult finish(const BlockStats& total) {
  if (total.click.count < 2 || total.noclick.count < 2) {
    throw InsufficientData("need at least two click and two no-click trials (got " +
                           std::to_string(total.click.count) + " click, " +
                           std::to_string(total.noclick.count) + " no-click)");
  }
  EstimatorResult r;
  r.phi_click = total.click.summary();
  r.phi_noclick = total.noclick.summary();
  r.differential = {r.phi_click.mean - r.phi_noclick.mean,
                    std::hypot(r.phi_click.sem, r.phi_noclick.sem)};
  r.n_click = total.click.count;
  r.n_noclick = total.noclick.count;
  r.click_fraction = double(r.n_click) / double(r.n_click + r.n_noclick);
  return r;
}

}  // namespace

TrialBatch simulate_trials(const InterferometerParams& params, const NoiseModel& noise,
                           std::int64_t n_trials, std::uint64_t seed,
                           const SimulationOptions& options) {
  const TrialModel model = make_model(params, noise, n_trials, options);
  TrialBatch batch;
  batch.n_trials = n_trials;
  batch.seed = seed;
  batch.clicks.resize(n_trials);
  batch.phases.resize(n_trials);
  for_each_block(block_count(n_trials), options.workers, [&](std::int64_t b) {
    const std::int64_t end = std::min(n_trials, (b + 1) * kTrialBlock);
    for (std::int64_t i = b * kTrialBlock; i < end; ++i) {
      const Trial t = draw_trial(model, seed, i);
      batch.clicks[i] = t.click ? 1 : 0;
      batch.phases[i] = t.phase;
    }
  });
  return batch;
}

EstimatorResult estimate_phases(const TrialBatch& batch) {
  if (batch.clicks.size() != batch.phases.size() ||
      static_cast<std::int64_t>(batch.phases.size()) != batch.n_trials) {
    throw InvalidInput("trial batch arrays disagree with n_trials");
  }
  BlockStats total;
  for (std::int64_t b = 0; b < block_count(batch.n_trials); ++b) {
    BlockStats block;
    const std::int64_t end = std::min(batch.n_trials, (b + 1) * kTrialBlock);
    for (std::int64_t i = b * kTrialBlock; i < end; ++i) {
      (batch.clicks[i] ? block.click : block.noclick).add(batch.phases[i]);
    }
    total.merge(block);
  }
  return finish(total);
}

EstimatorResult simulate_and_estimate(const InterferometerParams& params, const NoiseModel& noise,
                                      std::int64_t n_trials, std::uint64_t seed,
                                      const SimulationOptions& options) {
  const TrialModel model = make_model(params, noise, n_trials, options);
  std::vector<BlockStats> blocks(block_count(n_trials));
  for_each_block(static_cast<std::int64_t>(blocks.size()), options.workers, [&](std::int64_t b) {
    BlockStats block;
    const std::int64_t end = std::min(n_trials, (b + 1) * kTrialBlock);
    for (std::int64_t i = b * kTrialBlock; i < end; ++i) {
      const Trial t = draw_trial(model, seed, i);
      (t.click ? block.click : block.noclick).add(t.phase);
    }
    blocks[b] = block;
  });
  BlockStats total;
  for (const auto& block : blocks) total.merge(block);
  return finish(total);
}

double expected_click_mean(double phase_click, double phase_noclick, double p_signal,
                           double background) {
  const double false_tags = background * (1.0 - p_signal);
  const double f_b = false_tags / (p_signal + false_tags);
  return (1.0 - f_b) * phase_click + f_b * phase_noclick;
}

namespace {

double capped_snr(const MeanWithError& m) {
  if (m.sem == 0.0) return m.mean == 0.0 ? 0.0 : kSnrCap;
  return std::min(std::abs(m.mean) / m.sem, kSnrCap);
}

}  // namespace

SnrReport snr_compare(const SchemeConfig& wva, const SchemeConfig& direct, std::int64_t n_trials,
                      std::uint64_t seed, int workers) {
  SnrReport r;
  r.wva = simulate_and_estimate(wva.params, wva.noise, n_trials, derive_seed(seed, 0),
                                {workers, wva.signal_click_probability});
  r.direct = simulate_and_estimate(direct.params, direct.noise, n_trials, derive_seed(seed, 1),
                                   {workers, direct.signal_click_probability});
  r.snr_wva = capped_snr(r.wva.differential);
  r.snr_direct = capped_snr(r.direct.differential);
  r.ratio = r.snr_direct > 0.0 ? r.snr_wva / r.snr_direct : kSnrCap;
  return r;
}

std::vector<CampaignRow> table1_rows() {
  return {
      {1, 95, 0.10, 0.2, 42'111'000, 0.31, 0.06, std::nullopt},
      {2, 45, 0.14, 0.2, 104'111'000, 0.23, 0.06, std::nullopt},
      {3, 20, 0.22, 0.2, 102'380'000, 0.25, 0.06, std::nullopt},
      {4, 10, 0.32, 0.2, 204'112'000, 0.23, 0.06, std::nullopt},
      {5, 40, 1.00, 0.03, 374'443'000, 0.20, 0.015, 0.19},
  };
}

InterferometerParams campaign_params(const CampaignRow& row, double phi_bar, double delta_phi) {
  InterferometerParams p;
  p.alpha = std::sqrt(row.n_bar);
  p.beta = 0.0;
  p.delta = row.delta;
  p.eta = row.eta;
  p.phi_plus = phi_bar + delta_phi / 2.0;
  p.phi_minus = phi_bar - delta_phi / 2.0;
  return p;
}

std::int64_t scaled_trials(std::int64_t n_total, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidInput("trials_scale: must be > 0");
  return std::max<std::int64_t>(std::llround(double(n_total) * scale), 2);
}

CampaignPointResult run_campaign_point(const CampaignRow& row, double phi_bar, double delta_phi,
                                       double phase_sigma, double trials_scale,
                                       std::uint64_t seed, int workers) {
  CampaignPointResult r;
  r.row = row;
  r.params = campaign_params(row, phi_bar, delta_phi);
  r.prediction = predict_phases(r.params);
  r.n_trials = scaled_trials(row.n_total, trials_scale);
  const NoiseModel noise{phase_sigma, row.background};
  r.estimate = simulate_and_estimate(r.params, noise, r.n_trials,
                                     derive_seed(seed, static_cast<std::uint64_t>(row.point)),
                                     {workers, row.signal_click_probability});
  return r;
}

}  // namespace wva
