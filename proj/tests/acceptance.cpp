// Acceptance checks. Prints one PASS / FAIL line per criterion; run with
// `--criterion N` for a single one. Exit status is non-zero if any check fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "wva/cli.hpp"
#include "wva/experiment.hpp"
#include "wva/fit.hpp"
#include "wva/protocol.hpp"

namespace {

using namespace wva;

constexpr double kUrad = 1e-6;

// Pinned tolerances.
constexpr double kOracleRelTol = 0.05;
constexpr double kBreakdownRatio = 10.0;
constexpr double kBreakdownDeviation = 0.5;
constexpr int kSumRuleSamples = 10000;
constexpr double kFitSigmas = 2.0;
constexpr double kConsistencySigmas = 2.0;
constexpr double kPublishedAmplification = 8.4;
constexpr double kPublishedAmplificationErr = 2.4;
constexpr double kPublishedDeltaOne = 6.7 * kUrad;
constexpr double kPublishedDeltaOneErr = 7.5 * kUrad;
constexpr int kUnitaryRegisters = 1000;
constexpr double kNormTol = 1e-12;
constexpr double kClickLo = 0.18;
constexpr double kClickHi = 0.20;
constexpr double kRow5Click = 0.012;
constexpr double kRow5RelTol = 0.10;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

Outcome oracle_agreement() {
  std::vector<InterferometerParams> grid;
  for (double a : {0.2, 0.5, 1.0})
    for (double d : {0.1, 0.2, 0.5})
      for (double b : {0.5, 1.0})
        for (double phi_bar : {1e-4, 1e-3})
          for (double e : {0.5, 1.0}) grid.push_back({a, b, d, e, 2 * phi_bar, 0.0});
  const auto rows = sweep_validity(grid, std::nullopt, workers());
  int valid = 0, bad_click = 0, bad_noclick = 0, errors = 0;
  double worst_click = 0, worst_noclick = 0, worst_diff = 0;
  for (const auto& r : rows) {
    if (r.validity.verdict != Verdict::valid) continue;
    ++valid;
    if (!r.error.empty()) {
      ++errors;
      continue;
    }
    worst_click = std::max(worst_click, r.click_error.value);
    worst_noclick = std::max(worst_noclick, r.noclick_error.value);
    worst_diff = std::max(worst_diff, r.differential_error.value);
    if (!(r.click_error.value < kOracleRelTol)) ++bad_click;
    if (!(r.noclick_error.value < kOracleRelTol)) ++bad_noclick;
  }
  const bool pass = valid > 0 && errors == 0 && bad_click == 0 && bad_noclick == 0;
  std::ostringstream os;
  os << valid << " valid of " << rows.size() << " points; click over tol " << bad_click
     << " (max rel " << fmt("%.3g", worst_click) << "), no-click over tol " << bad_noclick
     << " (max rel " << fmt("%.3g", worst_noclick) << "), differential max rel "
     << fmt("%.3g", worst_diff) << ", errors " << errors;
  return {pass, os.str()};
}

Outcome breakdown() {
  const InterferometerParams p{0.5, 1.5, 0.1, 1.0, 0.5, 0.0};
  const auto v = check_validity(p);
  const auto r = run_protocol(p);
  const double exact = *r.phase_click_exact - *r.phase_noclick_exact;
  const double analytic = predict_phases(p).differential;
  const double dev = std::abs(exact - analytic) / std::abs(analytic);
  const bool pass = v.ratio_backaction >= kBreakdownRatio && dev > kBreakdownDeviation;
  return {pass, "n_probe*dphi/delta = " + fmt("%.4g", v.ratio_backaction) + ", exact " +
                    fmt("%.4g", exact) + " rad vs analytic " + fmt("%.4g", analytic) +
                    " rad, deviation " + fmt("%.3g", dev)};
}

Outcome sum_rule() {
  // Exact over the experimental range; the full-domain rate is reported only.
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> n_bar(10.0, 100.0), delta(0.1, 1.0);
  int exact = 0;
  for (int i = 0; i < kSumRuleSamples; ++i) {
    const double n = n_bar(rng), d = delta(rng);
    const auto w = weak_value_photon_number(n, d);
    if (w.first + w.second == n + 1.0) ++exact;
  }
  std::uniform_real_distribution<double> wide_n(0.0, 100.0), unit(0.0, 1.0);
  int wide_exact = 0;
  double worst_ulps = 0;
  for (int i = 0; i < kSumRuleSamples; ++i) {
    const double n = wide_n(rng), d = std::max(unit(rng), 1e-12);
    const auto w = weak_value_photon_number(n, d);
    const double err = std::abs((w.first + w.second) - (n + 1.0));
    if (err == 0) ++wide_exact;
    worst_ulps = std::max(worst_ulps, err / (std::nextafter(w.first, INFINITY) - w.first));
  }
  return {exact == kSumRuleSamples,
          std::to_string(exact) + "/" + std::to_string(kSumRuleSamples) +
              " exact for n_bar in [10,100], delta in [0.1,1]; full domain (0,1]x[0,100]: " +
              std::to_string(wide_exact) + "/" + std::to_string(kSumRuleSamples) +
              " exact, worst " + fmt("%.2g", worst_ulps) + " ulp of n_plus"};
}

Outcome fig4_reproduction() {
  std::vector<DifferentialPoint> pts;
  double amp = 0, amp_err = 0;
  for (const auto& row : table1_rows()) {
    const auto r = run_campaign_point(row, kPublishedPhiBar, kPublishedDeltaPhi, kPublishedPhaseSigma, 0.01,
                                      kSeed, workers());
    if (row.delta < 1.0) pts.push_back({row.delta, r.estimate.differential.mean, r.estimate.differential.sem});
    if (row.delta == 0.10) {
      amp = r.estimate.differential.mean / kPublishedPhiBar;
      amp_err = r.estimate.differential.sem / kPublishedPhiBar;
    }
  }
  const auto fit = fit_differential(pts, kPublishedPhiBar);
  const double expected_amp = predict_phases(campaign_params(table1_rows()[0], kPublishedPhiBar,
                                                             kPublishedDeltaPhi)).amplification_factor;
  const bool fit_ok = std::abs(fit.parameter - kPublishedDeltaPhi) <= kFitSigmas * fit.std_error;
  const bool amp_ok = std::abs(amp - expected_amp) <= kConsistencySigmas * amp_err;
  const bool paper_ok = std::abs(expected_amp - kPublishedAmplification) <= kPublishedAmplificationErr;
  return {fit_ok && amp_ok && paper_ok,
          "fit dphi " + fmt("%.4g", fit.parameter / kUrad) + " +- " +
              fmt("%.4g", fit.std_error / kUrad) + " urad (input 8.7); delta=0.1 amplification " +
              fmt("%.4g", amp) + " +- " + fmt("%.3g", amp_err) + " vs " + fmt("%.4g", expected_amp) +
              " (published 8.4 +- 2.4)"};
}

Outcome delta_one_control() {
  const auto row = table1_rows()[4];
  // Full published trial count.
  const auto r = run_campaign_point(row, kPublishedPhiBar, kPublishedDeltaPhi, kPublishedPhaseSigma, 1.0, kSeed,
                                    workers());
  const auto& d = r.estimate.differential;
  const double unamplified = kPublishedPhiBar + kPublishedDeltaPhi / 2;
  const bool model_ok = std::abs(d.mean - unamplified) <= kConsistencySigmas * d.sem;
  const double combined = std::hypot(d.sem, kPublishedDeltaOneErr);
  const bool paper_ok = std::abs(d.mean - kPublishedDeltaOne) <= kConsistencySigmas * combined;
  return {model_ok && paper_ok,
          std::to_string(r.n_trials) + " trials: differential " + fmt("%.4g", d.mean / kUrad) +
              " +- " + fmt("%.3g", d.sem / kUrad) + " urad vs unamplified " +
              fmt("%.4g", unamplified / kUrad) + " and published 6.7 +- 7.5"};
}

FockRegisterd random_register(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_modes(2, 3), cut(2, 5);
  std::vector<ModeSpec> modes(n_modes(rng));
  int min_cut = 99;
  for (auto& m : modes) {
    m.cutoff = cut(rng);
    min_cut = std::min(min_cut, m.cutoff);
  }
  auto reg = FockRegisterd::vacuum(modes);
  std::normal_distribution<double> g;
  FockRegisterd::Vector amps = FockRegisterd::Vector::Zero(reg.size());
  for (Eigen::Index i = 0; i < reg.size(); ++i) {
    int total = 0;
    for (int m = 0; m < reg.num_modes(); ++m) total += reg.occupation(i, m);
    if (total < min_cut) amps(i) = {g(rng), g(rng)};
  }
  return FockRegisterd(modes, amps / amps.norm());
}

// Norm^2 per value of n_a + n_b.
std::vector<double> pair_number_weights(const FockRegisterd& s, int a, int b) {
  std::vector<double> w(s.cutoff(a) + s.cutoff(b) - 1, 0.0);
  for (Eigen::Index i = 0; i < s.size(); ++i) w[s.occupation(i, a) + s.occupation(i, b)] += std::norm(s.amplitudes()(i));
  return w;
}

Outcome unitarity() {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_int_distribution<int> steps(2, 8), coin(0, 1);
  int norm_fail = 0, number_fail = 0;
  double worst_norm = 0;
  for (int k = 0; k < kUnitaryRegisters; ++k) {
    auto s = random_register(rng);
    const int n = s.num_modes();
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int step = steps(rng); step > 0; --step) {
      const int a = pick(rng);
      int b = pick(rng);
      while (b == a) b = pick(rng);
      if (coin(rng)) {
        const auto before = pair_number_weights(s, a, b);
        const auto next = apply_beam_splitter(s, a, b, angle(rng));
        const auto after = pair_number_weights(next, a, b);
        for (std::size_t t = 0; t < before.size(); ++t) {
          const bool empty_stays_empty = before[t] != 0.0 || after[t] == 0.0;
          if (!empty_stays_empty || std::abs(after[t] - before[t]) > kNormTol) {
            ++number_fail;
            break;
          }
        }
        s = next;
      } else {
        s = apply_cross_kerr(s, a, b, angle(rng));
      }
      const double err = std::abs(s.squared_norm() - 1.0);
      worst_norm = std::max(worst_norm, err);
      if (err > kNormTol) ++norm_fail;
    }
  }
  return {norm_fail == 0 && number_fail == 0,
          std::to_string(kUnitaryRegisters) + " registers: norm failures " + std::to_string(norm_fail) +
              " (worst " + fmt("%.2g", worst_norm) + "), number-conservation failures " +
              std::to_string(number_fail)};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "wva_acceptance_determinism";
  fs::create_directories(dir);
  const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  std::ostringstream sink;
  const int ra = run_cli({"fig4", "--seed", std::to_string(kSeed), "--workers", "1", "--out", a}, sink, sink);
  const int rb = run_cli({"fig4", "--seed", std::to_string(kSeed), "--workers", "4", "--out", b}, sink, sink);
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string csv_a = slurp(a), csv_b = slurp(b);
  const bool same = !csv_a.empty() && csv_a == csv_b && slurp(a + ".fit.json") == slurp(b + ".fit.json");
  fs::remove_all(dir);
  return {same && ra == rb, "exit codes " + std::to_string(ra) + "/" + std::to_string(rb) + ", " +
                                std::to_string(csv_a.size()) + " bytes, " +
                                (same ? "byte-identical" : "DIFFERENT")};
}

Outcome design_click_probability() {
  const auto rows = table1_rows();
  std::ostringstream os;
  bool pass = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double p = predict_phases(campaign_params(rows[i], kPublishedPhiBar, kPublishedDeltaPhi)).p_click;
    const bool ok = i < 4 ? (p >= kClickLo && p <= kClickHi)
                          : std::abs(p - kRow5Click) <= kRow5RelTol * kRow5Click;
    pass = pass && ok;
    os << "row " << rows[i].point << " " << fmt("%.4g", p) << (ok ? "" : " (out)") << "; ";
  }
  os << "rows 1-4 need [0.18, 0.20], row 5 needs 0.012 +- 10%";
  return {pass, os.str()};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "oracle-analytic agreement", oracle_agreement},
      {2, "breakdown demonstration", breakdown},
      {3, "weak-value sum rule", sum_rule},
      {4, "fig4 reproduction at 1e-2 scale", fig4_reproduction},
      {5, "delta=1 control at full trial count", delta_one_control},
      {6, "unitarity suite", unitarity},
      {7, "fig4 determinism across workers", determinism},
      {8, "design click probabilities", design_click_probability},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
      return 64;
    }
  }
  int failures = 0;
  bool ran = false;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    ran = true;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %s: %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  if (!ran) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 64;
  }
  return failures == 0 ? 0 : 1;
}
