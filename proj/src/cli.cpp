#include "wva/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "wva/errors.hpp"
#include "wva/experiment.hpp"
#include "wva/fit.hpp"
#include "wva/protocol.hpp"

namespace wva {
namespace {

using nlohmann::json;

constexpr double kMicro = 1e-6;
constexpr double kDefaultTrialsScale = 0.01;
constexpr double kOracleTolerance = 0.05;
constexpr double kFig3Sigmas = 3.0;
constexpr double kFig4Sigmas = 2.0;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string brief(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double urad(double rad) { return rad * 1e6; }

// Typed access to one JSON object; every error names the offending field.
class Fields {
 public:
  Fields(const json& j, std::string path, std::vector<std::string> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError((path_.empty() ? "config" : path_) + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
        throw ConfigError(join(it.key()) + ": unknown field");
      }
    }
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }
  const json& at(const std::string& key) const { return j_.at(key); }

  std::optional<double> maybe_number(const std::string& key) const {
    if (!has(key) || at(key).is_null()) return std::nullopt;
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(join(key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(join(key) + ": must be finite");
    return d;
  }

  double number(const std::string& key, double fallback) const {
    return maybe_number(key).value_or(fallback);
  }

  double required_number(const std::string& key) const {
    auto v = maybe_number(key);
    if (!v) throw ConfigError(join(key) + ": required field missing");
    return *v;
  }

  std::optional<std::uint64_t> maybe_u64(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const json& v = at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    throw ConfigError(join(key) + ": expected a non-negative integer");
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) throw ConfigError(join(key) + ": expected true or false");
    return at(key).get<bool>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(join(key) + ": expected a non-empty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError(join(key) + "[" + std::to_string(i) + "]: expected a number");
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  double trials_scale = kDefaultTrialsScale;
  bool trials_scale_given = false;
  int workers = 1;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
}

std::uint64_t resolve_seed(const CommonOptions& opts, const Fields& root) {
  if (opts.seed_given) return opts.seed;
  if (auto s = root.maybe_u64("seed")) return *s;
  throw ConfigError("seed: required for Monte Carlo commands (pass --seed)");
}

double resolve_scale(const CommonOptions& opts, const Fields& root) {
  const double s = opts.trials_scale_given ? opts.trials_scale
                                           : root.number("trials_scale", kDefaultTrialsScale);
  if (!(s > 0.0)) throw ConfigError("trials_scale: must be > 0");
  return s;
}

void write_header(std::ostream& os, std::string_view command, std::optional<std::uint64_t> seed,
                  const json& config) {
  os << "# wva-sim " << kVersion << "\n";
  os << "# command: " << command << "\n";
  if (seed) os << "# seed: " << *seed << "\n";
  os << "# config: " << config.dump() << "\n";
}

int emit(const CommonOptions& opts, const std::string& text, std::ostream& out, std::ostream& err) {
  if (opts.out_path.empty()) {
    out << text;
    return kExitOk;
  }
  std::ofstream f(opts.out_path, std::ios::binary);
  if (!f) {
    err << "error: cannot write '" << opts.out_path << "'\n";
    return kExitConfig;
  }
  f << text;
  return kExitOk;
}

// ---------------------------------------------------------------- oracle

struct OracleConfig {
  std::vector<InterferometerParams> points;
  double tolerance = kOracleTolerance;
  std::optional<ProtocolCutoffs> cutoffs;
  json echo;
};

const std::vector<std::string> kParamFields = {"alpha", "beta",          "delta",
                                               "eta",   "phi_plus_urad", "phi_minus_urad"};

void check_oracle_point(const InterferometerParams& p, const std::string& where,
                        const std::optional<ProtocolCutoffs>& cutoffs) {
  try {
    p.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(where + "." + e.what());
  }
  const ProtocolCutoffs c = cutoffs ? *cutoffs : ProtocolCutoffs::defaults_for(p);
  const double amplitudes = double(c.arm) * c.arm * c.probe * c.ancilla;
  if (amplitudes > double(kDefaultMaxAmplitudes)) {
    throw ConfigError(where + ": register of " + full(amplitudes) +
                      " amplitudes exceeds the oracle budget");
  }
}

OracleConfig parse_oracle(const json& j) {
  Fields root(j, "", {"grid", "points", "tolerance", "cutoffs", "seed", "trials_scale"});
  OracleConfig cfg;
  cfg.tolerance = root.number("tolerance", kOracleTolerance);
  if (!(cfg.tolerance > 0.0)) throw ConfigError("tolerance: must be > 0");

  if (root.has("cutoffs")) {
    Fields c(root.at("cutoffs"), "cutoffs", {"arm", "probe", "ancilla"});
    ProtocolCutoffs pc;
    pc.arm = static_cast<int>(c.required_number("arm"));
    pc.probe = static_cast<int>(c.required_number("probe"));
    pc.ancilla = static_cast<int>(c.required_number("ancilla"));
    if (pc.arm < 1 || pc.probe < 1 || pc.ancilla < 1) {
      throw ConfigError("cutoffs: every cutoff must be >= 1");
    }
    cfg.cutoffs = pc;
  }

  const bool use_default_grid = !root.has("grid") && !root.has("points");
  if (root.has("grid") || use_default_grid) {
    const json empty = json::object();
    Fields g(use_default_grid ? empty : root.at("grid"), "grid", kParamFields);
    const auto alphas = g.numbers("alpha", {0.2, 0.5, 1.0});
    const auto betas = g.numbers("beta", {0.5, 1.0});
    const auto deltas = g.numbers("delta", {0.1, 0.2, 0.5});
    const auto etas = g.numbers("eta", {0.5, 1.0});
    const auto phi_plus = g.numbers("phi_plus_urad", {200.0, 2000.0});
    const auto phi_minus = g.numbers("phi_minus_urad", {0.0});
    for (double a : alphas)
      for (double d : deltas)
        for (double b : betas)
          for (double e : etas)
            for (double pp : phi_plus)
              for (double pm : phi_minus) {
                InterferometerParams p{a, b, d, e, pp * kMicro, pm * kMicro};
                check_oracle_point(p, "grid", cfg.cutoffs);
                cfg.points.push_back(p);
              }
  }
  if (root.has("points")) {
    const json& pts = root.at("points");
    if (!pts.is_array() || pts.empty()) throw ConfigError("points: expected a non-empty array");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string where = "points[" + std::to_string(i) + "]";
      Fields f(pts[i], where, kParamFields);
      InterferometerParams p;
      p.alpha = f.required_number("alpha");
      p.beta = f.required_number("beta");
      p.delta = f.required_number("delta");
      p.eta = f.required_number("eta");
      p.phi_plus = f.required_number("phi_plus_urad") * kMicro;
      p.phi_minus = f.number("phi_minus_urad", 0.0) * kMicro;
      check_oracle_point(p, where, cfg.cutoffs);
      cfg.points.push_back(p);
    }
  }

  json pts = json::array();
  for (const auto& p : cfg.points) {
    pts.push_back({{"alpha", p.alpha},
                   {"beta", p.beta},
                   {"delta", p.delta},
                   {"eta", p.eta},
                   {"phi_plus_urad", urad(p.phi_plus)},
                   {"phi_minus_urad", urad(p.phi_minus)}});
  }
  cfg.echo = {{"points", pts}, {"tolerance", cfg.tolerance}};
  if (cfg.cutoffs) {
    cfg.echo["cutoffs"] = {
        {"arm", cfg.cutoffs->arm}, {"probe", cfg.cutoffs->probe}, {"ancilla", cfg.cutoffs->ancilla}};
  }
  return cfg;
}

int cmd_oracle_validate(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  const OracleConfig cfg = parse_oracle(load_config(opts.config_path));
  const auto rows = sweep_validity(cfg.points, cfg.cutoffs, opts.workers);

  std::ostringstream os;
  write_header(os, "oracle-validate", std::nullopt, cfg.echo);
  os << "# units: phases in microradians; rel_error is |diff_exact - diff_analytic| / "
        "|diff_analytic|\n";
  os << "alpha,beta,delta,eta,phi_plus,phi_minus,p_click_exact,p_click_analytic,diff_exact,"
        "diff_analytic,rel_error,verdict\n";
  int valid = 0;
  int failures = 0;
  double worst = 0.0;
  std::ostringstream notes;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    const auto& p = r.params;
    const bool ok = r.error.empty();
    const bool is_valid = r.validity.verdict == Verdict::valid;
    os << full(p.alpha) << ',' << full(p.beta) << ',' << full(p.delta) << ',' << full(p.eta) << ','
       << full(urad(p.phi_plus)) << ',' << full(urad(p.phi_minus)) << ',';
    os << (r.exact ? full(r.exact->p_click) : "nan") << ',' << full(r.analytic.p_click) << ',';
    if (ok) {
      os << full(urad(*r.exact->phase_click_exact - *r.exact->phase_noclick_exact));
    } else {
      os << "nan";
    }
    os << ',' << full(urad(r.analytic.differential)) << ',';
    if (!ok) {
      os << "nan";
    } else if (r.differential_error.exact_match) {
      os << "exact";
    } else {
      os << full(r.differential_error.value);
    }
    os << ',' << to_string(r.validity.verdict) << '\n';

    if (!ok) notes << "# row " << i << " error: " << r.error << "\n";
    if (is_valid) {
      ++valid;
      if (!ok || !(r.differential_error.value < cfg.tolerance)) ++failures;
      if (ok) worst = std::max(worst, r.differential_error.value);
    }
  }
  os << notes.str();
  os << "# summary: rows=" << rows.size() << " valid=" << valid << " failures=" << failures
     << " max_valid_rel_error=" << brief(worst) << " tolerance=" << brief(cfg.tolerance) << "\n";

  if (int rc = emit(opts, os.str(), out, err); rc != kExitOk) return rc;
  if (failures > 0) {
    err << "oracle-validate: " << failures << " valid row(s) exceed tolerance\n";
    return kExitTolerance;
  }
  return kExitOk;
}

// -------------------------------------------------------------- campaign

struct CampaignConfig {
  std::uint64_t seed = 0;
  double trials_scale = kDefaultTrialsScale;
  double phi_bar = kPublishedPhiBar;
  double delta_phi = kPublishedDeltaPhi;
  double phase_sigma = kPublishedPhaseSigma;
  std::optional<double> background;
  std::vector<CampaignRow> rows;
  bool default_rows = true;
  bool include_delta_one = false;
  json echo;
};

CampaignConfig parse_campaign(const json& j, const CommonOptions& opts, bool fig4) {
  std::vector<std::string> allowed = {"seed",         "trials_scale", "phi_bar_urad",
                                      "delta_phi_urad", "noise",      "rows"};
  if (fig4) allowed.push_back("include_delta_one");
  Fields root(j, "", allowed);
  CampaignConfig cfg;
  cfg.seed = resolve_seed(opts, root);
  cfg.trials_scale = resolve_scale(opts, root);
  cfg.phi_bar = root.number("phi_bar_urad", urad(kPublishedPhiBar)) * kMicro;
  cfg.delta_phi = root.number("delta_phi_urad", urad(kPublishedDeltaPhi)) * kMicro;
  cfg.include_delta_one = root.boolean("include_delta_one", false);
  if (root.has("noise")) {
    Fields n(root.at("noise"), "noise", {"phase_sigma_urad", "background"});
    cfg.phase_sigma = n.number("phase_sigma_urad", urad(kPublishedPhaseSigma)) * kMicro;
    cfg.background = n.maybe_number("background");
  }
  try {
    NoiseModel{cfg.phase_sigma, cfg.background.value_or(0.0)}.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("noise.") + e.what());
  }

  if (root.has("rows")) {
    cfg.default_rows = false;
    const json& rows = root.at("rows");
    if (!rows.is_array() || rows.empty()) throw ConfigError("rows: expected a non-empty array");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string where = "rows[" + std::to_string(i) + "]";
      Fields f(rows[i], where,
               {"point", "n_bar", "delta", "eta", "n_total", "background",
                "measured_click_fraction", "signal_click_probability"});
      CampaignRow r;
      r.point = static_cast<int>(f.number("point", double(i + 1)));
      r.n_bar = f.required_number("n_bar");
      r.delta = f.required_number("delta");
      r.eta = f.required_number("eta");
      const double n_total = f.required_number("n_total");
      if (!(n_total >= 1.0)) throw ConfigError(f.join("n_total") + ": must be >= 1");
      r.n_total = static_cast<std::int64_t>(std::llround(n_total));
      r.background = f.number("background", NoiseModel{}.background_click_rate);
      r.measured_click_fraction = f.number("measured_click_fraction", 0.0);
      r.signal_click_probability = f.maybe_number("signal_click_probability");
      if (r.n_bar < 0.0) throw ConfigError(f.join("n_bar") + ": must be >= 0");
      cfg.rows.push_back(r);
    }
  } else {
    cfg.rows = table1_rows();
  }
  for (std::size_t i = 0; i < cfg.rows.size(); ++i) {
    auto& r = cfg.rows[i];
    if (cfg.background) r.background = *cfg.background;
    try {
      campaign_params(r, cfg.phi_bar, cfg.delta_phi).validate();
    } catch (const InvalidInput& e) {
      throw ConfigError("rows[" + std::to_string(i) + "]." + e.what());
    }
    if (!(r.background >= 0.0 && r.background < 1.0)) {
      throw ConfigError("rows[" + std::to_string(i) + "].background: must lie in [0, 1)");
    }
  }

  json rows = json::array();
  for (const auto& r : cfg.rows) {
    json row = {{"point", r.point},     {"n_bar", r.n_bar},     {"delta", r.delta},
                {"eta", r.eta},         {"n_total", r.n_total}, {"background", r.background},
                {"measured_click_fraction", r.measured_click_fraction}};
    if (r.signal_click_probability) row["signal_click_probability"] = *r.signal_click_probability;
    rows.push_back(row);
  }
  cfg.echo = {{"seed", cfg.seed},
              {"trials_scale", cfg.trials_scale},
              {"phi_bar_urad", urad(cfg.phi_bar)},
              {"delta_phi_urad", urad(cfg.delta_phi)},
              {"noise", {{"phase_sigma_urad", urad(cfg.phase_sigma)}}},
              {"rows", rows}};
  if (fig4) cfg.echo["include_delta_one"] = cfg.include_delta_one;
  return cfg;
}

void write_table1_echo(std::ostream& os) {
  os << "# table1: | Data Point | n_bar | delta | eta | N_tot (approx) | P_click |\n";
  os << "# table1: | 1 | 95 | 0.10 | 0.2 | 42,111,000 | 31% |\n";
  os << "# table1: | 2 | 45 | 0.14 | 0.2 | 104,111,000 | 23% |\n";
  os << "# table1: | 3 | 20 | 0.22 | 0.2 | 102,380,000 | 25% |\n";
  os << "# table1: | 4 | 10 | 0.32 | 0.2 | 204,112,000 | 23% |\n";
  os << "# table1: | 5 | 40 | 1 | 0.03 | 374,443,000 | 20% |\n";
}

std::vector<CampaignPointResult> run_campaign(const CampaignConfig& cfg, int workers) {
  std::vector<CampaignPointResult> results;
  for (const auto& row : cfg.rows) {
    try {
      results.push_back(run_campaign_point(row, cfg.phi_bar, cfg.delta_phi, cfg.phase_sigma,
                                           cfg.trials_scale, cfg.seed, workers));
    } catch (const InvalidRegime& e) {
      throw ConfigError("rows (point " + std::to_string(row.point) + "): " + e.what());
    }
  }
  return results;
}

int cmd_fig3(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  const CampaignConfig cfg = parse_campaign(load_config(opts.config_path), opts, false);
  const auto results = run_campaign(cfg, opts.workers);

  std::ostringstream os;
  write_header(os, "fig3", cfg.seed, cfg.echo);
  if (cfg.default_rows) write_table1_echo(os);
  os << "point,n_bar,delta,eta,n_trials,click_fraction,phi_click_urad,phi_click_stderr_urad,"
        "phi_noclick_urad,phi_noclick_stderr_urad,phi_click_analytic_urad,"
        "phi_noclick_analytic_urad\n";
  std::vector<PhasePoint> points;
  for (const auto& r : results) {
    const auto& e = r.estimate;
    os << r.row.point << ',' << full(r.row.n_bar) << ',' << full(r.row.delta) << ','
       << full(r.row.eta) << ',' << r.n_trials << ',' << full(e.click_fraction) << ','
       << full(urad(e.phi_click.mean)) << ',' << full(urad(e.phi_click.sem)) << ','
       << full(urad(e.phi_noclick.mean)) << ',' << full(urad(e.phi_noclick.sem)) << ','
       << full(urad(r.prediction.phase_click)) << ',' << full(urad(r.prediction.phase_noclick))
       << '\n';
    points.push_back({r.row.n_bar, e.phi_noclick.mean, e.phi_noclick.sem});
  }

  int rc = kExitOk;
  try {
    const FitResult fit = fit_per_photon_phase(points);
    const double pull = std::abs(fit.parameter - cfg.phi_bar);
    os << "# phi0_fit: " << brief(urad(fit.parameter)) << " +- " << brief(urad(fit.std_error))
       << " urad (input " << brief(urad(cfg.phi_bar)) << ")\n";
    os << "# phi0_fit_machine: parameter_urad=" << full(urad(fit.parameter))
       << " stderr_urad=" << full(urad(fit.std_error)) << " intercept_urad="
       << full(urad(fit.intercept)) << " chi2=" << full(fit.chi_squared) << " dof=" << fit.dof
       << "\n";
    if (pull > kFig3Sigmas * fit.std_error) {
      err << "fig3: phi0 fit is more than " << kFig3Sigmas << " stderr from the input\n";
      rc = kExitTolerance;
    }
  } catch (const DegenerateFit& e) {
    os << "# phi0_fit: degenerate (" << e.what() << ")\n";
    err << "fig3: " << e.what() << "\n";
    rc = kExitTolerance;
  }
  if (int w = emit(opts, os.str(), out, err); w != kExitOk) return w;
  return rc;
}

int cmd_fig4(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  const CampaignConfig cfg = parse_campaign(load_config(opts.config_path), opts, true);
  const auto results = run_campaign(cfg, opts.workers);

  std::ostringstream os;
  write_header(os, "fig4", cfg.seed, cfg.echo);
  if (cfg.default_rows) write_table1_echo(os);
  os << "point,delta,n_bar,eta,n_trials,click_fraction,diff_urad,diff_stderr_urad,"
        "diff_analytic_urad,amplification,used_in_fit\n";
  std::vector<DifferentialPoint> points;
  for (const auto& r : results) {
    const auto& d = r.estimate.differential;
    const bool used = cfg.include_delta_one || r.row.delta < 1.0;
    os << r.row.point << ',' << full(r.row.delta) << ',' << full(r.row.n_bar) << ','
       << full(r.row.eta) << ',' << r.n_trials << ',' << full(r.estimate.click_fraction) << ','
       << full(urad(d.mean)) << ',' << full(urad(d.sem)) << ','
       << full(urad(r.prediction.differential)) << ',' << full(d.mean / cfg.phi_bar) << ','
       << (used ? 1 : 0) << '\n';
    if (used) points.push_back({r.row.delta, d.mean, d.sem});
  }

  int rc = kExitOk;
  json fit_json;
  try {
    const FitResult fit = fit_differential(points, cfg.phi_bar);
    fit_json = {{"parameter", "delta_phi"},
                {"parameter_urad", urad(fit.parameter)},
                {"stderr_urad", urad(fit.std_error)},
                {"chi_squared", fit.chi_squared},
                {"dof", fit.dof},
                {"phi_bar_fixed_urad", urad(cfg.phi_bar)},
                {"points_used", points.size()},
                {"seed", cfg.seed},
                {"version", std::string(kVersion)}};
    os << "# delta_phi_fit: " << brief(urad(fit.parameter)) << " +- "
       << brief(urad(fit.std_error)) << " urad (input " << brief(urad(cfg.delta_phi)) << ")\n";
    if (std::abs(fit.parameter - cfg.delta_phi) > kFig4Sigmas * fit.std_error) {
      err << "fig4: delta_phi fit is more than " << kFig4Sigmas << " stderr from the input\n";
      rc = kExitTolerance;
    }
  } catch (const DegenerateFit& e) {
    fit_json = {{"parameter", "delta_phi"}, {"error", e.what()}};
    err << "fig4: " << e.what() << "\n";
    rc = kExitTolerance;
  }
  os << "# fit_json: " << fit_json.dump() << "\n";
  if (int w = emit(opts, os.str(), out, err); w != kExitOk) return w;
  if (!opts.out_path.empty()) {
    std::ofstream f(opts.out_path + ".fit.json", std::ios::binary);
    if (!f) {
      err << "error: cannot write '" << opts.out_path << ".fit.json'\n";
      return kExitConfig;
    }
    f << fit_json.dump(2) << "\n";
  }
  return rc;
}

// ------------------------------------------------------------------- snr

SchemeConfig parse_scheme(const Fields& root, const std::string& key, CampaignRow& row,
                          double phi_bar, double delta_phi, const NoiseModel& noise) {
  SchemeConfig s;
  if (root.has(key)) {
    Fields f(root.at(key), key, {"n_bar", "delta", "eta", "signal_click_probability"});
    row.n_bar = f.number("n_bar", row.n_bar);
    row.delta = f.number("delta", row.delta);
    row.eta = f.number("eta", row.eta);
    row.signal_click_probability = f.maybe_number("signal_click_probability");
  }
  s.params = campaign_params(row, phi_bar, delta_phi);
  try {
    s.params.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(key + "." + e.what());
  }
  s.noise = noise;
  s.signal_click_probability = row.signal_click_probability;
  return s;
}

json scheme_echo(const CampaignRow& r) {
  json j = {{"n_bar", r.n_bar}, {"delta", r.delta}, {"eta", r.eta}};
  if (r.signal_click_probability) j["signal_click_probability"] = *r.signal_click_probability;
  return j;
}

json estimate_json(const EstimatorResult& e, double snr) {
  return {{"differential_urad", urad(e.differential.mean)},
          {"stderr_urad", urad(e.differential.sem)},
          {"phi_click_urad", urad(e.phi_click.mean)},
          {"phi_noclick_urad", urad(e.phi_noclick.mean)},
          {"click_fraction", e.click_fraction},
          {"n_click", e.n_click},
          {"n_noclick", e.n_noclick},
          {"snr", snr}};
}

int cmd_snr(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  const json j = load_config(opts.config_path);
  Fields root(j, "", {"seed", "trials_scale", "n_trials", "phi_bar_urad", "delta_phi_urad", "noise",
                      "wva", "direct"});
  const std::uint64_t seed = resolve_seed(opts, root);
  const double scale = resolve_scale(opts, root);
  const double budget = root.number("n_trials", 830'000'000.0);
  if (!(budget >= 1.0)) throw ConfigError("n_trials: must be >= 1");
  const std::int64_t n_trials = scaled_trials(std::llround(budget), scale);
  const double phi_bar = root.number("phi_bar_urad", urad(kPublishedPhiBar)) * kMicro;
  const double delta_phi = root.number("delta_phi_urad", urad(kPublishedDeltaPhi)) * kMicro;
  NoiseModel noise;
  if (root.has("noise")) {
    Fields n(root.at("noise"), "noise", {"phase_sigma_urad", "background"});
    noise.phase_sigma = n.number("phase_sigma_urad", urad(noise.phase_sigma)) * kMicro;
    noise.background_click_rate = n.number("background", noise.background_click_rate);
  }
  try {
    noise.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("noise.") + e.what());
  }
  // WVA at the smallest published delta against post-selected single-photon
  // probing with an unamplified (delta = 1) interferometer.
  CampaignRow wva_row{0, 95, 0.10, 0.2, 0, 0, 0, {}};
  CampaignRow direct_row{0, 1.5, 1.0, 0.2, 0, 0, 0, {}};
  const SchemeConfig wva = parse_scheme(root, "wva", wva_row, phi_bar, delta_phi, noise);
  const SchemeConfig direct = parse_scheme(root, "direct", direct_row, phi_bar, delta_phi, noise);

  json echo = {{"seed", seed},
               {"trials_scale", scale},
               {"n_trials", budget},
               {"phi_bar_urad", urad(phi_bar)},
               {"delta_phi_urad", urad(delta_phi)},
               {"noise",
                {{"phase_sigma_urad", urad(noise.phase_sigma)},
                 {"background", noise.background_click_rate}}},
               {"wva", scheme_echo(wva_row)},
               {"direct", scheme_echo(direct_row)}};

  SnrReport rep;
  try {
    rep = snr_compare(wva, direct, n_trials, seed, opts.workers);
  } catch (const InvalidRegime& e) {
    throw ConfigError(std::string("snr: ") + e.what());
  }
  json report = {{"meta", {{"version", std::string(kVersion)}, {"command", "snr"}, {"seed", seed},
                           {"config", echo}}},
                 {"n_trials_per_scheme", n_trials},
                 {"snr_wva", rep.snr_wva},
                 {"snr_direct", rep.snr_direct},
                 {"ratio", rep.ratio},
                 {"wva", estimate_json(rep.wva, rep.snr_wva)},
                 {"direct", estimate_json(rep.direct, rep.snr_direct)}};
  return emit(opts, report.dump(2) + "\n", out, err);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak-value amplification of photon number: exact oracle and Monte Carlo",
               "wva-sim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CommonOptions opts;
  opts.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  struct Sub {
    CLI::App* app;
    CLI::Option* seed;
    CLI::Option* scale;
  };
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "JSON run configuration");
    sub->add_option("--out", opts.out_path, "output path (default: stdout)");
    CLI::Option* seed = sub->add_option("--seed", opts.seed, "64-bit seed");
    CLI::Option* scale =
        sub->add_option("--trials-scale", opts.trials_scale, "fraction of published trial counts");
    sub->add_option("--workers", opts.workers, "worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);
    return Sub{sub, seed, scale};
  };
  const Sub oracle = add("oracle-validate", "exact Fock-space oracle vs closed forms");
  const Sub fig3 = add("fig3", "click / no-click phases and per-photon phase fit");
  const Sub fig4 = add("fig4", "differential phase vs delta and delta_phi fit");
  const Sub snr = add("snr", "WVA vs direct signal-to-noise comparison");

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("wva-sim");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  try {
    for (const Sub* s : {&oracle, &fig3, &fig4, &snr}) {
      if (!s->app->parsed()) continue;
      opts.seed_given = s->seed->count() > 0;
      opts.trials_scale_given = s->scale->count() > 0;
      if (opts.trials_scale_given && !(opts.trials_scale > 0.0)) {
        throw ConfigError("--trials-scale: must be > 0");
      }
      if (s == &oracle) return cmd_oracle_validate(opts, out, err);
      if (s == &fig3) return cmd_fig3(opts, out, err);
      if (s == &fig4) return cmd_fig4(opts, out, err);
      return cmd_snr(opts, out, err);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InsufficientData& e) {
    err << "insufficient data: " << e.what() << "\n";
    return kExitTolerance;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace wva
