// Copyright 2026 The jcsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Protocol orchestration behind the CLI. Each protocol reads its keys from a
// RunConfig, writes files into one output directory and records results and
// tolerance checks in summary.json.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jcsim/config.hpp"
#include "jcsim/experiments.hpp"
#include "jcsim/flux.hpp"
#include "jcsim/rng.hpp"

namespace jcsim {

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitTolerance = 4 };

struct Check {
  std::string name;
  double value = 0.0;
  double lo = 0.0, hi = 0.0;
  bool pass() const { return value >= lo && value <= hi; }
};

/// Output directory plus the summary being built.
class RunContext {
 public:
  RunContext(std::string out_dir, std::uint64_t seed) : out_(std::move(out_dir)), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stage(const std::string& name) const { return stage_seed(seed_, name); }
  nlohmann::json& results() { return results_; }

  void write(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(out_);
    const auto p = std::filesystem::path(out_) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::Config, "cannot write " + p.string());
    f << content;
    files_.push_back({{"name", name}, {"bytes", content.size()}, {"fnv1a64", hex64(fnv1a64(content))}});
  }

  void write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

  void check(const std::string& name, double value, double lo, double hi) { checks_.push_back({name, value, lo, hi}); }
  void warn(const std::string& msg) { warnings_.push_back(msg); }

  const std::vector<Check>& checks() const { return checks_; }
  bool all_pass() const {
    for (const auto& c : checks_)
      if (!c.pass()) return false;
    return true;
  }

  /// Writes summary.json (not listed in itself).
  void finish(const std::string& protocol) {
    nlohmann::json s;
    s["protocol"] = protocol;
    s["seed"] = seed_;
    s["files"] = files_;
    s["results"] = results_.is_null() ? nlohmann::json::object() : results_;
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : checks_)
      cs.push_back({{"name", c.name}, {"value", c.value}, {"lo", c.lo}, {"hi", c.hi}, {"pass", c.pass()}});
    s["checks"] = cs;
    s["warnings"] = warnings_;
    std::filesystem::create_directories(out_);
    std::ofstream f(std::filesystem::path(out_) / "summary.json", std::ios::binary);
    f << s.dump(2) << "\n";
  }

 private:
  std::string out_;
  std::uint64_t seed_;
  nlohmann::json results_ = nlohmann::json::object();
  nlohmann::json files_ = nlohmann::json::array();
  std::vector<Check> checks_;
  std::vector<std::string> warnings_;
};

// ------------------------------------------------------------ config -> model

inline ChannelToggles parse_error_set(const std::string& s) {
  if (s == "none" || s == "pulse-length") return ChannelToggles::none();
  if (s == "t1" || s == "+t1") return ChannelToggles{true, true, false};
  if (s == "all" || s == "tphi" || s == "+tphi") return ChannelToggles::all();
  throw Error(ErrorKind::Config, "errors: expected pulse-length, t1 or all, got '" + s + "'");
}

inline SimSetup setup_from(const RunConfig& c) {
  SimSetup s;
  auto& m = s.system;
  m.g_mhz = c.real("system.g_mhz", m.g_mhz);
  m.delta_mhz = c.real("system.delta_mhz", m.delta_mhz);
  m.omega_cav_ghz = c.real("system.omega_cav_ghz", m.omega_cav_ghz);
  m.chi_mhz = c.real("system.chi_mhz", m.chi_mhz);
  m.t1_cav_us = c.real("system.t1_cav_us", m.t1_cav_us);
  m.t1_q_us = c.real("system.t1_q_us", m.t1_q_us);
  m.t2_q_us = c.real("system.t2_q_us", m.t2_q_us);
  m.parity_map_time_ns = c.real("system.parity_map_time_ns", m.parity_map_time_ns);
  m.tomo_half_pi_sigma_ns = c.real("system.tomo_half_pi_sigma_ns", m.tomo_half_pi_sigma_ns);
  m.validate();
  const std::string table = c.path("calibration.table");
  if (!table.empty()) s.table = CalibrationTable::load(table);
  s.cavity_levels = static_cast<int>(c.integer("sim.cavity_levels", s.cavity_levels));
  if (s.cavity_levels < 2) throw Error(ErrorKind::Config, "sim.cavity_levels must be >= 2");
  s.dt_ns = c.real("sim.dt_ns", s.dt_ns);
  if (!(s.dt_ns > 0.0)) throw Error(ErrorKind::Config, "sim.dt_ns must be positive");
  const std::string coupling = c.str("sim.coupling", "full");
  if (coupling == "full") s.coupling = DriveCoupling::Full;
  else if (coupling == "selective") s.coupling = DriveCoupling::Selective;
  else throw Error(ErrorKind::Config, "sim.coupling: expected full or selective");
  const std::string kind = c.str("sim.hamiltonian", "calibrated");
  if (kind == "calibrated") s.kind = HamiltonianKind::Calibrated;
  else if (kind == "jc") s.kind = HamiltonianKind::IdealJC;
  else throw Error(ErrorKind::Config, "sim.hamiltonian: expected calibrated or jc");
  s.open_system = c.flag("open_system", true);
  s.channels = parse_error_set(c.str("errors", "all"));
  return s;
}

inline ReconstructionOptions reconstruction_from(const RunConfig& c, const RunContext& ctx, const std::string& stage) {
  ReconstructionOptions o;
  o.extent = c.real("grid.extent", o.extent);
  o.points_per_axis = static_cast<int>(c.integer("grid.points", o.points_per_axis));
  o.extra_dimensions = static_cast<int>(c.integer("reconstruct.extra_dimensions", o.extra_dimensions));
  auto& b = o.bayes;
  b.repetitions = static_cast<int>(c.integer("bayes.repetitions", b.repetitions));
  b.samples = static_cast<int>(c.integer("bayes.samples", b.samples));
  b.thinning = static_cast<int>(c.integer("bayes.thinning", b.thinning));
  b.burn_in = static_cast<int>(c.integer("bayes.burn_in", b.burn_in));
  b.chains = static_cast<int>(c.integer("bayes.chains", b.chains));
  b.seed = ctx.stage(stage);
  if (o.points_per_axis < 2 || !(o.extent > 0.0)) throw Error(ErrorKind::Config, "grid needs extent > 0 and >= 2 points");
  return o;
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream o;
  o.precision(12);
  o << v;
  return o.str();
}

inline nlohmann::json outcome_json(const ReconstructionOutcome& r) {
  return {{"fidelity_mean", r.fidelity_mean},
          {"fidelity_std", r.fidelity_std},
          {"li_fidelity", r.li_fidelity},
          {"li_min_eigenvalue", r.li.min_eigenvalue},
          {"acceptance", r.posterior.acceptance}};
}

inline void write_reconstruction(RunContext& ctx, const std::string& stem, const ReconstructionOutcome& r) {
  ctx.write(stem + "_wigner.csv", r.wigner.to_csv());
  ctx.write_json(stem + "_wigner.json", r.wigner.sidecar());
  ctx.write_json(stem + "_rho_li.json", density_matrix_json(r.li.rho));
  ctx.write_json(stem + "_rho_bayes.json", density_matrix_json(r.posterior.mean));
}

inline std::string fidelity_line(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "F = %.4f \xc2\xb1 %.4f", mean, std);
  return buf;
}

}  // namespace detail

// ----------------------------------------------------------------- protocols

inline void run_spectrum(const RunConfig& c, RunContext& ctx) {
  const double g = c.real("system.g_mhz", 12.2);
  const int n_max = static_cast<int>(c.integer("spectrum.n_max", 6));
  if (n_max < 1) throw Error(ErrorKind::Config, "spectrum.n_max must be >= 1");
  const SpaceDims dims(n_max + 2);
  const OperatorSet ops = build_operators(dims);
  const Operator h = jc_hamiltonian(ops, g, 0.0);
  // Diagonalize manifold by manifold: N photons + excitations.
  std::ostringstream lv;
  lv << "N,sign,energy_MHz,diagonalized_MHz,relative_error\n";
  double worst = 0.0;
  std::map<std::pair<int, int>, double> diag;
  for (int n = 1; n <= n_max; ++n) {
    Eigen::Matrix2cd block;
    const int i = dims.index(n, 0), j = dims.index(n - 1, 1);
    block << h(i, i), h(i, j), h(j, i), h(j, j);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
    const double lo = units::rad_per_ns_to_mhz(es.eigenvalues()(0));
    const double hi = units::rad_per_ns_to_mhz(es.eigenvalues()(1));
    diag[{n, -1}] = lo;
    diag[{n, +1}] = hi;
    for (int sign : {+1, -1}) {
      const double e = dressed_energy_mhz({n, sign}, g);
      const double d = diag[{n, sign}];
      const double rel = std::abs(d - e) / std::abs(e);
      worst = std::max(worst, rel);
      lv << n << ',' << (sign > 0 ? '+' : '-') << ',' << detail::fmt(e) << ',' << detail::fmt(d) << ','
         << detail::fmt(rel) << '\n';
    }
  }
  diag[{0, +1}] = diag[{0, -1}] = 0.0;
  std::ostringstream sb;
  sb << "N,color,freq_MHz,from_levels_MHz\n";
  double worst_line = 0.0;
  for (int n = 0; n < n_max; ++n) {
    for (auto color : {SidebandColor::Red, SidebandColor::Blue}) {
      const double f = sideband_frequency(n, color, g);
      const int from = color == SidebandColor::Red ? +1 : -1;
      const double levels = diag[{n + 1, -from}] - diag[{n, from}];
      worst_line = std::max(worst_line, std::abs(levels - f) / std::abs(f));
      sb << n << ',' << (color == SidebandColor::Red ? "red" : "blue") << ',' << detail::fmt(f) << ','
         << detail::fmt(levels) << '\n';
    }
  }
  ctx.write("dressed_levels.csv", lv.str());
  ctx.write("sidebands.csv", sb.str());
  ctx.results()["max_level_relative_error"] = worst;
  ctx.results()["max_sideband_relative_error"] = worst_line;
  ctx.check("spectrum.level_relative_error", worst, 0.0, 1e-10);
  ctx.check("spectrum.sideband_relative_error", worst_line, 0.0, 1e-10);
}

inline void run_prepare(const RunConfig& c, RunContext& ctx) {
  const SimSetup s = setup_from(c);
  const TargetState target = TargetState::parse(c.str("target", "sup:0:1,3:1"));
  const ReconstructionOptions o = reconstruction_from(c, ctx, "prepare/bayes");
  const bool rec = c.flag("reconstruct", true);
  const PreparationRun run = run_preparation(target, s, o, rec, c.flag("prepare.calibrate_phases", true));
  ctx.write_json("schedule.json", run.plan.schedule.to_json());
  auto& r = ctx.results();
  r["target"] = target.str();
  r["duration_ns"] = run.plan.schedule.total_duration_ns();
  LadderOptions lo;
  lo.omega_cav_ghz = s.system.omega_cav_ghz;
  lo.g_mhz = s.system.g_mhz;
  lo.dt_ns = s.dt_ns;
  const double ideal = synthesize_ladder_prep(target, s.table, lo).ideal_fidelity;
  r["ideal_fidelity"] = ideal;
  r["closed_model_fidelity"] = run.plan.ideal_fidelity;  // phases tuned in the full coupling
  r["state_fidelity"] = run.state_fidelity;
  if (rec) {
    detail::write_reconstruction(ctx, "prepared", run.reconstruction);
    r["reconstruction"] = detail::outcome_json(run.reconstruction);
    r["fidelity_line"] = detail::fidelity_line(run.reconstruction.fidelity_mean, run.reconstruction.fidelity_std);
  }
  ctx.check("prepare.ideal_fidelity", ideal, 0.99, 1.0);
}

inline void run_multitone_protocol(const RunConfig& c, RunContext& ctx) {
  const SimSetup s = setup_from(c);
  const TargetState target = TargetState::parse(c.str("target", "fock:5"));
  MultitoneOptions mo;
  mo.duration_ns = c.real("multitone.duration_ns", mo.duration_ns);
  mo.max_iterations = static_cast<int>(c.integer("multitone.max_iterations", mo.max_iterations));
  mo.init_jitter = c.real("multitone.init_jitter", mo.init_jitter);
  mo.seed = ctx.stage("multitone/init");
  mo.setup.table = s.table;
  mo.setup.system = s.system;
  mo.setup.dt_ns = s.dt_ns;
  const ReconstructionOptions o = reconstruction_from(c, ctx, "multitone/bayes");
  const bool rec = c.flag("reconstruct", true);
  const MultitoneRun run = run_multitone(target, mo, s, o, rec);
  nlohmann::json amps = nlohmann::json::array();
  for (std::size_t i = 0; i < run.optimized.amplitudes.size(); ++i) {
    const cplx a = run.optimized.amplitudes[i];
    amps.push_back({{"transition", run.optimized.spec.links()[i].key()}, {"re_MHz", a.real()}, {"im_MHz", a.imag()}});
  }
  ctx.write_json("amplitudes.json", {{"duration_ns", mo.duration_ns}, {"links", amps}});
  auto& r = ctx.results();
  r["target"] = target.str();
  r["ideal_fidelity"] = run.optimized.fidelity;
  r["iterations"] = run.optimized.iterations;
  r["converged"] = run.optimized.converged;
  r["state_fidelity"] = run.state_fidelity;
  if (!run.optimized.warning.empty()) ctx.warn(run.optimized.warning);
  if (rec) {
    detail::write_reconstruction(ctx, "multitone", run.reconstruction);
    r["reconstruction"] = detail::outcome_json(run.reconstruction);
    r["fidelity_line"] = detail::fidelity_line(run.reconstruction.fidelity_mean, run.reconstruction.fidelity_std);
  }
  ctx.check("multitone.ideal_fidelity", run.optimized.fidelity, 0.99, 1.0);
}

/// Normalized parity after the ideal-model Givens sequence from |n_A>.
inline double givens_ideal_parity(GivensSpec spec, const SimSetup& s) {
  SimSetup ideal = SimSetup::ideal(s.cavity_levels);
  ideal.table = s.table;
  ideal.system = s.system;
  ideal.dt_ns = s.dt_ns;
  ReconstructionOptions none;
  return run_givens(spec, ideal, none, false).parity;
}

inline void run_givens_protocol(const RunConfig& c, RunContext& ctx) {
  const SimSetup s = setup_from(c);
  GivensSpec base;
  base.n_a = static_cast<int>(c.integer("givens.n_a", base.n_a));
  base.n_b = static_cast<int>(c.integer("givens.n_b", base.n_b));
  base.phi = c.real("givens.phi", base.phi);
  base.jx_pi_time_ns = c.real("givens.jx_pi_time_ns", base.jx_pi_time_ns);
  base.omega_cav_ghz = s.system.omega_cav_ghz;
  const auto thetas = c.reals("givens.thetas", {0.0, kPi / 4, kPi / 2, kPi});
  const bool rec = c.flag("reconstruct", true);
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream table;
  table << "theta_rad,state_fidelity,parity,fidelity_mean,fidelity_std\n";
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    GivensSpec spec = base;
    spec.theta = thetas[k];
    const ReconstructionOptions o = reconstruction_from(c, ctx, "givens/bayes/" + std::to_string(k));
    const GivensRun run = run_givens(spec, s, o, rec);
    nlohmann::json row = {{"theta", spec.theta},
                          {"target", run.target.str()},
                          {"state_fidelity", run.state_fidelity},
                          {"parity", run.parity},
                          {"unitarity_error", run.plan.unitarity_error}};
    table << detail::fmt(spec.theta) << ',' << detail::fmt(run.state_fidelity) << ',' << detail::fmt(run.parity);
    if (rec) {
      detail::write_reconstruction(ctx, "givens_" + std::to_string(k), run.reconstruction);
      row["reconstruction"] = detail::outcome_json(run.reconstruction);
      table << ',' << detail::fmt(run.reconstruction.fidelity_mean) << ',' << detail::fmt(run.reconstruction.fidelity_std);
    } else {
      table << ",,";
    }
    table << '\n';
    rows.push_back(row);
  }
  ctx.write("givens.csv", table.str());
  ctx.results()["rotations"] = rows;

  const int points = static_cast<int>(c.integer("givens.parity_points", 17));
  if (points >= 2) {
    std::ostringstream pc;
    pc << "theta_rad,parity,minus_cos_theta\n";
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
      GivensSpec spec = base;
      spec.theta = kPi * i / (points - 1);
      const double p = givens_ideal_parity(spec, s);
      worst = std::max(worst, std::abs(p + std::cos(spec.theta)));
      pc << detail::fmt(spec.theta) << ',' << detail::fmt(p) << ',' << detail::fmt(-std::cos(spec.theta)) << '\n';
    }
    ctx.write("givens_parity.csv", pc.str());
    ctx.results()["parity_law_max_deviation"] = worst;
    ctx.check("givens.parity_law_max_deviation", worst, 0.0, 0.02);
  }
}

inline void run_calibrate(const RunConfig& c, RunContext& ctx) {
  SimSetup s = setup_from(c);
  const std::string kind = c.str("calibrate.kind", "spectroscopy");
  auto& r = ctx.results();
  r["kind"] = kind;
  if (kind == "spectroscopy") {
    SpectroscopyOptions o;
    o.freq_start_ghz = c.real("calibrate.freq_start_ghz", o.freq_start_ghz);
    o.freq_stop_ghz = c.real("calibrate.freq_stop_ghz", o.freq_stop_ghz);
    o.freq_step_mhz = c.real("calibrate.freq_step_mhz", o.freq_step_mhz);
    o.probe_amplitude_mhz = c.real("calibrate.probe_amplitude_mhz", o.probe_amplitude_mhz);
    o.probe_duration_ns = c.real("calibrate.probe_duration_ns", o.probe_duration_ns);
    const DressedLabel initial = DressedLabel::parse(c.str("calibrate.initial", "3-"));
    const SpectroscopyResult res = calibrate_spectroscopy(initial, s, o);
    std::ostringstream out;
    out << "freq_GHz,parity_response\n";
    for (std::size_t i = 0; i < res.freq_ghz.size(); ++i)
      out << detail::fmt(res.freq_ghz[i]) << ',' << detail::fmt(res.response[i]) << '\n';
    ctx.write("spectroscopy.csv", out.str());
    nlohmann::json peaks = nlohmann::json::array();
    for (const auto& p : res.peaks) peaks.push_back({{"freq_GHz", p.freq_ghz}, {"height", p.height}, {"ambiguous", p.ambiguous}});
    r["initial"] = initial.str();
    r["peaks"] = peaks;
    r["ambiguous"] = res.ambiguous;
  } else if (kind == "rabi" || kind == "sigma") {
    const Transition t = Transition::parse(c.str("calibrate.transition", "0<->1+"));
    if (kind == "rabi") {
      PowerRabiOptions o;
      o.max_volts = c.real("calibrate.max_volts", o.max_volts);
      o.points = static_cast<int>(c.integer("calibrate.points", o.points));
      const PowerRabiResult res = calibrate_power_rabi(t, s, o);
      std::ostringstream out;
      out << "volts,parity\n";
      for (std::size_t i = 0; i < res.volts.size(); ++i)
        out << detail::fmt(res.volts[i]) << ',' << detail::fmt(res.parity[i]) << '\n';
      ctx.write("power_rabi.csv", out.str());
      CalibrationRow row = s.table.at(t);
      row.rabi_mhz = res.rabi_mhz_at_reference;
      s.table.insert(row);
      ctx.write("calibration.csv", s.table.to_csv());
      r["pi_volts"] = res.pi_volts;
      r["rabi_MHz"] = res.rabi_mhz_at_reference;
      r["r_squared"] = res.r_squared;
    } else {
      const auto sigmas = c.reals("calibrate.sigmas_ns", {8, 16, 24, 32, 40, 48, 56, 64, 72, 80, 96, 112, 128});
      const SigmaSweepResult res = calibrate_sigma(t, s, sigmas);
      std::ostringstream out;
      out << "sigma_ns,return_score\n";
      for (std::size_t i = 0; i < res.sigma_ns.size(); ++i)
        out << detail::fmt(res.sigma_ns[i]) << ',' << detail::fmt(res.return_score[i]) << '\n';
      ctx.write("sigma_sweep.csv", out.str());
      r["best_sigma_ns"] = res.best_sigma_ns;
      r["at_boundary"] = res.at_boundary;
    }
    r["transition"] = t.key();
  } else if (kind == "ramp") {
    std::vector<double> grid;
    for (double d = 20.0; d <= 600.0 + 1e-9; d += 20.0) grid.push_back(d);
    const auto durations = c.reals("calibrate.durations_ns", grid);
    const double delta_end = c.real("calibrate.delta_end_mhz", 100.0);
    const RampCalibration res = calibrate_ramp(s, durations, delta_end);
    std::ostringstream out;
    out << "duration_ns,population_1g,closed_population_1g\n";
    for (std::size_t i = 0; i < res.duration_ns.size(); ++i)
      out << detail::fmt(res.duration_ns[i]) << ',' << detail::fmt(res.population[i]) << ','
          << detail::fmt(res.closed_population[i]) << '\n';
    ctx.write("ramp.csv", out.str());
    r["minimal_duration_ns"] = res.minimal_duration_ns;
    r["plateau"] = res.plateau;
    ctx.check("calibrate.minimal_ramp_ns", res.minimal_duration_ns, 100.0, 400.0);
  } else {
    throw Error(ErrorKind::Config, "calibrate.kind: expected spectroscopy, rabi, sigma or ramp");
  }
}

inline void run_tomography(const RunConfig& c, RunContext& ctx) {
  const SimSetup s = setup_from(c);
  const TargetState target = TargetState::parse(c.str("target", "sup:0:1,3:1"));
  const double extent = c.real("grid.extent", 2.5);
  const int n = static_cast<int>(c.integer("grid.points", 21));
  const SpaceDims dims = s.dims();
  const StateVector v = with_ground_transmon(dims, target.cavity_vector(dims.cavity_levels));
  const DensityMatrix rho = v * v.adjoint();
  const std::string scale = c.str("tomography.scaling", "raw");
  const WignerScaling ws = scale == "raw" ? WignerScaling::Raw
                           : scale == "two_over_pi" ? WignerScaling::TwoOverPi
                                                    : throw Error(ErrorKind::Config, "tomography.scaling: raw or two_over_pi");
  const auto grid = make_square_grid(extent, n);
  const WignerData exact = wigner_exact_grid(cavity_reduced(dims, rho), grid, ws);
  ctx.write("wigner_exact.csv", exact.to_csv());
  ctx.write_json("wigner_exact.json", exact.sidecar());
  if (c.flag("tomography.measured", true)) {
    const WignerData measured = measure_wigner(s, rho, extent, n);
    ctx.write("wigner_measured.csv", measured.to_csv());
    ctx.write_json("wigner_measured.json", measured.sidecar());
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double raw = ws == WignerScaling::Raw ? exact.values[i] : exact.values[i] * kPi / 2.0;
      worst = std::max(worst, std::abs(measured.values[i] - raw));
    }
    ctx.results()["max_measured_minus_exact"] = worst;
  }
  if (exact.truncation_warning) ctx.warn("grid extends past the cavity truncation");
  ctx.results()["target"] = target.str();
}

inline void run_reconstruct(const RunConfig& c, RunContext& ctx) {
  const std::string input = c.path("reconstruct.input");
  if (input.empty()) throw Error(ErrorKind::Config, "reconstruct.input (Wigner CSV) is required");
  std::ifstream in(input);
  const WignerData w = WignerData::from_csv(in);
  const TargetState target = TargetState::parse(c.str("target", "sup:0:1,3:1"));
  const ReconstructionOptions o = reconstruction_from(c, ctx, "reconstruct/bayes");
  const ReconstructionOutcome r = reconstruct_cavity(w, target, o);
  ctx.write_json("rho_li.json", density_matrix_json(r.li.rho));
  ctx.write_json("rho_bayes.json", density_matrix_json(r.posterior.mean));
  ctx.results()["reconstruction"] = detail::outcome_json(r);
  ctx.results()["fidelity_line"] = detail::fidelity_line(r.fidelity_mean, r.fidelity_std);
}

/// Reference budget cells (percent), rows x (psi_1, psi_2).
inline const std::vector<std::array<double, 2>>& reference_budget() {
  static const std::vector<std::array<double, 2>> ref = {{98.4, 95.1}, {98.3, 94.4}, {93.2, 87.7}};
  return ref;
}

inline void run_error_budget(const RunConfig& c, RunContext& ctx) {
  SimSetup s = setup_from(c);
  const std::vector<TargetState> targets = {
      TargetState::parse(c.str("budget.psi1", "sup:0:1,3:1")),
      TargetState::parse(c.str("budget.psi2", "sup:0:0.5,2:0.6123724356957945i,4:0.6123724356957945"))};
  ReconstructionOptions o = reconstruction_from(c, ctx, "budget");
  const auto cells = error_budget(targets, s, default_budget_rows(), o);
  const double tol = c.real("budget.tolerance_pp", 1.5);
  std::ostringstream out;
  out << "errors,state,fidelity_mean,fidelity_std,state_fidelity,reference\n";
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    const double ref = reference_budget()[i / 2][i % 2];
    out << cell.row << ",psi" << (i % 2) + 1 << ',' << detail::fmt(cell.fidelity_mean) << ','
        << detail::fmt(cell.fidelity_std) << ',' << detail::fmt(cell.state_fidelity) << ',' << ref / 100.0 << '\n';
    rows.push_back({{"errors", cell.row},
                    {"state", cell.state},
                    {"fidelity_mean", cell.fidelity_mean},
                    {"fidelity_std", cell.fidelity_std},
                    {"state_fidelity", cell.state_fidelity}});
    ctx.check("budget." + cell.row + ".psi" + std::to_string(i % 2 + 1), 100.0 * cell.fidelity_mean, ref - tol, ref + tol);
  }
  ctx.write("error_budget.csv", out.str());
  ctx.results()["cells"] = rows;
}

inline FilterNetwork filter_from(const RunConfig& c) {
  FilterNetwork net;
  net.reference_ghz = c.real("filter.reference_ghz", 1.0);
  net.port_ohm = c.real("filter.port_ohm", 50.0);
  // kind:impedance:length, lengths in rad at the reference frequency
  const std::string spec = c.str("filter.sections", "series-line:130:pi/4,open-stub:81:pi/4,series-line:46:pi/4");
  for (const auto& item : split_list(spec)) {
    const auto parts = split_list(item, ':');
    if (parts.size() != 3) throw Error(ErrorKind::Config, "filter section '" + item + "' needs kind:ohm:length");
    net.sections.push_back({parse_section_kind(parts[0]), parse_real(parts[1]), parse_real(parts[2])});
  }
  net.validate();
  return net;
}

inline void run_hardware(const RunConfig& c, RunContext& ctx) {
  const double f_min = c.real("squid.f_min_ghz", 5.894);
  const double f_max = c.real("squid.f_max_ghz", 7.634);
  const double gamma = c.real("squid.gamma", 4.02);
  SquidParams p = fit_squid_endpoints(f_min, f_max, gamma);
  if (c.has("squid.ec_ghz")) p.ec_ghz = c.real("squid.ec_ghz", p.ec_ghz);
  if (c.has("squid.ej1_ghz")) p.ej1_ghz = c.real("squid.ej1_ghz", p.ej1_ghz);
  const int points = static_cast<int>(c.integer("squid.points", 201));
  if (points < 2) throw Error(ErrorKind::Config, "squid.points must be >= 2");
  std::ostringstream sp;
  sp << "phi_over_phi0,freq_GHz,sens_GHz_per_Phi0\n";
  for (int i = 0; i < points; ++i) {
    const double x = 0.5 * i / (points - 1);  // Phi_e / Phi_0 in [0, 1/2]
    SquidParams q = p;
    q.phi_e = kPi * x;
    sp << detail::fmt(x) << ',' << detail::fmt(transmon_freq(q)) << ',' << detail::fmt(flux_sensitivity(q)) << '\n';
  }
  ctx.write("squid_spectrum.csv", sp.str());

  const FilterNetwork net = filter_from(c);
  const double f0 = c.real("filter.f_start_ghz", 0.01), f1 = c.real("filter.f_stop_ghz", 10.0);
  const int nf = static_cast<int>(c.integer("filter.points", 1000));
  if (nf < 2 || !(f1 > f0)) throw Error(ErrorKind::Config, "filter sweep needs f_stop > f_start and >= 2 points");
  std::ostringstream fs;
  fs << "freq_GHz,s21_dB\n";
  for (int i = 0; i < nf; ++i) {
    const double f = f0 + (f1 - f0) * i / (nf - 1);
    fs << detail::fmt(f) << ',' << detail::fmt(filter_s21(net, f)) << '\n';
  }
  ctx.write("filter_s21.csv", fs.str());

  auto& r = ctx.results();
  r["ec_GHz"] = p.ec_ghz;
  r["ej1_GHz"] = p.ej1_ghz;
  r["gamma"] = p.gamma;
  const double park = c.real("squid.park_ghz", 6.783);
  const double phi = phi_for_frequency(p, park);
  SquidParams at = p;
  at.phi_e = phi;
  const double dfdphi = c.real("parametric.domega_dphi_ghz", std::abs(dfreq_dphi(at)));
  r["park_phi_e"] = phi;
  r["domega_dphi_GHz_per_rad"] = dfdphi;
  r["mutual_inductance_phi0_per_mA"] =
      mutual_inductance_from_nu(c.real("parametric.nu_ua", 53.0), c.real("parametric.omega_m_mhz", 85.0), dfdphi);
  r["s21_dB_at_cavity"] = filter_s21(net, c.real("system.omega_cav_ghz", 6.868));
}

inline void run_parametric(const RunConfig& c, RunContext& ctx) {
  SystemModel m;
  m.g_mhz = c.real("system.g_mhz", 11.3);
  FluxModSpec spec;
  spec.park_delta_mhz = c.real("parametric.park_delta_mhz", spec.park_delta_mhz);
  spec.pump_mhz = c.real("parametric.omega_m_mhz", spec.park_delta_mhz);
  const auto depths = c.reals("parametric.depths_mhz", {20, 40, 60, 80, 100, 120, 140, 160, 180, 200, 220, 240, 260, 280});
  const double t_max = c.real("parametric.max_time_ns", 400.0);
  const double every = c.real("parametric.sample_every_ns", 1.0);
  std::vector<double> g_eff(depths.size());
  parallel_for(depths.size(), [&](std::size_t i) {
    FluxModSpec s = spec;
    s.depth_mhz = depths[i];
    std::vector<double> t;
    const auto pe = modulated_exchange_trace(s, m, t_max, every, 0.05, &t);
    g_eff[i] = units::rad_per_ns_to_mhz(0.5 * fit_exchange(t, pe, m.g_mhz).omega);
  });
  std::ostringstream out;
  out << "depth_MHz,g_eff_MHz,bessel_MHz\n";
  for (std::size_t i = 0; i < depths.size(); ++i) {
    ParametricModel pm{m.g_mhz, spec.pump_mhz, depths[i]};
    out << detail::fmt(depths[i]) << ',' << detail::fmt(g_eff[i]) << ',' << detail::fmt(g_effective(pm)) << '\n';
  }
  ctx.write("g_eff_vs_depth.csv", out.str());
  if (c.flag("parametric.chevron", true)) {
    ChevronScan scan;
    scan.pump_mhz = c.reals("parametric.pump_scan_mhz", {75, 77.5, 80, 82.5, 85, 87.5, 90, 92.5, 95});
    scan.max_time_ns = t_max;
    scan.sample_every_ns = c.real("parametric.chevron_every_ns", 4.0);
    FluxModSpec s = spec;
    s.depth_mhz = c.real("parametric.chevron_depth_mhz", 100.0);
    ctx.write("chevron.csv", parametric_chevron(s, m, scan).to_csv());
  }
  // shape of the law: rises to one maximum, then falls
  std::size_t peak = 0;
  for (std::size_t i = 1; i < g_eff.size(); ++i)
    if (g_eff[i] > g_eff[peak]) peak = i;
  bool shape = peak > 0 && peak + 1 < g_eff.size();
  for (std::size_t i = 1; i < g_eff.size() && shape; ++i) shape = i <= peak ? g_eff[i] > g_eff[i - 1] : g_eff[i] < g_eff[i - 1];
  ctx.results()["peak_depth_MHz"] = depths.empty() ? 0.0 : depths[peak];
  ctx.results()["single_maximum"] = shape;
  ctx.check("parametric.single_maximum", shape ? 1.0 : 0.0, 1.0, 1.0);
}

using ProtocolFn = std::function<void(const RunConfig&, RunContext&)>;

inline const std::map<std::string, ProtocolFn>& protocols() {
  static const std::map<std::string, ProtocolFn> table = {
      {"noop", [](const RunConfig&, RunContext&) {}},
      {"spectrum", run_spectrum},
      {"prepare", run_prepare},
      {"multitone", run_multitone_protocol},
      {"givens", run_givens_protocol},
      {"calibrate", run_calibrate},
      {"tomography", run_tomography},
      {"reconstruct", run_reconstruct},
      {"error-budget", run_error_budget},
      {"hardware", run_hardware},
      {"parametric", run_parametric},
  };
  return table;
}

struct RunReport {
  int exit_code = kExitOk;
  std::string message;
  std::vector<Check> checks;
};

/// Runs one protocol; a module error is reported with the failing stage.
/// Noop writes nothing at all.
inline RunReport run_protocol(const std::string& name, const RunConfig& cfg, const std::string& out_dir,
                              std::uint64_t seed, bool check) {
  RunReport rep;
  const auto& table = protocols();
  const auto it = table.find(name == "error_budget" ? std::string("error-budget") : name);
  if (it == table.end()) {
    rep.exit_code = kExitConfig;
    rep.message = "unknown protocol '" + name + "'";
    return rep;
  }
  if (it->first == "noop") return rep;
  RunContext ctx(out_dir, seed);
  try {
    it->second(cfg, ctx);
    const auto unused = cfg.unused();
    if (!unused.empty()) {
      std::string keys;
      for (const auto& k : unused) keys += (keys.empty() ? "" : ", ") + k;
      throw Error(ErrorKind::Config, "unknown config keys: " + keys);
    }
  } catch (const Error& e) {
    rep.exit_code = e.kind() == ErrorKind::Config || e.kind() == ErrorKind::InvalidArgument ? kExitConfig : kExitNumerical;
    rep.message = it->first + ": " + e.what();
    return rep;
  }
  ctx.finish(it->first);
  rep.checks = ctx.checks();
  if (check && !ctx.all_pass()) {
    rep.exit_code = kExitTolerance;
    rep.message = it->first + ": tolerance check failed";
  }
  return rep;
}

}  // namespace jcsim
