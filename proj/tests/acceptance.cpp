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

// Acceptance gate: one line per criterion, nonzero exit on any failure.
// Usage: jcsim_acceptance [work_dir]

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "jcsim/runner.hpp"

namespace fs = std::filesystem;
using namespace jcsim;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [miss: " << what << "]";
    }
  }
};

fs::path g_work;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json run(const std::string& protocol, const std::string& cfg, const std::string& tag, std::uint64_t seed = 0) {
  const fs::path d = g_work / tag;
  fs::remove_all(d);
  const RunReport r = run_protocol(protocol, RunConfig::parse(cfg), d.string(), seed, false);
  if (r.exit_code != kExitOk) throw std::runtime_error(r.message);
  return nlohmann::json::parse(slurp(d / "summary.json"));
}

std::string pct(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * f);
  return buf;
}

DensityMatrix random_state(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Operator a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  DensityMatrix r = a * a.adjoint();
  return r / r.trace().real();
}

long double j1_series(long double x) {
  const long double h = x / 2;
  long double term = h, sum = h;
  for (int k = 1; k < 200 && term != 0; ++k) {
    term *= -h * h / (static_cast<long double>(k) * (k + 1));
    sum += term;
  }
  return sum;
}

// ------------------------------------------------------------ criteria

void spectrum(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = run("spectrum", "", "c1");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double lvl = s["results"]["max_level_relative_error"], sb = s["results"]["max_sideband_relative_error"];
  // full diagonalization, independent of the manifold blocks
  const double g = 12.2;
  const SpaceDims dims(8);
  Eigen::SelfAdjointEigenSolver<Operator> es(jc_hamiltonian(build_operators(dims), g, 0.0), Eigen::EigenvaluesOnly);
  double full = 0.0;
  for (int n = 1; n <= 6; ++n)
    for (int sign : {-1, 1}) {
      const double e = sign * std::sqrt(double(n)) * g;
      double nearest = 1e300;
      for (int i = 0; i < es.eigenvalues().size(); ++i)
        nearest = std::min(nearest, std::abs(units::rad_per_ns_to_mhz(es.eigenvalues()(i)) - e));
      full = std::max(full, nearest / std::abs(e));
    }
  v.detail << "levels " << lvl << ", full diag " << full << ", sidebands " << sb << ", " << secs << " s";
  v.require(lvl < 1e-10 && full < 1e-10, "level error");
  v.require(sb < 1e-10, "sideband error");
  v.require(secs < 1.0, "runtime");
}

nlohmann::json g_budget;  // shared with criterion 3

void budget(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  g_budget = run("error-budget", "", "c2");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& c : g_budget["checks"]) {
    v.detail << c["name"].get<std::string>().substr(7) << '=' << pct(c["value"].get<double>() / 100.0) << ' ';
    v.require(c["pass"].get<bool>(), c["name"].get<std::string>());
  }
  v.detail << "(" << secs << " s)";
  v.require(secs < 600.0, "runtime");
}

void headline(Verdict& v) {
  auto within = [&](const std::string& name, double sim, double exp) {
    v.detail << name << ' ' << pct(sim) << "/" << pct(exp) << ' ';
    v.require(std::abs(sim - exp) <= 0.05, name);
  };
  if (g_budget.is_null()) g_budget = run("error-budget", "", "c2");
  const auto& cells = g_budget["results"]["cells"];
  within("psi1", cells[4]["fidelity_mean"], 0.93);
  within("psi2", cells[5]["fidelity_mean"], 0.89);
  const auto fock = run("multitone", "", "c3_fock5");
  within("fock5", fock["results"]["reconstruction"]["fidelity_mean"], 0.75);
  const auto giv = run("givens", "givens.parity_points = 0\n", "c3_givens");
  const double exp_givens[] = {0.80, 0.76, 0.71, 0.68};
  const char* names[] = {"givens0", "givens_pi/4", "givens_pi/2", "givens_pi"};
  for (int k = 0; k < 4; ++k) within(names[k], giv["results"]["rotations"][k]["reconstruction"]["fidelity_mean"], exp_givens[k]);

  const CalibrationTable table = CalibrationTable::device_default();
  for (const char* t : {"sup:0:1,3:1", "sup:0:0.5,2:0.6123724356957945i,4:0.6123724356957945"}) {
    const double f = synthesize_ladder_prep(TargetState::parse(t), table).ideal_fidelity;
    v.detail << "ladder ideal " << f << ' ';
    v.require(f > 0.99, std::string("ladder ideal ") + t);
  }
  GivensSpec spec;
  spec.theta = 0.0;
  const double f0 = run_givens(spec, SimSetup::ideal(7), {}, false).state_fidelity;
  v.detail << "givens0 ideal " << f0;
  v.require(f0 > 0.995, "givens theta=0 ideal");
}

void round_trip(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2026);
  const auto grid = make_square_grid(2.5, 21);
  const WignerMap map = build_map(grid, 6);
  BayesOptions bo;
  bo.repetitions = 1000000;
  double worst_li = 0.0, worst_bayes = 0.0;
  for (int i = 0; i < 20; ++i) {
    const DensityMatrix rho = random_state(6, rng);
    const WignerData w = wigner_exact_grid(rho, grid);
    RealVector x(w.values.size());
    for (std::size_t k = 0; k < w.values.size(); ++k) x(k) = w.values[k];
    const LinearInversion li = linear_inversion(x, map);
    worst_li = std::max(worst_li, trace_distance(li.rho, rho));
    bo.seed = stage_seed(7, "acceptance/roundtrip/" + std::to_string(i));
    worst_bayes = std::max(worst_bayes, trace_distance(bayesian_infer(li.rho, bo).mean, rho));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.detail << "LI trace distance " << worst_li << ", Bayes " << worst_bayes << ", " << secs << " s";
  v.require(worst_li < 1e-8, "LI");
  v.require(worst_bayes < 0.01, "Bayes");
  v.require(secs < 120.0, "runtime");
}

void parity_law(Verdict& v) {
  const auto s = run("givens", "reconstruct = false\ngivens.thetas = 0\n", "c5");
  const double dev = s["results"]["parity_law_max_deviation"];
  v.detail << "17-point max deviation from -cos " << dev;
  v.require(dev < 0.02, "parity law");
}

void channels(Verdict& v) {
  const SpaceDims dims(6);
  const HamiltonianModel hm = HamiltonianModel::ideal_jc(dims, 12.2, 0.0);
  const SystemModel m;
  EvolveOptions o;
  o.min_duration_ns = 2000.0;
  const CollapseSet loss = CollapseSet::from_model(hm.ops(), m, ChannelToggles{false, true, false});
  double worst = 0.0;
  for (int n = 1; n <= 4; ++n) {
    const StateVector s = dressed_state(dims, DressedLabel::plus(n));
    const DensityMatrix r = evolve(s * s.adjoint(), PulseSchedule{}, hm, loss, o).rho;
    const double rate = -std::log((s.adjoint() * r * s)(0).real()) / o.min_duration_ns;
    worst = std::max(worst, std::abs(rate * 2.0 * units::us_to_ns(m.t1_q_us) - 1.0));
  }
  const CollapseSet deph = CollapseSet::from_model(hm.ops(), m, ChannelToggles{false, false, true});
  std::mt19937_64 rng(6);
  const DensityMatrix rho0 = random_state(dims.total(), rng);
  const DensityMatrix r = evolve(rho0, PulseSchedule{}, hm, deph, o).rho;
  double drift = 0.0;
  for (int n = 0; n < dims.cavity_levels; ++n) {
    auto manifold = [&](const DensityMatrix& x) {
      double p = x(dims.index(n, 0), dims.index(n, 0)).real();
      if (n > 0) p += x(dims.index(n - 1, 1), dims.index(n - 1, 1)).real();
      return p;
    };
    drift = std::max(drift, std::abs(manifold(r) - manifold(rho0)));
  }
  v.detail << "decay rate vs 1/(2 T1) worst rel " << worst << ", manifold drift " << drift;
  v.require(worst < 0.05, "decay rate");
  v.require(drift < 1e-6, "manifold populations");
}

void ramp(Verdict& v) {
  const auto s = run("calibrate", "calibrate.kind = ramp\n", "c7");
  const double t = s["checks"][0]["value"];
  v.detail << "minimal ramp " << t << " ns";
  v.require(t >= 100.0 && t <= 400.0, "ramp window");
}

void parametric(Verdict& v) {
  const auto s = run("parametric", "", "c8");
  const bool shape = s["results"]["single_maximum"];
  double worst = 0.0;
  for (double x = 0.0; x <= 20.0; x += 0.01)
    worst = std::max(worst, std::abs(bessel_j1(x) - static_cast<double>(j1_series(x))));
  v.detail << "single maximum at " << s["results"]["peak_depth_MHz"].get<double>() << " MHz depth, Bessel vs series "
           << worst;
  v.require(shape, "g_eff shape");
  v.require(worst < 1e-10, "Bessel");
}

void hardware(Verdict& v) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ec(0.1, 0.4), ej(5.0, 40.0), phi(0.0, 1.5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const SquidParams p{ec(rng), ej(rng), 1.0, phi(rng)};
    const double f = symmetric_transmon_freq(p.ec_ghz, p.ej1_ghz, p.phi_e);
    const double s = symmetric_flux_sensitivity(p.ec_ghz, p.ej1_ghz, p.phi_e);
    worst = std::max({worst, std::abs(transmon_freq(p) - f) / f,
                      std::abs(flux_sensitivity(p) - s) / std::max(1.0, std::abs(s))});
  }
  double zeros = 0.0;
  for (double g : {1.5, 2.5, 4.02, 8.0})
    zeros = std::max({zeros, std::abs(flux_sensitivity({0.12, 12.4, g, 0.0})),
                      std::abs(flux_sensitivity({0.12, 12.4, g, kPi / 2}))});
  bool monotone = true;
  double last = std::abs(flux_sensitivity(squid_with_total_ej(0.12, 50.0, 1.0, kPi / 4)));
  for (double g = 1.1; g <= 8.0 + 1e-9; g += 0.1) {
    const double s = std::abs(flux_sensitivity(squid_with_total_ej(0.12, 50.0, g, kPi / 4)));
    monotone &= s < last;
    last = s;
  }
  v.detail << "gamma=1 identity " << worst << ", sweet-spot |sens| " << zeros << ", decreasing in gamma "
           << (monotone ? "yes" : "no");
  v.require(worst < 1e-12, "gamma=1 identity");
  v.require(zeros < 1e-12, "sweet spots");
  v.require(monotone, "monotone trend");
}

void determinism(Verdict& v) {
  const std::pair<const char*, const char*> runs[] = {
      {"spectrum", ""},
      {"hardware", ""},
      {"tomography", "target = sup:0:1,2:1\ngrid.points = 9\n"},
      {"prepare", "target = fock:1\nsim.cavity_levels = 4\ngrid.points = 9\nbayes.burn_in = 500\nbayes.samples = 64\n"}};
  int files = 0;
  for (const auto& [proto, cfg] : runs) {
    const fs::path a = g_work / "c10a", b = g_work / "c10b";
    fs::remove_all(a);
    fs::remove_all(b);
    for (const auto& d : {a, b}) {
      const RunReport r = run_protocol(proto, RunConfig::parse(cfg), d.string(), 42, false);
      v.require(r.exit_code == kExitOk, std::string(proto) + " ran");
    }
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      v.require(slurp(e.path()) == slurp(b / e.path().filename()), e.path().filename().string());
    }
  }
  v.detail << files << " files byte-identical across repeated seeded runs";
}

}  // namespace

int main(int argc, char** argv) {
  g_work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "jcsim_acceptance";
  fs::create_directories(g_work);
  const std::pair<int, std::function<void(Verdict&)>> criteria[] = {
      {1, spectrum}, {2, budget},  {3, headline},   {4, round_trip}, {5, parity_law},
      {6, channels}, {7, ramp},    {8, parametric}, {9, hardware},   {10, determinism}};
  int failed = 0;
  for (const auto& [n, fn] : criteria) {
    Verdict v;
    try {
      fn(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [error: " << e.what() << "]";
    }
    failed += !v.pass;
    std::printf("criterion %d: %s  %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
