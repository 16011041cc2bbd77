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

// Ladder climbing, multi-tone J_x transfers, Givens rotations and the
// simulated calibration experiments.

#include <algorithm>
#include <cctype>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "jcsim/calibration.hpp"
#include "jcsim/hilbert.hpp"
#include "jcsim/lindblad.hpp"
#include "jcsim/parallel.hpp"
#include "jcsim/pulse.hpp"
#include "jcsim/rng.hpp"

namespace jcsim {

/// Everything needed to run one simulated experiment.
struct SimSetup {
  SystemModel system;
  CalibrationTable table = CalibrationTable::device_default();
  int cavity_levels = 10;
  HamiltonianKind kind = HamiltonianKind::Calibrated;
  DriveCoupling coupling = DriveCoupling::Full;
  bool open_system = true;
  ChannelToggles channels = ChannelToggles::all();
  double dt_ns = 0.25;

  /// Resonant tones drive only their own transition, no decoherence.
  static SimSetup ideal(int cavity_levels = 10) {
    SimSetup s;
    s.cavity_levels = cavity_levels;
    s.coupling = DriveCoupling::Selective;
    s.open_system = false;
    s.channels = ChannelToggles::none();
    return s;
  }

  SpaceDims dims() const { return SpaceDims(cavity_levels); }

  HamiltonianModel hamiltonian() const {
    if (kind == HamiltonianKind::IdealJC)
      return HamiltonianModel::ideal_jc(dims(), system.g_mhz, system.delta_mhz, coupling);
    return HamiltonianModel::calibrated(dims(), table, system.g_mhz, system.omega_cav_ghz, coupling);
  }

  CollapseSet collapse(const OperatorSet& ops) const { return CollapseSet::from_model(ops, system, channels); }

  bool dissipative() const {
    return open_system && (channels.cavity_loss || channels.transmon_loss || channels.dephasing);
  }

  EvolveOptions options() const {
    EvolveOptions o;
    o.dt_ns = dt_ns;
    o.open_system = dissipative();
    return o;
  }
};

/// Runs a schedule from rho0 with the setup's model (pure-state path when
/// nothing dissipates).
inline DensityMatrix run_schedule(const SimSetup& setup, const HamiltonianModel& hm,
                                  const DensityMatrix& rho0, const PulseSchedule& schedule) {
  if (!setup.dissipative()) {
    Eigen::SelfAdjointEigenSolver<DensityMatrix> es(rho0);
    DensityMatrix out = DensityMatrix::Zero(rho0.rows(), rho0.cols());
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const double w = es.eigenvalues()(k);
      if (w < 1e-14) continue;
      const StateVector psi = evolve_state(es.eigenvectors().col(k), schedule, hm, setup.options());
      out += w * psi * psi.adjoint();
    }
    return out;
  }
  return evolve(rho0, schedule, hm, setup.collapse(hm.ops()), setup.options()).rho;
}

// ---------------------------------------------------------------- targets

/// Cavity state as a list of (Fock index, amplitude).
struct TargetState {
  std::vector<std::pair<int, cplx>> components;

  static TargetState fock(int n) { return TargetState{{{n, cplx(1.0)}}}; }

  int max_fock() const {
    int m = 0;
    for (const auto& [n, c] : components) m = std::max(m, n);
    return m;
  }

  /// Support with |c| above 1e-12, ascending Fock index.
  std::vector<std::pair<int, cplx>> support() const {
    std::vector<std::pair<int, cplx>> s;
    for (const auto& [n, c] : components)
      if (std::abs(c) > 1e-12) s.emplace_back(n, c);
    std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return s;
  }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& [n, c] : components) s += std::norm(c);
    return s;
  }

  void validate(int cavity_levels = std::numeric_limits<int>::max()) const {
    if (components.empty()) throw Error(ErrorKind::InvalidArgument, "target state has no components");
    for (const auto& [n, c] : components) {
      if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative Fock index in target");
      if (n >= cavity_levels) {
        throw Error(ErrorKind::Truncation, "target Fock index " + std::to_string(n) +
                                               " not below cavity truncation " + std::to_string(cavity_levels));
      }
    }
    if (std::abs(norm_squared() - 1.0) > 1e-12) {
      throw Error(ErrorKind::NonPhysical, "target state is not normalized");
    }
  }

  StateVector cavity_vector(int cavity_levels) const {
    validate(cavity_levels);
    StateVector v = StateVector::Zero(cavity_levels);
    for (const auto& [n, c] : components) v(n) += c;
    return v;
  }

  /// Target in the resonant eigenbasis before undressing: sum c_n |n+>.
  StateVector dressed_vector(const SpaceDims& dims) const {
    validate(dims.cavity_levels);
    StateVector v = StateVector::Zero(dims.total());
    for (const auto& [n, c] : components)
      v += c * dressed_state(dims, n == 0 ? DressedLabel::ground() : DressedLabel::plus(n));
    return v;
  }

  /// "fock:5" or "sup:0:0.5,2:0.612i,4:0.612". Superpositions are
  /// renormalized; amplitudes accept a, bi, a+bi, a-bi.
  static TargetState parse(const std::string& text) {
    auto fail = [&](const std::string& why) {
      return Error(ErrorKind::Config, "bad target '" + text + "': " + why);
    };
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw fail("expected fock:N or sup:...");
    const std::string kind = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    if (kind == "fock") {
      try {
        std::size_t used = 0;
        const int n = std::stoi(rest, &used);
        if (used != rest.size() || n < 0) throw fail("Fock index");
        return fock(n);
      } catch (const std::logic_error&) {
        throw fail("Fock index");
      }
    }
    if (kind != "sup") throw fail("unknown kind '" + kind + "'");
    TargetState t;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto c2 = item.find(':');
      if (c2 == std::string::npos) throw fail("component '" + item + "' needs n:amplitude");
      int n = 0;
      try {
        n = std::stoi(item.substr(0, c2));
      } catch (const std::logic_error&) {
        throw fail("Fock index in '" + item + "'");
      }
      t.components.emplace_back(n, parse_amplitude(item.substr(c2 + 1), fail));
    }
    const double nrm = std::sqrt(t.norm_squared());
    if (!(nrm > 0.0)) throw fail("zero norm");
    for (auto& [n, c] : t.components) c /= nrm;
    return t;
  }

  std::string str() const {
    std::ostringstream out;
    out.precision(6);
    for (std::size_t i = 0; i < components.size(); ++i) {
      if (i) out << " + ";
      out << "(" << components[i].second.real() << (components[i].second.imag() < 0 ? "" : "+")
          << components[i].second.imag() << "i)|" << components[i].first << ">";
    }
    return out.str();
  }

 private:
  template <typename Fail>
  static cplx parse_amplitude(std::string s, const Fail& fail) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }), s.end());
    if (s.empty()) throw fail("empty amplitude");
    auto num = [&](const std::string& x) {
      if (x.empty() || x == "+") return 1.0;
      if (x == "-") return -1.0;
      std::size_t used = 0;
      const double v = std::stod(x, &used);
      if (used != x.size()) throw fail("amplitude '" + s + "'");
      return v;
    };
    try {
      if (s.back() != 'i') return cplx(num(s), 0.0);
      const std::string body = s.substr(0, s.size() - 1);
      // split at the last sign that is not an exponent sign or the leading one
      std::size_t split = std::string::npos;
      for (std::size_t i = body.size(); i-- > 1;) {
        if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
          split = i;
          break;
        }
      }
      if (split == std::string::npos) return cplx(0.0, num(body));
      return cplx(num(body.substr(0, split)), num(body.substr(split)));
    } catch (const std::logic_error&) {
      throw fail("amplitude '" + s + "'");
    }
  }
};

// ------------------------------------------------------------ ladder prep

/// Alternating-sideband chain |0>, |1 s1>, ..., |n s_n> ending at `top`.
inline std::vector<DressedLabel> ladder_chain_to(const DressedLabel& top) {
  if (!top.valid()) throw Error(ErrorKind::InvalidArgument, "invalid dressed label");
  std::vector<DressedLabel> chain{DressedLabel::ground()};
  for (int k = 1; k <= top.N; ++k) {
    const bool same = (top.N - k) % 2 == 0;
    chain.push_back({k, same ? top.sign : -top.sign});
  }
  return chain;
}

struct LadderPlan {
  PulseSchedule schedule;
  std::vector<Transition> steps;
  std::vector<double> angles;
  std::vector<double> phases;
  double ideal_fidelity = 1.0;  // closed, in the model the phases were tuned in
};

struct LadderOptions {
  double omega_cav_ghz = 6.868;
  double g_mhz = 12.2;
  int phase_iterations = 4;
  double dt_ns = 0.25;
  // Closed model the tone phases are tuned in; the selective ideal model
  // when unset. Ac Stark shifts of the full coupling move the phases.
  std::optional<SimSetup> phase_model;
};

/// Fidelity of a final dressed-frame state against the target after the
/// ideal undress map.
inline double undressed_fidelity(const SpaceDims& dims, const TargetState& target, const StateVector& psi) {
  const Operator u = adiabatic_map(dims, MapDirection::Undress);
  const StateVector want = with_ground_transmon(dims, target.cavity_vector(dims.cavity_levels));
  return std::norm(want.dot(u * psi));
}

inline double undressed_fidelity(const SpaceDims& dims, const TargetState& target, const DensityMatrix& rho) {
  const Operator u = adiabatic_map(dims, MapDirection::Undress);
  const StateVector want = with_ground_transmon(dims, target.cavity_vector(dims.cavity_levels));
  return (want.adjoint() * u * rho * u.adjoint() * want)(0).real();
}

/// Sequential partial-angle and pi pulses up one sideband chain. Amplitudes
/// are peeled from the lowest Fock index up; tone phases are then tuned in
/// the selective closed model so the relative phases match the target.
inline LadderPlan synthesize_ladder_prep(const TargetState& target, const CalibrationTable& table,
                                         const LadderOptions& opt = {}) {
  target.validate();
  const auto sup = target.support();
  LadderPlan plan;
  const int top = sup.back().first;
  if (top == 0) return plan;

  const auto chain = ladder_chain_to(DressedLabel::plus(top));
  for (const auto& [n, c] : sup) {
    if (n != 0 && chain[n].sign != +1) {
      const Transition need = Transition::between(chain[n - 1], DressedLabel::plus(n));
      throw Error(ErrorKind::Synthesis, "target component |" + std::to_string(n) +
                                            "> needs transition " + need.key() +
                                            " off the climbing chain to |" + std::to_string(top) + "+>");
    }
  }
  std::vector<double> weight(top + 1, 0.0);
  std::vector<cplx> want(top + 1, 0.0);
  for (const auto& [n, c] : sup) {
    weight[n] = std::norm(c);
    want[n] = c;
  }
  double remaining = 1.0;
  for (int k = 0; k < top; ++k) {
    const Transition t = Transition::between(chain[k], chain[k + 1]);
    if (!table.contains(t)) {
      throw Error(ErrorKind::Synthesis, "missing calibrated transition " + t.key());
    }
    if (!table.at(t).sigma_ns) {
      throw Error(ErrorKind::Synthesis, "transition " + t.key() + " has no calibrated pulse width");
    }
    const double keep = remaining > 0.0 ? std::clamp(std::sqrt(weight[k] / remaining), 0.0, 1.0) : 0.0;
    const double theta = 2.0 * std::acos(keep);
    plan.steps.push_back(t);
    plan.angles.push_back(theta);
    plan.phases.push_back(0.0);
    remaining -= weight[k];
  }

  auto build = [&] {
    PulseSchedule s;
    for (std::size_t k = 0; k < plan.steps.size(); ++k) {
      if (plan.angles[k] < 1e-12) continue;
      s.append({gaussian_pi_pulse(plan.steps[k], table, plan.angles[k], opt.omega_cav_ghz, plan.phases[k])});
    }
    return s;
  };

  SimSetup ideal = SimSetup::ideal(top + 3);
  ideal.system.g_mhz = opt.g_mhz;
  ideal.system.omega_cav_ghz = opt.omega_cav_ghz;
  ideal.table = table;
  ideal.dt_ns = opt.dt_ns;
  if (opt.phase_model) {
    ideal = *opt.phase_model;
    ideal.open_system = false;
  }
  const SpaceDims dims = ideal.dims();
  const HamiltonianModel hm = ideal.hamiltonian();
  const Operator undress = adiabatic_map(dims, MapDirection::Undress);
  StateVector psi0 = StateVector::Zero(dims.total());
  psi0(0) = 1.0;

  for (int it = 0; it <= opt.phase_iterations; ++it) {
    plan.schedule = build();
    const StateVector psi = undress * evolve_state(psi0, plan.schedule, hm, ideal.options());
    plan.ideal_fidelity = undressed_fidelity(dims, target, StateVector(undress.adjoint() * psi));
    if (it == opt.phase_iterations || 1.0 - plan.ideal_fidelity < 1e-12 || sup.size() < 2) break;
    // Pulse k moves amplitude onto level k+1 and everything above it, so
    // its phase shifts every component with n > k by the same amount.
    double prev = 0.0;
    for (std::size_t i = 0; i < sup.size(); ++i) {
      const int n = sup[i].first;
      const cplx got = psi(dims.index(n, 0));
      const double mismatch = std::arg(want[n]) - std::arg(got);
      if (i == 0) {
        prev = mismatch;
        continue;
      }
      plan.phases[n - 1] += mismatch - prev;
      prev = mismatch;
    }
  }
  return plan;
}

// ------------------------------------------------------------- multitone

/// Simultaneous flat-top tones on chain links with given complex amplitudes.
inline PulseSchedule multitone_schedule(const std::vector<Transition>& links, const std::vector<cplx>& amps,
                                        const std::vector<double>& detunings_mhz, double duration_ns,
                                        double edge_ns) {
  std::vector<Tone> tones;
  for (std::size_t i = 0; i < links.size(); ++i) {
    Tone t;
    t.detuning_mhz = detunings_mhz[i];
    t.target = links[i];
    t.envelope = Envelope::cosine_ramp(duration_ns, edge_ns, std::abs(amps[i]), std::arg(amps[i]));
    tones.push_back(t);
  }
  PulseSchedule s;
  if (!tones.empty()) s.add_segment(0.0, std::move(tones));
  s.set_total_duration(duration_ns);
  return s;
}

struct MultitoneOptions {
  double duration_ns = 800.0;
  double edge_ns = 2.0;
  std::vector<DressedLabel> chain;   // empty: climbing chain to the target's top level
  std::vector<cplx> init;            // empty: seeded jitter around the J_x amplitudes
  int max_iterations = 2000;
  double relative_step = 1e-4;
  double target_infidelity = 1e-6;
  double init_jitter = 0.1;
  std::uint64_t seed = 0;
  SimSetup setup = SimSetup::ideal(0);  // 0 cavity levels: top level + 3
};

struct MultitoneResult {
  JxSpec spec;
  std::vector<cplx> amplitudes;
  double fidelity = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string warning;
};

/// Fidelity objective of the multi-tone transfer; parameters are (Re, Im)
/// of every link amplitude in MHz.
class MultitoneObjective {
 public:
  MultitoneObjective(const TargetState& target, const MultitoneOptions& opt)
      : opt_(opt), setup_(opt.setup) {
    target.validate();
    const int top = target.max_fock();
    if (setup_.cavity_levels <= 0) setup_.cavity_levels = std::max(top + 3, 3);
    chain_ = opt.chain.empty() ? ladder_chain_to(top == 0 ? DressedLabel::plus(1) : DressedLabel::plus(top))
                               : opt.chain;
    if (chain_.size() < 2) throw Error(ErrorKind::InvalidArgument, "multitone chain needs d >= 2");
    for (std::size_t i = 0; i + 1 < chain_.size(); ++i) links_.push_back(Transition::between(chain_[i], chain_[i + 1]));
    hm_ = std::make_unique<HamiltonianModel>(setup_.hamiltonian());
    for (const auto& l : links_) {
      detunings_.push_back(setup_.kind == HamiltonianKind::Calibrated
                               ? setup_.table.detuning_mhz(l, setup_.system.omega_cav_ghz)
                               : hm_->transition_mhz(l));
    }
    const SpaceDims dims = setup_.dims();
    const std::vector<DressedLabel> labels = dressed_labels(dims);
    for (const auto& [n, c] : target.support()) {
      const DressedLabel want = n == 0 ? DressedLabel::ground() : DressedLabel::plus(n);
      if (std::find(chain_.begin(), chain_.end(), want) == chain_.end()) {
        throw Error(ErrorKind::InvalidArgument, "multitone chain does not cover |" + want.str() + ">");
      }
    }
    target_ = target.dressed_vector(dims);
    psi0_ = StateVector::Zero(dims.total());
    psi0_(0) = 1.0;
    if (!(opt.duration_ns > opt.edge_ns)) throw Error(ErrorKind::InvalidArgument, "duration must exceed the ramp edges");
  }

  const std::vector<DressedLabel>& chain() const { return chain_; }
  const std::vector<Transition>& links() const { return links_; }
  const std::vector<double>& detunings() const { return detunings_; }
  std::size_t size() const { return 2 * links_.size(); }
  int evaluations() const { return evaluations_; }
  const SimSetup& setup() const { return setup_; }

  static std::vector<cplx> unpack(const Eigen::VectorXd& x) {
    std::vector<cplx> a(x.size() / 2);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = cplx(x(2 * i), x(2 * i + 1));
    return a;
  }
  static Eigen::VectorXd pack(const std::vector<cplx>& a) {
    Eigen::VectorXd x(2 * a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      x(2 * i) = a[i].real();
      x(2 * i + 1) = a[i].imag();
    }
    return x;
  }

  PulseSchedule schedule(const std::vector<cplx>& amps) const {
    return multitone_schedule(links_, amps, detunings_, opt_.duration_ns, opt_.edge_ns);
  }

  double operator()(const Eigen::VectorXd& x) const {
    ++evaluations_;
    const StateVector psi = evolve_state(psi0_, schedule(unpack(x)), *hm_, setup_.options());
    return std::norm(target_.dot(psi));
  }

  /// Central differences with step relative_step * max(|x_i|, scale).
  Eigen::VectorXd gradient(const Eigen::VectorXd& x, double relative_step) const {
    const double scale = std::max(x.cwiseAbs().maxCoeff(), 1e-3);
    std::vector<double> g(x.size());
    parallel_for(x.size(), [&](std::size_t i) {
      const double h = relative_step * std::max(std::abs(x(i)), scale);
      Eigen::VectorXd xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      g[i] = ((*this)(xp) - (*this)(xm)) / (2.0 * h);
    });
    return Eigen::Map<Eigen::VectorXd>(g.data(), g.size());
  }

  /// Amplitudes 2 eta_n A sqrt(n (d - n)) of an exact J_x pi transfer.
  std::vector<cplx> jx_amplitudes() const {
    JxSpec spec;
    spec.chain = chain_;
    spec.amplitude_mhz = JxSpec::amplitude_for_duration(opt_.duration_ns - opt_.edge_ns);
    std::vector<cplx> a;
    const int d = static_cast<int>(chain_.size());
    for (int n = 1; n < d; ++n) {
      const double eta = 1.0 / (2.0 * std::abs(ideal_drive_element(links_[n - 1])));
      a.push_back(2.0 * eta * spec.amplitude_mhz * std::sqrt(double(n) * (d - n)));
    }
    return a;
  }

 private:
  MultitoneOptions opt_;
  SimSetup setup_;
  std::vector<DressedLabel> chain_;
  std::vector<Transition> links_;
  std::vector<double> detunings_;
  std::unique_ptr<HamiltonianModel> hm_;
  StateVector target_, psi0_;
  mutable std::atomic<int> evaluations_{0};
};

/// Gradient ascent with backtracking on the closed-system transfer fidelity.
inline MultitoneResult optimize_multitone(const TargetState& target, const MultitoneOptions& opt = {}) {
  MultitoneObjective f(target, opt);
  MultitoneResult r;
  r.spec.chain = f.chain();
  r.spec.amplitude_mhz = JxSpec::amplitude_for_duration(opt.duration_ns - opt.edge_ns);
  r.spec.edge_ns = opt.edge_ns;

  const std::size_t links = f.links().size();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2 * links);
  const double f_zero = f(zero);
  if (1.0 - f_zero < opt.target_infidelity) {
    r.amplitudes.assign(links, cplx(0.0));
    r.spec.amplitude_override = r.amplitudes;
    r.fidelity = f_zero;
    r.converged = true;
    r.evaluations = f.evaluations();
    return r;
  }

  std::vector<cplx> init = opt.init;
  if (init.empty()) {
    init = f.jx_amplitudes();
    auto rng = stage_rng(opt.seed, "multitone-init");
    std::normal_distribution<double> normal(0.0, opt.init_jitter);
    for (auto& a : init) a *= cplx(1.0 + normal(rng), normal(rng));
  }
  if (init.size() != links) throw Error(ErrorKind::InvalidArgument, "init amplitudes must have one entry per link");

  Eigen::VectorXd x = MultitoneObjective::pack(init);
  double fx = f(x);
  double step = 1.0;
  for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
    if (1.0 - fx < opt.target_infidelity) {
      r.converged = true;
      break;
    }
    const Eigen::VectorXd g = f.gradient(x, opt.relative_step);
    const double gn2 = g.squaredNorm();
    if (gn2 < 1e-24) {
      r.converged = true;
      break;
    }
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt) {
      const Eigen::VectorXd trial = x + step * g;
      const double ft = f(trial);
      if (ft >= fx + 1e-4 * step * gn2) {
        x = trial;
        fx = ft;
        moved = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      r.converged = true;  // stationary to line-search resolution
      break;
    }
  }
  if (!r.converged) r.warning = "iteration cap reached; returning best amplitudes found";
  r.amplitudes = MultitoneObjective::unpack(x);
  r.spec.amplitude_override = r.amplitudes;
  r.fidelity = fx;
  r.evaluations = f.evaluations();
  return r;
}

// ---------------------------------------------------------------- Givens

struct GivensSpec {
  int n_a = 1;
  int n_b = 4;
  double theta = 0.0;
  double phi = 0.0;
  std::vector<DressedLabel> chain;  // empty: default_givens_chain
  double jx_pi_time_ns = 800.0;     // J_x area pi / A
  EtaMode eta_mode = EtaMode::MatrixElement;
  double omega_cav_ghz = 6.868;
};

/// Chain from |n_a+> to |(n_b-1)->: straight up when n_b - n_a is even,
/// otherwise down to |0> and up the other branch.
inline std::vector<DressedLabel> default_givens_chain(int n_a, int n_b) {
  if (n_a < 1 || n_b <= n_a) throw Error(ErrorKind::InvalidArgument, "Givens needs 1 <= n_A < n_B");
  std::vector<DressedLabel> chain;
  if ((n_b - n_a) % 2 == 0) {
    for (int k = n_a; k <= n_b - 1; ++k) chain.push_back({k, (k - n_a) % 2 == 0 ? +1 : -1});
    return chain;
  }
  for (int k = n_a; k >= 1; --k) chain.push_back({k, (n_a - k) % 2 == 0 ? +1 : -1});
  chain.push_back(DressedLabel::ground());
  for (int k = 1; k <= n_b - 1; ++k) chain.push_back({k, (n_b - 1 - k) % 2 == 0 ? -1 : +1});
  return chain;
}

struct GivensPlan {
  PulseSchedule schedule;
  JxSpec jx;
  Transition rotation;
  /// Final dressed-frame amplitudes <n_i +| U |n_j +> for i, j in {A, B}.
  Eigen::Matrix2cd block;
  double unitarity_error = 0.0;
  /// Phases removed to compare against the ideal rotation (frame phases).
  double phase_a = 0.0, phase_b = 0.0;
  double phi_effective = 0.0;
  double max_spectator_change = 0.0;
};

/// J_x(chain) ; theta pulse on |(n_B-1)-> <-> |n_B+> ; reversed J_x.
inline GivensPlan givens_rotation(const GivensSpec& spec, const CalibrationTable& table, double g_mhz = 12.2,
                                  double dt_ns = 0.25) {
  GivensPlan p;
  p.jx.chain = spec.chain.empty() ? default_givens_chain(spec.n_a, spec.n_b) : spec.chain;
  if (p.jx.chain.front() != DressedLabel::plus(spec.n_a) || p.jx.chain.back() != DressedLabel::minus(spec.n_b - 1)) {
    throw Error(ErrorKind::InvalidArgument, "Givens chain must run from |n_A+> to |(n_B-1)->");
  }
  p.jx.amplitude_mhz = JxSpec::amplitude_for_duration(spec.jx_pi_time_ns);
  p.jx.eta_mode = spec.eta_mode;
  p.rotation = Transition::between(DressedLabel::minus(spec.n_b - 1), DressedLabel::plus(spec.n_b));
  (void)table.at(p.rotation);
  const PulseSchedule forward = jx_schedule(p.jx, table, spec.omega_cav_ghz);
  JxSpec rev = p.jx;
  rev.reversed = true;
  const PulseSchedule backward = jx_schedule(rev, table, spec.omega_cav_ghz);
  PulseSchedule middle;
  const double angle = std::abs(spec.theta);
  if (angle > 1e-15) {
    if (angle > kTwoPi + 1e-12) throw Error(ErrorKind::InvalidArgument, "|theta| must be at most 2 pi");
    const double phase = spec.theta < 0.0 ? spec.phi + kPi : spec.phi;
    middle.append({gaussian_pi_pulse(p.rotation, table, angle, spec.omega_cav_ghz, phase)});
  }
  p.schedule = sequence_concat({forward, middle, backward});

  // Ideal-model action on the two computational levels and the spectators.
  SimSetup ideal = SimSetup::ideal(spec.n_b + 2);
  ideal.table = table;
  ideal.system.g_mhz = g_mhz;
  ideal.system.omega_cav_ghz = spec.omega_cav_ghz;
  ideal.dt_ns = dt_ns;
  const SpaceDims dims = ideal.dims();
  const HamiltonianModel hm = ideal.hamiltonian();
  const DressedLabel la = DressedLabel::plus(spec.n_a), lb = DressedLabel::plus(spec.n_b);
  const StateVector a = dressed_state(dims, la), b = dressed_state(dims, lb);
  const StateVector ua = evolve_state(a, p.schedule, hm, ideal.options());
  const StateVector ub = evolve_state(b, p.schedule, hm, ideal.options());
  p.block << a.dot(ua), a.dot(ub), b.dot(ua), b.dot(ub);
  p.unitarity_error = (p.block.adjoint() * p.block - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
  // block = diag(e^{i a}, e^{i b}) R(theta, phi_eff)
  const double c = std::cos(spec.theta / 2.0), s = std::sin(spec.theta / 2.0);
  p.phi_effective = spec.phi;
  if (std::abs(c) > 1e-6) {
    p.phase_a = std::arg(p.block(0, 0) * (c < 0 ? -1.0 : 1.0));
    p.phase_b = std::arg(p.block(1, 1) * (c < 0 ? -1.0 : 1.0));
    if (std::abs(s) > 1e-6) p.phi_effective = std::arg(p.block(1, 0) * (s < 0 ? -1.0 : 1.0)) - p.phase_b;
  } else {
    p.phase_b = std::arg(p.block(1, 0) * (s < 0 ? -1.0 : 1.0)) - spec.phi;
    p.phase_a = std::arg(-p.block(0, 1) * (s < 0 ? -1.0 : 1.0)) + spec.phi;
  }
  for (const auto& label : dressed_labels(dims)) {
    if (label == la || label == lb) continue;
    if (label.N > spec.n_b) continue;
    const StateVector s = dressed_state(dims, label);
    const StateVector us = evolve_state(s, p.schedule, hm, ideal.options());
    p.max_spectator_change = std::max(p.max_spectator_change, std::abs(std::norm(s.dot(us)) - 1.0));
  }
  return p;
}

// ------------------------------------------------------------ calibration

/// Excitation-number parity after ideal undressing.
inline double system_parity(const OperatorSet& ops, const DensityMatrix& rho) {
  return (excitation_parity(ops) * rho).trace().real();
}

struct SpectroscopyOptions {
  double freq_start_ghz = 6.80;
  double freq_stop_ghz = 6.95;
  double freq_step_mhz = 0.25;
  double probe_amplitude_mhz = 0.5;
  double probe_duration_ns = 1000.0;
  double peak_threshold = 0.05;
};

struct SpectroscopyPeak {
  double freq_ghz = 0.0;
  double height = 0.0;
  bool ambiguous = false;
};

struct SpectroscopyResult {
  std::vector<double> freq_ghz;
  std::vector<double> response;  // fraction of parity flipped
  std::vector<SpectroscopyPeak> peaks;
  double linewidth_mhz = 0.0;
  bool ambiguous = false;
};

/// Local maxima above threshold, refined by a parabola through 3 points.
inline std::vector<SpectroscopyPeak> find_peaks(const std::vector<double>& x, const std::vector<double>& y,
                                                double threshold, double linewidth) {
  std::vector<SpectroscopyPeak> peaks;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] > threshold && y[i] >= y[i - 1] && y[i] > y[i + 1])) continue;
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    const double shift = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
    const double h = x[i + 1] - x[i];
    peaks.push_back({x[i] + shift * h, y1 - 0.25 * (y0 - y2) * shift, false});
  }
  for (std::size_t i = 0; i + 1 < peaks.size(); ++i) {
    if (std::abs(peaks[i + 1].freq_ghz - peaks[i].freq_ghz) < linewidth) {
      peaks[i].ambiguous = peaks[i + 1].ambiguous = true;
    }
  }
  return peaks;
}

/// Weak flat probe from a dressed level; parity read after ideal undressing.
inline SpectroscopyResult calibrate_spectroscopy(const DressedLabel& initial, const SimSetup& setup,
                                                 const SpectroscopyOptions& opt = {}) {
  if (initial.N + 2 > setup.cavity_levels) {
    throw Error(ErrorKind::Truncation, "cavity truncation too small for spectroscopy from |" + initial.str() + ">");
  }
  const auto chain = ladder_chain_to(initial);
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) (void)setup.table.at(Transition::between(chain[i], chain[i + 1]));
  const HamiltonianModel hm = setup.hamiltonian();
  const SpaceDims dims = setup.dims();
  const DensityMatrix rho0 = projector(dressed_state(dims, initial));
  const double p0 = system_parity(hm.ops(), rho0);
  SpectroscopyResult r;
  const int n = static_cast<int>(std::floor((opt.freq_stop_ghz - opt.freq_start_ghz) * 1e3 / opt.freq_step_mhz + 1e-9)) + 1;
  r.freq_ghz.resize(n);
  r.response.resize(n);
  for (int i = 0; i < n; ++i) r.freq_ghz[i] = opt.freq_start_ghz + i * opt.freq_step_mhz * 1e-3;
  parallel_for(n, [&](std::size_t i) {
    PulseSchedule s;
    Tone t;
    t.detuning_mhz = (r.freq_ghz[i] - setup.system.omega_cav_ghz) * 1e3;
    t.envelope = Envelope::flat(opt.probe_duration_ns, opt.probe_amplitude_mhz);
    s.append({t});
    const DensityMatrix rho = run_schedule(setup, hm, rho0, s);
    r.response[i] = 0.5 * (1.0 - p0 * system_parity(hm.ops(), rho));
  });
  r.linewidth_mhz = 1e3 / opt.probe_duration_ns;
  r.peaks = find_peaks(r.freq_ghz, r.response, opt.peak_threshold, r.linewidth_mhz * 1e-3);
  r.ambiguous = std::any_of(r.peaks.begin(), r.peaks.end(), [](const auto& p) { return p.ambiguous; });
  return r;
}

struct PowerRabiOptions {
  double max_volts = 1.0;
  int points = 41;
  /// Transmon drive amplitude per volt on this line (MHz/V). 0 selects the
  /// value that reproduces the table's Rabi rate at the reference voltage.
  double drive_gain_mhz_per_volt = 0.0;
};

struct PowerRabiResult {
  std::vector<double> volts;
  std::vector<double> parity;
  double pi_volts = 0.0;
  double rabi_mhz_at_reference = 0.0;  // effective rate on the transition
  double r_squared = 0.0;
};

inline double default_drive_gain(const Transition& t, const CalibrationTable& table) {
  return table.at(t).rabi_mhz / (std::abs(ideal_drive_element(t)) * CalibrationTable::kReferenceVolts);
}

/// Parity after a fixed-shape Gaussian versus drive voltage; a cosine fit in
/// volts gives the pi point and the Rabi rate at the reference voltage.
inline PowerRabiResult calibrate_power_rabi(const Transition& transition, const SimSetup& setup,
                                            const PowerRabiOptions& opt = {}) {
  const CalibrationRow& row = setup.table.at(transition);
  if (!row.sigma_ns) throw Error(ErrorKind::MissingCalibration, "no pulse width for " + transition.str());
  if (transition.upper.N + 2 > setup.cavity_levels) throw Error(ErrorKind::Truncation, "cavity truncation too small");
  const double gain = opt.drive_gain_mhz_per_volt > 0.0 ? opt.drive_gain_mhz_per_volt : default_drive_gain(transition, setup.table);
  const HamiltonianModel hm = setup.hamiltonian();
  const DensityMatrix rho0 = projector(dressed_state(setup.dims(), transition.lower));
  const double p0 = system_parity(hm.ops(), rho0);
  PowerRabiResult r;
  r.volts.resize(opt.points);
  r.parity.resize(opt.points);
  for (int i = 0; i < opt.points; ++i) r.volts[i] = opt.max_volts * i / (opt.points - 1);
  const double detuning = setup.table.detuning_mhz(transition, setup.system.omega_cav_ghz);
  parallel_for(opt.points, [&](std::size_t i) {
    Tone t;
    t.detuning_mhz = detuning;
    t.target = transition;
    t.envelope = Envelope::gaussian(*row.sigma_ns, gain * r.volts[i]);
    PulseSchedule s;
    s.append({t});
    r.parity[i] = p0 * system_parity(hm.ops(), run_schedule(setup, hm, rho0, s));
  });
  const Envelope shape = Envelope::gaussian(*row.sigma_ns, 1.0);
  const double m = std::abs(ideal_drive_element(transition));
  // angle per volt if the line behaved ideally; the fit searches around it
  const double k_guess = units::mhz_to_rad_per_ns(gain * m) * shape.shape_integral();
  const CosineFit fit = fit_cosine(r.volts, r.parity, 0.3 * k_guess, 3.0 * k_guess, 3000);
  r.r_squared = fit.r_squared;
  if (kPi / fit.omega > opt.max_volts) {
    throw Error(ErrorKind::Range, "no parity flip within the voltage sweep for " + transition.str());
  }
  r.pi_volts = kPi / fit.omega;
  r.rabi_mhz_at_reference =
      units::rad_per_ns_to_mhz(fit.omega * CalibrationTable::kReferenceVolts / shape.shape_integral());
  return r;
}

struct SigmaSweepResult {
  std::vector<double> sigma_ns;
  std::vector<double> return_score;  // (1 + P P_0) / 2 after a 2 pi rotation
  double best_sigma_ns = 0.0;
  bool at_boundary = false;
};

/// 2 pi rotation on a transition for each width; best width maximizes return
/// of the parity to its initial value.
inline SigmaSweepResult calibrate_sigma(const Transition& transition, const SimSetup& setup,
                                        const std::vector<double>& sigmas) {
  if (sigmas.empty()) throw Error(ErrorKind::InvalidArgument, "empty sigma sweep");
  const HamiltonianModel hm = setup.hamiltonian();
  const DensityMatrix rho0 = projector(dressed_state(setup.dims(), transition.lower));
  const double p0 = system_parity(hm.ops(), rho0);
  SigmaSweepResult r;
  r.sigma_ns = sigmas;
  r.return_score.resize(sigmas.size());
  parallel_for(sigmas.size(), [&](std::size_t i) {
    PulseSchedule s;
    s.append({gaussian_pi_pulse(transition, setup.table, kTwoPi, setup.system.omega_cav_ghz, 0.0, sigmas[i])});
    r.return_score[i] = 0.5 * (1.0 + p0 * system_parity(hm.ops(), run_schedule(setup, hm, rho0, s)));
  });
  const auto best = std::max_element(r.return_score.begin(), r.return_score.end()) - r.return_score.begin();
  r.best_sigma_ns = sigmas[best];
  r.at_boundary = best == 0 || best + 1 == static_cast<std::ptrdiff_t>(sigmas.size());
  return r;
}

struct RampCalibration {
  std::vector<double> duration_ns;
  std::vector<double> population;         // |1,g> after the ramp, setup channels
  std::vector<double> closed_population;  // same ramp without dissipation
  double plateau = 0.0;                   // closed, longest duration
  double minimal_duration_ns = 0.0;
};

/// |1+> at resonance, cosine ramp to delta_end; the minimal duration is the
/// shortest one after which the closed-system |1,g> population stays within
/// `tolerance` (relative) of its value at the longest duration. Decay during
/// the ramp would otherwise pull that plateau down without bound.
inline RampCalibration calibrate_ramp(const SimSetup& setup, const std::vector<double>& durations,
                                      double delta_end_mhz = 100.0, double tolerance = 0.005,
                                      double dt_ns = 0.1) {
  if (durations.empty()) throw Error(ErrorKind::InvalidArgument, "empty ramp sweep");
  const SpaceDims dims(std::max(3, std::min(setup.cavity_levels, 4)));
  const DensityMatrix rho0 = projector(dressed_state(dims, DressedLabel::plus(1)));
  const StateVector want = undressed_partner(dims, DressedLabel::plus(1));
  RampCalibration r;
  r.duration_ns = durations;
  r.population.resize(durations.size());
  r.closed_population.resize(durations.size());
  parallel_for(durations.size(), [&](std::size_t i) {
    RampSpec ramp{0.0, delta_end_mhz, durations[i], RampShape::Cosine};
    auto pop = [&](bool open) {
      const DensityMatrix rho = adiabatic_detune(rho0, ramp, setup.system, DetuneMode::Simulated, dims, open, dt_ns);
      return (want.adjoint() * rho * want)(0).real();
    };
    r.closed_population[i] = pop(false);
    r.population[i] = setup.dissipative() ? pop(true) : r.closed_population[i];
  });
  const std::size_t last = std::max_element(durations.begin(), durations.end()) - durations.begin();
  r.plateau = r.closed_population[last];
  std::vector<std::size_t> order(durations.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return durations[a] < durations[b]; });
  r.minimal_duration_ns = durations[order.back()];
  for (std::size_t k = order.size(); k-- > 0;) {
    if (std::abs(r.closed_population[order[k]] - r.plateau) > tolerance * std::abs(r.plateau)) break;
    r.minimal_duration_ns = durations[order[k]];
  }
  return r;
}

}  // namespace jcsim
