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

// Driven, dissipative evolution of the cavity-transmon system.
//
// Each step of length dt uses the Hamiltonian sampled at the step midpoint,
// with every tone's carrier averaged over the step. Closed evolution applies
// exp(-i H dt) exactly (scaled Taylor series). Open evolution wraps the
// unitary in two half steps of the dissipator (Strang splitting), each
// integrated with RK4; every stage is trace preserving.

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jcsim/calibration.hpp"
#include "jcsim/hilbert.hpp"
#include "jcsim/parallel.hpp"
#include "jcsim/pulse.hpp"

namespace jcsim {

enum class DriveCoupling {
  Full,       // every tone drives sigma+ and reaches all transitions
  Selective,  // each tone only drives its target transition
};

enum class HamiltonianKind { IdealJC, Calibrated };

/// Time-independent part of the Hamiltonian plus the drive coupling rules.
class HamiltonianModel {
 public:
  static HamiltonianModel ideal_jc(const SpaceDims& dims, double g_mhz, double delta_mhz = 0.0,
                                   DriveCoupling coupling = DriveCoupling::Full) {
    HamiltonianModel m(dims, coupling, HamiltonianKind::IdealJC, g_mhz);
    m.h_static_ = jc_hamiltonian(m.ops_, g_mhz, delta_mhz);
    m.static_delta_mhz_ = delta_mhz;
    return m;
  }

  /// Resonant eigenbasis of the JC model with level energies taken from the
  /// calibration table. Levels the table cannot reach use a least-squares fit
  /// E(N +-) = s N +- sqrt(N) g' over the reachable ones.
  static HamiltonianModel calibrated(const SpaceDims& dims, const CalibrationTable& table,
                                     double g_mhz, double omega_cav_ghz,
                                     DriveCoupling coupling = DriveCoupling::Full) {
    HamiltonianModel m(dims, coupling, HamiltonianKind::Calibrated, g_mhz);
    const auto known = table.level_energies_mhz(omega_cav_ghz);
    double s = 0.0, gfit = g_mhz;
    {
      Eigen::MatrixXd A(0, 2);
      std::vector<double> rhs;
      std::vector<std::array<double, 2>> rows;
      for (const auto& [label, e] : known) {
        if (label.N == 0) continue;
        rows.push_back({double(label.N), label.sign * std::sqrt(double(label.N))});
        rhs.push_back(e);
      }
      if (rows.size() >= 2) {
        A.resize(rows.size(), 2);
        Eigen::VectorXd b(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
          A(i, 0) = rows[i][0];
          A(i, 1) = rows[i][1];
          b(i) = rhs[i];
        }
        Eigen::Vector2d x = A.colPivHouseholderQr().solve(b);
        s = x(0);
        gfit = x(1);
      }
    }
    const Operator basis = dressed_basis(dims);
    const auto labels = dressed_labels(dims);
    Eigen::VectorXd energies(dims.total());
    for (std::size_t k = 0; k < labels.size(); ++k) {
      auto it = known.find(labels[k]);
      const double e = it != known.end()
                           ? it->second
                           : s * labels[k].N + labels[k].sign * std::sqrt(double(labels[k].N)) * gfit;
      energies(k) = units::mhz_to_rad_per_ns(e);
    }
    energies(dims.total() - 1) = units::mhz_to_rad_per_ns(s * dims.cavity_levels);
    m.h_static_ = basis * energies.cast<cplx>().asDiagonal() * basis.adjoint();
    for (std::size_t k = 0; k < labels.size(); ++k) m.level_energy_mhz_[labels[k]] = units::rad_per_ns_to_mhz(energies(k));
    return m;
  }

  const SpaceDims& dims() const { return dims_; }
  const OperatorSet& ops() const { return ops_; }
  const Operator& h_static() const { return h_static_; }
  HamiltonianKind kind() const { return kind_; }
  DriveCoupling coupling() const { return coupling_; }
  double g_mhz() const { return g_mhz_; }
  double static_delta_mhz() const { return static_delta_mhz_; }

  /// Level energy in MHz: calibrated value or +-sqrt(N) g.
  double level_energy_mhz(const DressedLabel& l) const {
    auto it = level_energy_mhz_.find(l);
    if (it != level_energy_mhz_.end()) return it->second;
    return dressed_energy_mhz(l, g_mhz_);
  }

  /// Resonance of a transition in this model, MHz from w_cav.
  double transition_mhz(const Transition& t) const {
    return level_energy_mhz(t.upper) - level_energy_mhz(t.lower);
  }

  /// Absolute detuning profile Delta(t) in MHz; replaces the static detuning.
  void set_detuning_profile(std::function<double(double)> profile) {
    if (kind_ != HamiltonianKind::IdealJC) {
      throw Error(ErrorKind::InvalidArgument, "detuning profiles require the JC Hamiltonian");
    }
    delta_profile_ = std::move(profile);
  }
  const std::function<double(double)>& detuning_profile() const { return delta_profile_; }

  /// Operator X such that the tone adds 1/2 (Omega e^{-i w t} X + h.c.).
  const Operator& drive_operator(const Tone& tone) const {
    if (coupling_ == DriveCoupling::Full) return ops_.sigma_plus;
    if (!tone.target) {
      throw Error(ErrorKind::InvalidArgument, "selective drive needs a tone target transition");
    }
    auto it = selective_cache_.find(*tone.target);
    if (it != selective_cache_.end()) return it->second;
    const StateVector lo = dressed_state(dims_, tone.target->lower);
    const StateVector hi = dressed_state(dims_, tone.target->upper);
    const cplx m = (hi.adjoint() * ops_.sigma_plus * lo)(0);
    return selective_cache_.emplace(*tone.target, m * hi * lo.adjoint()).first->second;
  }

 private:
  HamiltonianModel(const SpaceDims& dims, DriveCoupling coupling, HamiltonianKind kind, double g)
      : dims_(dims), ops_(build_operators(dims)), coupling_(coupling), kind_(kind), g_mhz_(g) {}

  SpaceDims dims_;
  OperatorSet ops_;
  Operator h_static_;
  DriveCoupling coupling_;
  HamiltonianKind kind_;
  double g_mhz_;
  double static_delta_mhz_ = 0.0;
  std::map<DressedLabel, double> level_energy_mhz_;
  std::function<double(double)> delta_profile_;
  mutable std::map<Transition, Operator> selective_cache_;
};

struct ChannelToggles {
  bool cavity_loss = true;
  bool transmon_loss = true;
  bool dephasing = true;

  static ChannelToggles none() { return {false, false, false}; }
  static ChannelToggles all() { return {true, true, true}; }
};

/// Jump operators already scaled by sqrt(rate), rates in 1/ns.
struct CollapseSet {
  std::vector<Operator> ops;
  std::vector<std::string> names;

  static CollapseSet from_model(const OperatorSet& o, const SystemModel& model,
                                ChannelToggles toggles = ChannelToggles::all()) {
    CollapseSet c;
    if (toggles.cavity_loss) {
      c.ops.push_back(std::sqrt(1.0 / units::us_to_ns(model.t1_cav_us)) * o.a);
      c.names.push_back("cavity_loss");
    }
    if (toggles.transmon_loss) {
      c.ops.push_back(std::sqrt(1.0 / units::us_to_ns(model.t1_q_us)) * o.sigma_minus);
      c.names.push_back("transmon_loss");
    }
    if (toggles.dephasing) {
      c.ops.push_back(std::sqrt(1.0 / (2.0 * units::us_to_ns(model.t_phi_us()))) * o.sigma_z);
      c.names.push_back("dephasing");
    }
    return c;
  }

  bool empty() const { return ops.empty(); }
};

enum class RampShape { Cosine, Linear };

struct RampSpec {
  double delta_start_mhz = 0.0;
  double delta_end_mhz = 100.0;
  double duration_ns = 200.0;
  RampShape shape = RampShape::Cosine;

  double delta_at(double t) const {
    if (duration_ns <= 0.0 || t >= duration_ns) return delta_end_mhz;
    if (t <= 0.0) return delta_start_mhz;
    const double x = t / duration_ns;
    const double f = shape == RampShape::Cosine ? 0.5 * (1.0 - std::cos(kPi * x)) : x;
    return delta_start_mhz + (delta_end_mhz - delta_start_mhz) * f;
  }
};

struct EvolveOptions {
  double dt_ns = 0.25;
  bool open_system = true;
  /// Evolve at least this long even if the schedule is shorter.
  double min_duration_ns = 0.0;
  /// Record observables every this many ns (0: only start and end).
  double record_every_ns = 0.0;
  std::vector<Operator> observables;
  std::vector<std::string> observable_names;
};

struct Trajectory {
  std::vector<double> times_ns;
  std::vector<std::vector<double>> values;  // per time: observables..., trace, purity
  std::vector<std::string> names;

  /// CSV: time_ns, observables, trace, purity.
  std::string to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "time_ns";
    for (const auto& n : names) out << ',' << n;
    out << ",trace,purity\n";
    for (std::size_t i = 0; i < times_ns.size(); ++i) {
      out << times_ns[i];
      for (double v : values[i]) out << ',' << v;
      out << '\n';
    }
    return out.str();
  }
};

struct EvolveResult {
  DensityMatrix rho;
  Trajectory trajectory;
};

namespace detail {

struct ScheduledTone {
  double start_ns, end_ns;
  double omega;  // carrier, rad/ns
  cplx amp;      // rad/ns, includes phase
  const Tone* tone;
  const Operator* op;
};

inline std::vector<ScheduledTone> flatten(const PulseSchedule& s, const HamiltonianModel& model) {
  std::vector<ScheduledTone> out;
  for (const auto& seg : s.segments()) {
    for (const auto& t : seg.tones) {
      if (t.envelope.amplitude_mhz == 0.0) continue;
      out.push_back({seg.start_ns, seg.start_ns + t.envelope.duration_ns,
                     units::mhz_to_rad_per_ns(t.detuning_mhz),
                     units::mhz_to_rad_per_ns(1.0) * t.envelope.complex_amplitude(), &t,
                     &model.drive_operator(t)});
    }
  }
  return out;
}

inline double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

/// Fills H with the Hamiltonian at the midpoint of [t0, t0 + dt].
inline void hamiltonian_at(const HamiltonianModel& model, const std::vector<ScheduledTone>& tones,
                           double t0, double dt, Operator& h) {
  const double tm = t0 + 0.5 * dt;
  h = model.h_static();
  if (model.detuning_profile()) {
    const double d = units::mhz_to_rad_per_ns(model.detuning_profile()(tm) - model.static_delta_mhz());
    h.diagonal() -= d * model.ops().n_transmon.diagonal();
  }
  // Tones sharing a coupling operator are summed before touching H.
  const Operator* current = nullptr;
  cplx acc = 0.0;
  auto flush = [&] {
    if (current && acc != 0.0) {
      h.noalias() += acc * (*current);
      h.noalias() += std::conj(acc) * current->adjoint();
    }
    acc = 0.0;
  };
  for (const auto& st : tones) {
    if (tm < st.start_ns || tm > st.end_ns) continue;
    const double shape = st.tone->envelope.shape(tm - st.start_ns);
    if (shape == 0.0) continue;
    if (st.op != current) {
      flush();
      current = st.op;
    }
    acc += 0.5 * st.amp * shape * std::exp(-kI * (st.omega * tm)) * sinc(0.5 * st.omega * dt);
  }
  flush();
}

/// exp(-i H dt) by scaling and squaring a Taylor series.
inline Operator step_unitary(const Operator& h, double dt) {
  const Eigen::Index n = h.rows();
  const double norm = h.cwiseAbs().colwise().sum().maxCoeff() * dt;
  int squarings = 0;
  double scaled = norm;
  while (scaled > 0.25) {
    scaled *= 0.5;
    ++squarings;
  }
  const Operator x = (-kI * (dt / std::ldexp(1.0, squarings))) * h;
  Operator u = Operator::Identity(n, n);
  Operator term = Operator::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = (term * x) / static_cast<double>(k);
    u += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int i = 0; i < squarings; ++i) u = u * u;
  return u;
}

/// psi <- exp(-i H dt) psi via Taylor series on the vector.
inline void apply_step(const Operator& h, double dt, StateVector& psi) {
  const double norm = h.cwiseAbs().colwise().sum().maxCoeff() * dt;
  const int pieces = std::max(1, static_cast<int>(std::ceil(norm / 0.5)));
  const double sub = dt / pieces;
  StateVector term(psi.size());
  for (int p = 0; p < pieces; ++p) {
    StateVector acc = psi;
    term = psi;
    for (int k = 1; k <= 30; ++k) {
      term = (-kI * (sub / k)) * (h * term);
      acc += term;
      if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    psi = acc;
  }
}

class Dissipator {
 public:
  explicit Dissipator(const CollapseSet& c) : ops_(c.ops) {
    if (ops_.empty()) return;
    const Eigen::Index n = ops_.front().rows();
    sum_ldl_ = Operator::Zero(n, n);
    for (const auto& l : ops_) {
      sum_ldl_ += l.adjoint() * l;
      adj_.push_back(l.adjoint());
    }
  }

  bool empty() const { return ops_.empty(); }

  void rhs(const DensityMatrix& rho, DensityMatrix& out) const {
    out.noalias() = -0.5 * (sum_ldl_ * rho);
    out.noalias() -= 0.5 * (rho * sum_ldl_);
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      tmp_.noalias() = ops_[k] * rho;
      out.noalias() += tmp_ * adj_[k];
    }
  }

  void step(DensityMatrix& rho, double dt) const {
    if (ops_.empty() || dt <= 0.0) return;
    rhs(rho, k1_);
    y_ = rho + 0.5 * dt * k1_;
    rhs(y_, k2_);
    y_ = rho + 0.5 * dt * k2_;
    rhs(y_, k3_);
    y_ = rho + dt * k3_;
    rhs(y_, k4_);
    rho += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

 private:
  std::vector<Operator> ops_;
  std::vector<Operator> adj_;
  Operator sum_ldl_;
  mutable DensityMatrix k1_, k2_, k3_, k4_, y_, tmp_;
};

inline std::vector<double> observe(const std::vector<Operator>& obs, const DensityMatrix& rho) {
  std::vector<double> v;
  for (const auto& o : obs) v.push_back((o * rho).trace().real());
  v.push_back(rho.trace().real());
  v.push_back(purity(rho));
  return v;
}

inline std::vector<double> observe(const std::vector<Operator>& obs, const StateVector& psi) {
  std::vector<double> v;
  for (const auto& o : obs) v.push_back((psi.adjoint() * o * psi)(0).real());
  const double nrm = psi.squaredNorm();
  v.push_back(nrm);
  v.push_back(nrm * nrm);
  return v;
}

inline double evolution_duration(const PulseSchedule& s, const HamiltonianModel&, const EvolveOptions& o) {
  return std::max(s.total_duration_ns(), o.min_duration_ns);
}

}  // namespace detail

/// Closed-system propagation of a pure state.
inline StateVector evolve_state(const StateVector& psi0, const PulseSchedule& schedule,
                                const HamiltonianModel& model, const EvolveOptions& opts = {},
                                Trajectory* trajectory = nullptr) {
  if (psi0.size() != model.dims().total()) {
    throw Error(ErrorKind::InvalidDims, "state dimension does not match the model");
  }
  if (!(opts.dt_ns > 0.0)) throw Error(ErrorKind::Integrator, "time step must be positive");
  const double total = detail::evolution_duration(schedule, model, opts);
  const auto tones = detail::flatten(schedule, model);
  const long steps = total > 0.0 ? std::max(1L, std::lround(std::ceil(total / opts.dt_ns - 1e-9))) : 0;
  const double dt = steps > 0 ? total / steps : 0.0;
  const long record_stride =
      opts.record_every_ns > 0.0 ? std::max(1L, std::lround(opts.record_every_ns / std::max(dt, 1e-12))) : 0;
  StateVector psi = psi0;
  Operator h(model.dims().total(), model.dims().total());
  if (trajectory) {
    trajectory->names = opts.observable_names;
    trajectory->times_ns.push_back(0.0);
    trajectory->values.push_back(detail::observe(opts.observables, psi));
  }
  for (long k = 0; k < steps; ++k) {
    detail::hamiltonian_at(model, tones, k * dt, dt, h);
    detail::apply_step(h, dt, psi);
    if (!psi.allFinite()) {
      throw Error(ErrorKind::Integrator, "non-finite state at t = " + std::to_string((k + 1) * dt) + " ns");
    }
    if (trajectory && ((record_stride > 0 && (k + 1) % record_stride == 0) || k + 1 == steps)) {
      if (trajectory->times_ns.back() != (k + 1) * dt) {
        trajectory->times_ns.push_back((k + 1) * dt);
        trajectory->values.push_back(detail::observe(opts.observables, psi));
      }
    }
  }
  return psi;
}

/// Full propagator of the schedule (closed system).
inline Operator propagator(const PulseSchedule& schedule, const HamiltonianModel& model,
                           const EvolveOptions& opts = {}) {
  const double total = detail::evolution_duration(schedule, model, opts);
  const auto tones = detail::flatten(schedule, model);
  const long steps = total > 0.0 ? std::max(1L, std::lround(std::ceil(total / opts.dt_ns - 1e-9))) : 0;
  const double dt = steps > 0 ? total / steps : 0.0;
  const auto n = model.dims().total();
  Operator u = Operator::Identity(n, n);
  Operator h(n, n);
  for (long k = 0; k < steps; ++k) {
    detail::hamiltonian_at(model, tones, k * dt, dt, h);
    u = detail::step_unitary(h, dt) * u;
  }
  return u;
}

/// Lindblad evolution rho' = -i[H, rho] + sum_k D[L_k] rho. With
/// open_system = false the collapse set is ignored.
inline EvolveResult evolve(const DensityMatrix& rho0, const PulseSchedule& schedule,
                           const HamiltonianModel& model, const CollapseSet& collapse,
                           const EvolveOptions& opts = {}) {
  if (rho0.rows() != model.dims().total()) {
    throw Error(ErrorKind::InvalidDims, "density matrix dimension does not match the model");
  }
  require_physical(rho0, 1e-9);
  if (!(opts.dt_ns > 0.0)) throw Error(ErrorKind::Integrator, "time step must be positive");
  const double total = detail::evolution_duration(schedule, model, opts);
  const auto tones = detail::flatten(schedule, model);
  const long steps = total > 0.0 ? std::max(1L, std::lround(std::ceil(total / opts.dt_ns - 1e-9))) : 0;
  const double dt = steps > 0 ? total / steps : 0.0;
  const long record_stride =
      opts.record_every_ns > 0.0 ? std::max(1L, std::lround(opts.record_every_ns / std::max(dt, 1e-12))) : 0;

  EvolveResult result;
  DensityMatrix rho = rho0;
  Trajectory& traj = result.trajectory;
  traj.names = opts.observable_names;
  traj.times_ns.push_back(0.0);
  traj.values.push_back(detail::observe(opts.observables, rho));

  const bool open = opts.open_system && !collapse.empty();
  const detail::Dissipator diss(open ? collapse : CollapseSet{});
  Operator h(model.dims().total(), model.dims().total());
  DensityMatrix tmp;
  for (long k = 0; k < steps; ++k) {
    detail::hamiltonian_at(model, tones, k * dt, dt, h);
    const Operator u = detail::step_unitary(h, dt);
    if (open) diss.step(rho, 0.5 * dt);
    tmp.noalias() = u * rho;
    rho.noalias() = tmp * u.adjoint();
    if (open) diss.step(rho, 0.5 * dt);
    if (!rho.allFinite()) {
      throw Error(ErrorKind::Integrator, "non-finite density matrix at t = " +
                                             std::to_string((k + 1) * dt) + " ns");
    }
    if ((record_stride > 0 && (k + 1) % record_stride == 0) || k + 1 == steps) {
      if (traj.times_ns.back() != (k + 1) * dt) {
        traj.times_ns.push_back((k + 1) * dt);
        traj.values.push_back(detail::observe(opts.observables, rho));
      }
    }
  }
  result.rho = 0.5 * (rho + rho.adjoint());
  return result;
}

enum class DetuneMode { Simulated, Ideal };

/// Moves the system from resonance to the dispersive regime. Ideal mode
/// applies the instantaneous dressed -> product map; simulated mode
/// integrates a detuning ramp under the JC Hamiltonian.
inline DensityMatrix adiabatic_detune(const DensityMatrix& rho, const RampSpec& ramp,
                                      const SystemModel& model, DetuneMode mode,
                                      const SpaceDims& dims, bool open_system = false,
                                      double dt_ns = 0.1) {
  if (!(ramp.duration_ns >= 0.0)) throw Error(ErrorKind::InvalidArgument, "ramp duration must be >= 0");
  if (mode == DetuneMode::Ideal) {
    const Operator u = adiabatic_map(dims, MapDirection::Undress);
    return u * rho * u.adjoint();
  }
  if (ramp.duration_ns == 0.0) return rho;
  HamiltonianModel hm = HamiltonianModel::ideal_jc(dims, model.g_mhz, 0.0);
  hm.set_detuning_profile([ramp](double t) { return ramp.delta_at(t); });
  EvolveOptions opts;
  opts.dt_ns = dt_ns;
  opts.open_system = open_system;
  opts.min_duration_ns = ramp.duration_ns;
  return evolve(rho, PulseSchedule{}, hm, CollapseSet::from_model(hm.ops(), model), opts).rho;
}

struct FluxModSpec {
  double depth_mhz = 0.0;  // amplitude of the detuning modulation
  double pump_mhz = 85.0;  // modulation frequency w_m / 2 pi
  double park_delta_mhz = 85.0;

  void validate() const {
    if (!(depth_mhz >= 0.0) || !(pump_mhz >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "modulation depth and frequency must be >= 0");
    }
    if (!(park_delta_mhz > 0.0)) throw Error(ErrorKind::InvalidArgument, "parking detuning must be positive");
  }
};

struct ChevronScan {
  std::vector<double> pump_mhz;
  double max_time_ns = 1000.0;
  double sample_every_ns = 2.0;
  double dt_ns = 0.05;
};

/// Least-squares fit y(t) = c0 + c1 cos(w t) + c2 sin(w t) over w.
struct CosineFit {
  double omega = 0.0;  // rad/ns
  double offset = 0.0, amplitude = 0.0, residual = 0.0, r_squared = 0.0;
};

inline CosineFit fit_cosine(const std::vector<double>& t, const std::vector<double>& y,
                            double omega_min, double omega_max, int grid = 2000) {
  const std::size_t n = t.size();
  if (n < 4 || y.size() != n) throw Error(ErrorKind::InvalidArgument, "cosine fit needs >= 4 samples");
  auto solve = [&](double w, CosineFit* out) {
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a(i, 0) = 1.0;
      a(i, 1) = std::cos(w * t[i]);
      a(i, 2) = std::sin(w * t[i]);
      b(i) = y[i];
    }
    Eigen::Vector3d x = a.colPivHouseholderQr().solve(b);
    const double res = (a * x - b).squaredNorm();
    if (out) {
      out->omega = w;
      out->offset = x(0);
      out->amplitude = std::hypot(x(1), x(2));
      out->residual = res;
      const double mean = b.mean();
      const double tot = (b.array() - mean).square().sum();
      out->r_squared = tot > 0.0 ? 1.0 - res / tot : 1.0;
    }
    return res;
  };
  double best_w = omega_min, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double w = omega_min + (omega_max - omega_min) * i / grid;
    const double r = solve(w, nullptr);
    if (r < best) {
      best = r;
      best_w = w;
    }
  }
  const double h = (omega_max - omega_min) / grid;
  double lo = std::max(omega_min, best_w - h), hi = std::min(omega_max, best_w + h);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = solve(x1, nullptr), f2 = solve(x2, nullptr);
  for (int it = 0; it < 100; ++it) {
    if (f1 < f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = solve(x1, nullptr);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = solve(x2, nullptr);
    }
  }
  CosineFit fit;
  solve(0.5 * (lo + hi), &fit);
  return fit;
}

struct ChevronResult {
  std::vector<double> pump_mhz;
  std::vector<double> times_ns;
  std::vector<std::vector<double>> excited_population;  // [pump][time], |0,e> population
  double resonant_pump_mhz = 0.0;
  double g_eff_mhz = 0.0;  // from the pump closest to the parking detuning
  CosineFit fit;

  std::string to_csv() const {
    std::ostringstream out;
    out.precision(10);
    out << "pump_MHz,time_ns,P_e\n";
    for (std::size_t i = 0; i < pump_mhz.size(); ++i)
      for (std::size_t k = 0; k < times_ns.size(); ++k)
        out << pump_mhz[i] << ',' << times_ns[k] << ',' << excited_population[i][k] << '\n';
    return out.str();
  }
};

/// Excitation exchange of |0,e> under Delta(t) = Delta0 + depth cos(2 pi f t).
inline std::vector<double> modulated_exchange_trace(const FluxModSpec& spec, const SystemModel& model,
                                                    double max_time_ns, double sample_every_ns,
                                                    double dt_ns, std::vector<double>* times = nullptr) {
  spec.validate();
  const SpaceDims dims(3);
  HamiltonianModel hm = HamiltonianModel::ideal_jc(dims, model.g_mhz, 0.0);
  const double w = kTwoPi * spec.pump_mhz * 1e-3;
  hm.set_detuning_profile([spec, w](double t) { return spec.park_delta_mhz + spec.depth_mhz * std::cos(w * t); });
  // The modulation is integrated exactly only if the step resolves it.
  const double fastest = std::abs(spec.park_delta_mhz) + spec.depth_mhz + model.g_mhz;
  const double dt = std::min(dt_ns, 0.05 / (units::mhz_to_rad_per_ns(fastest) + 1e-12));
  StateVector psi = StateVector::Zero(dims.total());
  psi(dims.index(0, 1)) = 1.0;
  const long steps_per_sample = std::max(1L, std::lround(std::ceil(sample_every_ns / dt)));
  const double step = sample_every_ns / steps_per_sample;
  const long samples = std::lround(std::floor(max_time_ns / sample_every_ns + 1e-9));
  std::vector<double> pe;
  pe.reserve(samples + 1);
  if (times) times->clear();
  pe.push_back(1.0);
  if (times) times->push_back(0.0);
  Operator h(dims.total(), dims.total());
  const std::vector<detail::ScheduledTone> none;
  double t = 0.0;
  for (long s = 0; s < samples; ++s) {
    for (long k = 0; k < steps_per_sample; ++k) {
      detail::hamiltonian_at(hm, none, t, step, h);
      detail::apply_step(h, step, psi);
      t += step;
    }
    pe.push_back(std::norm(psi(dims.index(0, 1))));
    if (times) times->push_back((s + 1) * sample_every_ns);
  }
  return pe;
}

/// Fitted exchange rate g_eff (MHz): P_e = A + B cos(2 g_eff t).
inline CosineFit fit_exchange(const std::vector<double>& times, const std::vector<double>& pe,
                              double g_max_mhz) {
  const double t_max = times.back();
  const double wmin = 0.5 * kTwoPi / t_max;
  const double wmax = 2.0 * units::mhz_to_rad_per_ns(g_max_mhz) * 1.2;
  return fit_cosine(times, pe, wmin, wmax, 4000);
}

inline ChevronResult parametric_chevron(const FluxModSpec& spec, const SystemModel& model,
                                        const ChevronScan& scan) {
  spec.validate();
  ChevronResult r;
  r.pump_mhz = scan.pump_mhz;
  r.excited_population.resize(scan.pump_mhz.size());
  std::vector<std::vector<double>> times(scan.pump_mhz.size());
  parallel_for(scan.pump_mhz.size(), [&](std::size_t i) {
    FluxModSpec s = spec;
    s.pump_mhz = scan.pump_mhz[i];
    r.excited_population[i] =
        modulated_exchange_trace(s, model, scan.max_time_ns, scan.sample_every_ns, scan.dt_ns, &times[i]);
  });
  if (!times.empty()) r.times_ns = times.front();
  if (!scan.pump_mhz.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scan.pump_mhz.size(); ++i)
      if (std::abs(scan.pump_mhz[i] - spec.park_delta_mhz) < std::abs(scan.pump_mhz[best] - spec.park_delta_mhz))
        best = i;
    r.resonant_pump_mhz = scan.pump_mhz[best];
    if (spec.depth_mhz > 0.0) {
      r.fit = fit_exchange(r.times_ns, r.excited_population[best], model.g_mhz);
      r.g_eff_mhz = units::rad_per_ns_to_mhz(0.5 * r.fit.omega);
    }
  }
  return r;
}

}  // namespace jcsim
