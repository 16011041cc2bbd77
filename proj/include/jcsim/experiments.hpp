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

// End-to-end pipelines: prepare in the dressed frame, undress, measure the
// Wigner function and reconstruct.

#include <cmath>
#include <string>
#include <vector>

#include "jcsim/protocols.hpp"
#include "jcsim/reconstruction.hpp"
#include "jcsim/tomography.hpp"

namespace jcsim {

struct ReconstructionOptions {
  double extent = 2.5;
  int points_per_axis = 21;
  int extra_dimensions = 2;  // D = max Fock + this
  BayesOptions bayes;
};

struct ReconstructionOutcome {
  WignerData wigner;
  LinearInversion li;
  BayesResult posterior;
  DensityMatrix target;
  double fidelity_mean = 0.0;
  double fidelity_std = 0.0;
  double li_fidelity = 0.0;  // of the clipped LI state
};

/// LI then Bayesian inference on a measured or exact grid.
inline ReconstructionOutcome reconstruct_cavity(const WignerData& data, const TargetState& target,
                                                const ReconstructionOptions& opt) {
  const int d = target.max_fock() + opt.extra_dimensions;
  const WignerMap map = build_map(data.points, d);
  ReconstructionOutcome out;
  out.wigner = data;
  RealVector x(data.values.size());
  for (std::size_t i = 0; i < data.values.size(); ++i) x(i) = data.values[i];
  out.li = linear_inversion(x, map);
  const StateVector t = target.cavity_vector(d);
  out.target = t * t.adjoint();
  out.li_fidelity = fidelity(project_physical(out.li.rho), out.target);
  out.posterior = bayesian_infer(out.li.rho, opt.bayes);
  const auto stats = out.posterior.fidelity_stats(out.target);
  out.fidelity_mean = stats.mean;
  out.fidelity_std = stats.std;
  return out;
}

/// Dispersive tomography of an undressed full-system state with readout
/// channels following the setup.
inline WignerData measure_wigner(const SimSetup& setup, const DensityMatrix& rho_full, double extent, int n) {
  ChannelToggles read = setup.open_system ? setup.channels : ChannelToggles::none();
  const ParityReadout readout(setup.system, read);
  const VacuumReference ref = VacuumReference::measure(readout);
  return wigner_measured_grid(setup.dims(), rho_full, make_square_grid(extent, n), readout, ref);
}

struct PreparationRun {
  LadderPlan plan;
  DensityMatrix dressed;    // after the pulses
  DensityMatrix undressed;  // after the ideal undress map
  double state_fidelity = 0.0;
  ReconstructionOutcome reconstruction;
};

/// Ladder preparation from |0,g> through reconstruction.
inline PreparationRun run_preparation(const TargetState& target, const SimSetup& setup,
                                      const ReconstructionOptions& opt, bool reconstruct = true,
                                      bool calibrate_phases = true) {
  PreparationRun run;
  LadderOptions lo;
  lo.omega_cav_ghz = setup.system.omega_cav_ghz;
  lo.g_mhz = setup.system.g_mhz;
  lo.dt_ns = setup.dt_ns;
  if (calibrate_phases) lo.phase_model = setup;
  run.plan = synthesize_ladder_prep(target, setup.table, lo);
  const SpaceDims dims = setup.dims();
  DensityMatrix rho0 = DensityMatrix::Zero(dims.total(), dims.total());
  rho0(dims.index(0, 0), dims.index(0, 0)) = 1.0;
  const HamiltonianModel hm = setup.hamiltonian();
  run.dressed = run_schedule(setup, hm, rho0, run.plan.schedule);
  const Operator u = adiabatic_map(dims, MapDirection::Undress);
  run.undressed = u * run.dressed * u.adjoint();
  run.state_fidelity = undressed_fidelity(dims, target, run.dressed);
  if (reconstruct) {
    const WignerData w = measure_wigner(setup, run.undressed, opt.extent, opt.points_per_axis);
    run.reconstruction = reconstruct_cavity(w, target, opt);
  }
  return run;
}

struct GivensRun {
  GivensPlan plan;
  DensityMatrix undressed;
  TargetState target;  // ideal-model output
  double state_fidelity = 0.0;
  double parity = 0.0;  // vacuum-normalized readout at alpha = 0
  ReconstructionOutcome reconstruction;
};

/// Pi pulse onto |n_A+>, the Givens sequence, undress, measure.
inline GivensRun run_givens(const GivensSpec& spec, const SimSetup& setup, const ReconstructionOptions& opt,
                            bool reconstruct = true) {
  GivensRun run;
  run.plan = givens_rotation(spec, setup.table, setup.system.g_mhz, setup.dt_ns);
  PulseSchedule prep;
  const auto up = ladder_chain_to(DressedLabel::plus(spec.n_a));
  for (std::size_t k = 0; k + 1 < up.size(); ++k)
    prep.append({gaussian_pi_pulse(Transition::between(up[k], up[k + 1]), setup.table, kPi, spec.omega_cav_ghz)});
  const PulseSchedule full = sequence_concat({prep, run.plan.schedule});

  const SpaceDims dims = setup.dims();
  const Operator u = adiabatic_map(dims, MapDirection::Undress);
  DensityMatrix rho0 = DensityMatrix::Zero(dims.total(), dims.total());
  rho0(dims.index(0, 0), dims.index(0, 0)) = 1.0;

  // reference: the same pulses in the selective closed model
  SimSetup ideal = SimSetup::ideal(setup.cavity_levels);
  ideal.table = setup.table;
  ideal.system = setup.system;
  ideal.dt_ns = setup.dt_ns;
  const StateVector psi = u * evolve_state(rho0.col(0), full, ideal.hamiltonian(), ideal.options());
  for (int n = 0; n < dims.cavity_levels; ++n) {
    const cplx c = psi(dims.index(n, 0));
    if (std::abs(c) > 1e-6) run.target.components.emplace_back(n, c);
  }
  const double norm = std::sqrt(run.target.norm_squared());
  for (auto& [n, c] : run.target.components) c /= norm;

  run.undressed = u * run_schedule(setup, setup.hamiltonian(), rho0, full) * u.adjoint();
  const StateVector want = with_ground_transmon(dims, run.target.cavity_vector(dims.cavity_levels));
  run.state_fidelity = (want.adjoint() * run.undressed * want)(0).real();
  const ChannelToggles read = setup.open_system ? setup.channels : ChannelToggles::none();
  const ParityReadout readout(setup.system, read);
  const VacuumReference ref = VacuumReference::measure(readout);
  run.parity = wigner_measured(dims, run.undressed, 0.0, readout, ref);
  if (reconstruct) {
    const WignerData w = measure_wigner(setup, run.undressed, opt.extent, opt.points_per_axis);
    run.reconstruction = reconstruct_cavity(w, run.target, opt);
  }
  return run;
}

struct MultitoneRun {
  MultitoneResult optimized;
  DensityMatrix undressed;
  double state_fidelity = 0.0;
  ReconstructionOutcome reconstruction;
};

/// Optimized simultaneous drive, executed in the given setup.
inline MultitoneRun run_multitone(const TargetState& target, const MultitoneOptions& mopt, const SimSetup& setup,
                                  const ReconstructionOptions& opt, bool reconstruct = true) {
  MultitoneRun run;
  run.optimized = optimize_multitone(target, mopt);
  const PulseSchedule sched = MultitoneObjective(target, mopt).schedule(run.optimized.amplitudes);
  const SpaceDims dims = setup.dims();
  DensityMatrix rho0 = DensityMatrix::Zero(dims.total(), dims.total());
  rho0(dims.index(0, 0), dims.index(0, 0)) = 1.0;
  const Operator u = adiabatic_map(dims, MapDirection::Undress);
  run.undressed = u * run_schedule(setup, setup.hamiltonian(), rho0, sched) * u.adjoint();
  const StateVector want = with_ground_transmon(dims, target.cavity_vector(dims.cavity_levels));
  run.state_fidelity = (want.adjoint() * run.undressed * want)(0).real();
  if (reconstruct) {
    const WignerData w = measure_wigner(setup, run.undressed, opt.extent, opt.points_per_axis);
    run.reconstruction = reconstruct_cavity(w, target, opt);
  }
  return run;
}

/// Rows of progressively added error sources.
struct BudgetRow {
  std::string label;
  ChannelToggles channels;
};

inline std::vector<BudgetRow> default_budget_rows() {
  return {{"pulse-length", ChannelToggles::none()},
          {"+T1", ChannelToggles{true, true, false}},
          {"+Tphi", ChannelToggles::all()}};
}

struct BudgetCell {
  std::string row;
  std::string state;
  double fidelity_mean = 0.0;
  double fidelity_std = 0.0;
  double state_fidelity = 0.0;
};

inline std::vector<BudgetCell> error_budget(const std::vector<TargetState>& targets, const SimSetup& base,
                                            const std::vector<BudgetRow>& rows, const ReconstructionOptions& opt) {
  std::vector<BudgetCell> cells;
  for (const auto& row : rows) {
    SimSetup s = base;
    s.channels = row.channels;
    s.open_system = true;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      ReconstructionOptions o = opt;
      o.bayes.seed = stage_seed(opt.bayes.seed, "budget/" + row.label + "/" + std::to_string(i));
      const PreparationRun run = run_preparation(targets[i], s, o);
      cells.push_back({row.label, targets[i].str(), run.reconstruction.fidelity_mean,
                       run.reconstruction.fidelity_std, run.state_fidelity});
    }
  }
  return cells;
}

}  // namespace jcsim
