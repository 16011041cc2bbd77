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

#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "jcsim/lindblad.hpp"

namespace jcsim {
namespace {

// vec(rho) column-major; d/dt vec = L vec
Operator liouvillian(const Operator& h, const std::vector<Operator>& ls) {
  const Eigen::Index n = h.rows();
  const Operator id = Operator::Identity(n, n);
  auto kron = [](const Operator& x, const Operator& y) {
    Operator out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return out;
  };
  Operator l = -kI * (kron(id, h) - kron(h.transpose(), id));
  for (const auto& c : ls) {
    const Operator cdc = c.adjoint() * c;
    l += kron(c.conjugate(), c) - 0.5 * kron(id, cdc) - 0.5 * kron(cdc.transpose(), id);
  }
  return l;
}

DensityMatrix random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Operator a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  DensityMatrix r = a * a.adjoint();
  return r / r.trace().real();
}

TEST(StepUnitary, MatchesMatrixExponential) {
  const OperatorSet ops = build_operators(SpaceDims(6));
  const Operator h = jc_hamiltonian(ops, 12.2, 40.0) + 0.3 * ops.sigma_plus + 0.3 * ops.sigma_minus;
  for (double dt : {0.01, 0.25, 3.0, 40.0}) {
    const Operator ref = (Operator(-kI * dt * h)).exp();
    EXPECT_LT(max_abs(detail::step_unitary(h, dt) - ref), 1e-12) << dt;
    StateVector psi = StateVector::Zero(12);
    psi(3) = 1.0;
    const StateVector want = ref * psi;
    detail::apply_step(h, dt, psi);
    EXPECT_LT((psi - want).norm(), 1e-12) << dt;
  }
}

TEST(Evolve, ClosedJcMatchesExpm) {
  const SpaceDims dims(5);
  const HamiltonianModel hm = HamiltonianModel::ideal_jc(dims, 12.2, 7.0);
  EvolveOptions o;
  o.min_duration_ns = 137.0;
  StateVector psi0 = StateVector::Zero(dims.total());
  psi0(dims.index(2, 0)) = 1.0;
  const StateVector got = evolve_state(psi0, PulseSchedule{}, hm, o);
  const StateVector want = Operator(-kI * 137.0 * hm.h_static()).exp() * psi0;
  EXPECT_LT((got - want).norm(), 1e-11);
}

TEST(Evolve, OpenSystemMatchesLiouvillianExpm) {
  const SpaceDims dims(3);
  const HamiltonianModel hm = HamiltonianModel::ideal_jc(dims, 12.2, 5.0);
  SystemModel m;
  m.t1_q_us = 0.2;  // exaggerated so the test sees the dissipator
  m.t2_q_us = 0.15;
  m.t1_cav_us = 0.5;
  const CollapseSet c = CollapseSet::from_model(hm.ops(), m);
  std::mt19937_64 rng(3);
  const DensityMatrix rho0 = random_state(dims.total(), rng);
  EvolveOptions o;
  o.min_duration_ns = 300.0;
  o.dt_ns = 0.25;
  const DensityMatrix got = evolve(rho0, PulseSchedule{}, hm, c, o).rho;
  const Operator prop = Operator(300.0 * liouvillian(hm.h_static(), c.ops)).exp();
  const Eigen::VectorXcd v = prop * Eigen::Map<const Eigen::VectorXcd>(rho0.data(), rho0.size());
  const DensityMatrix want = Eigen::Map<const DensityMatrix>(v.data(), 6, 6);
  EXPECT_LT(max_abs(got - want), 1e-6);
}

TEST(Evolve, TracePositivityAndHermiticity) {
  const SpaceDims dims(5);
  const HamiltonianModel hm = HamiltonianModel::ideal_jc(dims, 12.2, 0.0);
  const CalibrationTable table = CalibrationTable::device_default();
  PulseSchedule s;
  Tone t;
  t.detuning_mhz = 15.0;
  t.envelope = Envelope::flat(200.0, 20.0, 0.3);
  s.append({t});
  SystemModel m;
  m.t1_q_us = 0.5;
  m.t2_q_us = 0.4;
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const DensityMatrix rho0 = random_state(dims.total(), rng);
    const DensityMatrix r = evolve(rho0, s, hm, CollapseSet::from_model(hm.ops(), m)).rho;
    EXPECT_NEAR(r.trace().real(), 1.0, 1e-10);
    EXPECT_LT(max_abs(r - r.adjoint()), 1e-14);
    EXPECT_GT(min_eigenvalue(r), -1e-10);
  }
}

TEST(Evolve, SelectivePiPulseClimbsOneRung) {
  const SpaceDims dims(5);
  const CalibrationTable table = CalibrationTable::device_default();
  const HamiltonianModel hm = HamiltonianModel::calibrated(dims, table, 12.2, 6.868, DriveCoupling::Selective);
  PulseSchedule s;
  s.append({gaussian_pi_pulse(Transition::parse("0<->1+"), table, kPi)});
  s.append({gaussian_pi_pulse(Transition::parse("1+<->2-"), table, kPi)});
  StateVector psi0 = StateVector::Zero(dims.total());
  psi0(0) = 1.0;
  const StateVector psi = evolve_state(psi0, s, hm);
  EXPECT_GT(std::norm(dressed_state(dims, DressedLabel::minus(2)).dot(psi)), 1.0 - 1e-6);
}

TEST(Evolve, PropagatorIsUnitaryAndMatchesStateEvolution) {
  const SpaceDims dims(4);
  const HamiltonianModel hm = HamiltonianModel::ideal_jc(dims, 12.2, 0.0);
  PulseSchedule s;
  Tone t;
  t.detuning_mhz = 12.2;
  t.envelope = Envelope::gaussian(20.0, 15.0);
  s.append({t});
  const Operator u = propagator(s, hm);
  EXPECT_LT(max_abs(u.adjoint() * u - Operator::Identity(8, 8)), 1e-12);
  StateVector psi0 = StateVector::Zero(8);
  psi0(0) = 1.0;
  EXPECT_LT((u * psi0 - evolve_state(psi0, s, hm)).norm(), 1e-11);
}

// Transmon loss alone: every dressed level |N+-> is half photon, half
// excitation, so it decays at half the bare rate.
TEST(Channels, DressedLevelsDecayAtHalfTheTransmonRate) {
  const SpaceDims dims(6);
  const HamiltonianModel hm = HamiltonianModel::ideal_jc(dims, 12.2, 0.0);
  SystemModel m;
  const CollapseSet c = CollapseSet::from_model(hm.ops(), m, ChannelToggles{false, true, false});
  EvolveOptions o;
  o.min_duration_ns = 2000.0;
  o.dt_ns = 0.5;
  for (int n = 1; n <= 4; ++n) {
    const StateVector v = dressed_state(dims, DressedLabel::plus(n));
    const DensityMatrix r = evolve(v * v.adjoint(), PulseSchedule{}, hm, c, o).rho;
    const double p = (v.adjoint() * r * v)(0).real();
    const double rate = -std::log(p) / 2000.0;
    EXPECT_NEAR(rate * 2.0 * units::us_to_ns(m.t1_q_us), 1.0, 0.05) << n;
  }
}

TEST(Channels, DephasingKeepsManifoldPopulations) {
  const SpaceDims dims(6);
  const HamiltonianModel hm = HamiltonianModel::ideal_jc(dims, 12.2, 0.0);
  SystemModel m;
  const CollapseSet c = CollapseSet::from_model(hm.ops(), m, ChannelToggles{false, false, true});
  std::mt19937_64 rng(5);
  const DensityMatrix rho0 = random_state(dims.total(), rng);
  EvolveOptions o;
  o.min_duration_ns = 3000.0;
  const DensityMatrix r = evolve(rho0, PulseSchedule{}, hm, c, o).rho;
  for (int n = 0; n < dims.cavity_levels; ++n) {
    auto manifold = [&](const DensityMatrix& x) {
      double p = x(dims.index(n, 0), dims.index(n, 0)).real();
      if (n > 0) p += x(dims.index(n - 1, 1), dims.index(n - 1, 1)).real();
      return p;
    };
    EXPECT_NEAR(manifold(r), manifold(rho0), 1e-6) << n;
  }
  // the dressed pair inside a manifold does mix
  const StateVector v = dressed_state(dims, DressedLabel::plus(2));
  const DensityMatrix r2 = evolve(v * v.adjoint(), PulseSchedule{}, hm, c, o).rho;
  EXPECT_LT((v.adjoint() * r2 * v)(0).real(), 0.9);
}

TEST(Detune, SlowRampFollowsThePartner) {
  const SpaceDims dims(4);
  SystemModel m;
  const StateVector v = dressed_state(dims, DressedLabel::plus(1));
  RampSpec ramp;
  ramp.duration_ns = 400.0;
  const DensityMatrix r = adiabatic_detune(v * v.adjoint(), ramp, m, DetuneMode::Simulated, dims);
  const StateVector w = undressed_partner(dims, DressedLabel::plus(1));
  EXPECT_GT((w.adjoint() * r * w)(0).real(), 0.98);
  const DensityMatrix ideal = adiabatic_detune(v * v.adjoint(), ramp, m, DetuneMode::Ideal, dims);
  EXPECT_NEAR((w.adjoint() * ideal * w)(0).real(), 1.0, 1e-14);
}

TEST(Parametric, DriftFreeExchangeIsRabi) {
  SystemModel m;
  m.g_mhz = 11.3;
  FluxModSpec spec;
  spec.depth_mhz = 0.0;
  spec.park_delta_mhz = 1e-6;
  std::vector<double> t;
  const auto pe = modulated_exchange_trace(spec, m, 200.0, 1.0, 0.05, &t);
  const double w = units::mhz_to_rad_per_ns(m.g_mhz);
  for (std::size_t i = 0; i < t.size(); i += 17) EXPECT_NEAR(pe[i], std::pow(std::cos(w * t[i]), 2), 1e-6);
}

TEST(Errors, DimensionMismatchThrows) {
  const HamiltonianModel hm = HamiltonianModel::ideal_jc(SpaceDims(3), 12.2);
  EXPECT_THROW(evolve_state(StateVector::Zero(4), PulseSchedule{}, hm), Error);
  DensityMatrix bad = DensityMatrix::Identity(6, 6);
  EXPECT_THROW(evolve(bad, PulseSchedule{}, hm, CollapseSet{}), Error);
}

}  // namespace
}  // namespace jcsim
