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
#include <sstream>

#include <gtest/gtest.h>

#include "jcsim/tomography.hpp"

namespace jcsim {
namespace {

DensityMatrix fock(int n, int d) {
  DensityMatrix r = DensityMatrix::Zero(d, d);
  r(n, n) = 1.0;
  return r;
}

TEST(Displacement, ElementsMatchLaguerreForm) {
  const Operator d = displacement_matrix(cplx(0.7, 0.3), 6, 6);
  EXPECT_NEAR(std::abs(d(0, 0) - cplx(0.748263567578565215, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(d(2, 1) - cplx(0.525927629293144078, 0.225397555411347462)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(d(1, 3) - cplx(0.29570204796736959, -0.310487150365738069)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(d(4, 4) - cplx(-0.326362233572740512, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(d(5, 0) - cplx(-0.00766948815750836348, 0.0157296912443091017)), 0.0, 1e-15);
}

TEST(Displacement, UnitaryOnLargeBlock) {
  const Operator d = displacement_matrix(cplx(1.1, -0.4), 60, 60);
  const Operator p = d.adjoint() * d;
  EXPECT_LT(max_abs(p.topLeftCorner(10, 10) - Operator::Identity(10, 10)), 1e-12);
}

TEST(WignerExact, FockStatesMatchLaguerre) {
  EXPECT_NEAR(wigner_exact(fock(0, 8), 0.3), 0.835270211411272021, 1e-14);
  EXPECT_NEAR(wigner_exact(fock(3, 8), 0.5), 0.404353773141755616, 1e-14);
  EXPECT_NEAR(wigner_exact(fock(5, 8), cplx(0.0, 0.8)), -0.288480986704640386, 1e-14);
  for (int n = 0; n < 8; ++n) EXPECT_NEAR(wigner_exact(fock(n, 8), 0.0), n % 2 ? -1.0 : 1.0, 1e-14);
}

TEST(WignerExact, SuperpositionOracle) {
  DensityMatrix r = DensityMatrix::Zero(5, 5);
  r(0, 0) = r(3, 3) = r(0, 3) = r(3, 0) = 0.5;
  EXPECT_NEAR(wigner_exact(r, cplx(0.4, 0.2)), 0.546258852755634159, 1e-14);
  EXPECT_NEAR(wigner_exact(r, cplx(0.4, 0.2), WignerScaling::TwoOverPi), 0.546258852755634159 * 2 / kPi, 1e-14);
}

TEST(WignerExact, IntegratesToHalfPi) {
  // raw convention: integral over the plane is pi/2
  DensityMatrix r = DensityMatrix::Zero(4, 4);
  r(1, 1) = 0.5;
  r(2, 2) = 0.3;
  r(3, 3) = 0.2;
  r(1, 2) = cplx(0.1, 0.2);
  r(2, 1) = std::conj(r(1, 2));
  const int n = 161;
  const auto g = make_square_grid(4.0, n);
  const double da = std::pow(8.0 / (n - 1), 2);
  double s = 0.0;
  for (const auto& a : g) s += wigner_exact(r, a) * da;
  EXPECT_NEAR(s, kPi / 2, 1e-6);
}

TEST(Grid, SquareAndCut) {
  const auto g = make_square_grid(2.5, 21);
  ASSERT_EQ(g.size(), 441u);
  EXPECT_EQ(g.front(), cplx(-2.5, -2.5));
  EXPECT_EQ(g[220], cplx(0.0, 0.0));
  EXPECT_EQ(make_cut(1.0, 3)[2], cplx(1.0, 0.0));
  EXPECT_THROW(make_square_grid(1.0, 0), Error);
}

TEST(WignerData, CsvRoundTripAndWarning) {
  const WignerData w = wigner_exact_grid(fock(1, 4), make_square_grid(2.0, 5));
  EXPECT_TRUE(w.truncation_warning);  // (2,2) has |alpha|^2 = 8 > 2
  std::istringstream in(w.to_csv());
  const WignerData back = WignerData::from_csv(in);
  ASSERT_EQ(back.values.size(), w.values.size());
  for (std::size_t i = 0; i < w.values.size(); ++i) EXPECT_NEAR(back.values[i], w.values[i], 1e-11);
  EXPECT_EQ(w.sidecar()["scaling"], "raw");
}

TEST(Readout, InstantPulsesAndHalfChiPeriodAreIdeal) {
  SystemModel m;
  m.tomo_half_pi_sigma_ns = 0.0;
  m.parity_map_time_ns = 1e3 / (2.0 * m.chi_mhz);
  const ParityReadout r(m, false);
  const VacuumReference ref = VacuumReference::measure(r);
  EXPECT_NEAR(ref.amplitude, 1.0, 1e-12);
  const SpaceDims dims(6);
  StateVector c = StateVector::Zero(6);
  c(0) = 0.6;
  c(3) = cplx(0.0, 0.8);
  const StateVector psi = with_ground_transmon(dims, c);
  const DensityMatrix rho = psi * psi.adjoint();
  for (cplx a : {cplx(0.0), cplx(0.4, 0.2), cplx(-1.0, 0.7)})
    EXPECT_NEAR(wigner_measured(dims, rho, a, r, ref), wigner_exact(c * c.adjoint(), a), 1e-9);
}

TEST(Readout, DecoherenceShrinksContrast) {
  SystemModel m;
  const ParityReadout noisy(m, true), clean(m, false);
  const VacuumReference a = VacuumReference::measure(noisy), b = VacuumReference::measure(clean);
  EXPECT_LT(a.amplitude, b.amplitude);
  EXPECT_GT(a.amplitude, 0.8);
  // normalization puts the vacuum at one either way
  const SpaceDims dims(3);
  DensityMatrix vac = DensityMatrix::Zero(6, 6);
  vac(0, 0) = 1.0;
  EXPECT_NEAR(wigner_measured(dims, vac, 0.0, noisy, a), 1.0, 1e-12);
}

}  // namespace
}  // namespace jcsim
