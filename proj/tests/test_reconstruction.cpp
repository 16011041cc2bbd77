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

#include "jcsim/reconstruction.hpp"

namespace jcsim {
namespace {

DensityMatrix random_state(int d, std::mt19937_64& rng, int rank = -1) {
  std::normal_distribution<double> g;
  const int k = rank > 0 ? rank : d;
  Operator a(d, k);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = cplx(g(rng), g(rng));
  DensityMatrix r = a * a.adjoint();
  return r / r.trace().real();
}

RealVector exact_grid(const DensityMatrix& rho, const std::vector<cplx>& grid) {
  RealVector x(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) x(i) = wigner_exact(rho, grid[i]);
  return x;
}

TEST(Params, RoundTrip) {
  std::mt19937_64 rng(1);
  const DensityMatrix r = random_state(5, rng);
  const RealVector y = params_from_rho(r);
  EXPECT_EQ(y.size(), 24);
  EXPECT_LT(max_abs(rho_from_params(y, 5) - r), 1e-15);
  EXPECT_THROW(rho_from_params(y, 4), Error);
}

TEST(Map, AffineModelReproducesWigner) {
  std::mt19937_64 rng(2);
  const auto grid = make_square_grid(2.5, 21);
  const WignerMap map = build_map(grid, 5);
  const DensityMatrix r = random_state(5, rng);
  EXPECT_LT((map.apply(params_from_rho(r)) - exact_grid(r, grid)).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT(map.condition_number, 1e8);
}

TEST(Map, TooFewPointsIsIllConditioned) {
  EXPECT_THROW(build_map(make_square_grid(2.0, 4), 5), Error);  // 16 < 24
  EXPECT_THROW(build_map(make_square_grid(0.01, 7), 6, 1e4), Error);
}

TEST(LinearInversion, RecoversNoiselessStates) {
  std::mt19937_64 rng(3);
  const auto grid = make_square_grid(2.5, 21);
  const WignerMap map = build_map(grid, 6);
  for (int t = 0; t < 5; ++t) {
    const DensityMatrix r = random_state(6, rng);
    const LinearInversion li = linear_inversion(exact_grid(r, grid), map);
    EXPECT_LT(trace_distance(li.rho, r), 1e-8);
    EXPECT_FALSE(li.negative);
  }
}

TEST(Projection, ClipsNegativeEigenvalues) {
  DensityMatrix r = DensityMatrix::Zero(3, 3);
  r(0, 0) = 0.8;
  r(1, 1) = 0.4;
  r(2, 2) = -0.2;
  const DensityMatrix p = project_physical(r);
  EXPECT_NO_THROW(require_physical(p));
  EXPECT_NEAR(p(0, 0).real(), 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(p(2, 2).real(), 0.0, 1e-14);
  std::mt19937_64 rng(4);
  const DensityMatrix q = random_state(4, rng);
  EXPECT_LT(max_abs(project_physical(q) - q), 1e-14);
}

TEST(Fidelity, PureStateOverlapAndSymmetry) {
  StateVector a(3), b(3);
  a << 1.0, 0.0, 0.0;
  b << std::sqrt(0.3), cplx(0.0, std::sqrt(0.7)), 0.0;
  EXPECT_NEAR(fidelity(a * a.adjoint(), b * b.adjoint()), 0.3, 1e-12);
  std::mt19937_64 rng(5);
  const DensityMatrix x = random_state(4, rng), y = random_state(4, rng);
  EXPECT_NEAR(fidelity(x, y), fidelity(y, x), 1e-10);
  EXPECT_NEAR(fidelity(x, x), 1.0, 1e-10);
  EXPECT_THROW(fidelity(x, DensityMatrix::Identity(3, 3) / 3.0), Error);
}

TEST(Factor, TriangularFactorReproducesState) {
  std::mt19937_64 rng(6);
  const DensityMatrix r = random_state(5, rng);
  const Operator t = detail::factor_from_rho(r);
  EXPECT_LT(max_abs(t.triangularView<Eigen::StrictlyUpper>().toDenseMatrix()), 1e-15);
  EXPECT_LT(max_abs(detail::rho_from_factor(t) - r), 1e-5);
}

BayesOptions quick(std::uint64_t seed, int reps) {
  BayesOptions o;
  o.repetitions = reps;
  o.samples = 256;
  o.thinning = 32;
  o.burn_in = 5000;
  o.seed = seed;
  return o;
}

TEST(Bayes, SamplesArePhysicalAndDeterministic) {
  std::mt19937_64 rng(7);
  const DensityMatrix r = random_state(3, rng);
  const BayesResult a = bayesian_infer(r, quick(9, 400));
  const BayesResult b = bayesian_infer(r, quick(9, 400));
  const BayesResult c = bayesian_infer(r, quick(10, 400));
  ASSERT_EQ(a.samples.size(), 256u);
  for (const auto& s : a.samples) EXPECT_NO_THROW(require_physical(s, 1e-10));
  EXPECT_EQ(max_abs(a.mean - b.mean), 0.0);
  EXPECT_GT(max_abs(a.mean - c.mean), 0.0);
  EXPECT_GT(a.acceptance, 0.05);
}

TEST(Bayes, ConcentratesWithRepetitions) {
  std::mt19937_64 rng(8);
  const DensityMatrix r = random_state(4, rng);
  const double loose = trace_distance(bayesian_infer(r, quick(1, 10)).mean, r);
  const double tight = trace_distance(bayesian_infer(r, quick(1, 100000)).mean, r);
  EXPECT_LT(tight, loose);
  EXPECT_LT(tight, 0.01);
}

TEST(Bayes, NonPhysicalInputStaysPhysical) {
  DensityMatrix r = DensityMatrix::Zero(3, 3);
  r(0, 0) = 1.1;
  r(1, 1) = -0.1;
  const BayesResult b = bayesian_infer(r, quick(2, 400));
  EXPECT_NO_THROW(require_physical(b.mean, 1e-10));
  EXPECT_GT(b.mean(0, 0).real(), 0.9);
}

// Well inside state space the posterior mean +- std covers the fidelity of
// the LI estimate. Near-pure states sit on the boundary, where the prior
// pulls the mean inward by more than one std.
TEST(Bayes, SpreadBracketsLiFidelityForMixedStates) {
  StateVector psi = StateVector::Zero(4);
  psi(0) = psi(3) = std::sqrt(0.5);
  const DensityMatrix t = psi * psi.adjoint();
  for (double p : {0.85, 0.7}) {
    const DensityMatrix r = p * t + (1.0 - p) * DensityMatrix::Identity(4, 4) / 4.0;
    BayesOptions o;
    o.seed = 3;
    const auto s = bayesian_infer(r, o).fidelity_stats(t);
    EXPECT_NEAR(s.mean, fidelity(r, t), s.std) << p;
  }
}

TEST(Bayes, RejectsBadOptions) {
  BayesOptions o;
  o.repetitions = 0;
  EXPECT_THROW(bayesian_infer(DensityMatrix::Identity(2, 2) / 2.0, o), Error);
}

TEST(Json, DensityMatrixLayout) {
  DensityMatrix r = DensityMatrix::Zero(2, 2);
  r(0, 1) = cplx(0.1, -0.2);
  const auto j = density_matrix_json(r);
  EXPECT_EQ(j["dim"], 2);
  EXPECT_DOUBLE_EQ(j["rho"][0][1][1].get<double>(), -0.2);
}

}  // namespace
}  // namespace jcsim
