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

// Density-matrix estimation from Wigner samples.
//
// Parameter vector Y (length D^2 - 1): rho_00 .. rho_{D-2,D-2}, then for each
// pair i < j in row-major order Re rho_ij followed by Im rho_ij. The last
// diagonal entry is 1 minus the others.

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jcsim/core.hpp"
#include "jcsim/parallel.hpp"
#include "jcsim/rng.hpp"
#include "jcsim/tomography.hpp"

namespace jcsim {

inline int param_count(int d) { return d * d - 1; }

inline RealVector params_from_rho(const DensityMatrix& rho) {
  const int d = static_cast<int>(rho.rows());
  RealVector y(param_count(d));
  int k = 0;
  for (int i = 0; i + 1 < d; ++i) y(k++) = rho(i, i).real();
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      y(k++) = rho(i, j).real();
      y(k++) = rho(i, j).imag();
    }
  return y;
}

inline DensityMatrix rho_from_params(const RealVector& y, int d) {
  if (y.size() != param_count(d)) throw Error(ErrorKind::InvalidDims, "parameter vector length must be D^2 - 1");
  DensityMatrix rho = DensityMatrix::Zero(d, d);
  int k = 0;
  double diag = 0.0;
  for (int i = 0; i + 1 < d; ++i) {
    rho(i, i) = y(k);
    diag += y(k++);
  }
  rho(d - 1, d - 1) = 1.0 - diag;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      rho(i, j) = cplx(y(k), y(k + 1));
      rho(j, i) = cplx(y(k), -y(k + 1));
      k += 2;
    }
  return rho;
}

/// X = M Y + V for raw-convention Wigner values on a grid.
struct WignerMap {
  RealMatrix M;
  RealVector V;
  std::vector<cplx> grid;
  int D = 0;
  double condition_number = 0.0;

  RealVector apply(const RealVector& y) const { return M * y + V; }
};

inline WignerMap build_map(const std::vector<cplx>& grid, int d, double max_condition = 1e8) {
  if (d < 2) throw Error(ErrorKind::InvalidDims, "reconstruction dimension must be at least 2");
  const int p = param_count(d);
  if (static_cast<int>(grid.size()) < p) {
    throw Error(ErrorKind::IllConditioned, "grid has fewer points than D^2 - 1 parameters");
  }
  WignerMap map;
  map.grid = grid;
  map.D = d;
  map.M.resize(grid.size(), p);
  map.V.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t r) {
    // kernel K_nm = (-1)^m <n|D(2 alpha)|m>, Hermitian; W = sum rho_mn K_nm
    Operator k = displacement_matrix(2.0 * grid[r], d, d);
    for (int m = 1; m < d; m += 2) k.col(m) *= -1.0;
    int c = 0;
    const double last = k(d - 1, d - 1).real();
    for (int i = 0; i + 1 < d; ++i) map.M(r, c++) = k(i, i).real() - last;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        map.M(r, c++) = 2.0 * k(j, i).real();
        map.M(r, c++) = -2.0 * k(j, i).imag();
      }
    map.V(r) = last;
  });
  Eigen::JacobiSVD<RealMatrix> svd(map.M);
  const auto& s = svd.singularValues();
  map.condition_number = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(map.condition_number <= max_condition)) {
    std::ostringstream msg;
    msg << "Wigner map is ill-conditioned (condition number " << map.condition_number << ")";
    throw Error(ErrorKind::IllConditioned, msg.str());
  }
  return map;
}

struct LinearInversion {
  RealVector y;
  DensityMatrix rho;
  double min_eigenvalue = 0.0;
  bool negative = false;
};

/// Least-squares Y = M^+ (X - V).
inline LinearInversion linear_inversion(const RealVector& x, const WignerMap& map) {
  if (x.size() != map.M.rows()) throw Error(ErrorKind::InvalidDims, "data length does not match the map");
  LinearInversion r;
  r.y = map.M.colPivHouseholderQr().solve(x - map.V);
  r.rho = rho_from_params(r.y, map.D);
  r.min_eigenvalue = min_eigenvalue(r.rho);
  r.negative = r.min_eigenvalue < -1e-12;
  return r;
}

/// Closest physical state in eigenvalues (negative part clipped, renormalized).
inline DensityMatrix project_physical(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(0.5 * (rho + rho.adjoint()));
  RealVector ev = es.eigenvalues().cwiseMax(0.0);
  if (!(ev.sum() > 0.0)) throw Error(ErrorKind::NonPhysical, "state has no positive part");
  ev /= ev.sum();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& target, double tol = 1e-8) {
  if (rho.rows() != target.rows() || rho.cols() != target.cols()) {
    throw Error(ErrorKind::InvalidDims, "fidelity arguments have different dimensions");
  }
  require_physical(rho, tol);
  require_physical(target, tol);
  const Operator s = hermitian_sqrt(rho);
  const Operator inner = s * target * s;
  Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  const double t = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(t * t, 0.0, 1.0);
}

struct BayesOptions {
  int repetitions = 400;  // "#" in N = # (D^2 - 1)
  int samples = 1 << 10;
  int thinning = 1 << 7;
  int burn_in = 20000;
  int chains = 1;
  double target_acceptance = 0.23;
  double min_acceptance = 0.01;
  std::uint64_t seed = 0;
};

struct BayesResult {
  std::vector<DensityMatrix> samples;
  DensityMatrix mean;
  double acceptance = 0.0;
  double beta = 0.0;

  struct Stats {
    double mean = 0.0, std = 0.0;
  };

  Stats fidelity_stats(const DensityMatrix& target) const {
    Stats s;
    if (samples.empty()) return s;
    std::vector<double> f;
    f.reserve(samples.size());
    for (const auto& r : samples) f.push_back(fidelity(r, target));
    for (double v : f) s.mean += v;
    s.mean /= f.size();
    for (double v : f) s.std += (v - s.mean) * (v - s.mean);
    s.std = f.size() > 1 ? std::sqrt(s.std / (f.size() - 1)) : 0.0;
    return s;
  }
};

namespace detail {

/// rho = T^dag T / tr for lower-triangular T.
inline DensityMatrix rho_from_factor(const Operator& t) {
  const DensityMatrix r = t.adjoint() * t;
  return r / r.trace().real();
}

/// Lower-triangular T with T^dag T = rho (rho made positive definite).
inline Operator factor_from_rho(const DensityMatrix& rho) {
  const int d = static_cast<int>(rho.rows());
  const DensityMatrix reg = rho + 1e-6 * DensityMatrix::Identity(d, d);
  const Operator flip = Operator::Identity(d, d).rowwise().reverse();
  const Eigen::LLT<DensityMatrix> llt(flip * reg * flip);
  const Operator k = flip * Operator(llt.matrixL()) * flip;  // upper, k k^dag = reg
  return k.adjoint();
}

struct ChainOutput {
  std::vector<DensityMatrix> samples;
  long accepted = 0, proposed = 0;
  double beta = 0.0;
};

/// Preconditioned Crank-Nicolson walk on a lower-triangular factor T with
/// complex Gaussian entries; rho = T^dag T / tr. The proposal keeps the
/// prior invariant, so only the likelihood enters the acceptance ratio.
inline ChainOutput run_chain(const RealVector& y_li, int d, const BayesOptions& opt, int n_samples,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const double n_eff = double(opt.repetitions) * param_count(d);
  auto log_like = [&](const Operator& g) {
    return -0.5 * n_eff * (params_from_rho(rho_from_factor(g)) - y_li).squaredNorm();
  };
  // start from the clipped LI estimate, scaled to a typical prior norm
  const DensityMatrix start = project_physical(rho_from_params(y_li, d));
  Operator g = std::sqrt(0.5 * d * (d + 1)) * factor_from_rho(start);
  double ll = log_like(g);
  double log_beta = std::log(0.5);
  ChainOutput out;
  Operator xi(d, d);
  auto propose = [&](double beta) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) xi(i, j) = j <= i ? cplx(normal(rng), normal(rng)) : cplx(0.0);
    return Operator(std::sqrt(1.0 - beta * beta) * g + beta * xi);
  };
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int it = 0; it < opt.burn_in; ++it) {
    const double beta = std::min(1.0, std::exp(log_beta));
    const Operator cand = propose(beta);
    const double lc = log_like(cand);
    const bool acc = std::log(uni(rng)) < lc - ll;
    if (acc) {
      g = cand;
      ll = lc;
    }
    log_beta += 0.05 * ((acc ? 1.0 : 0.0) - opt.target_acceptance);
    log_beta = std::min(log_beta, 0.0);
  }
  out.beta = std::min(1.0, std::exp(log_beta));
  const long total = long(n_samples) * opt.thinning;
  for (long it = 1; it <= total; ++it) {
    const Operator cand = propose(out.beta);
    const double lc = log_like(cand);
    ++out.proposed;
    if (std::log(uni(rng)) < lc - ll) {
      g = cand;
      ll = lc;
      ++out.accepted;
    }
    if (it % opt.thinning == 0) out.samples.push_back(rho_from_factor(g));
  }
  return out;
}

}  // namespace detail

/// Posterior samples over physical states, prior induced by a Gaussian
/// triangular factor, Gaussian pseudo-likelihood of variance 1/N around the
/// LI parameters.
inline BayesResult bayesian_infer(const DensityMatrix& rho_li, const BayesOptions& opt = {}) {
  if (opt.repetitions < 1) throw Error(ErrorKind::InvalidArgument, "repetitions must be >= 1");
  if (opt.chains < 1 || opt.samples < 1 || opt.thinning < 1) throw Error(ErrorKind::InvalidArgument, "bad sampler sizes");
  const int d = static_cast<int>(rho_li.rows());
  const RealVector y_li = params_from_rho(rho_li);
  std::vector<detail::ChainOutput> chains(opt.chains);
  const int per_chain = (opt.samples + opt.chains - 1) / opt.chains;
  parallel_for(opt.chains, [&](std::size_t c) {
    chains[c] = detail::run_chain(y_li, d, opt, per_chain, stage_seed(opt.seed, "bayes-chain-" + std::to_string(c)));
  });
  BayesResult r;
  long acc = 0, prop = 0;
  for (const auto& c : chains) {
    for (const auto& s : c.samples)
      if (static_cast<int>(r.samples.size()) < opt.samples) r.samples.push_back(s);
    acc += c.accepted;
    prop += c.proposed;
    r.beta += c.beta / opt.chains;
  }
  r.acceptance = prop ? double(acc) / prop : 0.0;
  if (r.acceptance < opt.min_acceptance) {
    std::ostringstream msg;
    msg << "posterior sampler stuck: acceptance " << r.acceptance << " after adaptation";
    throw Error(ErrorKind::SamplerStuck, msg.str());
  }
  r.mean = DensityMatrix::Zero(d, d);
  for (const auto& s : r.samples) r.mean += s;
  r.mean /= double(r.samples.size());
  return r;
}

/// Row-major complex pairs.
inline nlohmann::json density_matrix_json(const DensityMatrix& rho) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < rho.cols(); ++j) row.push_back({rho(i, j).real(), rho(i, j).imag()});
    rows.push_back(row);
  }
  return {{"dim", rho.rows()}, {"rho", rows}};
}

}  // namespace jcsim
