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

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace jcsim {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using DensityMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
  InvalidDims,
  Truncation,
  MissingCalibration,
  NonPhysical,
  Integrator,
  Synthesis,
  IllConditioned,
  SamplerStuck,
  Range,
  Singularity,
  Config,
  InvalidArgument,
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDims: return "invalid-dims";
    case ErrorKind::Truncation: return "truncation";
    case ErrorKind::MissingCalibration: return "missing-calibration";
    case ErrorKind::NonPhysical: return "non-physical";
    case ErrorKind::Integrator: return "integrator";
    case ErrorKind::Synthesis: return "synthesis";
    case ErrorKind::IllConditioned: return "ill-conditioned-grid";
    case ErrorKind::SamplerStuck: return "sampler-stuck";
    case ErrorKind::Range: return "range";
    case ErrorKind::Singularity: return "singularity";
    case ErrorKind::Config: return "config";
    case ErrorKind::InvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Unit conversions. Config-facing values are MHz/GHz/ns/us; everything
// internal is angular frequency in rad/ns and time in ns.
namespace units {

inline constexpr double mhz_to_rad_per_ns(double mhz) { return kTwoPi * mhz * 1e-3; }
inline constexpr double ghz_to_rad_per_ns(double ghz) { return kTwoPi * ghz; }
inline constexpr double rad_per_ns_to_mhz(double w) { return w / (kTwoPi * 1e-3); }
inline constexpr double us_to_ns(double us) { return us * 1e3; }

}  // namespace units

inline double max_abs(const Operator& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Operator& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(max_abs(m), 1e-300);
  return max_abs(m - m.adjoint()) <= rel_tol * scale;
}

/// Smallest eigenvalue of the Hermitian part.
inline double min_eigenvalue(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()),
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double purity(const DensityMatrix& rho) { return (rho * rho).trace().real(); }

/// Throws NonPhysical unless rho is Hermitian, unit trace and positive to tol.
inline void require_physical(const DensityMatrix& rho, double tol = 1e-9) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw Error(ErrorKind::NonPhysical, "density matrix must be square and non-empty");
  }
  if (max_abs(rho - rho.adjoint()) > tol) {
    throw Error(ErrorKind::NonPhysical, "density matrix is not Hermitian");
  }
  if (std::abs(rho.trace() - 1.0) > tol) {
    throw Error(ErrorKind::NonPhysical, "density matrix trace differs from 1");
  }
  if (min_eigenvalue(rho) < -tol) {
    throw Error(ErrorKind::NonPhysical, "density matrix has a negative eigenvalue");
  }
}

inline DensityMatrix projector(const StateVector& psi) { return psi * psi.adjoint(); }

/// Hermitian matrix square root via eigendecomposition; negative eigenvalues clipped.
inline Operator hermitian_sqrt(const Operator& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()));
  RealVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a - b, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace jcsim
