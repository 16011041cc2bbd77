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

// Truncated cavity (x) two-level transmon space, the Jaynes-Cummings
// Hamiltonian and its dressed eigenbasis.
//
// Product basis index: |n, s> -> 2*n + s with s = 0 (g), 1 (e).

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "jcsim/core.hpp"

namespace jcsim {

struct SpaceDims {
  int cavity_levels = 10;
  static constexpr int transmon_levels = 2;

  SpaceDims() = default;
  explicit SpaceDims(int cavity) : cavity_levels(cavity) {
    if (cavity < 2) {
      throw Error(ErrorKind::InvalidDims, "cavity truncation must be at least 2, got " +
                                               std::to_string(cavity));
    }
  }

  int total() const { return transmon_levels * cavity_levels; }
  int index(int n, int s) const { return transmon_levels * n + s; }

  /// Default truncation for a target with the given maximum photon number.
  static SpaceDims for_max_photon(int max_photon) { return SpaceDims(max_photon + 3); }

  bool operator==(const SpaceDims&) const = default;
};

struct OperatorSet {
  SpaceDims dims;
  Operator a, a_dag;
  Operator sigma_minus, sigma_plus, sigma_z;
  Operator n_cavity, n_transmon;
  Operator identity;
};

inline OperatorSet build_operators(const SpaceDims& dims) {
  if (dims.cavity_levels < 2) {
    throw Error(ErrorKind::InvalidDims, "cavity truncation must be at least 2");
  }
  const int dc = dims.cavity_levels;
  Operator a_c = Operator::Zero(dc, dc);
  for (int n = 1; n < dc; ++n) a_c(n - 1, n) = std::sqrt(static_cast<double>(n));
  Operator sm_t = Operator::Zero(2, 2);
  sm_t(0, 1) = 1.0;  // |g><e|
  Operator sz_t = Operator::Zero(2, 2);
  sz_t(0, 0) = -1.0;
  sz_t(1, 1) = 1.0;
  const Operator id_c = Operator::Identity(dc, dc);
  const Operator id_t = Operator::Identity(2, 2);

  auto kron = [](const Operator& x, const Operator& y) {
    Operator out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j)
        out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return out;
  };

  OperatorSet ops;
  ops.dims = dims;
  ops.a = kron(a_c, id_t);
  ops.a_dag = ops.a.adjoint();
  ops.sigma_minus = kron(id_c, sm_t);
  ops.sigma_plus = ops.sigma_minus.adjoint();
  ops.sigma_z = kron(id_c, sz_t);
  ops.n_cavity = ops.a_dag * ops.a;
  ops.n_transmon = ops.sigma_plus * ops.sigma_minus;
  ops.identity = Operator::Identity(dims.total(), dims.total());
  return ops;
}

/// H/hbar in rad/ns, rotating frame at the cavity frequency:
///   -2 pi delta sigma+ sigma-  +  2 pi g (a^dag sigma- + a sigma+)
/// with g and delta = w_cav - w_T in MHz.
inline Operator jc_hamiltonian(const OperatorSet& ops, double g_mhz, double delta_mhz) {
  if (!(g_mhz > 0.0)) throw Error(ErrorKind::InvalidArgument, "coupling g must be positive");
  const double g = units::mhz_to_rad_per_ns(g_mhz);
  const double d = units::mhz_to_rad_per_ns(delta_mhz);
  return -d * ops.n_transmon + g * (ops.a_dag * ops.sigma_minus + ops.a * ops.sigma_plus);
}

/// |0> for N = 0, otherwise |N+> or |N->.
struct DressedLabel {
  int N = 0;
  int sign = 0;  // +1, -1; 0 only for the ground state

  static DressedLabel ground() { return {0, 0}; }
  static DressedLabel plus(int n) { return {n, +1}; }
  static DressedLabel minus(int n) { return {n, -1}; }

  bool valid() const { return N == 0 ? sign == 0 : (N > 0 && (sign == 1 || sign == -1)); }

  std::string str() const {
    if (N == 0) return "0";
    return std::to_string(N) + (sign > 0 ? "+" : "-");
  }

  /// Parses "0", "3+", "|3->" and similar.
  static DressedLabel parse(std::string text) {
    std::string t;
    for (char c : text)
      if (!std::isspace(static_cast<unsigned char>(c)) && c != '|' && c != '>' && c != '<') t += c;
    if (t.empty()) throw Error(ErrorKind::InvalidArgument, "empty dressed label");
    int sign = 0;
    if (t.back() == '+' || t.back() == '-') {
      sign = t.back() == '+' ? 1 : -1;
      t.pop_back();
    }
    for (char c : t)
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw Error(ErrorKind::InvalidArgument, "bad dressed label '" + text + "'");
    DressedLabel label{std::stoi(t), sign};
    if (!label.valid()) throw Error(ErrorKind::InvalidArgument, "bad dressed label '" + text + "'");
    return label;
  }

  bool operator==(const DressedLabel&) const = default;
  auto operator<=>(const DressedLabel&) const = default;
};

/// A drivable transition between adjacent manifolds; `lower.N + 1 == upper.N`.
struct Transition {
  DressedLabel lower;
  DressedLabel upper;

  static Transition between(DressedLabel x, DressedLabel y) {
    if (x.N > y.N) std::swap(x, y);
    if (y.N != x.N + 1) {
      throw Error(ErrorKind::InvalidArgument,
                  "transition must connect adjacent manifolds: " + x.str() + " <-> " + y.str());
    }
    return {x, y};
  }

  std::string str() const { return "|" + lower.str() + "> <-> |" + upper.str() + ">"; }

  /// Parses "0<->1+", "|1+> <-> |2->" or "1+:2-".
  static Transition parse(const std::string& text) {
    std::string t;
    for (char c : text)
      if (!std::isspace(static_cast<unsigned char>(c)) && c != '|') t += c;
    std::size_t split = t.find("<->");
    std::size_t width = 3;
    if (split == std::string::npos) {
      split = t.find(':');
      width = 1;
    }
    if (split == std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, "cannot parse transition '" + text + "'");
    }
    auto strip = [](std::string x) {
      std::string y;
      for (char c : x)
        if (c != '<' && c != '>') y += c;
      return y;
    };
    return between(DressedLabel::parse(strip(t.substr(0, split))),
                   DressedLabel::parse(strip(t.substr(split + width))));
  }

  /// Compact form used in files: "1+<->2-".
  std::string key() const { return lower.str() + "<->" + upper.str(); }

  bool operator==(const Transition&) const = default;
  auto operator<=>(const Transition&) const = default;
};

/// Physical parameters. Frequencies in MHz/GHz, times in us/ns as named.
struct SystemModel {
  double g_mhz = 12.2;
  double delta_mhz = 0.0;
  double omega_cav_ghz = 6.868;
  double chi_mhz = 1.62;
  double t1_cav_us = 500.0;
  double t1_q_us = 15.0;
  double t2_q_us = 2.7;
  double parity_map_time_ns = 272.0;
  double tomo_half_pi_sigma_ns = 8.0;  // 0: instantaneous pi/2 pulses

  /// Pure dephasing time (1/T2 - 1/(2 T1))^-1 in us.
  double t_phi_us() const {
    const double rate = 1.0 / t2_q_us - 1.0 / (2.0 * t1_q_us);
    if (!(rate > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "T2 must be shorter than 2*T1 for finite T_phi");
    }
    return 1.0 / rate;
  }

  void validate() const {
    if (!(g_mhz > 0)) throw Error(ErrorKind::InvalidArgument, "g must be positive");
    if (!(t1_cav_us > 0 && t1_q_us > 0 && t2_q_us > 0 && parity_map_time_ns > 0)) {
      throw Error(ErrorKind::InvalidArgument, "all times must be positive");
    }
    if (!(tomo_half_pi_sigma_ns >= 0)) {
      throw Error(ErrorKind::InvalidArgument, "tomography pulse width must be >= 0 (0: instantaneous)");
    }
    (void)t_phi_us();
  }
};

/// Dressed state in the product basis.
inline StateVector dressed_state(const SpaceDims& dims, const DressedLabel& label) {
  if (!label.valid()) throw Error(ErrorKind::InvalidArgument, "invalid dressed label");
  if (label.N >= dims.cavity_levels) {
    throw Error(ErrorKind::Truncation, "dressed level " + label.str() +
                                           " exceeds cavity truncation " +
                                           std::to_string(dims.cavity_levels));
  }
  StateVector psi = StateVector::Zero(dims.total());
  if (label.N == 0) {
    psi(dims.index(0, 0)) = 1.0;
    return psi;
  }
  const double r = 1.0 / std::sqrt(2.0);
  psi(dims.index(label.N, 0)) = r;
  psi(dims.index(label.N - 1, 1)) = label.sign * r;
  return psi;
}

/// Labels of the dressed basis in a fixed order: 0, 1+, 1-, 2+, 2-, ...
/// The leftover |D_c - 1, e> (partner truncated) is not part of this list.
inline std::vector<DressedLabel> dressed_labels(const SpaceDims& dims) {
  std::vector<DressedLabel> out{DressedLabel::ground()};
  for (int n = 1; n < dims.cavity_levels; ++n) {
    out.push_back(DressedLabel::plus(n));
    out.push_back(DressedLabel::minus(n));
  }
  return out;
}

/// Unitary whose columns are the dressed states (ordered as dressed_labels),
/// followed by the unpaired top state |D_c - 1, e>.
inline Operator dressed_basis(const SpaceDims& dims) {
  Operator basis = Operator::Zero(dims.total(), dims.total());
  const auto labels = dressed_labels(dims);
  for (std::size_t k = 0; k < labels.size(); ++k) basis.col(k) = dressed_state(dims, labels[k]);
  basis(dims.index(dims.cavity_levels - 1, 1), dims.total() - 1) = 1.0;
  return basis;
}

/// Product state that a dressed state maps onto under slow detuning:
/// |N+> -> |N,g>, |N-> -> |N-1,e>.
inline StateVector undressed_partner(const SpaceDims& dims, const DressedLabel& label) {
  StateVector psi = StateVector::Zero(dims.total());
  if (label.N == 0) psi(dims.index(0, 0)) = 1.0;
  else if (label.sign > 0) psi(dims.index(label.N, 0)) = 1.0;
  else psi(dims.index(label.N - 1, 1)) = 1.0;
  return psi;
}

enum class MapDirection { Dress, Undress };

/// Instantaneous adiabatic map between the resonant eigenbasis and the
/// product basis.
inline Operator adiabatic_map(const SpaceDims& dims, MapDirection direction) {
  Operator undress = Operator::Zero(dims.total(), dims.total());
  for (const auto& label : dressed_labels(dims)) {
    undress += undressed_partner(dims, label) * dressed_state(dims, label).adjoint();
  }
  const int top = dims.index(dims.cavity_levels - 1, 1);
  undress(top, top) = 1.0;
  return direction == MapDirection::Undress ? undress : Operator(undress.adjoint());
}

enum class SidebandColor { Red, Blue };

/// |N+> <-> |(N+1)->  (red) and |N-> <-> |(N+1)+>  (blue), MHz relative to w_cav.
/// For N = 0 these are the |0> <-> |1-> and |0> <-> |1+> lines at -g and +g.
inline double sideband_frequency(int n, SidebandColor color, double g_mhz) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "manifold index must be non-negative");
  const double mag = (std::sqrt(n + 1.0) + std::sqrt(static_cast<double>(n))) * g_mhz;
  return color == SidebandColor::Red ? -mag : mag;
}

/// Resonant-JC energy of a dressed level, MHz: +-sqrt(N) g.
inline double dressed_energy_mhz(const DressedLabel& label, double g_mhz) {
  return label.N == 0 ? 0.0 : label.sign * std::sqrt(static_cast<double>(label.N)) * g_mhz;
}

/// <upper| sigma+ |lower> for the ideal resonant eigenstates.
inline double ideal_drive_element(const Transition& t) {
  const SpaceDims dims(t.upper.N + 2);
  const OperatorSet ops = build_operators(dims);
  return (dressed_state(dims, t.upper).adjoint() * ops.sigma_plus * dressed_state(dims, t.lower))(0)
      .real();
}

/// Excitation number parity exp(i pi (a^dag a + sigma+ sigma-)).
inline Operator excitation_parity(const OperatorSet& ops) {
  Operator p = Operator::Zero(ops.dims.total(), ops.dims.total());
  for (int n = 0; n < ops.dims.cavity_levels; ++n)
    for (int s = 0; s < 2; ++s) p(ops.dims.index(n, s), ops.dims.index(n, s)) = ((n + s) % 2) ? -1.0 : 1.0;
  return p;
}

/// Cavity photon parity exp(i pi a^dag a) (identity on the transmon).
inline Operator cavity_parity(const OperatorSet& ops) {
  Operator p = Operator::Zero(ops.dims.total(), ops.dims.total());
  for (int n = 0; n < ops.dims.cavity_levels; ++n)
    for (int s = 0; s < 2; ++s) p(ops.dims.index(n, s), ops.dims.index(n, s)) = (n % 2) ? -1.0 : 1.0;
  return p;
}

/// Reduced cavity density matrix (partial trace over the transmon).
inline DensityMatrix cavity_reduced(const SpaceDims& dims, const DensityMatrix& rho) {
  const int dc = dims.cavity_levels;
  DensityMatrix out = DensityMatrix::Zero(dc, dc);
  for (int m = 0; m < dc; ++m)
    for (int n = 0; n < dc; ++n)
      for (int s = 0; s < 2; ++s) out(m, n) += rho(dims.index(m, s), dims.index(n, s));
  return out;
}

/// Embeds a cavity state with the transmon in |g>.
inline StateVector with_ground_transmon(const SpaceDims& dims, const StateVector& cavity) {
  StateVector psi = StateVector::Zero(dims.total());
  for (Eigen::Index n = 0; n < cavity.size() && n < dims.cavity_levels; ++n)
    psi(dims.index(static_cast<int>(n), 0)) = cavity(n);
  return psi;
}

}  // namespace jcsim
