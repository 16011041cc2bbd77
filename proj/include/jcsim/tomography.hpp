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

// Wigner functions as displaced parity, exact and through a simulated
// dispersive Ramsey readout.

#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jcsim/hilbert.hpp"
#include "jcsim/lindblad.hpp"
#include "jcsim/parallel.hpp"

namespace jcsim {

/// <m|D(alpha)|n> for m < rows, n < cols, from the exact (untruncated)
/// operator via sqrt(m+1) D[m+1][n] = alpha D[m][n] + sqrt(n) D[m][n-1].
inline Operator displacement_matrix(cplx alpha, int rows, int cols) {
  if (rows < 1 || cols < 1) throw Error(ErrorKind::InvalidDims, "displacement matrix needs positive size");
  Operator d(rows, cols);
  d(0, 0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < cols; ++n) d(0, n) = d(0, n - 1) * (-std::conj(alpha)) / std::sqrt(double(n));
  for (int m = 0; m + 1 < rows; ++m) {
    const double s = 1.0 / std::sqrt(double(m + 1));
    d(m + 1, 0) = s * alpha * d(m, 0);
    for (int n = 1; n < cols; ++n) d(m + 1, n) = s * (alpha * d(m, n) + std::sqrt(double(n)) * d(m, n - 1));
  }
  return d;
}

enum class WignerScaling {
  Raw,        // tr(P D^dag rho D), in [-1, 1]
  TwoOverPi,  // (2/pi) times raw
};

inline const char* wigner_scaling_name(WignerScaling s) { return s == WignerScaling::Raw ? "raw" : "two_over_pi"; }

/// |alpha|^2 within 2 of the cavity truncation.
inline bool truncation_warning(cplx alpha, int cavity_levels) {
  return std::norm(alpha) > cavity_levels - 2.0;
}

/// tr(P D(alpha)^dag rho D(alpha)) = sum_mn rho_mn (-1)^m <n|D(2 alpha)|m>.
inline double wigner_exact(const DensityMatrix& rho_cavity, cplx alpha,
                           WignerScaling scaling = WignerScaling::Raw) {
  const int d = static_cast<int>(rho_cavity.rows());
  if (d < 1 || rho_cavity.cols() != d) throw Error(ErrorKind::InvalidDims, "cavity density matrix must be square");
  const Operator k = displacement_matrix(2.0 * alpha, d, d);
  double w = 0.0;
  for (int m = 0; m < d; ++m) {
    const double sign = (m % 2) ? -1.0 : 1.0;
    for (int n = 0; n < d; ++n) w += sign * (rho_cavity(m, n) * k(n, m)).real();
  }
  return scaling == WignerScaling::Raw ? w : w * 2.0 / kPi;
}

// ------------------------------------------------------------------ grids

enum class GridKind { Square, List };

/// Square grid, row-major with Im(alpha) as the slow index.
inline std::vector<cplx> make_square_grid(double extent, int n_points_per_axis) {
  if (n_points_per_axis < 1 || !(extent >= 0.0)) throw Error(ErrorKind::InvalidArgument, "bad grid specification");
  std::vector<cplx> g;
  g.reserve(n_points_per_axis * n_points_per_axis);
  const double step = n_points_per_axis > 1 ? 2.0 * extent / (n_points_per_axis - 1) : 0.0;
  for (int i = 0; i < n_points_per_axis; ++i)
    for (int j = 0; j < n_points_per_axis; ++j)
      g.emplace_back(-extent + j * step, -extent + i * step);
  return g;
}

/// 1D cut along Re(alpha).
inline std::vector<cplx> make_cut(double extent, int n_points) {
  if (n_points < 1) throw Error(ErrorKind::InvalidArgument, "bad cut specification");
  std::vector<cplx> g;
  const double step = n_points > 1 ? 2.0 * extent / (n_points - 1) : 0.0;
  for (int j = 0; j < n_points; ++j) g.emplace_back(-extent + j * step, 0.0);
  return g;
}

inline std::vector<cplx> make_grid(GridKind kind, double extent, int n_points, const std::vector<cplx>& list = {}) {
  if (kind == GridKind::List) return list;
  return make_square_grid(extent, n_points);
}

struct WignerData {
  std::vector<cplx> points;
  std::vector<double> values;
  std::string scaling = "raw";
  bool truncation_warning = false;
  std::optional<double> vacuum_amplitude, vacuum_offset;

  std::string to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "re_alpha,im_alpha,value\n";
    for (std::size_t i = 0; i < points.size(); ++i)
      out << points[i].real() << ',' << points[i].imag() << ',' << values[i] << '\n';
    return out.str();
  }

  nlohmann::json sidecar() const {
    nlohmann::json j;
    j["scaling"] = scaling;
    j["n_points"] = points.size();
    j["truncation_warning"] = truncation_warning;
    if (vacuum_amplitude) j["vacuum_reference"] = {{"amplitude", *vacuum_amplitude}, {"offset", *vacuum_offset}};
    else j["vacuum_reference"] = nullptr;
    return j;
  }

  static WignerData from_csv(std::istream& in) {
    WignerData w;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line.rfind("re_alpha", 0) == 0) continue;
      std::stringstream ss(line);
      std::string a, b, c;
      if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ','))
        throw Error(ErrorKind::Config, "Wigner CSV line needs 3 columns: " + line);
      w.points.emplace_back(std::stod(a), std::stod(b));
      w.values.push_back(std::stod(c));
    }
    return w;
  }
};

inline WignerData wigner_exact_grid(const DensityMatrix& rho_cavity, const std::vector<cplx>& points,
                                    WignerScaling scaling = WignerScaling::Raw) {
  WignerData w;
  w.points = points;
  w.values.resize(points.size());
  w.scaling = wigner_scaling_name(scaling);
  parallel_for(points.size(), [&](std::size_t i) { w.values[i] = wigner_exact(rho_cavity, points[i], scaling); });
  for (const auto& a : points) w.truncation_warning |= truncation_warning(a, static_cast<int>(rho_cavity.rows()));
  return w;
}

// -------------------------------------------------------- measured Wigner

/// Dispersive Ramsey parity readout: pi/2, wait, pi/2 with phase pi, then
/// P_g - P_e. For k photons the transmon sees H = -chi k |e><e| plus the
/// pulses, with its own T1 and dephasing; cavity loss is neglected.
class ParityReadout {
 public:
  ParityReadout(const SystemModel& model, ChannelToggles channels) : model_(model), channels_(channels) {}
  explicit ParityReadout(const SystemModel& model, bool decoherence = true)
      : ParityReadout(model, decoherence ? ChannelToggles::all() : ChannelToggles::none()) {}

  /// Effective observable on the transmon for photon number k:
  /// signal = tr(M_k rho_k).
  Eigen::Matrix2cd observable(int k) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(k, compute(k)).first->second;
  }

  /// Raw readout signal of a full-system state displaced by -alpha.
  double signal(const SpaceDims& dims, const DensityMatrix& rho, cplx alpha) const {
    const int dc = dims.cavity_levels;
    const double r = std::abs(alpha) + std::sqrt(double(dc));
    const int k_max = std::max(dc, static_cast<int>(std::ceil(r * r)) + 12);
    const Operator d = displacement_matrix(-alpha, k_max, dc);
    double s = 0.0;
    // per transmon pair (a, b): the dc x dc cavity block, displaced
    std::vector<Eigen::Matrix2cd> rho_k(k_max, Eigen::Matrix2cd::Zero());
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        Operator block(dc, dc);
        for (int m = 0; m < dc; ++m)
          for (int n = 0; n < dc; ++n) block(m, n) = rho(dims.index(m, a), dims.index(n, b));
        const Operator t = d * block;
        for (int k = 0; k < k_max; ++k) rho_k[k](a, b) = (t.row(k).array() * d.row(k).conjugate().array()).sum();
      }
    }
    for (int k = 0; k < k_max; ++k) {
      if (rho_k[k].cwiseAbs().maxCoeff() < 1e-16) continue;
      s += (observable(k) * rho_k[k].transpose()).trace().real();
    }
    return s;
  }

  const SystemModel& model() const { return model_; }

 private:
  Eigen::Matrix2cd compute(int k) const {
    // Heisenberg picture via the four basis inputs: M(j, i) = tr(O E(|i><j|)).
    Operator sp = Operator::Zero(2, 2), sm, ee = Operator::Zero(2, 2), sz = Operator::Zero(2, 2);
    sp(1, 0) = 1.0;
    sm = sp.adjoint();
    ee(1, 1) = 1.0;
    sz(0, 0) = -1.0;
    sz(1, 1) = 1.0;
    const double chi = units::mhz_to_rad_per_ns(model_.chi_mhz);
    const Operator h0 = -chi * k * ee;
    CollapseSet c;
    if (channels_.transmon_loss) c.ops.push_back(std::sqrt(1.0 / units::us_to_ns(model_.t1_q_us)) * sm);
    if (channels_.dephasing) c.ops.push_back(std::sqrt(1.0 / (2.0 * units::us_to_ns(model_.t_phi_us()))) * sz);
    const detail::Dissipator diss(c);
    const double sigma = model_.tomo_half_pi_sigma_ns;
    const Envelope env = Envelope::gaussian(std::max(sigma, 1.0), 1.0);
    const double peak = sigma > 0.0 ? (kPi / 2.0) / env.shape_integral() : 0.0;  // rad/ns
    const double dt = 0.125;

    auto free_step = [&](DensityMatrix& rho, const Operator& h, double step) {
      const Operator u = detail::step_unitary(h, step);
      diss.step(rho, 0.5 * step);
      rho = u * rho * u.adjoint();
      diss.step(rho, 0.5 * step);
    };
    auto half_pi = [&](DensityMatrix& rho, double phase) {
      const cplx e = std::polar(1.0, phase);
      if (sigma <= 0.0) {
        Operator gen = 0.5 * (kPi / 2.0) * (e * sp + std::conj(e) * sm);
        const Operator u = detail::step_unitary(gen, 1.0);
        rho = u * rho * u.adjoint();
        return;
      }
      const int steps = static_cast<int>(std::ceil(env.duration_ns / dt));
      const double h = env.duration_ns / steps;
      for (int i = 0; i < steps; ++i) {
        const double amp = peak * env.shape((i + 0.5) * h);
        const Operator hh = h0 + 0.5 * amp * (e * sp + std::conj(e) * sm);
        free_step(rho, hh, h);
      }
    };
    auto channel = [&](DensityMatrix rho) {
      half_pi(rho, 0.0);
      const double wait = model_.parity_map_time_ns;
      const int steps = std::max(1, static_cast<int>(std::ceil(wait / (4 * dt))));
      for (int i = 0; i < steps; ++i) free_step(rho, h0, wait / steps);
      half_pi(rho, kPi);
      return rho;
    };
    Eigen::Matrix2cd m;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        DensityMatrix in = DensityMatrix::Zero(2, 2);
        in(i, j) = 1.0;
        const DensityMatrix out = channel(in);
        m(i, j) = out(0, 0) - out(1, 1);  // O = |g><g| - |e><e|
      }
    }
    return m;  // signal = sum_ij m(i, j) rho(i, j)
  }

  SystemModel model_;
  ChannelToggles channels_;
  mutable std::mutex mutex_;
  mutable std::map<int, Eigen::Matrix2cd> cache_;
};

/// Scale of the readout: the simulated vacuum signal at alpha = 0.
struct VacuumReference {
  double amplitude = 1.0;
  double offset = 0.0;
  bool zero_contrast = false;

  static VacuumReference measure(const ParityReadout& readout) {
    const SpaceDims dims(2);
    DensityMatrix vac = DensityMatrix::Zero(dims.total(), dims.total());
    vac(0, 0) = 1.0;
    VacuumReference r;
    r.amplitude = readout.signal(dims, vac, 0.0);
    r.zero_contrast = std::abs(r.amplitude) < 1e-9;
    return r;
  }

  double normalize(double signal) const { return zero_contrast ? 0.0 : (signal - offset) / amplitude; }
};

/// Measured-Wigner grid; values are vacuum-normalized raw-convention parity.
inline WignerData wigner_measured_grid(const SpaceDims& dims, const DensityMatrix& rho_full,
                                       const std::vector<cplx>& points, const ParityReadout& readout,
                                       const VacuumReference& reference) {
  if (rho_full.rows() != dims.total()) throw Error(ErrorKind::InvalidDims, "state does not match dims");
  WignerData w;
  w.points = points;
  w.values.resize(points.size());
  w.scaling = "vacuum_normalized";
  w.vacuum_amplitude = reference.amplitude;
  w.vacuum_offset = reference.offset;
  for (int k = 0; k < dims.cavity_levels + 40; ++k) (void)readout.observable(k);
  parallel_for(points.size(), [&](std::size_t i) {
    w.values[i] = reference.normalize(readout.signal(dims, rho_full, points[i]));
  });
  for (const auto& a : points) w.truncation_warning |= truncation_warning(a, dims.cavity_levels);
  return w;
}

inline double wigner_measured(const SpaceDims& dims, const DensityMatrix& rho_full, cplx alpha,
                              const ParityReadout& readout, const VacuumReference& reference) {
  return reference.normalize(readout.signal(dims, rho_full, alpha));
}

}  // namespace jcsim
