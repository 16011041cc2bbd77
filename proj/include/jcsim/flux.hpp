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

// SQUID transmon spectrum, flux sensitivity, the parametric Bessel law and
// an ideal transmission-line filter model.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "jcsim/core.hpp"

namespace jcsim {

/// Energies in GHz; phi_e = pi Phi_e / Phi_0.
struct SquidParams {
  double ec_ghz = 0.12;
  double ej1_ghz = 12.4;
  double gamma = 1.0;  // E_J2 / E_J1
  double phi_e = 0.0;

  void validate() const {
    if (!(ec_ghz > 0.0 && ej1_ghz > 0.0)) throw Error(ErrorKind::InvalidArgument, "E_C and E_J1 must be positive");
    if (!(gamma >= 1.0)) throw Error(ErrorKind::InvalidArgument, "asymmetry gamma must be >= 1");
  }
};

/// sqrt(8 E_C E_J1 sqrt(gamma^2 + 2 gamma cos 2 phi + 1)) - E_C, in GHz.
inline double transmon_freq(const SquidParams& p) {
  p.validate();
  const double s = std::sqrt(p.gamma * p.gamma + 2.0 * p.gamma * std::cos(2.0 * p.phi_e) + 1.0);
  return std::sqrt(8.0 * p.ec_ghz * p.ej1_ghz * s) - p.ec_ghz;
}

/// Two identical junctions of E_J each: sqrt(16 E_C E_J |cos phi|) - E_C.
inline double symmetric_transmon_freq(double ec_ghz, double ej_ghz, double phi_e) {
  return std::sqrt(16.0 * ec_ghz * ej_ghz * std::abs(std::cos(phi_e))) - ec_ghz;
}

/// d omega_T / d Phi_e in GHz per flux quantum.
inline double flux_sensitivity(const SquidParams& p) {
  p.validate();
  const double s2 = p.gamma * p.gamma + 2.0 * p.gamma * std::cos(2.0 * p.phi_e) + 1.0;
  return -kPi * std::sqrt(8.0 * p.ec_ghz * p.ej1_ghz) * p.gamma * std::sin(2.0 * p.phi_e) / std::pow(s2, 0.75);
}

/// Symmetric SQUID; diverges where cos phi_e reaches zero.
inline double symmetric_flux_sensitivity(double ec_ghz, double ej_ghz, double phi_e) {
  const double c = std::cos(phi_e);
  if (!(c > 1e-12)) {
    throw Error(ErrorKind::Singularity, "symmetric SQUID sensitivity is singular at cos(phi_e) <= 0");
  }
  return -2.0 * kPi * std::sqrt(ec_ghz * ej_ghz) * std::sin(phi_e) / std::sqrt(c);
}

/// d omega_T / d phi_e in GHz per radian of phi_e.
inline double dfreq_dphi(const SquidParams& p) { return flux_sensitivity(p) / kPi; }

/// E_C and E_J1 that put the spectrum extremes at f_max (phi_e = 0) and
/// f_min (phi_e = pi/2) for a given asymmetry.
inline SquidParams fit_squid_endpoints(double f_min_ghz, double f_max_ghz, double gamma) {
  if (!(gamma > 1.0)) throw Error(ErrorKind::InvalidArgument, "endpoint fit needs gamma > 1");
  if (!(f_max_ghz > f_min_ghz && f_min_ghz > 0.0)) throw Error(ErrorKind::InvalidArgument, "need 0 < f_min < f_max");
  const double x = (f_max_ghz - f_min_ghz) / (std::sqrt(gamma + 1.0) - std::sqrt(gamma - 1.0));
  SquidParams p;
  p.gamma = gamma;
  p.ec_ghz = x * std::sqrt(gamma + 1.0) - f_max_ghz;
  if (!(p.ec_ghz > 0.0)) throw Error(ErrorKind::Range, "endpoints imply a non-positive E_C");
  p.ej1_ghz = x * x / (8.0 * p.ec_ghz);
  return p;
}

/// Junction pair with E_J1 + E_J2 = ej_sum_ghz, so every asymmetry shares
/// the same sweet-spot frequency.
inline SquidParams squid_with_total_ej(double ec_ghz, double ej_sum_ghz, double gamma, double phi_e = 0.0) {
  SquidParams p{ec_ghz, ej_sum_ghz / (1.0 + gamma), gamma, phi_e};
  p.validate();
  return p;
}

/// Flux point in [0, pi/2] where the transmon sits at f_ghz.
inline double phi_for_frequency(SquidParams p, double f_ghz) {
  double lo = 0.0, hi = kPi / 2.0;
  p.phi_e = lo;
  const double f_lo = transmon_freq(p);
  p.phi_e = hi;
  const double f_hi = transmon_freq(p);
  if (!(f_ghz <= f_lo && f_ghz >= f_hi)) throw Error(ErrorKind::Range, "frequency outside the tuning range");
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    p.phi_e = mid;
    (transmon_freq(p) > f_ghz ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ----------------------------------------------------------------- Bessel

namespace detail {

inline double bessel_j1_series(double x) {
  const double h = 0.5 * x;
  const double h2 = h * h;
  double term = h, sum = h;
  for (int k = 1; k < 60; ++k) {
    term *= -h2 / (double(k) * double(k + 1));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

/// Miller backward recurrence normalized by J0 + 2 sum J_2k = 1.
inline double bessel_j1_miller(double x) {
  const int start = 2 * ((static_cast<int>(x) + 40) / 2);
  double jp1 = 0.0, j = 1e-300, j1 = 0.0, norm = 0.0;
  for (int n = start; n > 0; --n) {
    const double jm1 = 2.0 * n / x * j - jp1;
    jp1 = j;
    j = jm1;  // now J_{n-1}
    if (n - 1 == 1) j1 = j;
    if ((n - 1) % 2 == 0) norm += (n - 1 == 0 ? 1.0 : 2.0) * j;
    if (std::abs(j) > 1e250) {
      j *= 1e-250;
      jp1 *= 1e-250;
      j1 *= 1e-250;
      norm *= 1e-250;
    }
  }
  return j1 / norm;
}

/// Hankel asymptotic expansion, used for x >= 30 where it is exact to
/// double precision.
inline double bessel_j1_asymptotic(double x) {
  const double mu = 4.0;
  double p = 1.0, q = 0.0, term = 1.0;
  for (int k = 1; k < 30; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * x);
    if (k % 2 == 1) q += ((k / 2) % 2 ? -term : term);
    else p += ((k / 2) % 2 ? -term : term);
    if (std::abs(term) < 1e-17) break;
  }
  const double chi = x - 0.75 * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace detail

/// First-kind Bessel J_1: ascending series below 8, backward recurrence
/// up to 30, asymptotic expansion beyond.
inline double bessel_j1(double x) {
  const double ax = std::abs(x);
  double v;
  if (ax < 8.0) v = detail::bessel_j1_series(ax);
  else if (ax < 30.0) v = detail::bessel_j1_miller(ax);
  else v = detail::bessel_j1_asymptotic(ax);
  return x < 0.0 ? -v : v;
}

struct ParametricModel {
  double g_mhz = 11.3;
  double nu_ua = 53.0;
  double pump_ua = 0.0;

  void validate() const {
    if (!(nu_ua > 0.0)) throw Error(ErrorKind::InvalidArgument, "nu must be positive");
  }
};

/// g J_1(I_p / nu), MHz.
inline double g_effective(const ParametricModel& m) {
  m.validate();
  return m.g_mhz * bessel_j1(m.pump_ua / m.nu_ua);
}

/// nu = (2 pi / Phi_0 * d omega_T/d phi_e * L / omega_m)^-1 solved for L in
/// Phi_0 per mA. omega_m in MHz, d omega_T/d phi_e in GHz per radian.
inline double mutual_inductance_from_nu(double nu_ua, double omega_m_mhz, double domega_dphi_ghz) {
  if (!(nu_ua > 0.0) || !(domega_dphi_ghz != 0.0)) throw Error(ErrorKind::InvalidArgument, "bad parametric inputs");
  return (omega_m_mhz * 1e-3) / (kTwoPi * domega_dphi_ghz * nu_ua * 1e-3);
}

/// Inverse of mutual_inductance_from_nu; returns nu in uA.
inline double nu_from_mutual_inductance(double l_phi0_per_ma, double omega_m_mhz, double domega_dphi_ghz) {
  if (!(l_phi0_per_ma > 0.0) || !(domega_dphi_ghz != 0.0)) throw Error(ErrorKind::InvalidArgument, "bad parametric inputs");
  return (omega_m_mhz * 1e-3) / (kTwoPi * domega_dphi_ghz * l_phi0_per_ma) * 1e3;
}

// ----------------------------------------------------------------- filter

enum class SectionKind { SeriesLine, OpenStub, ShortStub, SeriesShortStub };

inline SectionKind parse_section_kind(const std::string& s) {
  if (s == "series-line") return SectionKind::SeriesLine;
  if (s == "open-stub") return SectionKind::OpenStub;
  if (s == "short-stub") return SectionKind::ShortStub;
  if (s == "series-short-stub") return SectionKind::SeriesShortStub;
  throw Error(ErrorKind::Config, "unknown filter section '" + s + "'");
}

struct FilterSection {
  SectionKind kind = SectionKind::SeriesLine;
  double impedance_ohm = 50.0;
  double length_rad = 0.0;  // electrical length at the reference frequency
};

using Abcd = Eigen::Matrix2cd;

/// Ideal lossless sections between equal port impedances. Electrical
/// lengths scale linearly with frequency.
struct FilterNetwork {
  std::vector<FilterSection> sections;
  double reference_ghz = 1.0;
  double port_ohm = 50.0;

  void validate() const {
    if (!(port_ohm > 0.0) || !(reference_ghz > 0.0)) throw Error(ErrorKind::InvalidArgument, "bad filter ports");
    for (const auto& s : sections)
      if (!(s.impedance_ohm > 0.0)) throw Error(ErrorKind::InvalidArgument, "section impedances must be positive");
  }

  Abcd abcd(double f_ghz) const {
    validate();
    Abcd total = Abcd::Identity();
    for (const auto& s : sections) {
      const double th = s.length_rad * f_ghz / reference_ghz;
      const double z = s.impedance_ohm;
      Abcd m;
      switch (s.kind) {
        case SectionKind::SeriesLine:
          m << std::cos(th), kI * z * std::sin(th), kI * std::sin(th) / z, std::cos(th);
          break;
        case SectionKind::OpenStub:
          m << 1.0, 0.0, kI * std::tan(th) / z, 1.0;
          break;
        case SectionKind::ShortStub:
          m << 1.0, 0.0, -kI / (z * std::tan(th)), 1.0;
          break;
        case SectionKind::SeriesShortStub:
          m << 1.0, kI * z * std::tan(th), 0.0, 1.0;
          break;
      }
      total = total * m;
    }
    return total;
  }

  cplx s21(double f_ghz) const {
    const Abcd m = abcd(f_ghz);
    const double z0 = port_ohm;
    return 2.0 / (m(0, 0) + m(0, 1) / z0 + m(1, 0) * z0 + m(1, 1));
  }

  cplx s12(double f_ghz) const {
    const Abcd m = abcd(f_ghz);
    const double z0 = port_ohm;
    return 2.0 * m.determinant() / (m(0, 0) + m(0, 1) / z0 + m(1, 0) * z0 + m(1, 1));
  }

  double s21_db(double f_ghz) const { return 20.0 * std::log10(std::abs(s21(f_ghz))); }
};

inline double filter_s21(const FilterNetwork& net, double f_ghz) { return net.s21_db(f_ghz); }

/// Richards-transformed lumped low-pass prototype: series inductors become
/// series short stubs (Z = g Z0), shunt capacitors open stubs (Z = Z0 / g),
/// all lambda/8 long at the cutoff.
inline FilterNetwork richards_lowpass(const std::vector<double>& g, double cutoff_ghz, double z0 = 50.0) {
  FilterNetwork net;
  net.reference_ghz = cutoff_ghz;
  net.port_ohm = z0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    FilterSection s;
    s.length_rad = kPi / 4.0;
    if (i % 2 == 0) {
      s.kind = SectionKind::SeriesShortStub;
      s.impedance_ohm = g[i] * z0;
    } else {
      s.kind = SectionKind::OpenStub;
      s.impedance_ohm = z0 / g[i];
    }
    net.sections.push_back(s);
  }
  return net;
}

}  // namespace jcsim
