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

// Drive envelopes, tones and schedules. A tone contributes
//   1/2 * Omega(t) * (exp(-i 2 pi detuning t) sigma+ + h.c.)
// where Omega(t) = amplitude * shape(t - start) * exp(i phase) and t is the
// absolute schedule time, so tone phases share one clock.

#include <algorithm>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jcsim/calibration.hpp"
#include "jcsim/hilbert.hpp"

namespace jcsim {

enum class EnvelopeKind { Gaussian, Flat, CosineRamp };

inline const char* envelope_kind_name(EnvelopeKind k) {
  switch (k) {
    case EnvelopeKind::Gaussian: return "gaussian";
    case EnvelopeKind::Flat: return "flat";
    case EnvelopeKind::CosineRamp: return "cosine_ramp";
  }
  return "flat";
}

inline EnvelopeKind parse_envelope_kind(const std::string& s) {
  if (s == "gaussian") return EnvelopeKind::Gaussian;
  if (s == "flat") return EnvelopeKind::Flat;
  if (s == "cosine_ramp") return EnvelopeKind::CosineRamp;
  throw Error(ErrorKind::InvalidArgument, "unknown envelope kind '" + s + "'");
}

struct Envelope {
  EnvelopeKind kind = EnvelopeKind::Flat;
  double sigma_ns = 0.0;     // gaussian only
  double duration_ns = 0.0;
  double edge_ns = 0.0;      // cosine_ramp only: length of each raised-cosine edge
  double amplitude_mhz = 0.0;
  double phase_rad = 0.0;

  /// Gaussian of the given width spanning 4 sigma, offset so it vanishes at both ends.
  static Envelope gaussian(double sigma_ns, double amplitude_mhz, double phase_rad = 0.0) {
    if (!(sigma_ns > 0.0)) throw Error(ErrorKind::InvalidArgument, "gaussian sigma must be positive");
    return {EnvelopeKind::Gaussian, sigma_ns, 4.0 * sigma_ns, 0.0, amplitude_mhz, phase_rad};
  }

  static Envelope flat(double duration_ns, double amplitude_mhz, double phase_rad = 0.0) {
    if (!(duration_ns > 0.0)) throw Error(ErrorKind::InvalidArgument, "duration must be positive");
    return {EnvelopeKind::Flat, 0.0, duration_ns, 0.0, amplitude_mhz, phase_rad};
  }

  static Envelope cosine_ramp(double duration_ns, double edge_ns, double amplitude_mhz,
                              double phase_rad = 0.0) {
    if (!(duration_ns > 0.0) || !(edge_ns >= 0.0) || 2.0 * edge_ns > duration_ns) {
      throw Error(ErrorKind::InvalidArgument, "cosine ramp needs duration >= 2*edge > 0");
    }
    return {EnvelopeKind::CosineRamp, 0.0, duration_ns, edge_ns, amplitude_mhz, phase_rad};
  }

  /// Unit-peak shape at local time t in [0, duration].
  double shape(double t) const {
    if (t < 0.0 || t > duration_ns) return 0.0;
    switch (kind) {
      case EnvelopeKind::Gaussian: {
        const double c = 2.0 * sigma_ns;
        const double floor = std::exp(-2.0);
        const double raw = std::exp(-(t - c) * (t - c) / (2.0 * sigma_ns * sigma_ns));
        return (raw - floor) / (1.0 - floor);
      }
      case EnvelopeKind::Flat:
        return 1.0;
      case EnvelopeKind::CosineRamp: {
        if (edge_ns <= 0.0) return 1.0;
        const double from_edge = std::min(t, duration_ns - t);
        if (from_edge >= edge_ns) return 1.0;
        return 0.5 * (1.0 - std::cos(kPi * from_edge / edge_ns));
      }
    }
    return 0.0;
  }

  /// Exact integral of shape() over the envelope, ns.
  double shape_integral() const {
    switch (kind) {
      case EnvelopeKind::Gaussian: {
        const double floor = std::exp(-2.0);
        const double raw = sigma_ns * std::sqrt(kTwoPi) * std::erf(std::sqrt(2.0));
        return (raw - 4.0 * sigma_ns * floor) / (1.0 - floor);
      }
      case EnvelopeKind::Flat:
        return duration_ns;
      case EnvelopeKind::CosineRamp:
        return duration_ns - edge_ns;
    }
    return 0.0;
  }

  cplx complex_amplitude() const { return std::polar(amplitude_mhz, phase_rad); }

  bool operator==(const Envelope&) const = default;
};

struct Tone {
  static constexpr double kMaxDetuningMhz = 500.0;

  double detuning_mhz = 0.0;
  Envelope envelope;
  std::optional<Transition> target;

  void validate(double max_detuning_mhz = kMaxDetuningMhz) const {
    if (!(std::abs(detuning_mhz) < max_detuning_mhz)) {
      throw Error(ErrorKind::InvalidArgument, "tone detuning outside sanity bound");
    }
    if (!std::isfinite(envelope.amplitude_mhz)) {
      throw Error(ErrorKind::InvalidArgument, "tone amplitude must be finite");
    }
  }

  bool operator==(const Tone&) const = default;
};

struct Segment {
  double start_ns = 0.0;
  std::vector<Tone> tones;

  double end_ns() const {
    double end = start_ns;
    for (const auto& t : tones) end = std::max(end, start_ns + t.envelope.duration_ns);
    return end;
  }

  bool operator==(const Segment&) const = default;
};

class PulseSchedule {
 public:
  PulseSchedule() = default;

  const std::vector<Segment>& segments() const { return segments_; }
  double total_duration_ns() const { return total_duration_ns_; }
  bool empty() const { return segments_.empty(); }

  /// Appends tones starting at `start_ns`; start times must not decrease.
  void add_segment(double start_ns, std::vector<Tone> tones) {
    if (!segments_.empty() && start_ns < segments_.back().start_ns) {
      throw Error(ErrorKind::InvalidArgument, "segment start times must be non-decreasing");
    }
    for (const auto& t : tones) t.validate();
    segments_.push_back({start_ns, std::move(tones)});
    total_duration_ns_ = std::max(total_duration_ns_, segments_.back().end_ns());
  }

  /// Appends a segment right after the current end.
  void append(std::vector<Tone> tones) { add_segment(total_duration_ns_, std::move(tones)); }

  void set_total_duration(double total_ns) {
    double last_end = 0.0;
    for (const auto& s : segments_) last_end = std::max(last_end, s.end_ns());
    if (total_ns < last_end - 1e-9) {
      throw Error(ErrorKind::InvalidArgument, "total duration shorter than the last tone");
    }
    total_duration_ns_ = std::max(total_ns, last_end);
  }

  std::size_t tone_count() const {
    std::size_t n = 0;
    for (const auto& s : segments_) n += s.tones.size();
    return n;
  }

  bool operator==(const PulseSchedule&) const = default;

  nlohmann::json to_json() const {
    nlohmann::json tones = nlohmann::json::array();
    for (const auto& seg : segments_) {
      for (const auto& t : seg.tones) {
        nlohmann::json j;
        j["start_ns"] = seg.start_ns;
        j["detuning_MHz"] = t.detuning_mhz;
        j["amplitude_MHz"] = t.envelope.amplitude_mhz;
        j["phase_rad"] = t.envelope.phase_rad;
        j["envelope"] = envelope_kind_name(t.envelope.kind);
        j["duration_ns"] = t.envelope.duration_ns;
        if (t.envelope.kind == EnvelopeKind::Gaussian) j["sigma_ns"] = t.envelope.sigma_ns;
        if (t.envelope.kind == EnvelopeKind::CosineRamp) j["edge_ns"] = t.envelope.edge_ns;
        if (t.target) j["transition"] = t.target->key();
        tones.push_back(j);
      }
    }
    return {{"total_duration_ns", total_duration_ns_}, {"tones", tones}};
  }

  static PulseSchedule from_json(const nlohmann::json& j) {
    PulseSchedule s;
    for (const auto& jt : j.at("tones")) {
      Tone t;
      t.detuning_mhz = jt.at("detuning_MHz").get<double>();
      t.envelope.kind = parse_envelope_kind(jt.at("envelope").get<std::string>());
      t.envelope.amplitude_mhz = jt.at("amplitude_MHz").get<double>();
      t.envelope.phase_rad = jt.value("phase_rad", 0.0);
      t.envelope.duration_ns = jt.at("duration_ns").get<double>();
      t.envelope.sigma_ns = jt.value("sigma_ns", 0.0);
      t.envelope.edge_ns = jt.value("edge_ns", 0.0);
      if (jt.contains("transition")) t.target = Transition::parse(jt["transition"].get<std::string>());
      const double start = jt.at("start_ns").get<double>();
      if (!s.segments_.empty() && s.segments_.back().start_ns == start) {
        t.validate();
        s.segments_.back().tones.push_back(t);
        s.total_duration_ns_ = std::max(s.total_duration_ns_, s.segments_.back().end_ns());
      } else {
        s.add_segment(start, {t});
      }
    }
    s.set_total_duration(j.at("total_duration_ns").get<double>());
    return s;
  }

 private:
  std::vector<Segment> segments_;
  double total_duration_ns_ = 0.0;
};

/// Time-shifted concatenation; the total is the sum of the parts.
inline PulseSchedule sequence_concat(const std::vector<PulseSchedule>& parts) {
  PulseSchedule out;
  double offset = 0.0;
  for (const auto& p : parts) {
    for (const auto& seg : p.segments()) out.add_segment(offset + seg.start_ns, seg.tones);
    offset += p.total_duration_ns();
    out.set_total_duration(offset);
  }
  return out;
}

/// Effective Rabi angle of a tone on its target transition, using the
/// resonant-JC matrix element of sigma+.
inline double tone_rotation_angle(const Tone& tone) {
  if (!tone.target) throw Error(ErrorKind::InvalidArgument, "tone has no target transition");
  const double m = std::abs(ideal_drive_element(*tone.target));
  return units::mhz_to_rad_per_ns(tone.envelope.amplitude_mhz) * m * tone.envelope.shape_integral();
}

/// Gaussian pulse on a calibrated transition with effective rotation `angle`.
inline Tone gaussian_pi_pulse(const Transition& transition, const CalibrationTable& table,
                              double angle, double omega_cav_ghz = 6.868, double phase_rad = 0.0,
                              std::optional<double> sigma_override = std::nullopt) {
  if (!(angle >= 0.0 && angle <= kTwoPi + 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "rotation angle must lie in [0, 2 pi]");
  }
  const CalibrationRow& row = table.at(transition);
  const std::optional<double> sigma = sigma_override ? sigma_override : row.sigma_ns;
  if (!sigma) {
    throw Error(ErrorKind::MissingCalibration, "no pulse width calibrated for " + transition.str());
  }
  Tone tone;
  tone.detuning_mhz = table.detuning_mhz(transition, omega_cav_ghz);
  tone.target = transition;
  tone.envelope = Envelope::gaussian(*sigma, 0.0, phase_rad);
  const double m = std::abs(ideal_drive_element(transition));
  tone.envelope.amplitude_mhz =
      angle / (units::mhz_to_rad_per_ns(1.0) * m * tone.envelope.shape_integral());
  return tone;
}

enum class EtaMode {
  MatrixElement,  // eta_n = 1 / (2 |<upper|sigma+|lower>|); exact J_x for the ideal model
  Table,          // eta_n = Omega_s(first link) / Omega_s(link n)
};

/// Multi-tone drive emulating a spin J_x on a chain of dressed levels.
struct JxSpec {
  std::vector<DressedLabel> chain;
  double amplitude_mhz = 0.0;      // overall A; J_x duration is pi / A
  std::vector<double> eta;         // per link, defaults from eta_mode when empty
  std::vector<double> phases;      // per link, rad
  std::vector<cplx> amplitude_override;  // per link drive amplitudes (MHz), e.g. optimized
  bool reversed = false;
  double edge_ns = 2.0;
  EtaMode eta_mode = EtaMode::MatrixElement;

  int d() const { return static_cast<int>(chain.size()); }

  std::vector<Transition> links() const {
    std::vector<Transition> out;
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
      out.push_back(Transition::between(chain[i], chain[i + 1]));
    return out;
  }

  /// Duration of the J_x pi rotation, pi / A with A in rad/ns.
  double pi_time_ns() const { return kPi / units::mhz_to_rad_per_ns(amplitude_mhz); }

  static double amplitude_for_duration(double duration_ns) {
    return units::rad_per_ns_to_mhz(kPi / duration_ns);
  }

  /// Eq.-style amplitudes 2 eta_n A sqrt(n (d - n)) with per-link phases.
  std::vector<cplx> link_amplitudes(const CalibrationTable& table) const {
    const auto ls = links();
    if (!amplitude_override.empty()) {
      if (amplitude_override.size() != ls.size()) {
        throw Error(ErrorKind::InvalidArgument, "amplitude override must have one entry per link");
      }
      return amplitude_override;
    }
    std::vector<cplx> out;
    const int dd = d();
    for (int n = 1; n < dd; ++n) {
      const double e = eta_for(n - 1, table);
      const double ph = phases.empty() ? 0.0 : phases.at(n - 1);
      out.push_back(std::polar(2.0 * e * amplitude_mhz * std::sqrt(double(n) * (dd - n)), ph));
    }
    return out;
  }

  double eta_for(std::size_t link, const CalibrationTable& table) const {
    if (!eta.empty()) return eta.at(link);
    const auto ls = links();
    if (eta_mode == EtaMode::Table) return table.at(ls.front()).rabi_mhz / table.at(ls[link]).rabi_mhz;
    return 1.0 / (2.0 * std::abs(ideal_drive_element(ls[link])));
  }

  void validate(const CalibrationTable& table) const {
    if (chain.size() < 2) throw Error(ErrorKind::InvalidArgument, "J_x chain needs d >= 2");
    if (!(amplitude_mhz > 0.0)) throw Error(ErrorKind::InvalidArgument, "J_x amplitude must be positive");
    for (const auto& l : links()) (void)table.at(l);
    for (double e : eta)
      if (!(e > 0.0)) throw Error(ErrorKind::InvalidArgument, "eta must be positive");
    if (!eta.empty() && eta.size() + 1 != chain.size()) {
      throw Error(ErrorKind::InvalidArgument, "eta must have d-1 entries");
    }
    if (!phases.empty() && phases.size() + 1 != chain.size()) {
      throw Error(ErrorKind::InvalidArgument, "phases must have d-1 entries");
    }
  }
};

/// Simultaneous tones on every chain link, flat top with raised-cosine edges.
/// The plateau is stretched so the envelope area equals pi / A. A reversed
/// spec negates every amplitude, which inverts the resonant J_x rotation.
inline PulseSchedule jx_schedule(const JxSpec& spec, const CalibrationTable& table,
                                 double omega_cav_ghz = 6.868) {
  spec.validate(table);
  const double area = spec.pi_time_ns();
  const double duration = area + spec.edge_ns;
  const auto ls = spec.links();
  const auto amps = spec.link_amplitudes(table);
  std::vector<Tone> tones;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    Tone t;
    t.detuning_mhz = table.detuning_mhz(ls[i], omega_cav_ghz);
    t.target = ls[i];
    double phase = std::arg(amps[i]);
    if (spec.reversed) phase = phase > 0.0 ? phase - kPi : phase + kPi;
    t.envelope = Envelope::cosine_ramp(duration, spec.edge_ns, std::abs(amps[i]), phase);
    tones.push_back(t);
  }
  PulseSchedule s;
  s.add_segment(0.0, std::move(tones));
  return s;
}

}  // namespace jcsim
