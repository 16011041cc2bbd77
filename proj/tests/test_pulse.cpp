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

#include "jcsim/pulse.hpp"

namespace jcsim {
namespace {

TEST(Envelope, GaussianAreaMatchesQuadrature) {
  const Envelope e = Envelope::gaussian(10.0, 1.0);
  EXPECT_DOUBLE_EQ(e.duration_ns, 40.0);
  EXPECT_NEAR(e.shape_integral(), 21.409858154364243, 1e-12);
  EXPECT_NEAR(e.shape(0.0), 0.0, 1e-15);
  EXPECT_NEAR(e.shape(40.0), 0.0, 1e-15);
  EXPECT_NEAR(e.shape(20.0), 1.0, 1e-15);
  EXPECT_THROW(Envelope::gaussian(0.0, 1.0), Error);
}

TEST(Envelope, CosineRampArea) {
  const Envelope e = Envelope::cosine_ramp(100.0, 10.0, 2.0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += e.shape((i + 0.5) * 100.0 / n) * 100.0 / n;
  EXPECT_NEAR(sum, e.shape_integral(), 1e-8);
  EXPECT_THROW(Envelope::cosine_ramp(10.0, 6.0, 1.0), Error);
}

TEST(PiPulse, AreaGivesRequestedRotation) {
  const CalibrationTable table = CalibrationTable::device_default();
  for (const auto& row : table.rows()) {
    if (!row.sigma_ns) continue;
    const Tone t = gaussian_pi_pulse(row.transition, table, kPi);
    EXPECT_NEAR(tone_rotation_angle(t), kPi, 1e-12);
    EXPECT_NEAR(t.detuning_mhz, (row.freq_ghz - 6.868) * 1e3, 1e-9);
  }
  EXPECT_THROW(gaussian_pi_pulse(Transition::parse("5+<->6-"), table, kPi), Error);
  EXPECT_THROW(gaussian_pi_pulse(Transition::parse("0<->1+"), table, 7.0), Error);
}

TEST(Schedule, JsonRoundTrip) {
  const CalibrationTable table = CalibrationTable::device_default();
  PulseSchedule s;
  s.append({gaussian_pi_pulse(Transition::parse("0<->1+"), table, kPi / 3, 6.868, 0.4)});
  s.append({gaussian_pi_pulse(Transition::parse("1+<->2-"), table, kPi)});
  JxSpec jx;
  jx.chain = {DressedLabel::ground(), DressedLabel::plus(1), DressedLabel::minus(2)};
  jx.amplitude_mhz = JxSpec::amplitude_for_duration(200.0);
  const PulseSchedule both = sequence_concat({s, jx_schedule(jx, table)});
  const PulseSchedule back = PulseSchedule::from_json(nlohmann::json::parse(both.to_json().dump()));
  EXPECT_EQ(back, both);
  EXPECT_EQ(back.tone_count(), 4u);
  EXPECT_NEAR(both.total_duration_ns(), 4 * 68.0 + 4 * 48.0 + 202.0, 1e-9);
}

TEST(Schedule, RejectsOutOfOrderSegments) {
  PulseSchedule s;
  Tone t;
  t.envelope = Envelope::flat(10.0, 1.0);
  s.add_segment(20.0, {t});
  EXPECT_THROW(s.add_segment(5.0, {t}), Error);
  EXPECT_THROW(s.set_total_duration(25.0), Error);
  s.set_total_duration(50.0);
  EXPECT_DOUBLE_EQ(s.total_duration_ns(), 50.0);
  t.detuning_mhz = 600.0;
  EXPECT_THROW(s.add_segment(30.0, {t}), Error);
}

TEST(Jx, AmplitudesFollowSpinMatrixElements) {
  const CalibrationTable table = CalibrationTable::device_default();
  JxSpec jx;
  jx.chain = {DressedLabel::plus(1), DressedLabel::ground(), DressedLabel::minus(1)};
  EXPECT_THROW(jx.validate(table), Error);  // zero amplitude
  jx.chain = {DressedLabel::ground(), DressedLabel::plus(1), DressedLabel::minus(2), DressedLabel::plus(3)};
  jx.amplitude_mhz = 1.0;
  const auto amps = jx.link_amplitudes(table);
  ASSERT_EQ(amps.size(), 3u);
  // eta = 1/(2|m|): 1/sqrt2 on the first link, 1 on the others; sqrt(n (d - n)) = sqrt3, 2, sqrt3
  EXPECT_NEAR(std::abs(amps[0]), 2.0 * std::sqrt(3.0) / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(std::abs(amps[1]), 2.0 * 2.0, 1e-12);
  EXPECT_NEAR(std::abs(amps[2]), 2.0 * std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(jx.pi_time_ns(), 500.0, 1e-9);
}

TEST(Calibration, CsvRoundTrip) {
  const CalibrationTable t = CalibrationTable::device_default();
  std::istringstream in(t.to_csv());
  const CalibrationTable back = CalibrationTable::from_csv(in);
  ASSERT_EQ(back.rows().size(), t.rows().size());
  for (std::size_t i = 0; i < t.rows().size(); ++i) {
    EXPECT_EQ(back.rows()[i].transition, t.rows()[i].transition);
    EXPECT_DOUBLE_EQ(back.rows()[i].freq_ghz, t.rows()[i].freq_ghz);
    EXPECT_EQ(back.rows()[i].sigma_ns, t.rows()[i].sigma_ns);
  }
  std::istringstream bad("0<->1+,7.5,20\n");
  EXPECT_THROW(CalibrationTable::from_csv(bad), Error);
}

TEST(Calibration, LevelEnergiesChainUpFromVacuum) {
  const auto e = CalibrationTable::device_default().level_energies_mhz(6.868);
  EXPECT_NEAR(e.at(DressedLabel::plus(1)), 12.9, 1e-9);
  EXPECT_NEAR(e.at(DressedLabel::minus(2)), 12.9 - 27.8, 1e-9);
}

}  // namespace
}  // namespace jcsim
