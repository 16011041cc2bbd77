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

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jcsim/hilbert.hpp"

namespace jcsim {

struct CalibrationRow {
  Transition transition;
  double freq_ghz = 0.0;
  double rabi_mhz = 0.0;              // Omega_s at the reference drive voltage
  std::optional<double> sigma_ns;     // Gaussian pi-pulse width, if calibrated
};

/// Per-transition drive frequency, Rabi rate and pi-pulse width.
class CalibrationTable {
 public:
  static constexpr double kMinFreqGhz = 6.7;
  static constexpr double kMaxFreqGhz = 7.0;
  static constexpr double kReferenceVolts = 0.4;

  CalibrationTable() = default;

  /// Device calibration used throughout the examples.
  static CalibrationTable device_default() {
    CalibrationTable t;
    auto add = [&](const char* tr, double f, double rabi, std::optional<double> sigma) {
      t.insert({Transition::parse(tr), f, rabi, sigma});
    };
    add("0<->1+", 6.8809, 29.0, 68);
    add("0<->1-", 6.8566, 25.5, 52);
    add("1-<->2+", 6.8987, 22.3, 44);
    add("1+<->2-", 6.8402, 18.9, 48);
    add("2-<->3+", 6.9074, 24.1, 44);
    add("2+<->3-", 6.8315, 19.4, 32);
    add("3-<->4+", 6.9142, 25.9, 44);
    add("3+<->4-", 6.8246, 22.0, 24);
    add("4-<->5+", 6.9201, 25.5, 32);
    add("5+<->6-", 6.8143, 22.7, std::nullopt);
    add("6-<->7+", 6.9291, 24.5, std::nullopt);
    return t;
  }

  void insert(const CalibrationRow& row) {
    if (!(row.freq_ghz >= kMinFreqGhz && row.freq_ghz <= kMaxFreqGhz)) {
      throw Error(ErrorKind::InvalidArgument,
                  "calibration frequency outside sanity window for " + row.transition.str());
    }
    if (!(row.rabi_mhz > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "Rabi rate must be positive for " + row.transition.str());
    }
    if (row.sigma_ns && !(*row.sigma_ns > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "sigma must be positive for " + row.transition.str());
    }
    auto it = index_.find(row.transition);
    if (it != index_.end()) {
      rows_[it->second] = row;
    } else {
      index_[row.transition] = rows_.size();
      rows_.push_back(row);
    }
  }

  bool contains(const Transition& t) const { return index_.count(t) != 0; }

  const CalibrationRow& at(const Transition& t) const {
    auto it = index_.find(t);
    if (it == index_.end()) {
      throw Error(ErrorKind::MissingCalibration, "no calibration for transition " + t.str());
    }
    return rows_[it->second];
  }

  const std::vector<CalibrationRow>& rows() const { return rows_; }

  /// Drive detuning from the cavity frame, MHz.
  double detuning_mhz(const Transition& t, double omega_cav_ghz) const {
    return (at(t).freq_ghz - omega_cav_ghz) * 1e3;
  }

  /// Energies of dressed levels (MHz, rotating frame at w_cav) implied by
  /// chaining table frequencies up from |0>. Levels not reachable through
  /// the table are absent.
  std::map<DressedLabel, double> level_energies_mhz(double omega_cav_ghz) const {
    std::map<DressedLabel, double> energies{{DressedLabel::ground(), 0.0}};
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& row : rows_) {
        const double step = (row.freq_ghz - omega_cav_ghz) * 1e3;
        auto lo = energies.find(row.transition.lower);
        auto hi = energies.find(row.transition.upper);
        if (lo != energies.end() && hi == energies.end()) {
          energies[row.transition.upper] = lo->second + step;
          changed = true;
        } else if (hi != energies.end() && lo == energies.end()) {
          energies[row.transition.lower] = hi->second - step;
          changed = true;
        }
      }
    }
    return energies;
  }

  /// CSV with header "transition,freq_GHz,omega_MHz,sigma_ns"; empty sigma
  /// means not calibrated.
  std::string to_csv() const {
    std::ostringstream out;
    out << "transition,freq_GHz,omega_MHz,sigma_ns\n";
    out.precision(10);
    for (const auto& r : rows_) {
      out << r.transition.key() << ',' << r.freq_ghz << ',' << r.rabi_mhz << ',';
      if (r.sigma_ns) out << *r.sigma_ns;
      out << '\n';
    }
    return out.str();
  }

  static CalibrationTable from_csv(std::istream& in) {
    CalibrationTable t;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      if (line.rfind("transition", 0) == 0) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() < 3) {
        throw Error(ErrorKind::Config, "calibration line " + std::to_string(line_no) +
                                           ": expected at least 3 columns");
      }
      CalibrationRow row;
      row.transition = Transition::parse(cells[0]);
      row.freq_ghz = std::stod(cells[1]);
      row.rabi_mhz = std::stod(cells[2]);
      if (cells.size() > 3 && cells[3].find_first_not_of(" \t\r") != std::string::npos) {
        row.sigma_ns = std::stod(cells[3]);
      }
      t.insert(row);
    }
    return t;
  }

  static CalibrationTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open calibration table " + path);
    return from_csv(in);
  }

 private:
  std::vector<CalibrationRow> rows_;
  std::map<Transition, std::size_t> index_;
};

}  // namespace jcsim
