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

// Flat run configuration: "section.key = value" lines, '#' comments, or the
// same keys as (possibly nested) JSON.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jcsim/core.hpp"

namespace jcsim {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline void flatten_json(const nlohmann::json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten_json(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    return;
  }
  if (j.is_string()) out[prefix] = j.get<std::string>();
  else if (j.is_array()) {
    std::string joined;
    for (const auto& v : j) {
      if (!joined.empty()) joined += ',';
      joined += v.is_string() ? v.get<std::string>() : v.dump();
    }
    out[prefix] = joined;
  } else out[prefix] = j.dump();
}

}  // namespace detail

/// Parses "1.5", "pi", "pi/4", "3pi/4", "-0.5pi".
inline double parse_real(const std::string& text) {
  const std::string s = detail::trim(text);
  const auto p = s.find("pi");
  if (p == std::string::npos) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw Error(ErrorKind::Config, "not a number: '" + s + "'");
    return v;
  }
  std::string coef = s.substr(0, p);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  double c = coef.empty() || coef == "+" ? 1.0 : coef == "-" ? -1.0 : parse_real(coef);
  std::string rest = s.substr(p + 2);
  if (!rest.empty()) {
    if (rest[0] != '/') throw Error(ErrorKind::Config, "bad angle: '" + s + "'");
    c /= parse_real(rest.substr(1));
  }
  return c * kPi;
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig from_text(std::istream& in) {
    RunConfig c;
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
      ++no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::Config, "line " + std::to_string(no) + ": expected key = value");
      const std::string key = detail::trim(line.substr(0, eq));
      if (key.empty()) throw Error(ErrorKind::Config, "line " + std::to_string(no) + ": empty key");
      if (c.values_.count(key)) throw Error(ErrorKind::Config, "duplicate key '" + key + "'");
      c.values_[key] = detail::trim(line.substr(eq + 1));
    }
    return c;
  }

  static RunConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::Config, "JSON config must be an object");
    RunConfig c;
    detail::flatten_json(j, "", c.values_);
    return c;
  }

  static RunConfig parse(const std::string& text) {
    const std::string t = detail::trim(text);
    if (!t.empty() && t.front() == '{') {
      try {
        return from_json(nlohmann::json::parse(t));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, std::string("bad JSON config: ") + e.what());
      }
    }
    std::istringstream in(text);
    return from_text(in);
  }

  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig c = parse(ss.str());
    c.base_dir_ = std::filesystem::path(path).parent_path().string();
    return c;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    return parse_real(str(key, ""));
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    const std::string s = str(key, "");
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw Error(ErrorKind::Config, key + ": not an integer: '" + s + "'");
    return v;
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    const std::string s = str(key, "");
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw Error(ErrorKind::Config, key + ": not a seed: '" + s + "'");
    return v;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    std::string s = str(key, "");
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw Error(ErrorKind::Config, key + ": not a boolean: '" + s + "'");
  }

  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    std::vector<double> out;
    for (const auto& item : split_list(str(key, ""))) out.push_back(parse_real(item));
    return out;
  }

  /// Resolves relative paths against the config file's directory.
  std::string path(const std::string& key, const std::string& fallback = {}) const {
    std::string p = str(key, fallback);
    if (p.empty()) return p;
    std::filesystem::path fp(p);
    if (fp.is_relative() && !base_dir_.empty()) fp = std::filesystem::path(base_dir_) / fp;
    if (!std::filesystem::exists(fp)) throw Error(ErrorKind::Config, key + ": file not found: " + fp.string());
    return fp.string();
  }

  /// Keys present in the file that no stage read.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
  std::string base_dir_;
};

}  // namespace jcsim
