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

// jcsim [protocol] --config run.cfg --seed 0 --out out/ [--check] [--threads N]

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "jcsim/parallel.hpp"
#include "jcsim/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Jaynes-Cummings ladder control simulator"};
  std::string protocol;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool check = false;
  int threads = -1;
  app.add_option("protocol", protocol, "spectrum, prepare, multitone, givens, calibrate, tomography, reconstruct, "
                                       "error-budget, hardware, parametric or noop");
  app.add_option("--config", config_path, "run configuration (key = value or JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "64-bit master seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--check", check, "exit 4 when a tolerance check misses");
  app.add_option("--threads", threads, "worker thread cap")->check(CLI::NonNegativeNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : jcsim::kExitConfig;
  }

  if (threads < 0) {
    if (const char* env = std::getenv("JCSIM_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        std::cerr << "JCSIM_THREADS: not an integer\n";
        return jcsim::kExitConfig;
      }
    }
  }
  if (threads >= 0) jcsim::set_thread_count(threads);

  jcsim::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = jcsim::RunConfig::load(config_path);
    const std::string from_cfg = cfg.str("protocol", "");
    if (protocol.empty()) protocol = from_cfg;
    if (!seed_opt->count()) seed = cfg.seed("seed", 0);
    else cfg.seed("seed", 0);
    const std::string cfg_out = cfg.str("out", "out");
    if (out_dir.empty()) out_dir = cfg_out;
  } catch (const jcsim::Error& e) {
    std::cerr << "config: " << e.what() << "\n";
    return jcsim::kExitConfig;
  }
  if (protocol.empty()) {
    std::cerr << "no protocol given\n";
    return jcsim::kExitConfig;
  }

  const jcsim::RunReport rep = jcsim::run_protocol(protocol, cfg, out_dir, seed, check);
  for (const auto& c : rep.checks)
    std::cout << (c.pass() ? "PASS " : "MISS ") << c.name << " = " << c.value << " in [" << c.lo << ", " << c.hi
              << "]\n";
  if (!rep.message.empty()) std::cerr << rep.message << "\n";
  return rep.exit_code;
}
