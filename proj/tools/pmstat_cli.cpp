// Copyright 2026 The pm-statkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// pmstat_cli: runs scenario files and lists the builtin catalogue.
//
//   pmstat_cli run <file|name|dir>... [--out DIR] [--seed U64] [--truncation N] [--jobs N]
//   pmstat_cli list-builtins
//
// Flags may also come from PMSTAT_OUT, PMSTAT_SEED, PMSTAT_TRUNCATION and
// PMSTAT_JOBS; a flag on the command line wins.
//
// Exit codes: 0 all expectations met, 1 schema or usage error, 2 a verdict
// contradicts its expectation, 3 some verdict is indeterminate.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pmstat/scenario.hpp"

namespace fs = std::filesystem;
namespace sc = pmstat::scenario;

namespace {

#ifndef PMSTAT_SCENARIO_DIR
#define PMSTAT_SCENARIO_DIR "scenarios"
#endif

fs::path scenario_dir() {
  if (const char* env = std::getenv("PMSTAT_SCENARIO_DIR")) return env;
  return PMSTAT_SCENARIO_DIR;
}

// A bare name resolves against the bundled scenario directory.
std::vector<fs::path> resolve(const std::vector<std::string>& targets) {
  std::vector<fs::path> out;
  for (const auto& t : targets) {
    fs::path p(t);
    if (fs::is_directory(p)) {
      auto files = sc::scenario_files(p);
      out.insert(out.end(), files.begin(), files.end());
    } else if (fs::exists(p)) {
      out.push_back(p);
    } else if (fs::exists(scenario_dir() / (t + ".json"))) {
      out.push_back(scenario_dir() / (t + ".json"));
    } else {
      throw sc::SchemaError({t + ": no such file, directory or bundled scenario"});
    }
  }
  return out;
}

struct Job {
  fs::path file;
  std::string log;
  int code = 0;
};

void run_one(Job& job, const sc::Overrides& over, const fs::path& out_root) {
  try {
    const auto s = sc::load_scenario(job.file, over);
    const auto r = sc::run(s);
    const fs::path dir = out_root / s.name;
    sc::write_artifacts(r, dir);
    job.code = r.exit_code();
    job.log = "== " + s.name + " (exit " + std::to_string(job.code) + ", artifacts in " + dir.string() + ")\n";
    for (const auto& o : r.outcomes) {
      job.log += "  [" + sc::to_string(o.status()) + "] " + o.name + ": " + pmstat::to_string(o.verdict) +
                 " (expected " + pmstat::to_string(o.expected) + ")\n";
    }
  } catch (const sc::SchemaError& e) {
    job.code = 1;
    job.log = "== " + job.file.string() + ": schema error\n";
    for (const auto& i : e.issues) job.log += "  " + i + "\n";
  } catch (const std::exception& e) {
    job.code = 1;
    job.log = "== " + job.file.string() + ": error: " + e.what() + "\n";
  }
}

int run_command(const std::vector<std::string>& targets, const sc::Overrides& over, const fs::path& out,
                unsigned jobs) {
  std::vector<Job> work;
  try {
    for (const auto& f : resolve(targets)) work.push_back({f, "", 0});
  } catch (const sc::SchemaError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) run_one(work[i], over, out);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < std::min<std::size_t>(jobs, work.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Worst code wins: schema errors, then failures, then indeterminate.
  int code = 0;
  for (const auto& j : work) {
    std::cout << j.log;
    if (j.code == 1 || (j.code == 2 && code != 1) || (j.code == 3 && code == 0)) code = j.code;
  }
  std::cout << work.size() << " scenario(s), exit " << code << "\n";
  return code;
}

void list_builtins() {
  auto section = [](const char* title, std::vector<std::string> items) {
    std::sort(items.begin(), items.end());
    std::cout << title << ":\n";
    for (const auto& i : items) std::cout << "  " << i << "\n";
  };
  section("spaces", sc::builtin_spaces());
  section("triangle functions", sc::builtin_taus());
  section("matrices", pmstat::builtin_matrices());
  section("index sets", sc::builtin_index_sets());
  section("diagnostics", sc::diagnostic_names());
  std::vector<std::string> names;
  if (fs::is_directory(scenario_dir())) {
    for (const auto& f : sc::scenario_files(scenario_dir())) names.push_back(f.stem().string());
  }
  section("scenarios", names);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diagnostics for strong A-statistical convergence in probabilistic metric spaces"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run scenario files, bundled scenario names or directories");
  std::vector<std::string> targets;
  std::string out = "pmstat-out";
  std::uint64_t seed = 0;
  std::size_t truncation = 0;
  unsigned jobs = 1;
  run->add_option("scenario", targets, "Scenario file, bundled name or directory")->required();
  run->add_option("--out", out, "Output directory")->envname("PMSTAT_OUT");
  auto* seed_opt = run->add_option("--seed", seed, "Seed for noise terms")->envname("PMSTAT_SEED");
  auto* trunc_opt = run->add_option("--truncation", truncation, "Override N (J follows)")
                        ->envname("PMSTAT_TRUNCATION")
                        ->check(CLI::Range(std::size_t{100}, std::size_t{50000000}));
  run->add_option("--jobs", jobs, "Scenarios run concurrently")->envname("PMSTAT_JOBS")->check(CLI::Range(1u, 64u));

  app.add_subcommand("list-builtins", "List spaces, matrices, index sets and bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (app.got_subcommand("list-builtins")) {
    list_builtins();
    return 0;
  }
  sc::Overrides over;
  if (*seed_opt) over.seed = seed;
  if (*trunc_opt) over.truncation = truncation;
  return run_command(targets, over, out, jobs);
}
