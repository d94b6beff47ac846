/*
 * Copyright 2026 The gpbf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// gpbf: Bayes-factor variable selection experiments for Gaussian-process
// driven models.  Subcommands:
//   simulate  log-BF trajectories over the n-grid   -> trajectories.csv, summary.csv
//   select    simulate + subset selection           -> ... + selection.json
//   audit     assumption checks per candidate       -> audit.csv, audit.json
//   misspec   pairwise IBF matrix, truth excluded   -> misspec.csv, trajectories.csv,
//                                                      summary.csv
// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 i/o error.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gpbf/audit.hpp"
#include "gpbf/harness.hpp"

namespace fs = std::filesystem;
using namespace gpbf;

namespace {

struct CliOptions {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  int threads = 0;
  std::int64_t seed_override = -1;
  bool emit_data = false;
};

int resolve_threads(int cli_threads) {
  if (cli_threads > 0) return cli_threads;
  if (const char* env = std::getenv("GPBF_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t > 0) return t;
    } catch (const std::exception&) {
      throw ValidationError("GPBF_THREADS", "must be a positive integer");
    }
  }
  return 0;  // hardware concurrency
}

ExperimentConfig load_config(const CliOptions& opt) {
  ExperimentConfig cfg = parse_config_file(opt.config_path);
  json full = serialize_config(cfg);
  for (const auto& ov : opt.overrides) apply_override(full, ov);
  if (opt.seed_override >= 0)
    full["seed"] = static_cast<std::uint64_t>(opt.seed_override);
  return parse_config(full);
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

int run_command(const CliOptions& opt) {
  ExperimentConfig cfg = load_config(opt);
  const int threads = resolve_threads(opt.threads);
  ensure_out_dir(opt.out_dir);
  const fs::path out(opt.out_dir);

  write_json(serialize_config(cfg), out / "resolved_config.json");

  if (opt.command == "simulate" || opt.command == "select") {
    RunResult r = run_trajectories(cfg, threads);
    write_trajectories_csv(r, (out / "trajectories.csv").string());
    write_summary_csv(r, (out / "summary.csv").string());
    if (opt.emit_data)
      write_dataset_csv(generate_replicate(cfg, 0).data, (out / "dataset.csv").string());
    if (opt.command == "select")
      write_json(selection_to_json(r), out / "selection.json");
    return 0;
  }
  if (opt.command == "audit") {
    std::vector<AuditReport> reports;
    for (const auto& cand : cfg.candidates()) reports.push_back(audit(cfg, cand));
    write_audit_csv(reports, (out / "audit.csv").string());
    write_audit_json(reports, (out / "audit.json").string());
    return 0;
  }
  if (opt.command == "misspec") {
    MisspecResult mr = run_misspec(cfg, threads);
    write_misspec_csv(mr, (out / "misspec.csv").string());
    RunResult base;
    base.cfg = mr.cfg;
    base.candidates = mr.candidates;
    base.trajectories = mr.trajectories;
    write_trajectories_csv(base, (out / "trajectories.csv").string());
    write_summary_csv(base, (out / "summary.csv").string());
    return 0;
  }
  throw InvalidArgument("unknown command " + opt.command);
}

void print_error(int code, const std::string& kind, const std::string& message) {
  json j;
  j["error"] = {{"exit_code", code}, {"kind", kind}, {"message", message}};
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayes-factor variable selection for Gaussian-process models"};
  app.require_subcommand(1);

  CliOptions opt;
  for (const char* name : {"simulate", "select", "audit", "misspec"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", opt.out_dir, "output directory")->required();
    sub->add_option("--set", opt.overrides, "config override key=value (repeatable)");
    sub->add_option("--threads", opt.threads,
                    "worker threads (default: GPBF_THREADS or all cores)");
    sub->add_option("--seed", opt.seed_override, "override the config seed");
    if (std::string(name) == "simulate" || std::string(name) == "select")
      sub->add_flag("--emit-data", opt.emit_data,
                    "also write replicate 0's generated dataset (dataset.csv)");
    sub->callback([&opt, name]() { opt.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    print_error(2, "config", e.what());
    return 2;
  }

  try {
    return run_command(opt);
  } catch (const ConfigError& e) {
    print_error(2, "config", e.what());
    return 2;
  } catch (const IoError& e) {
    print_error(4, "io", e.what());
    return 4;
  } catch (const NumericError& e) {
    print_error(3, "numerical", e.what());
    return 3;
  } catch (const Error& e) {
    print_error(3, "numerical", e.what());
    return 3;
  } catch (const std::exception& e) {
    print_error(3, "internal", e.what());
    return 3;
  }
}
