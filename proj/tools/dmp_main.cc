// Copyright 2026 The DMP Platform Authors.
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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dmp/common/error.h"
#include "dmp/platform/api.h"
#include "dmp/platform/platform.h"
#include "dmp/platform/synthetic.h"

namespace fs = std::filesystem;
using dmp::Error;
using dmp::ErrorCode;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kIoFailure = 2;

void log(const std::string& msg) { std::cerr << "dmp: " << msg << "\n"; }

void emit(const json& out) { std::cout << out.dump() << "\n"; }

int exit_code(const Error& e) {
  return e.code() == ErrorCode::kIo || e.code() == ErrorCode::kCorruptSnapshot ? kIoFailure : kValidation;
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Globals {
  std::string config_path;
  std::string data_dir;
};

dmp::platform::PlatformConfig load_config(const Globals& g) {
  auto cfg = g.config_path.empty() ? dmp::platform::PlatformConfig::for_data_dir(g.data_dir.empty() ? "dmp-data" : g.data_dir)
                                   : dmp::platform::PlatformConfig::load(g.config_path);
  if (!g.config_path.empty() && !g.data_dir.empty()) {
    auto key_name = cfg.key_file.filename();
    cfg.data_dir = g.data_dir;
    cfg.key_file = fs::path(g.data_dir) / key_name;
  }
  return cfg;
}

std::unique_ptr<dmp::platform::Platform> open_platform(const Globals& g) {
  auto platform = std::make_unique<dmp::platform::Platform>(load_config(g));
  platform->load();
  return platform;
}

std::pair<std::string, int> split_listen(const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::kInvalidConfig, "listen must be host:port");
  try {
    return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidConfig, "bad port in '" + listen + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DMP platform admin tool"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("-c,--config", g.config_path, "TOML config file");
  app.add_option("-d,--data-dir", g.data_dir, "Data directory (overrides the config)");

  dmp::platform::SyntheticDatasetSpec spec;
  std::string gen_out = "synthetic";
  auto* gen = app.add_subcommand("gen-data", "Write synthetic per-school ingest files");
  gen->add_option("--seed", spec.seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--schools", spec.schools);
  gen->add_option("--students", spec.students_per_school);
  gen->add_option("--subjects", spec.subjects);
  gen->add_option("--terms", spec.terms);
  gen->add_option("--electives", spec.electives);

  auto* keygen = app.add_subcommand("keygen", "Create the pseudonymization key");

  std::vector<std::string> ingest_files;
  std::string ingest_school;
  std::string ingest_format;
  auto* ingest = app.add_subcommand("ingest", "Ingest school files into the central store");
  ingest->add_option("files", ingest_files, "Ingest files or directories")->required();
  ingest->add_option("--school", ingest_school, "School id (default: file stem)");
  ingest->add_option("--format", ingest_format, "csv or jsonl (default: by extension)");

  std::string train_kind = "all";
  auto* train = app.add_subcommand("train", "Train prediction models");
  train->add_option("--kind", train_kind, "inschool, exam, behavior or all");

  std::string listen;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--listen", listen, "host:port (default: from config)");

  json fed_overrides = json::object();
  int fed_rounds = -1;
  int fed_epochs = -1;
  long long fed_seed = -1;
  double fed_alpha = -1.0;
  auto* fed_run = app.add_subcommand("fed-run", "Run the federated electives simulation");
  fed_run->add_option("--rounds", fed_rounds);
  fed_run->add_option("--epochs", fed_epochs);
  fed_run->add_option("--seed", fed_seed);
  fed_run->add_option("--alpha", fed_alpha);

  std::string export_format = "jsonl";
  std::string export_out;
  std::string teacher = "default";
  auto* export_alerts = app.add_subcommand("export-alerts", "Write the alert feed");
  export_alerts->add_option("--format", export_format)->check(CLI::IsMember({"jsonl", "json"}));
  export_alerts->add_option("--out", export_out, "Output file (default: stdout)");
  export_alerts->add_option("--teacher", teacher);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*gen) {
      auto files = dmp::platform::generate_synthetic(spec);
      fs::create_directories(gen_out);
      json written = json::array();
      for (const auto& [school, text] : files) {
        auto path = fs::path(gen_out) / (school + ".csv");
        write_file(path, text);
        written.push_back(path.string());
      }
      log("wrote " + std::to_string(files.size()) + " files to " + gen_out);
      emit({{"seed", spec.seed}, {"files", written}});
    } else if (*keygen) {
      auto cfg = load_config(g);
      dmp::platform::create_key(cfg.key_file);
      emit({{"key_file", cfg.key_file.string()}});
    } else if (*ingest) {
      std::vector<fs::path> paths;
      for (const auto& f : ingest_files) {
        if (fs::is_directory(f)) {
          std::vector<fs::path> found;
          for (const auto& entry : fs::directory_iterator(f)) {
            auto ext = entry.path().extension();
            if (ext == ".csv" || ext == ".jsonl") found.push_back(entry.path());
          }
          std::sort(found.begin(), found.end());
          paths.insert(paths.end(), found.begin(), found.end());
        } else {
          paths.emplace_back(f);
        }
      }
      if (paths.empty()) throw Error(ErrorCode::kInvalidArgument, "no ingest files");
      if (!ingest_school.empty() && paths.size() > 1) {
        throw Error(ErrorCode::kInvalidArgument, "--school needs a single file");
      }
      auto platform = open_platform(g);
      json results = json::array();
      for (const auto& path : paths) {
        auto school = ingest_school.empty() ? path.stem().string() : ingest_school;
        auto format_name = !ingest_format.empty() ? ingest_format : path.extension() == ".jsonl" ? "jsonl" : "csv";
        auto result = platform->ingest(dmp::records::SchoolId(school), read_file(path),
                                       dmp::privacy::parse_ingest_format(format_name));
        log("ingested " + path.string());
        results.push_back(std::move(result));
      }
      emit({{"ingested", results}});
    } else if (*train) {
      auto platform = open_platform(g);
      emit(platform->train(train_kind));
    } else if (*serve) {
      auto platform = open_platform(g);
      auto [host, port] = split_listen(listen.empty() ? platform->config().listen : listen);
      dmp::platform::HttpServer server(*platform);
      log("listening on " + host + ":" + std::to_string(port));
      server.listen_blocking(host, port);
    } else if (*fed_run) {
      if (fed_rounds >= 0) fed_overrides["rounds"] = fed_rounds;
      if (fed_epochs >= 0) fed_overrides["epochs"] = fed_epochs;
      if (fed_seed >= 0) fed_overrides["seed"] = fed_seed;
      if (fed_alpha >= 0.0) fed_overrides["alpha"] = fed_alpha;
      auto platform = open_platform(g);
      emit(platform->run_federation(fed_overrides));
    } else if (*export_alerts) {
      auto platform = open_platform(g);
      auto feed = platform->all_alerts(teacher);
      std::string bytes;
      if (export_format == "jsonl") {
        bytes = dmp::ews::to_jsonl(feed.alerts);
      } else {
        json alerts = json::array();
        for (const auto& a : feed.alerts) alerts.push_back(dmp::ews::to_json(a));
        bytes = json{{"alerts", alerts}, {"warnings", feed.warnings}}.dump() + "\n";
      }
      for (const auto& w : feed.warnings) log("warning: " + w);
      if (export_out.empty()) {
        std::cout << bytes;
      } else {
        write_file(export_out, bytes);
        emit({{"out", export_out}, {"alerts", feed.alerts.size()}, {"format", export_format}});
      }
    }
  } catch (const Error& e) {
    log(e.what());
    emit({{"error", dmp::error_code_name(e.code())}, {"message", e.what()}});
    return exit_code(e);
  } catch (const std::exception& e) {
    log(e.what());
    emit({{"error", "Internal"}, {"message", e.what()}});
    return kIoFailure;
  }
  return kOk;
}
