// Copyright 2026 The Plastiscope Authors
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

// plastiscope: synth | preprocess | serve | inspect
// Exit status 0 on success, 1 on a runtime failure, 2 on a usage error.

#include <cstdio>
#include <iostream>
#include <mutex>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "plastiscope/collab.hpp"
#include "plastiscope/data_service.hpp"
#include "plastiscope/error.hpp"
#include "plastiscope/parquet/file.hpp"
#include "plastiscope/pipeline.hpp"
#include "plastiscope/server.hpp"
#include "plastiscope/store.hpp"
#include "plastiscope/synth.hpp"

namespace fs = std::filesystem;
using namespace plastiscope;
using Json = nlohmann::json;

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

std::vector<Scenario> to_scenarios(const std::vector<std::string>& ids) {
  std::vector<Scenario> out;
  for (const auto& id : ids) {
    auto s = parse_scenario(id);
    if (!s) fail(ErrorCode::validation, "unknown scenario '" + id + "'");
    out.push_back(*s);
  }
  return out;
}

std::string human_bytes(std::uint64_t n) {
  const char* units[] = {"B", "KiB", "MiB", "GiB", "TiB"};
  double v = double(n);
  int u = 0;
  while (v >= 1024 && u < 4) {
    v /= 1024;
    ++u;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, u == 0 ? "%.0f %s" : "%.2f %s", v, units[u]);
  return buf;
}

struct SynthArgs {
  ingest::SynthOptions options;
  std::string output;
  std::vector<std::string> scenarios;
};

int run_synth(const SynthArgs& a) {
  ingest::SynthOptions options = a.options;
  if (!a.scenarios.empty()) options.scenarios = to_scenarios(a.scenarios);
  const auto summary = ingest::generate_synthetic(a.output, options);
  std::cout << "neurons " << summary.neurons << "\nfiles " << summary.files << "\nbytes "
            << summary.bytes << " (" << human_bytes(summary.bytes) << ")\n";
  return 0;
}

struct PreprocessArgs {
  std::string input;
  std::string output;
  unsigned jobs = 1;
  std::vector<std::string> scenarios;
  bool quiet = false;
};

int run_preprocess(const PreprocessArgs& a) {
  pipeline::PreprocessOptions options;
  options.scenarios = to_scenarios(a.scenarios);
  options.jobs = a.jobs;
  std::mutex out_mutex;
  if (!a.quiet) {
    options.on_frame = [&](const FrameKey& key) {
      std::lock_guard lock(out_mutex);
      std::cerr << "wrote " << to_string(key) << '\n';
    };
  }
  const auto summary = pipeline::preprocess(a.input, a.output, options);
  for (const auto& w : summary.warnings) {
    std::cerr << "warning: " << to_string(w.key) << ": " << w.message << '\n';
  }
  char ratio[32];
  std::snprintf(ratio, sizeof ratio, "%.4f", summary.ratio());
  std::cout << "frames " << summary.frames << "\nbytes_in " << summary.bytes_in << " ("
            << human_bytes(summary.bytes_in) << ")\nbytes_out " << summary.bytes_out << " ("
            << human_bytes(summary.bytes_out) << ")\nratio " << ratio << "\nwarnings "
            << summary.warnings.size() << '\n';
  return 0;
}

struct ServeArgs {
  std::string store;
  std::string client;
  std::string address = "0.0.0.0";
  std::uint16_t port = 8080;
  unsigned threads = 1;
};

int run_serve(const ServeArgs& a) {
  service::ServiceOptions sopts;
  sopts.store = a.store;
  if (!a.client.empty()) sopts.client_dir = fs::path(a.client);
  service::DataService data(sopts);
  if (!data.ready()) {
    std::cerr << "error: store " << a.store << " has no usable catalog: " << data.load_error()
              << "\nrun 'plastiscope preprocess' first\n";
    return kRuntimeFailure;
  }
  collab::SessionHub hub({}, data.catalog());
  server::ServerOptions options;
  options.address = a.address;
  options.port = a.port;
  options.threads = a.threads;
  options.handle_signals = true;
  std::mutex log_mutex;
  options.log = [&](const Json& event) {
    std::lock_guard lock(log_mutex);
    std::cerr << event.dump() << '\n';
  };
  server::Server srv(data, hub, options);
  std::cout << "listening on " << a.address << ':' << srv.port() << std::endl;
  srv.run();
  return 0;
}

int run_inspect(const std::string& target) {
  const fs::path p(target);
  if (fs::is_directory(p)) {
    const auto catalog = store::read_catalog(p);
    Json out = store::catalog_to_json(catalog);
    std::uint64_t bytes = 0;
    for (const auto& entry : fs::recursive_directory_iterator(p)) {
      if (entry.is_regular_file()) bytes += entry.file_size();
    }
    out["store_bytes"] = bytes;
    std::cout << out.dump(2) << '\n';
    return 0;
  }
  const auto bytes = store::read_file(p);
  const auto info = parquet::inspect(bytes);
  Json out{{"rows", info.num_rows}, {"row_groups", info.row_groups}, {"created_by", info.created_by}};
  for (const auto& c : info.columns) {
    Json encodings = Json::array();
    for (auto e : c.encodings) encodings.push_back(std::string(parquet::to_string(e)));
    out["columns"].push_back({{"name", c.name},
                              {"type", std::string(parquet::to_string(c.type))},
                              {"encodings", encodings},
                              {"compressed_bytes", c.compressed_bytes},
                              {"uncompressed_bytes", c.uncompressed_bytes}});
  }
  for (const auto& [k, v] : info.metadata) out["metadata"][k] = v;
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const CLI::Validator scenario_id_check(
      [](std::string& id) {
        return parse_scenario(id) ? std::string() : "unknown scenario '" + id + "'";
      },
      "SCENARIO");

  CLI::App app{"Plastiscope: preprocess and serve neuron simulation output"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded raw dataset");
  synth_cmd->add_option("-o,--output", synth.output, "Raw dataset directory")->required();
  synth_cmd->add_option("--clusters", synth.options.clusters, "Clusters of 10 neurons")
      ->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--areas", synth.options.areas, "Brain areas")
      ->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--timesteps", synth.options.timesteps, "Recorded steps per scenario")
      ->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.options.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--scenario", synth.scenarios, "Scenario ids (default: all)")
      ->check(scenario_id_check);

  PreprocessArgs pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "Transpose a raw dataset into a store");
  pre_cmd->add_option("-i,--input", pre.input, "Raw dataset directory")->required();
  pre_cmd->add_option("-o,--output", pre.output, "Store directory")->required();
  pre_cmd->add_option("-j,--jobs", pre.jobs, "Scenarios processed concurrently")
      ->capture_default_str()->check(CLI::Range(1u, 64u));
  pre_cmd->add_option("--scenario", pre.scenarios, "Scenario ids (default: all present)")
      ->check(scenario_id_check);
  pre_cmd->add_flag("-q,--quiet", pre.quiet, "No per-frame progress");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve a store over HTTP and WebSocket");
  serve_cmd->add_option("-s,--store", serve.store, "Store directory")
      ->envname("PLASTISCOPE_STORE")->required();
  serve_cmd->add_option("-p,--port", serve.port, "TCP port (0 picks one)")
      ->envname("PLASTISCOPE_PORT")->capture_default_str();
  serve_cmd->add_option("--address", serve.address, "Listen address")->capture_default_str();
  serve_cmd->add_option("--client", serve.client, "Directory of static client files");
  serve_cmd->add_option("--threads", serve.threads, "I/O threads")
      ->capture_default_str()->check(CLI::Range(1u, 64u));

  std::string inspect_target;
  auto* inspect_cmd = app.add_subcommand("inspect", "Describe a store or a Parquet file");
  inspect_cmd->add_option("target", inspect_target, "Store directory or .parquet file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth);
    if (pre_cmd->parsed()) return run_preprocess(pre);
    if (serve_cmd->parsed()) return run_serve(serve);
    if (inspect_cmd->parsed()) return run_inspect(inspect_target);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}
