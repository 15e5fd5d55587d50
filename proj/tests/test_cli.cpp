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

// The command-line tool, run as a separate process.

#include <gtest/gtest.h>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <regex>
#include <thread>

#include "net_client.hpp"
#include "plastiscope/store.hpp"
#include "test_util.hpp"

namespace plastiscope {
namespace {

using testing::TempDir;
using namespace std::chrono_literals;

const std::string kCli = PLASTISCOPE_CLI;

int exit_code(int status) { return WIFEXITED(status) ? WEXITSTATUS(status) : -1; }

// Exit code of `plastiscope args`, with stdout in *out.
int cli(const std::string& args, std::string* out = nullptr) {
  return exit_code(testing::run(kCli + " " + args + " 2>/dev/null", out));
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli(""), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("synth"), 2);
  EXPECT_EQ(cli("synth -o /tmp/x --clusters 0"), 2);
  EXPECT_EQ(cli("synth -o /tmp/x --clusters many"), 2);
  EXPECT_EQ(cli("synth -o /tmp/x --scenario sleeping"), 2);
  EXPECT_EQ(cli("preprocess -i a"), 2);
  EXPECT_EQ(cli("preprocess -i a -o b --jobs 0"), 2);
  EXPECT_EQ(cli("serve"), 2);
  EXPECT_EQ(cli("serve --store s --port 70000"), 2);
  EXPECT_EQ(cli("inspect"), 2);
  EXPECT_EQ(cli("--help"), 0);
  EXPECT_EQ(cli("serve --help"), 0);
}

TEST(Cli, SynthPreprocessInspect) {
  TempDir dir;
  const std::string raw = (dir / "raw").string();
  const std::string st = (dir / "store").string();
  std::string out;
  ASSERT_EQ(cli("synth -o " + raw + " --clusters 4 --areas 2 --timesteps 3 --seed 8", &out), 0);
  EXPECT_NE(out.find("neurons 40"), std::string::npos) << out;

  ASSERT_EQ(cli("preprocess -q -j 2 -i " + raw + " -o " + st + " --scenario learning --scenario injury", &out), 0);
  EXPECT_NE(out.find("frames 6\n"), std::string::npos) << out;
  EXPECT_TRUE(std::regex_search(out, std::regex("bytes_in [0-9]+")));
  EXPECT_TRUE(std::regex_search(out, std::regex("ratio [0-9]+\\.[0-9]{4}")));
  EXPECT_NE(out.find("warnings 0"), std::string::npos) << out;
  EXPECT_EQ(store::read_catalog(st).scenarios.size(), 2u);

  ASSERT_EQ(cli("inspect " + st, &out), 0);
  EXPECT_EQ(store::catalog_from_json(nlohmann::json::parse(out)), store::read_catalog(st));
  ASSERT_EQ(cli("inspect " + st + "/learning/frame_000100.parquet", &out), 0);
  EXPECT_EQ(nlohmann::json::parse(out)["rows"], 40);
}

TEST(Cli, RuntimeFailuresExitOne) {
  TempDir dir;
  EXPECT_EQ(cli("preprocess -i " + (dir / "missing").string() + " -o " + (dir / "st").string()), 1);
  EXPECT_EQ(cli("inspect " + (dir / "nothing.parquet").string()), 1);
  testing::write_text(dir / "junk.parquet", "not parquet at all");
  EXPECT_EQ(cli("inspect " + (dir / "junk.parquet").string()), 1);
  EXPECT_EQ(cli("serve --store " + dir.path().string() + " --port 0"), 1);  // no catalog
  EXPECT_EQ(cli("synth -o /proc/plastiscope-nope --clusters 1 --areas 1 --timesteps 1"), 1);
}

class ServeProcess {
 public:
  ServeProcess(const std::vector<std::string>& args, const std::filesystem::path& log,
               std::map<std::string, std::string> env = {}) {
    pid_ = fork();
    if (pid_ == 0) {
      const int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      dup2(fd, 1);
      const int null = ::open("/dev/null", O_WRONLY);
      dup2(null, 2);
      for (const auto& [k, v] : env) setenv(k.c_str(), v.c_str(), 1);
      std::vector<char*> argv{const_cast<char*>(kCli.c_str())};
      for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      execv(kCli.c_str(), argv.data());
      _exit(127);
    }
  }
  ~ServeProcess() {
    if (pid_ > 0 && !reaped_) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
  }

  // Exit status after SIGINT, or -1 if it did not stop within the timeout.
  int interrupt(std::chrono::milliseconds timeout = 5s) {
    kill(pid_, SIGINT);
    return wait(timeout);
  }

  int wait(std::chrono::milliseconds timeout = 5s) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
      int status = 0;
      if (waitpid(pid_, &status, WNOHANG) == pid_) {
        reaped_ = true;
        return exit_code(status);
      }
      std::this_thread::sleep_for(20ms);
    }
    return -1;
  }

 private:
  pid_t pid_ = -1;
  bool reaped_ = false;
};

std::uint16_t wait_for_port(const std::filesystem::path& log) {
  const std::regex listening("listening on [^:]+:([0-9]+)");
  for (int i = 0; i < 250; ++i) {
    std::smatch m;
    const std::string text = testing::read_text(log);
    if (std::regex_search(text, m, listening)) return std::uint16_t(std::stoi(m[1]));
    std::this_thread::sleep_for(20ms);
  }
  return 0;
}

TEST(Cli, ServeAnswersAndStopsOnSigint) {
  TempDir dir;
  ASSERT_EQ(cli("synth -o " + (dir / "raw").string() + " --clusters 2 --areas 1 --timesteps 2"), 0);
  ASSERT_EQ(cli("preprocess -q -i " + (dir / "raw").string() + " -o " + (dir / "st").string()), 0);

  // Store and port from the environment.
  ServeProcess serve({"serve", "--address", "127.0.0.1"}, dir / "log.txt",
                     {{"PLASTISCOPE_STORE", (dir / "st").string()}, {"PLASTISCOPE_PORT", "0"}});
  const std::uint16_t port = wait_for_port(dir / "log.txt");
  ASSERT_NE(port, 0) << testing::read_text(dir / "log.txt");
  const auto r = testing::http_get(port, "/api/catalog");
  EXPECT_EQ(r.result_int(), 200);
  testing::WsClient ws(port);
  ws.send({{"type", "create_session"}});
  ASSERT_TRUE(ws.next_of("snapshot"));

  // A second server on the same port fails with status 1.
  ServeProcess busy({"serve", "--store", (dir / "st").string(), "--address", "127.0.0.1", "--port",
                     std::to_string(port)},
                    dir / "busy.txt");
  EXPECT_EQ(busy.wait(), 1);

  EXPECT_EQ(serve.interrupt(), 0);
  auto bye = ws.next_of("leave");
  ASSERT_TRUE(bye);
  EXPECT_EQ((*bye)["reason"], "shutdown");
}

}  // namespace
}  // namespace plastiscope
