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

// Read-only HTTP routes over a store. The router is transport-free: the
// server adapter turns wire requests into Request and writes back Response,
// and tests call handle() directly.
//
//   GET /api/catalog
//   GET /api/positions
//   GET /api/frame/{scenario}/{t}
//   GET /api/diff?baseScenario=&baseT=&otherScenario=&otherT=
//   GET /api/stats/{scenario}/{t}/{property}?rangeMode=global|local&bins=&cap=
//   GET /...   static client files (or a built-in index page)
//
// Errors are JSON {"error": code, "message": text} with code one of
// not_found (404), bad_request (400), method_not_allowed (405),
// unavailable (503, no catalog in the store) and internal (500).

#pragma once

#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "plastiscope/model.hpp"

namespace plastiscope::service {

struct Request {
  std::string method = "GET";
  std::string target;                         // path plus optional query
  std::map<std::string, std::string> headers;  // lower-case names
};

struct Response {
  int status = 200;
  std::string content_type;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;

  const std::string* header(std::string_view name) const;
};

struct ServiceOptions {
  std::filesystem::path store;
  std::optional<std::filesystem::path> client_dir;
  std::size_t frame_cache = 32;  // decoded frames kept for diff/stats
};

class DataService {
 public:
  // Loads catalog and static table once; a store without a catalog yields
  // a service that answers 503 on every /api route.
  explicit DataService(ServiceOptions options);

  bool ready() const noexcept { return catalog_ != nullptr; }
  const ScenarioCatalog* catalog() const noexcept { return catalog_.get(); }
  // Why ready() is false, for the operator.
  const std::string& load_error() const noexcept { return load_error_; }

  // Safe to call from many threads at once.
  Response handle(const Request& request) const;

 private:
  Response route(const Request& request, std::string_view path,
                 const std::map<std::string, std::string>& query) const;
  Response catalog_route() const;
  Response positions_route() const;
  Response frame_route(std::string_view scenario, std::string_view t) const;
  Response diff_route(const std::map<std::string, std::string>& query) const;
  Response stats_route(std::string_view scenario, std::string_view t, std::string_view property,
                       const std::map<std::string, std::string>& query) const;
  Response static_route(std::string_view path) const;

  FrameKey resolve(std::string_view scenario, std::string_view t) const;
  std::shared_ptr<const TimestepFrame> frame(const FrameKey& key) const;

  ServiceOptions options_;
  std::unique_ptr<ScenarioCatalog> catalog_;
  std::unique_ptr<StaticTable> statics_;
  std::string catalog_body_;
  std::string positions_body_;
  std::string load_error_;

  mutable std::mutex cache_mutex_;
  mutable std::list<std::pair<FrameKey, std::shared_ptr<const TimestepFrame>>> cache_;
};

Response error_response(int status, std::string_view code, std::string_view message);

// JSON body of /api/stats; also used by tests as the direct-library oracle.
nlohmann::json stats_json(const TimestepFrame& frame, const StaticTable& statics,
                          NeuronProperty p, const PropertyRange& range, std::size_t bins,
                          std::size_t cap);

// Deterministic gzip (mtime 0) and its inverse. Error(format) on bad input.
std::string gzip_compress(std::string_view data);
std::string gzip_decompress(std::string_view data);

// True when an Accept-Encoding header value admits gzip.
bool accepts_gzip(std::string_view accept_encoding);

// Percent-decoding and query splitting; Error(format) on bad escapes.
std::string url_decode(std::string_view s, bool plus_is_space = false);
std::map<std::string, std::string> parse_query(std::string_view query);

}  // namespace plastiscope::service
