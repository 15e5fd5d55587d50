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

#include "plastiscope/data_service.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "plastiscope/aggregate.hpp"
#include "plastiscope/payload.hpp"
#include "plastiscope/stats.hpp"
#include "plastiscope/store.hpp"

namespace plastiscope::service {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxBins = 10000;
constexpr std::size_t kGzipThreshold = 1024;
constexpr const char* kJson = "application/json";
constexpr const char* kBinary = "application/octet-stream";

// Thrown inside the router and turned into an error body at the top.
struct HttpError {
  int status;
  std::string code;
  std::string message;
};

[[noreturn]] void http_fail(int status, std::string code, std::string message) {
  throw HttpError{status, std::move(code), std::move(message)};
}

std::string to_body(std::span<const std::uint8_t> bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

std::string etag_of(std::string_view body) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : body) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "\"%016llx\"", static_cast<unsigned long long>(h));
  return buf;
}

Response ok(std::string content_type, std::string body) {
  Response r;
  r.content_type = std::move(content_type);
  r.body = std::move(body);
  return r;
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  while (!path.empty()) {
    const std::size_t slash = path.find('/');
    const std::string_view part = path.substr(0, slash);
    if (!part.empty()) parts.push_back(part);
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return parts;
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

const std::string& required(const std::map<std::string, std::string>& q, const std::string& key) {
  auto it = q.find(key);
  if (it == q.end()) http_fail(400, "bad_request", "missing query parameter " + key);
  return it->second;
}

std::string_view mime_type(const fs::path& p) {
  static const std::map<std::string, std::string_view> types = {
      {".html", "text/html; charset=utf-8"}, {".htm", "text/html; charset=utf-8"},
      {".js", "text/javascript; charset=utf-8"}, {".mjs", "text/javascript; charset=utf-8"},
      {".css", "text/css; charset=utf-8"}, {".json", "application/json"},
      {".map", "application/json"}, {".svg", "image/svg+xml"}, {".png", "image/png"},
      {".jpg", "image/jpeg"}, {".ico", "image/x-icon"}, {".wasm", "application/wasm"},
      {".txt", "text/plain; charset=utf-8"}, {".woff2", "font/woff2"}};
  auto it = types.find(p.extension().string());
  return it == types.end() ? std::string_view(kBinary) : it->second;
}

bool compressible(std::string_view type) {
  return type.starts_with("text/") || type.starts_with("application/json") ||
         type == kBinary || type == "image/svg+xml" || type == "application/wasm";
}

constexpr std::string_view kIndexPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>plastiscope</title></head>
<body>
<h1>plastiscope data service</h1>
<p>No client bundle is configured (serve --client DIR). Routes:</p>
<ul>
<li><a href="/api/catalog">/api/catalog</a></li>
<li><a href="/api/positions">/api/positions</a> (binary)</li>
<li>/api/frame/{scenario}/{t} (binary)</li>
<li>/api/diff?baseScenario=&amp;baseT=&amp;otherScenario=&amp;otherT= (binary)</li>
<li>/api/stats/{scenario}/{t}/{property}?rangeMode=global|local&amp;bins=20</li>
<li>/ws (collaboration sessions)</li>
</ul>
</body></html>
)";

}  // namespace

const std::string* Response::header(std::string_view name) const {
  for (const auto& [k, v] : headers) {
    if (k.size() == name.size() &&
        std::equal(k.begin(), k.end(), name.begin(), [](char a, char b) {
          return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
        })) {
      return &v;
    }
  }
  return nullptr;
}

Response error_response(int status, std::string_view code, std::string_view message) {
  Response r;
  r.status = status;
  r.content_type = kJson;
  r.headers.emplace_back("Cache-Control", "no-store");
  r.body = nlohmann::json{{"error", code}, {"message", message}}.dump();
  return r;
}

DataService::DataService(ServiceOptions options) : options_(std::move(options)) {
  try {
    auto catalog = std::make_unique<ScenarioCatalog>(store::read_catalog(options_.store));
    catalog->validate();
    auto statics = std::make_unique<StaticTable>(store::read_static(options_.store));
    if (statics->neuron_count() != catalog->neuron_count) {
      fail(ErrorCode::inconsistency, "static table holds " + std::to_string(statics->neuron_count()) +
                                         " neurons, catalog says " + std::to_string(catalog->neuron_count));
    }
    catalog_body_ = store::catalog_to_json(*catalog).dump();
    positions_body_ = to_body(payload::encode_positions(*statics));
    catalog_ = std::move(catalog);
    statics_ = std::move(statics);
  } catch (const Error& e) {
    load_error_ = e.what();
  }
}

Response DataService::handle(const Request& req) const {
  Response r;
  try {
    const std::size_t q = req.target.find('?');
    std::string path;
    std::map<std::string, std::string> query;
    try {
      path = url_decode(std::string_view(req.target).substr(0, q));
      if (q != std::string::npos) query = parse_query(std::string_view(req.target).substr(q + 1));
    } catch (const Error& e) {
      http_fail(400, "bad_request", e.what());
    }
    if (req.method != "GET") {
      r = error_response(405, "method_not_allowed", "only GET is supported");
      r.headers.emplace_back("Allow", "GET");
      return r;
    }
    r = route(req, path, query);
  } catch (const HttpError& e) {
    return error_response(e.status, e.code, e.message);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::not_found: return error_response(404, "not_found", e.what());
      case ErrorCode::domain:
      case ErrorCode::validation: return error_response(400, "bad_request", e.what());
      default: return error_response(500, "internal", e.what());
    }
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }

  // Conditional requests and transport compression for every success.
  std::string etag = etag_of(r.body);
  auto ae = req.headers.find("accept-encoding");
  const bool gz = ae != req.headers.end() && accepts_gzip(ae->second) &&
                  r.body.size() >= kGzipThreshold && compressible(r.content_type);
  if (gz) etag.insert(etag.size() - 1, "-gz");
  r.headers.emplace_back("ETag", etag);
  r.headers.emplace_back("Vary", "Accept-Encoding");
  if (r.header("Cache-Control") == nullptr) r.headers.emplace_back("Cache-Control", "no-cache");
  auto inm = req.headers.find("if-none-match");
  if (inm != req.headers.end() && (inm->second == etag || inm->second == "*")) {
    r.status = 304;
    r.body.clear();
    return r;
  }
  if (gz) {
    r.body = gzip_compress(r.body);
    r.headers.emplace_back("Content-Encoding", "gzip");
  }
  return r;
}

Response DataService::route(const Request&, std::string_view path,
                            const std::map<std::string, std::string>& query) const {
  const std::vector<std::string_view> parts = split_path(path);
  if (parts.empty() || parts[0] != "api") return static_route(path);
  if (!ready()) {
    http_fail(503, "unavailable", "store has no catalog: " + load_error_);
  }
  const std::string_view what = parts.size() > 1 ? parts[1] : std::string_view();
  if (what == "catalog" && parts.size() == 2) return catalog_route();
  if (what == "positions" && parts.size() == 2) return positions_route();
  if (what == "frame" && parts.size() == 4) return frame_route(parts[2], parts[3]);
  if (what == "diff" && parts.size() == 2) return diff_route(query);
  if (what == "stats" && parts.size() == 5) return stats_route(parts[2], parts[3], parts[4], query);
  http_fail(404, "not_found", "no route for " + std::string(path));
}

Response DataService::catalog_route() const { return ok(kJson, catalog_body_); }

Response DataService::positions_route() const {
  Response r = ok(kBinary, positions_body_);
  r.headers.emplace_back("Cache-Control", "public, max-age=31536000, immutable");
  return r;
}

FrameKey DataService::resolve(std::string_view scenario, std::string_view t) const {
  const auto s = parse_scenario(scenario);
  if (!s) http_fail(404, "not_found", "unknown scenario '" + std::string(scenario) + "'");
  const auto step = parse_uint(t);
  if (!step) http_fail(400, "bad_request", "timestep '" + std::string(t) + "' is not an integer");
  const FrameKey key{*s, static_cast<std::uint32_t>(*step)};
  if (*step > 0xFFFFFFFFull || !catalog_->contains(key)) {
    http_fail(404, "not_found", "no frame " + std::string(scenario) + "@" + std::string(t));
  }
  return key;
}

std::shared_ptr<const TimestepFrame> DataService::frame(const FrameKey& key) const {
  {
    std::lock_guard lock(cache_mutex_);
    for (auto it = cache_.begin(); it != cache_.end(); ++it) {
      if (it->first == key) {
        cache_.splice(cache_.begin(), cache_, it);
        return cache_.front().second;
      }
    }
  }
  auto f = std::make_shared<const TimestepFrame>(store::read_frame(options_.store, key));
  if (options_.frame_cache > 0) {
    std::lock_guard lock(cache_mutex_);
    cache_.emplace_front(key, f);
    while (cache_.size() > options_.frame_cache) cache_.pop_back();
  }
  return f;
}

Response DataService::frame_route(std::string_view scenario, std::string_view t) const {
  const FrameKey key = resolve(scenario, t);
  return ok(kBinary, to_body(payload::encode_frame(*frame(key))));
}

Response DataService::diff_route(const std::map<std::string, std::string>& q) const {
  const FrameKey base = resolve(required(q, "baseScenario"), required(q, "baseT"));
  const FrameKey other = resolve(required(q, "otherScenario"), required(q, "otherT"));
  const auto b = frame(base);
  const auto o = frame(other);
  const DiffFrame d = aggregate::diff_frames(*b, *o);
  return ok(kBinary, to_body(payload::encode_diff(d, b->connectivity_missing || o->connectivity_missing)));
}

Response DataService::stats_route(std::string_view scenario, std::string_view t,
                                  std::string_view property,
                                  const std::map<std::string, std::string>& q) const {
  const auto p = parse_property(property);
  if (!p) http_fail(400, "bad_request", "unknown property '" + std::string(property) + "'");
  const FrameKey key = resolve(scenario, t);

  std::size_t bins = stats::kDefaultBins;
  if (auto it = q.find("bins"); it != q.end()) {
    const auto v = parse_uint(it->second);
    if (!v || *v == 0 || *v > kMaxBins) {
      http_fail(400, "bad_request", "bins must be an integer in 1.." + std::to_string(kMaxBins));
    }
    bins = *v;
  }
  std::size_t cap = stats::kDefaultParallelCap;
  if (auto it = q.find("cap"); it != q.end()) {
    const auto v = parse_uint(it->second);
    if (!v || *v == 0) http_fail(400, "bad_request", "cap must be a positive integer");
    cap = *v;
  }
  std::string mode = "global";
  if (auto it = q.find("rangeMode"); it != q.end()) mode = it->second;
  if (mode != "global" && mode != "local") {
    http_fail(400, "bad_request", "rangeMode must be global or local");
  }

  const auto f = frame(key);
  PropertyRange range;
  if (*p == NeuronProperty::area) {
    range = {0, double(std::max<std::size_t>(statics_->area_count(), 1) - 1)};
  } else if (mode == "global") {
    const auto& ranges = catalog_->find(key.scenario)->global_ranges;
    auto it = ranges.find(*p);
    if (it != ranges.end()) range = it->second;
  } else {
    try {
      range = aggregate::local_range(*f, *p);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::domain) throw;  // no finite value: empty histogram
    }
  }
  nlohmann::json j = stats_json(*f, *statics_, *p, range, bins, cap);
  j["scenario_id"] = scenario_id(key.scenario);
  j["timestep"] = key.timestep;
  j["range_mode"] = mode;
  return ok(kJson, j.dump());
}

Response DataService::static_route(std::string_view path) const {
  if (!options_.client_dir) {
    if (path == "/" || path == "/index.html") return ok("text/html; charset=utf-8", std::string(kIndexPage));
    http_fail(404, "not_found", "no file " + std::string(path));
  }
  std::error_code ec;
  const fs::path root = fs::canonical(*options_.client_dir, ec);
  if (ec) http_fail(404, "not_found", "client directory is missing");
  std::string rel(path);
  while (!rel.empty() && rel.front() == '/') rel.erase(0, 1);
  if (rel.empty() || rel.back() == '/') rel += "index.html";
  const fs::path candidate = fs::weakly_canonical(root / rel, ec);
  const auto [mismatch, _] = std::mismatch(root.begin(), root.end(), candidate.begin(), candidate.end());
  if (ec || mismatch != root.end() || !fs::is_regular_file(candidate)) {
    http_fail(404, "not_found", "no file " + std::string(path));
  }
  const std::vector<std::uint8_t> bytes = store::read_file(candidate);
  return ok(std::string(mime_type(candidate)), to_body(bytes));
}

nlohmann::json stats_json(const TimestepFrame& frame, const StaticTable& statics, NeuronProperty p,
                          const PropertyRange& range, std::size_t bins, std::size_t cap) {
  const ColumnView column = frame_column(frame, statics, p);
  const stats::HistogramStats h = stats::histogram(column, range, bins);
  nlohmann::json j;
  j["property"] = property_name(p);
  j["histogram"] = {{"range", {{"min", h.range.min}, {"max", h.range.max}}},
                    {"edges", h.edges},
                    {"counts", h.counts}};
  nlohmann::json boxes = nlohmann::json::array();
  for (const stats::BoxStats& b : stats::box_stats_by_area(frame, p, statics)) {
    boxes.push_back({{"area_id", b.area_id},
                     {"area", statics.area_names().at(b.area_id)},
                     {"count", b.count},
                     {"min", b.min},
                     {"q1", b.q1},
                     {"median", b.median},
                     {"q3", b.q3},
                     {"max", b.max},
                     {"whisker_low", b.whisker_low},
                     {"whisker_high", b.whisker_high},
                     {"outliers", b.outliers}});
  }
  j["box"] = std::move(boxes);
  const stats::ParallelCoordsExtract pc = stats::parallel_coords(frame, statics, cap);
  nlohmann::json axes = nlohmann::json::array();
  for (std::size_t k = 0; k < stats::kParallelAxes.size(); ++k) {
    axes.push_back({{"property", property_name(stats::kParallelAxes[k])},
                    {"label", stats::kParallelAxisLabels[k]}});
  }
  j["parallel"] = {{"axes", axes}, {"stride", pc.stride}, {"neuron_ids", pc.neuron_ids}, {"rows", pc.rows}};
  return j;
}

std::string gzip_compress(std::string_view data) {
  z_stream z{};
  if (deflateInit2(&z, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    fail(ErrorCode::io, "deflateInit2 failed");
  }
  std::string out(deflateBound(&z, static_cast<uLong>(data.size())), '\0');
  z.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  z.avail_in = static_cast<uInt>(data.size());
  z.next_out = reinterpret_cast<Bytef*>(out.data());
  z.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&z, Z_FINISH);
  out.resize(z.total_out);
  deflateEnd(&z);
  if (rc != Z_STREAM_END) fail(ErrorCode::io, "deflate did not finish");
  return out;
}

std::string gzip_decompress(std::string_view data) {
  z_stream z{};
  if (inflateInit2(&z, 15 + 16) != Z_OK) fail(ErrorCode::io, "inflateInit2 failed");
  z.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  z.avail_in = static_cast<uInt>(data.size());
  std::string out;
  char buf[65536];
  int rc = Z_OK;
  while (rc == Z_OK) {
    z.next_out = reinterpret_cast<Bytef*>(buf);
    z.avail_out = sizeof buf;
    rc = inflate(&z, Z_NO_FLUSH);
    out.append(buf, sizeof buf - z.avail_out);
    if (rc == Z_BUF_ERROR && z.avail_in == 0) break;
  }
  inflateEnd(&z);
  if (rc != Z_STREAM_END) fail(ErrorCode::format, "truncated or corrupt gzip stream");
  return out;
}

bool accepts_gzip(std::string_view v) {
  bool star = false;
  while (!v.empty()) {
    const std::size_t comma = v.find(',');
    std::string_view item = v.substr(0, comma);
    v = comma == std::string_view::npos ? std::string_view() : v.substr(comma + 1);
    std::string_view name = item.substr(0, item.find(';'));
    auto trim = [](std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
      return s;
    };
    name = trim(name);
    bool zero = false;
    if (auto semi = item.find(';'); semi != std::string_view::npos) {
      std::string_view params = trim(item.substr(semi + 1));
      if (params.starts_with("q=")) {
        params.remove_prefix(2);
        zero = !params.empty() && std::all_of(params.begin(), params.end(),
                                              [](char c) { return c == '0' || c == '.'; });
      }
    }
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "gzip" || lower == "x-gzip") return !zero;
    if (lower == "*") star = !zero;
  }
  return star;
}

std::string url_decode(std::string_view s, bool plus_is_space) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%') {
      unsigned v = 0;
      if (i + 2 >= s.size()) fail(ErrorCode::format, "truncated percent escape");
      auto [end, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
      if (ec != std::errc() || end != s.data() + i + 3) fail(ErrorCode::format, "bad percent escape");
      out.push_back(static_cast<char>(v));
      i += 2;
    } else if (plus_is_space && s[i] == '+') {
      out.push_back(' ');
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::map<std::string, std::string> parse_query(std::string_view q) {
  std::map<std::string, std::string> out;
  while (!q.empty()) {
    const std::size_t amp = q.find('&');
    const std::string_view item = q.substr(0, amp);
    if (!item.empty()) {
      const std::size_t eq = item.find('=');
      std::string key = url_decode(item.substr(0, eq), true);
      std::string value = eq == std::string_view::npos ? "" : url_decode(item.substr(eq + 1), true);
      out.insert_or_assign(std::move(key), std::move(value));
    }
    if (amp == std::string_view::npos) break;
    q.remove_prefix(amp + 1);
  }
  return out;
}

}  // namespace plastiscope::service
