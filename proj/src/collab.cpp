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

#include "plastiscope/collab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace plastiscope::collab {

namespace {

constexpr std::string_view kIdAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
constexpr std::size_t kIdLength = 6;

constexpr std::array<std::string_view, 3> kVisibility = {"neurons", "connections", "both"};
constexpr std::array<std::string_view, 2> kDisplayModes = {"dynamic_radius", "displaced"};
constexpr std::array<std::string_view, 2> kRangeModes = {"global", "local"};

using Result = std::variant<Json, UpdateError>;

UpdateError bad_value(std::string_view path, std::string message) {
  return {"bad_value", std::string(path) + ": " + message};
}

UpdateError bad_path(std::string_view path) {
  return {"bad_path", "no such field '" + std::string(path) + "'"};
}

std::optional<std::uint64_t> as_index(const Json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return std::uint64_t(v.get<std::int64_t>());
  return std::nullopt;
}

template <std::size_t K>
std::optional<std::array<double, K>> as_vector(const Json& v) {
  if (!v.is_array() || v.size() != K) return std::nullopt;
  std::array<double, K> out{};
  for (std::size_t i = 0; i < K; ++i) {
    if (!v[i].is_number()) return std::nullopt;
    out[i] = v[i].get<double>();
    if (!std::isfinite(out[i])) return std::nullopt;
  }
  return out;
}

template <std::size_t K>
std::optional<std::string> as_choice(const Json& v, const std::array<std::string_view, K>& choices) {
  if (!v.is_string()) return std::nullopt;
  const std::string s = v.get<std::string>();
  if (std::find(choices.begin(), choices.end(), s) == choices.end()) return std::nullopt;
  return s;
}

std::optional<Camera> as_camera(const Json& v, std::string& why) {
  if (!v.is_object()) {
    why = "camera must be an object";
    return std::nullopt;
  }
  for (const auto& [k, _] : v.items()) {
    if (k != "position" && k != "orientation" && k != "target") {
      why = "unknown camera field '" + k + "'";
      return std::nullopt;
    }
  }
  if (!v.contains("position") || !v.contains("orientation") || !v.contains("target")) {
    why = "camera needs position, orientation and target";
    return std::nullopt;
  }
  Camera c;
  auto p = as_vector<3>(v["position"]);
  auto o = as_vector<4>(v["orientation"]);
  auto t = as_vector<3>(v["target"]);
  if (!p || !o || !t) {
    why = "camera vectors must hold 3, 4 and 3 finite numbers";
    return std::nullopt;
  }
  c.position = *p;
  c.orientation = *o;
  c.target = *t;
  return c;
}

bool unit_quaternion(const std::array<double, 4>& q) {
  const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  return std::abs(norm - 1.0) <= kOrientationTolerance;
}

std::string scenario_text(Scenario s) { return std::string(scenario_id(s)); }

// Catalog checks for a (scenario, timestep) pair; empty when fine.
std::optional<std::string> check_frame(const ScenarioCatalog* catalog, Scenario s, std::uint32_t t) {
  if (catalog == nullptr) return std::nullopt;
  const ScenarioEntry* e = catalog->find(s);
  if (e == nullptr) return "scenario " + scenario_text(s) + " is not in the catalog";
  if (!e->has_timestep(t)) {
    return "timestep " + std::to_string(t) + " is not recorded for " + scenario_text(s);
  }
  return std::nullopt;
}

Json diff_json(const std::optional<FrameKey>& d) {
  if (!d) return nullptr;
  return {{"scenario_id", scenario_text(d->scenario)}, {"timestep", d->timestep}};
}

void sync_from(SessionState& s, std::size_t view) {
  const Camera c = s.views[view].camera;
  for (ViewState& v : s.views) v.camera = c;
}

Result apply_view_field(SessionState& s, std::size_t i, std::string_view field, std::string_view path,
                        const Json& value, const ScenarioCatalog* catalog) {
  ViewState& v = s.views[i];
  if (field == "scenario_id") {
    const auto sc = value.is_string() ? parse_scenario(value.get<std::string>()) : std::nullopt;
    if (!sc) return bad_value(path, "unknown scenario");
    if (auto why = check_frame(catalog, *sc, v.timestep)) return bad_value(path, *why);
    v.scenario = *sc;
    return Json(scenario_text(*sc));
  }
  if (field == "timestep") {
    const auto t = as_index(value);
    if (!t || *t > 0xFFFFFFFFull) return bad_value(path, "timestep must be a non-negative integer");
    if (auto why = check_frame(catalog, v.scenario, std::uint32_t(*t))) return bad_value(path, *why);
    v.timestep = std::uint32_t(*t);
    return Json(v.timestep);
  }
  if (field == "visibility") {
    auto c = as_choice(value, kVisibility);
    if (!c) return bad_value(path, "visibility must be neurons, connections or both");
    v.visibility = *c;
    return Json(*c);
  }
  if (field == "display_mode") {
    auto c = as_choice(value, kDisplayModes);
    if (!c) return bad_value(path, "display_mode must be dynamic_radius or displaced");
    v.display_mode = *c;
    return Json(*c);
  }
  if (field == "range_mode") {
    auto c = as_choice(value, kRangeModes);
    if (!c) return bad_value(path, "range_mode must be global or local");
    v.range_mode = *c;
    return Json(*c);
  }
  if (field == "color_property") {
    const auto p = value.is_string() ? parse_property(value.get<std::string>()) : std::nullopt;
    if (!p) return bad_value(path, "unknown property");
    v.color_property = *p;
    return Json(std::string(property_name(*p)));
  }
  if (field == "near_clip") {
    if (!value.is_number() || !std::isfinite(value.get<double>()) || value.get<double>() < 0) {
      return bad_value(path, "near_clip must be a finite number >= 0");
    }
    v.near_clip = value.get<double>();
    return Json(v.near_clip);
  }
  if (field == "diff") {
    if (value.is_null()) {
      v.diff.reset();
      return Json(nullptr);
    }
    if (!value.is_object() || value.size() != 2 || !value.contains("scenario_id") || !value.contains("timestep")) {
      return bad_value(path, "diff must be null or {scenario_id, timestep}");
    }
    const auto sc = value["scenario_id"].is_string()
                        ? parse_scenario(value["scenario_id"].get<std::string>()) : std::nullopt;
    const auto t = as_index(value["timestep"]);
    if (!sc || !t || *t > 0xFFFFFFFFull) return bad_value(path, "diff must name a scenario and a timestep");
    if (auto why = check_frame(catalog, *sc, std::uint32_t(*t))) return bad_value(path, *why);
    v.diff = FrameKey{*sc, std::uint32_t(*t)};
    return diff_json(v.diff);
  }
  if (field == "camera") {
    std::string why;
    auto c = as_camera(value, why);
    if (!c) return bad_value(path, why);
    if (!unit_quaternion(c->orientation)) return bad_value(path, "orientation is not a unit quaternion");
    v.camera = *c;
    if (s.sync_cameras) sync_from(s, i);
    return to_json(*c);
  }
  if (field == "camera.position" || field == "camera.target") {
    auto p = as_vector<3>(value);
    if (!p) return bad_value(path, "expected 3 finite numbers");
    (field == "camera.position" ? v.camera.position : v.camera.target) = *p;
    if (s.sync_cameras) sync_from(s, i);
    return Json(*p);
  }
  if (field == "camera.orientation") {
    auto q = as_vector<4>(value);
    if (!q) return bad_value(path, "expected 4 finite numbers");
    if (!unit_quaternion(*q)) return bad_value(path, "orientation is not a unit quaternion");
    v.camera.orientation = *q;
    if (s.sync_cameras) sync_from(s, i);
    return Json(*q);
  }
  return bad_path(path);
}

}  // namespace

Json to_json(const Camera& c) {
  return {{"position", c.position}, {"orientation", c.orientation}, {"target", c.target}};
}

Json to_json(const ViewState& v) {
  return {{"scenario_id", scenario_text(v.scenario)},
          {"timestep", v.timestep},
          {"visibility", v.visibility},
          {"display_mode", v.display_mode},
          {"color_property", std::string(property_name(v.color_property))},
          {"range_mode", v.range_mode},
          {"diff", diff_json(v.diff)},
          {"near_clip", v.near_clip},
          {"camera", to_json(v.camera)}};
}

Json to_json(const SessionState& s) {
  Json views = Json::array();
  for (const ViewState& v : s.views) views.push_back(to_json(v));
  return {{"view_count", s.views.size()},
          {"views", std::move(views)},
          {"sync_cameras", s.sync_cameras},
          {"chart_source_view", s.chart_source_view},
          {"version", s.version}};
}

std::string canonical(const SessionState& s) { return to_json(s).dump(); }

SessionState state_from_json(const Json& j, const ScenarioCatalog* catalog) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::format, "bad session state: " + what);
  };
  need(j.is_object(), "not an object");
  for (const char* key : {"view_count", "views", "sync_cameras", "chart_source_view", "version"}) {
    need(j.contains(key), std::string("missing ") + key);
  }
  need(j["views"].is_array() && as_index(j["view_count"]) == j["views"].size(),
       "view_count does not match views");
  need(as_index(j["version"]).has_value(), "version");
  SessionState s;
  const auto apply = [&](const std::string& path, const Json& value) {
    auto r = apply_update(s, path, value, nullptr);
    if (auto* e = std::get_if<UpdateError>(&r)) need(false, e->message);
  };
  apply("view_count", j["view_count"]);
  for (std::size_t i = 0; i < s.views.size(); ++i) {
    const Json& v = j["views"][i];
    need(v.is_object() && v.size() == 9, "view " + std::to_string(i) + " has the wrong fields");
    for (const auto& [k, value] : v.items()) apply("views." + std::to_string(i) + "." + k, value);
    if (catalog != nullptr) {
      const ViewState& view = s.views[i];
      need(!check_frame(catalog, view.scenario, view.timestep), "view " + std::to_string(i) + " frame");
      need(!view.diff || !check_frame(catalog, view.diff->scenario, view.diff->timestep),
           "view " + std::to_string(i) + " diff");
    }
  }
  apply("chart_source_view", j["chart_source_view"]);
  need(j["sync_cameras"].is_boolean(), "sync_cameras");
  if (j["sync_cameras"].get<bool>()) {
    for (const ViewState& v : s.views) need(v.camera == s.views[0].camera, "synced cameras differ");
  }
  s.sync_cameras = j["sync_cameras"].get<bool>();
  s.version = *as_index(j["version"]);
  return s;
}

std::variant<Json, UpdateError> apply_update(SessionState& state, std::string_view path,
                                             const Json& value, const ScenarioCatalog* catalog) {
  SessionState next = state;
  Result r;
  if (path == "view_count") {
    const auto n = as_index(value);
    if (!n || *n < 1 || *n > kMaxViews) return bad_value(path, "view_count must be 1..8");
    const ViewState last = next.views.back();
    next.views.resize(*n, last);
    next.chart_source_view = std::min<std::uint32_t>(next.chart_source_view, std::uint32_t(*n - 1));
    r = Json(*n);
  } else if (path == "sync_cameras") {
    if (!value.is_boolean()) return bad_value(path, "sync_cameras must be a boolean");
    next.sync_cameras = value.get<bool>();
    if (next.sync_cameras) sync_from(next, 0);
    r = Json(next.sync_cameras);
  } else if (path == "chart_source_view") {
    const auto i = as_index(value);
    if (!i || *i >= next.views.size()) return bad_value(path, "chart_source_view must name a view");
    next.chart_source_view = std::uint32_t(*i);
    r = Json(next.chart_source_view);
  } else if (path.starts_with("views.")) {
    std::string_view rest = path.substr(6);
    const std::size_t dot = rest.find('.');
    if (dot == std::string_view::npos) return bad_path(path);
    std::size_t index = 0;
    const std::string_view digits = rest.substr(0, dot);
    auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec != std::errc() || end != digits.data() + digits.size() || digits.empty() ||
        (digits.size() > 1 && digits[0] == '0')) {
      return bad_path(path);
    }
    if (index >= next.views.size()) return bad_path(path);
    r = apply_view_field(next, index, rest.substr(dot + 1), path, value, catalog);
  } else {
    return bad_path(path);
  }
  if (std::holds_alternative<Json>(r)) state = std::move(next);
  return r;
}

bool fold(SessionState& state, const Json& message, const ScenarioCatalog* catalog) {
  if (!message.is_object() || !message.contains("type")) return false;
  const Json& type = message["type"];
  if (type == "snapshot") {
    state = state_from_json(message.at("state"), catalog);
    state.version = message.at("version").get<std::uint64_t>();
    return true;
  }
  if (type != "state") return false;
  const std::uint64_t version = message.at("version").get<std::uint64_t>();
  if (version != state.version + 1) {
    fail(ErrorCode::inconsistency, "state version " + std::to_string(version) + " after " +
                                       std::to_string(state.version));
  }
  auto r = apply_update(state, message.at("path").get<std::string>(), message.at("value"), catalog);
  if (auto* e = std::get_if<UpdateError>(&r)) {
    fail(ErrorCode::inconsistency, "broadcast update rejected locally: " + e->message);
  }
  state.version = version;
  return true;
}

bool valid_session_id(std::string_view id) noexcept {
  return id.size() == kIdLength && std::all_of(id.begin(), id.end(), [](char c) {
           return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
         });
}

SessionHub::SessionHub(HubOptions options, const ScenarioCatalog* catalog)
    : options_(std::move(options)),
      catalog_(catalog),
      rng_(options_.seed != 0 ? options_.seed : std::random_device{}()) {}

SessionHub::ConnectionId SessionHub::connect(std::shared_ptr<Member> member) {
  std::lock_guard lock(mutex_);
  const ConnectionId id = next_id_++;
  const auto now = options_.clock();
  connections_[id] = Connection{std::move(member), {}, now, now, 0};
  return id;
}

void SessionHub::send(ConnectionId id, const Json& message) {
  auto it = connections_.find(id);
  if (it != connections_.end()) it->second.member->deliver(message.dump());
}

void SessionHub::send_error(ConnectionId id, std::string_view code, std::string message) {
  send(id, {{"type", "error"}, {"code", code}, {"message", std::move(message)}});
}

std::string SessionHub::new_session_id() {
  std::uniform_int_distribution<std::size_t> pick(0, kIdAlphabet.size() - 1);
  for (;;) {
    std::string id;
    for (std::size_t i = 0; i < kIdLength; ++i) id.push_back(kIdAlphabet[pick(rng_)]);
    if (!sessions_.contains(id)) return id;
  }
}

void SessionHub::leave_session(ConnectionId id) {
  auto c = connections_.find(id);
  if (c == connections_.end() || c->second.session.empty()) return;
  auto s = sessions_.find(c->second.session);
  c->second.session.clear();
  if (s == sessions_.end()) return;
  std::erase(s->second.members, id);
  if (s->second.members.empty()) s->second.empty_since = options_.clock();
}

void SessionHub::join_session(ConnectionId id, const std::string& session_id) {
  Connection& c = connections_.at(id);
  if (c.session != session_id) {
    leave_session(id);
    Session& s = sessions_.at(session_id);
    s.members.push_back(id);
    s.empty_since.reset();
    c.session = session_id;
  }
  const Session& s = sessions_.at(session_id);
  send(id, {{"type", "snapshot"},
            {"session_id", session_id},
            {"state", to_json(s.state)},
            {"version", s.state.version}});
}

void SessionHub::on_message(ConnectionId id, std::string_view text) {
  std::lock_guard lock(mutex_);
  auto c = connections_.find(id);
  if (c == connections_.end()) return;
  c->second.last_seen = options_.clock();
  c->second.unanswered = 0;

  const Json msg = Json::parse(text, nullptr, false);
  if (msg.is_discarded() || !msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    send_error(id, "bad_message", "expected a JSON object with a string 'type'");
    return;
  }
  const std::string type = msg["type"].get<std::string>();
  if (type == "create_session") {
    const std::string sid = new_session_id();
    leave_session(id);
    sessions_[sid] = Session{};
    send(id, {{"type", "session_created"}, {"session_id", sid}, {"version", 0}});
    join_session(id, sid);
  } else if (type == "join") {
    if (!msg.contains("session_id") || !msg["session_id"].is_string()) {
      send_error(id, "bad_message", "join needs a string session_id");
      return;
    }
    const std::string sid = msg["session_id"].get<std::string>();
    if (!sessions_.contains(sid)) {
      send_error(id, "no_such_session", "no session " + sid);
      return;
    }
    join_session(id, sid);
  } else if (type == "update") {
    if (c->second.session.empty()) {
      send_error(id, "not_in_session", "create or join a session first");
      return;
    }
    if (!msg.contains("path") || !msg["path"].is_string() || !msg.contains("value")) {
      send_error(id, "bad_message", "update needs a string path and a value");
      return;
    }
    const std::string path = msg["path"].get<std::string>();
    Session& s = sessions_.at(c->second.session);
    auto r = apply_update(s.state, path, msg["value"], catalog_);
    if (auto* e = std::get_if<UpdateError>(&r)) {
      send_error(id, e->code, e->message);
      return;
    }
    ++s.state.version;
    const Json out = {{"type", "state"}, {"path", path}, {"value", std::get<Json>(r)},
                      {"version", s.state.version}};
    const std::string text_out = out.dump();
    for (ConnectionId m : s.members) connections_.at(m).member->deliver(text_out);
  } else if (type == "leave") {
    leave_session(id);
  } else if (type == "ping") {
    send(id, {{"type", "pong"}});
  } else if (type == "pong") {
    // liveness already recorded above
  } else {
    send_error(id, "bad_message", "unknown message type '" + type + "'");
  }
}

void SessionHub::disconnect(ConnectionId id) {
  std::lock_guard lock(mutex_);
  leave_session(id);
  connections_.erase(id);
}

void SessionHub::tick() {
  std::vector<std::shared_ptr<Member>> dropped;
  {
    std::lock_guard lock(mutex_);
    const auto now = options_.clock();
    std::vector<ConnectionId> dead;
    for (auto& [id, c] : connections_) {
      if (now - c.last_ping < options_.heartbeat || now - c.last_seen < options_.heartbeat) continue;
      if (c.unanswered >= options_.missed_heartbeats) {
        dead.push_back(id);
        continue;
      }
      c.member->deliver(Json{{"type", "ping"}}.dump());
      c.last_ping = now;
      ++c.unanswered;
    }
    for (ConnectionId id : dead) {
      leave_session(id);
      dropped.push_back(connections_.at(id).member);
      connections_.erase(id);
    }
    std::erase_if(sessions_, [&](const auto& kv) {
      return kv.second.empty_since && now - *kv.second.empty_since >= options_.session_ttl;
    });
  }
  for (auto& m : dropped) m->close();
}

void SessionHub::shutdown() {
  std::vector<std::shared_ptr<Member>> members;
  {
    std::lock_guard lock(mutex_);
    const std::string bye = Json{{"type", "leave"}, {"reason", "shutdown"}}.dump();
    for (auto& [id, c] : connections_) {
      c.member->deliver(bye);
      members.push_back(c.member);
    }
    connections_.clear();
    sessions_.clear();
  }
  for (auto& m : members) m->close();
}

std::size_t SessionHub::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::size_t SessionHub::connection_count() const {
  std::lock_guard lock(mutex_);
  return connections_.size();
}

std::optional<SessionState> SessionHub::session_state(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second.state;
}

std::optional<std::string> SessionHub::session_of(ConnectionId id) const {
  std::lock_guard lock(mutex_);
  auto it = connections_.find(id);
  if (it == connections_.end() || it->second.session.empty()) return std::nullopt;
  return it->second.session;
}

}  // namespace plastiscope::collab
