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

// Collaboration sessions: a versioned shared view state replicated to every
// member. Clients send {type: update, path, value}; the hub applies updates
// in arrival order and broadcasts {type: state, path, value, version} to all
// members, the sender included. Members reproduce the server state by
// folding those messages through apply_update.
//
// Messages (JSON objects discriminated by "type"):
//   client -> hub   create_session, join{session_id}, update{path, value},
//                   leave, ping, pong
//   hub -> client   session_created{session_id, version}, snapshot{session_id,
//                   state, version}, state{path, value, version},
//                   error{code, message}, ping, pong, leave{reason}
//
// Error codes: no_such_session, not_in_session, bad_path, bad_value,
// bad_message.

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "plastiscope/model.hpp"

namespace plastiscope::collab {

using Json = nlohmann::json;

inline constexpr std::size_t kMaxViews = 8;
inline constexpr double kOrientationTolerance = 1e-6;

struct Camera {
  std::array<double, 3> position{0, 0, 300};
  std::array<double, 4> orientation{0, 0, 0, 1};  // x, y, z, w
  std::array<double, 3> target{0, 0, 0};

  friend bool operator==(const Camera&, const Camera&) = default;
};

struct ViewState {
  Scenario scenario = Scenario::learning;
  std::uint32_t timestep = 0;
  std::string visibility = "both";             // neurons | connections | both
  std::string display_mode = "dynamic_radius"; // dynamic_radius | displaced
  NeuronProperty color_property = NeuronProperty::calcium;
  std::string range_mode = "global";           // global | local
  std::optional<FrameKey> diff;                // other side of a diff
  double near_clip = 0.1;
  Camera camera;

  friend bool operator==(const ViewState&, const ViewState&) = default;
};

struct SessionState {
  std::vector<ViewState> views{ViewState{}};
  bool sync_cameras = false;
  std::uint32_t chart_source_view = 0;
  std::uint64_t version = 0;

  std::size_t view_count() const noexcept { return views.size(); }
  friend bool operator==(const SessionState&, const SessionState&) = default;
};

Json to_json(const SessionState& s);
Json to_json(const ViewState& v);
Json to_json(const Camera& c);
// Error(format) when j is not a valid state.
SessionState state_from_json(const Json& j, const ScenarioCatalog* catalog = nullptr);
// Sorted keys, no whitespace: equal states give equal strings.
std::string canonical(const SessionState& s);

struct UpdateError {
  std::string code;  // bad_path or bad_value
  std::string message;
};

// Applies one update to state, leaving version alone. Paths:
//   view_count, sync_cameras, chart_source_view,
//   views.<i>.{scenario_id, timestep, visibility, display_mode,
//              color_property, range_mode, diff, near_clip, camera,
//              camera.position, camera.orientation, camera.target}
// Returns the value as stored (normalized), or an error with state
// unchanged. With a catalog, scenarios and timesteps must exist in it.
std::variant<Json, UpdateError> apply_update(SessionState& state, std::string_view path,
                                             const Json& value,
                                             const ScenarioCatalog* catalog = nullptr);

// Client-side fold of a hub message: snapshot replaces the state, state
// messages go through apply_update. Returns false for other messages.
// Error(inconsistency) on a version gap or a rejected update.
bool fold(SessionState& state, const Json& message, const ScenarioCatalog* catalog = nullptr);

// One connection as seen by the hub. deliver() must not block; the server
// queues the text for its socket.
class Member {
 public:
  virtual ~Member() = default;
  virtual void deliver(const std::string& text) = 0;
  virtual void close() = 0;
};

using Clock = std::function<std::chrono::steady_clock::time_point()>;

struct HubOptions {
  std::chrono::milliseconds heartbeat{15000};
  unsigned missed_heartbeats = 2;           // dropped after this many
  std::chrono::milliseconds session_ttl{60000};  // after the last member leaves
  Clock clock = [] { return std::chrono::steady_clock::now(); };
  std::uint64_t seed = 0;                   // 0: seed from std::random_device
};

bool valid_session_id(std::string_view id) noexcept;

class SessionHub {
 public:
  using ConnectionId = std::uint64_t;

  explicit SessionHub(HubOptions options = {}, const ScenarioCatalog* catalog = nullptr);

  ConnectionId connect(std::shared_ptr<Member> member);
  void on_message(ConnectionId id, std::string_view text);
  // Socket gone: leaves the session without telling the member.
  void disconnect(ConnectionId id);
  // Heartbeats and session expiry; call at least once per second.
  void tick();
  // Sends leave{reason: shutdown} to everyone, closes them, drops all state.
  void shutdown();

  std::size_t session_count() const;
  std::size_t connection_count() const;
  std::optional<SessionState> session_state(const std::string& session_id) const;
  std::optional<std::string> session_of(ConnectionId id) const;

 private:
  struct Connection {
    std::shared_ptr<Member> member;
    std::string session;
    std::chrono::steady_clock::time_point last_seen;
    std::chrono::steady_clock::time_point last_ping;
    unsigned unanswered = 0;
  };
  struct Session {
    SessionState state;
    std::vector<ConnectionId> members;  // join order
    std::optional<std::chrono::steady_clock::time_point> empty_since;
  };

  void send(ConnectionId id, const Json& message);
  void send_error(ConnectionId id, std::string_view code, std::string message);
  void leave_session(ConnectionId id);
  void join_session(ConnectionId id, const std::string& session_id);
  std::string new_session_id();

  HubOptions options_;
  const ScenarioCatalog* catalog_;
  mutable std::mutex mutex_;
  std::mt19937_64 rng_;
  ConnectionId next_id_ = 1;
  std::map<ConnectionId, Connection> connections_;
  std::map<std::string, Session> sessions_;
};

}  // namespace plastiscope::collab
