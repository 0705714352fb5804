#pragma once

// Drive protocol: one JSON object per WebSocket text frame,
//   {"kind": "...", "seq": N, "payload": {...}}
// with seq strictly increasing per direction. Unknown fields are ignored.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sets::autonomy {

using nlohmann::json;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Hello {
  std::string name;
  int version = 1;
  double dt = 0.1;
  bool operator==(const Hello&) const = default;
};

/// Client-side knobs; absent fields leave the setting unchanged.
struct ConfigUpdate {
  std::optional<bool> planner_enabled;
  std::optional<double> time_scale;
  bool operator==(const ConfigUpdate&) const = default;
};

struct Command {
  double v_d = 0.0;
  double omega_d = 0.0;
  bool operator==(const Command&) const = default;
};

struct StateReport {
  long tick = 0;
  double x = 0.0, y = 0.0, theta = 0.0, v = 0.0, omega = 0.0;
  std::array<double, 4> degradation{0.0, 0.0, 0.0, 0.0};
  int safety_count = 0;
  bool operator==(const StateReport&) const = default;
};

struct PlanReport {
  std::vector<std::array<double, 2>> points;
  double value = 0.0;
  std::vector<double> confidence;
  bool operator==(const PlanReport&) const = default;
};

struct Event {
  std::string type;  // collision, degradation_on, degradation_off, protocol_error
  long tick = 0;
  std::string detail;
  bool operator==(const Event&) const = default;
};

using Payload = std::variant<Hello, ConfigUpdate, Command, StateReport, PlanReport, Event>;

struct DriveMessage {
  long seq = 0;
  Payload payload;
  bool operator==(const DriveMessage&) const = default;
};

inline const char* kind_of(const Payload& p) {
  static constexpr const char* names[] = {"hello", "config", "command", "state", "plan", "event"};
  return names[p.index()];
}

/// Both command components saturated to [−1, 1].
inline Command clip_command(Command c) {
  auto clip = [](double v) { return std::isfinite(v) ? std::clamp(v, -1.0, 1.0) : 0.0; };
  return {clip(c.v_d), clip(c.omega_d)};
}

namespace detail {

inline double finite(double v, const char* field) {
  if (!std::isfinite(v)) throw ProtocolError(std::string("non-finite value in '") + field + "'");
  return v;
}

inline double number(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number()) throw ProtocolError(std::string("missing number '") + field + "'");
  return finite(j[field].get<double>(), field);
}

inline long integer(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number_integer()) {
    throw ProtocolError(std::string("missing integer '") + field + "'");
  }
  return j[field].get<long>();
}

struct Encoder {
  json operator()(const Hello& h) const { return {{"name", h.name}, {"version", h.version}, {"dt", finite(h.dt, "dt")}}; }
  json operator()(const ConfigUpdate& c) const {
    json j = json::object();
    if (c.planner_enabled) j["planner_enabled"] = *c.planner_enabled;
    if (c.time_scale) j["time_scale"] = finite(*c.time_scale, "time_scale");
    return j;
  }
  json operator()(const Command& c) const {
    return {{"v_d", finite(c.v_d, "v_d")}, {"omega_d", finite(c.omega_d, "omega_d")}};
  }
  json operator()(const StateReport& s) const {
    json deg = json::array();
    for (double a : s.degradation) deg.push_back(finite(a, "degradation"));
    return {{"tick", s.tick},
            {"x", finite(s.x, "x")},
            {"y", finite(s.y, "y")},
            {"theta", finite(s.theta, "theta")},
            {"v", finite(s.v, "v")},
            {"omega", finite(s.omega, "omega")},
            {"degradation", deg},
            {"safety_count", s.safety_count}};
  }
  json operator()(const PlanReport& p) const {
    json pts = json::array();
    for (const auto& pt : p.points) pts.push_back({finite(pt[0], "points"), finite(pt[1], "points")});
    json conf = json::array();
    for (double c : p.confidence) conf.push_back(finite(c, "confidence"));
    return {{"points", pts}, {"value", finite(p.value, "value")}, {"confidence", conf}};
  }
  json operator()(const Event& e) const {
    json j = {{"type", e.type}, {"tick", e.tick}};
    if (!e.detail.empty()) j["detail"] = e.detail;
    return j;
  }
};

inline Payload decode_payload(const std::string& kind, const json& p) {
  if (!p.is_object()) throw ProtocolError("payload must be an object");
  if (kind == "hello") {
    Hello h;
    if (p.contains("name") && p["name"].is_string()) h.name = p["name"].get<std::string>();
    if (p.contains("version")) h.version = static_cast<int>(integer(p, "version"));
    if (p.contains("dt")) h.dt = number(p, "dt");
    return h;
  }
  if (kind == "config") {
    ConfigUpdate c;
    if (p.contains("planner_enabled")) {
      if (!p["planner_enabled"].is_boolean()) throw ProtocolError("planner_enabled must be a boolean");
      c.planner_enabled = p["planner_enabled"].get<bool>();
    }
    if (p.contains("time_scale")) {
      const double s = number(p, "time_scale");
      if (!(s > 0.0)) throw ProtocolError("time_scale must be positive");
      c.time_scale = s;
    }
    return c;
  }
  if (kind == "command") return Command{number(p, "v_d"), number(p, "omega_d")};
  if (kind == "state") {
    StateReport s;
    s.tick = integer(p, "tick");
    s.x = number(p, "x");
    s.y = number(p, "y");
    s.theta = number(p, "theta");
    s.v = number(p, "v");
    s.omega = number(p, "omega");
    if (!p.contains("degradation") || !p["degradation"].is_array() || p["degradation"].size() != 4) {
      throw ProtocolError("degradation must hold 4 numbers");
    }
    for (int i = 0; i < 4; ++i) {
      if (!p["degradation"][i].is_number()) throw ProtocolError("degradation must hold 4 numbers");
      s.degradation[i] = finite(p["degradation"][i].get<double>(), "degradation");
    }
    s.safety_count = static_cast<int>(integer(p, "safety_count"));
    return s;
  }
  if (kind == "plan") {
    PlanReport r;
    if (!p.contains("points") || !p["points"].is_array()) throw ProtocolError("plan needs points");
    for (const auto& pt : p["points"]) {
      if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
        throw ProtocolError("plan points must be [x, y] pairs");
      }
      r.points.push_back({finite(pt[0].get<double>(), "points"), finite(pt[1].get<double>(), "points")});
    }
    r.value = number(p, "value");
    if (p.contains("confidence")) {
      if (!p["confidence"].is_array()) throw ProtocolError("confidence must be an array");
      for (const auto& c : p["confidence"]) {
        if (!c.is_number()) throw ProtocolError("confidence must hold numbers");
        r.confidence.push_back(finite(c.get<double>(), "confidence"));
      }
    }
    return r;
  }
  if (kind == "event") {
    Event e;
    if (!p.contains("type") || !p["type"].is_string()) throw ProtocolError("event needs a type");
    e.type = p["type"].get<std::string>();
    e.tick = integer(p, "tick");
    if (p.contains("detail") && p["detail"].is_string()) e.detail = p["detail"].get<std::string>();
    return e;
  }
  throw ProtocolError("unknown message kind '" + kind + "'");
}

}  // namespace detail

inline std::string encode(const DriveMessage& m) {
  json j = {{"kind", kind_of(m.payload)}, {"seq", m.seq}, {"payload", std::visit(detail::Encoder{}, m.payload)}};
  return j.dump();
}

inline DriveMessage decode(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string()) throw ProtocolError("missing 'kind'");
  DriveMessage m;
  m.seq = detail::integer(j, "seq");
  m.payload = detail::decode_payload(j["kind"].get<std::string>(), j.contains("payload") ? j["payload"] : json::object());
  return m;
}

/// Rejects any seq not strictly greater than the last accepted one.
class SeqGate {
 public:
  bool accept(long seq) {
    if (last_ && seq <= *last_) return false;
    last_ = seq;
    return true;
  }
  std::optional<long> last() const { return last_; }
  void reset() { last_.reset(); }

 private:
  std::optional<long> last_;
};

/// Stamps outgoing messages with consecutive seq numbers.
class SeqCounter {
 public:
  DriveMessage stamp(Payload p) { return DriveMessage{next_++, std::move(p)}; }

 private:
  long next_ = 1;
};

}  // namespace sets::autonomy
