#include "sets/autonomy/protocol.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace sets::autonomy;

namespace {

std::vector<Payload> samples() {
  StateReport s;
  s.tick = 42;
  s.x = 1.5;
  s.y = -0.25;
  s.theta = 0.1;
  s.v = 0.8;
  s.omega = -0.2;
  s.degradation = {-0.25, 0.0, 0.0, 0.0};
  s.safety_count = 3;
  PlanReport p;
  p.points = {{0.0, 0.0}, {0.1, 0.02}};
  p.value = 12.5;
  p.confidence = {1.0, 0.5};
  ConfigUpdate c;
  c.planner_enabled = false;
  c.time_scale = 2.0;
  return {Hello{"driver", 1, 0.1}, c, ConfigUpdate{}, Command{0.5, -0.75}, s, p, Event{"collision", 7, ""},
          Event{"protocol_error", 8, "bad"}};
}

}  // namespace

TEST(Protocol, RoundTripEveryKind) {
  long seq = 1;
  for (const Payload& p : samples()) {
    const DriveMessage m{seq++, p};
    const std::string text = encode(m);
    EXPECT_EQ(decode(text), m) << text;
    EXPECT_EQ(json::parse(text)["kind"], kind_of(p));
  }
}

TEST(Protocol, WireShape) {
  const json j = json::parse(encode({3, Command{0.5, 0.25}}));
  EXPECT_EQ(j, json::parse(R"({"kind":"command","seq":3,"payload":{"v_d":0.5,"omega_d":0.25}})"));
}

TEST(Protocol, UnknownFieldsIgnored) {
  const DriveMessage m =
      decode(R"({"kind":"command","seq":9,"extra":[1,2],"payload":{"v_d":0.1,"omega_d":0.2,"note":"x"}})");
  EXPECT_EQ(m.seq, 9);
  EXPECT_EQ(std::get<Command>(m.payload), (Command{0.1, 0.2}));
}

TEST(Protocol, MalformedInputRejected) {
  const char* bad[] = {
      "not json",
      "[1,2]",
      R"({"seq":1,"payload":{}})",
      R"({"kind":"command","payload":{"v_d":0,"omega_d":0}})",
      R"({"kind":"command","seq":1.5,"payload":{"v_d":0,"omega_d":0}})",
      R"({"kind":"command","seq":1,"payload":{"v_d":0}})",
      R"({"kind":"command","seq":1,"payload":{"v_d":"fast","omega_d":0}})",
      R"({"kind":"command","seq":1,"payload":[0,0]})",
      R"({"kind":"teleport","seq":1,"payload":{}})",
      R"({"kind":"config","seq":1,"payload":{"planner_enabled":1}})",
      R"({"kind":"config","seq":1,"payload":{"time_scale":0}})",
      R"({"kind":"state","seq":1,"payload":{"tick":1,"x":0,"y":0,"theta":0,"v":0,"omega":0,"degradation":[0,0],"safety_count":0}})",
      R"({"kind":"plan","seq":1,"payload":{"points":[[0]],"value":1}})",
      R"({"kind":"event","seq":1,"payload":{"tick":1}})",
  };
  for (const char* text : bad) EXPECT_THROW(decode(text), ProtocolError) << text;
}

TEST(Protocol, NonFiniteValuesRejected) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(encode({1, Command{nan, 0.0}}), ProtocolError);
  EXPECT_THROW(encode({1, Command{0.0, inf}}), ProtocolError);
  PlanReport p;
  p.points = {{0.0, inf}};
  EXPECT_THROW(encode({1, p}), ProtocolError);
  // JSON has no literal for non-finite numbers; an out-of-range literal parses to inf.
  EXPECT_THROW(decode(R"({"kind":"command","seq":1,"payload":{"v_d":1e999,"omega_d":0}})"), ProtocolError);
}

TEST(Protocol, CommandSaturation) {
  EXPECT_EQ(clip_command({2.0, -3.0}), (Command{1.0, -1.0}));
  EXPECT_EQ(clip_command({0.3, -0.4}), (Command{0.3, -0.4}));
  EXPECT_EQ(clip_command({std::numeric_limits<double>::quiet_NaN(), 0.5}), (Command{0.0, 0.5}));
}

TEST(Protocol, SeqGateRequiresStrictIncrease) {
  SeqGate g;
  EXPECT_TRUE(g.accept(5));
  EXPECT_FALSE(g.accept(5));
  EXPECT_FALSE(g.accept(3));
  EXPECT_TRUE(g.accept(6));
  EXPECT_TRUE(g.accept(100));
  EXPECT_EQ(g.last(), 100);
  g.reset();
  EXPECT_TRUE(g.accept(1));
}

TEST(Protocol, SeqCounterIsConsecutive) {
  SeqCounter c;
  EXPECT_EQ(c.stamp(Command{}).seq, 1);
  EXPECT_EQ(c.stamp(Command{}).seq, 2);
  EXPECT_EQ(c.stamp(Event{"collision", 0, ""}).seq, 3);
}
