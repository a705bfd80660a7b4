#include "doctest.h"

#include <map>
#include <sstream>
#include <vector>

#include "lifestate/life/machine.hpp"
#include "lifestate/life/parser.hpp"
#include "support/corpus.hpp"

using namespace lifestate;
using namespace lifestate::life;

namespace {

const SchedulerPolicy kSeed0{SchedulerMode::seeded_random, 0};

// Steps until the control is about to evaluate a node of type T.
template <typename T>
MachineState step_until_eval(MachineState s) {
  for (int i = 0; i < 1000; ++i) {
    if (const auto* c = std::get_if<EvalControl>(&s.control)) {
      if (!s.initial && std::holds_alternative<T>(c->expr->node)) return s;
    }
    s = step(s, kSeed0).state;
  }
  FAIL("node never reached");
  return s;
}

std::string kinds_of(const Trace& t) {
  std::string out;
  for (const auto& r : t.records) {
    if (!out.empty()) out += ' ';
    out += std::string(to_string(r.kind));
    if (r.method) out += ":" + *r.method;
  }
  return out;
}

std::string jsonl(const Trace& t) {
  std::ostringstream out;
  write_trace(t, out);
  return out.str();
}

// Stack discipline over msg_id: ret closes the innermost open record, and a
// dis discards everything open.
bool well_nested(const Trace& t) {
  std::vector<std::uint64_t> open;
  for (const auto& r : t.records) {
    switch (r.kind) {
      case RecordKind::evt:
        if (!open.empty()) return false;
        open.push_back(*r.msg_id);
        break;
      case RecordKind::cb:
      case RecordKind::ci:
        open.push_back(*r.msg_id);
        break;
      case RecordKind::ret:
        if (open.empty() || open.back() != *r.msg_id) return false;
        open.pop_back();
        break;
      case RecordKind::dis:
        open.clear();
        break;
      case RecordKind::init:
        break;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("enable allocates a fresh handle without a label") {
  auto prog = parse_program("(let k (bind (fun fwk x unit) 1) (enable k))");
  MachineState s = step_until_eval<MessageE>(MachineState::initial_state(prog));
  REQUIRE(s.enabled.empty());
  const Handle fresh{s.next_handle};
  auto r = step(s, kSeed0);
  CHECK(r.label.kind == LabelKind::epsilon);
  REQUIRE(r.state.enabled.size() == 1);
  CHECK(r.state.enabled.begin()->first == fresh);
  const auto* v = std::get_if<ValueControl>(&r.state.control);
  REQUIRE(v);
  CHECK(v->value == Value(fresh));
}

TEST_CASE("invoking a message outside the allowed store drops the continuation") {
  auto prog = parse_program("(let k (bind (fun fwk x unit) 1) (let h (enable k) (seq (invoke h k) 7)))");
  MachineState s = step_until_eval<InvokeE>(MachineState::initial_state(prog));
  REQUIRE(s.cont != nullptr);
  auto r = step(s, kSeed0);
  CHECK(r.label.kind == LabelKind::dis);
  REQUIRE(r.label.message);
  CHECK(r.label.message->handle == s.enabled.begin()->first);
  CHECK(r.state.cont == nullptr);
  const auto* v = std::get_if<ValueControl>(&r.state.control);
  REQUIRE(v);
  CHECK(v->value == Value(Unit{}));

  SUBCASE("the single enabled event is dispatched next") {
    REQUIRE(at_event_loop(r.state));
    auto e = step(r.state, kSeed0);
    CHECK(e.label.kind == LabelKind::evt);
    CHECK(e.label.message->handle == r.state.enabled.begin()->first);
    CHECK(*e.label.message->thunk == *r.state.enabled.begin()->second);
    REQUIRE(e.state.cont != nullptr);
    CHECK(std::holds_alternative<EventFrame>(e.state.cont->frame));
    CHECK(e.state.enabled.size() == 1);
  }
}

TEST_CASE("force classification") {
  CHECK(classify_force(Package::fwk, Package::app) == ForceKind::callback);
  CHECK(classify_force(Package::app, Package::fwk) == ForceKind::callin);
  CHECK(classify_force(Package::app, Package::app) == ForceKind::internal);
  CHECK(classify_force(Package::fwk, Package::fwk) == ForceKind::internal);
  CHECK(pkg_of(nullptr) == Package::fwk);
}

TEST_CASE("the unit program records only init") {
  Trace t = run(parse_program("unit"), kSeed0, {10, 1000});
  REQUIRE(t.records.size() == 1);
  CHECK(t.records[0].kind == RecordKind::init);
  CHECK(t.completion == Completion::terminated);
}

TEST_CASE("zero fuel dispatches no event") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Trace t = testing::simulate_fixture("toggle.lf", seed, 0);
    REQUIRE_FALSE(t.records.empty());
    CHECK(t.records.front().kind == RecordKind::init);
    for (const auto& r : t.records) CHECK(r.kind != RecordKind::evt);
    CHECK(t.completion == Completion::fuel_exhausted);
  }
}

TEST_CASE("button and task demo reproduces the recorded skeleton") {
  Trace t = testing::simulate_fixture("fig1.lf", 0, 3);
  CHECK(t.completion == Completion::fuel_exhausted);
  std::string skeleton;
  for (const auto& r : t.records) {
    if (r.kind == RecordKind::evt || r.kind == RecordKind::cb || r.kind == RecordKind::ci) {
      if (!skeleton.empty()) skeleton += ' ';
      skeleton += std::string(to_string(r.kind)) + ":" + *r.method;
    }
  }
  CHECK(skeleton ==
        "evt:Create cb:onCreate ci:<init> ci:setOnClickListener "
        "evt:Click cb:onClick ci:setEnabled ci:execute "
        "evt:PostExecute cb:onPostExecute ci:<init> ci:setEnabled");
  CHECK(jsonl(t) == jsonl(read_trace(testing::fixture("fig1b_trace.jsonl"))));
}

TEST_CASE("identical program and policy give identical traces") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CHECK(jsonl(testing::simulate_fixture("toggle.lf", seed, 50)) ==
          jsonl(testing::simulate_fixture("toggle.lf", seed, 50)));
  }
  auto prog = parse_program_file(testing::fixture("toggle.lf"));
  SchedulerPolicy rr{SchedulerMode::round_robin, 0};
  CHECK(jsonl(run(prog, rr, {50, 1'000'000})) == jsonl(run(prog, rr, {50, 1'000'000})));
}

TEST_CASE("produced traces are well nested and validate") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Trace t = testing::simulate_fixture("toggle.lf", seed, testing::kToggleFuel);
    CHECK(well_nested(t));
    CHECK_NOTHROW(validate_trace(t));
  }
}

TEST_CASE("every dispatched event is in the enabled store") {
  auto prog = parse_program_file(testing::fixture("toggle.lf"));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SchedulerPolicy policy{SchedulerMode::seeded_random, seed};
    MachineState s = MachineState::initial_state(prog);
    // Shadow store rebuilt from the enable and disable steps alone.
    std::map<Handle, ThunkPtr> shadow;
    int events = 0;
    while (!is_terminal(s) && s.steps < 200'000) {
      const MachineState before = s;
      auto r = step(s, policy);
      if (r.label.kind == LabelKind::evt) {
        ++events;
        auto it = shadow.find(r.label.message->handle);
        REQUIRE(it != shadow.end());
        CHECK(*it->second == *r.label.message->thunk);
      }
      if (const auto* c = std::get_if<EvalControl>(&before.control)) {
        if (const auto* m = std::get_if<MessageE>(&c->expr->node)) {
          if (m->op == MessageOp::enable) {
            const Handle h = std::get<Handle>(std::get<ValueControl>(r.state.control).value.repr);
            shadow[h] = r.state.enabled.at(h);
          } else if (m->op == MessageOp::disable) {
            for (auto it = shadow.begin(); it != shadow.end();) {
              it = r.state.enabled.count(it->first) ? std::next(it) : shadow.erase(it);
            }
          }
        }
      }
      s = std::move(r.state);
    }
    CHECK(is_terminal(s));
    CHECK(events > 0);
  }
}

TEST_CASE("an event that disables itself is dispatched at most once") {
  auto prog = parse_program(
      "(let a (new Thing)"
      " (let e (fun fwk x :event Once (seq (disable me) unit))"
      "  (seq (enable (bind e a)) (enable (bind e a)) unit)))");
  Trace t = run(prog, kSeed0, {100, 100'000});
  CHECK(t.completion == Completion::terminated);
  int evts = 0;
  for (const auto& r : t.records) evts += r.kind == RecordKind::evt;
  CHECK(evts == 2);  // two distinct handles, each fired once

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Trace f = testing::simulate_fixture("toggle.lf", seed, testing::kToggleFuel);
    int creates = 0;
    for (const auto& r : f.records) creates += r.kind == RecordKind::evt && r.method == "Create";
    CHECK(creates == 1);
  }
}

TEST_CASE("a disallowed invocation resumes at the event loop") {
  int dis = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Trace t = testing::simulate_fixture("toggle.lf", seed, testing::kToggleFuel);
    for (std::size_t i = 0; i < t.records.size(); ++i) {
      if (t.records[i].kind != RecordKind::dis) continue;
      ++dis;
      if (i + 1 < t.records.size()) CHECK(t.records[i + 1].kind == RecordKind::evt);
    }
  }
  CHECK(dis > 0);
}

TEST_CASE("runtime errors carry their kind and step") {
  auto code_of = [](const char* src) {
    try {
      run(parse_program(src), kSeed0, {10, 10'000});
    } catch (const RuntimeError& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code_of("(+ y 1)") == ErrorCode::UnboundVariable);
  CHECK(code_of("(let k (bind (fun fwk x unit) 1) (let h (enable k) (seq (disable h) (disable h))))") ==
        ErrorCode::DanglingHandle);
  CHECK(code_of("(invoke 3 4)") == ErrorCode::TypeMismatch);
  CHECK(code_of("(if 1 unit unit)") == ErrorCode::TypeMismatch);

  auto loop = parse_program("(let a (new T) (enable (bind (fun fwk x :event Tick unit) a)))");
  try {
    run(loop, kSeed0, {1'000'000, 500});
    FAIL("expected a step limit");
  } catch (const RuntimeError& e) {
    CHECK(e.code() == ErrorCode::StepLimit);
    CHECK(is_budget_error(e.code()));
  }
}

TEST_CASE("parse errors report line and column") {
  try {
    parse_program("(seq unit\n  (let x))");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_program("(seq unit"), Error);
  CHECK_THROWS_AS(parse_program("(frobnicate 1)"), Error);
}

TEST_CASE("round robin cycles through enabled events in handle order") {
  auto prog = parse_program(
      "(let a (new T)"
      " (seq (enable (bind (fun fwk x :event A unit) a))"
      "      (enable (bind (fun fwk x :event B unit) a))"
      "      unit))");
  Trace t = run(prog, {SchedulerMode::round_robin, 0}, {4, 10'000});
  std::string evts;
  for (const auto& r : t.records) {
    if (r.kind == RecordKind::evt) evts += *r.method;
  }
  CHECK(evts == "ABAB");
  CHECK(kinds_of(t).rfind("init", 0) == 0);
}
