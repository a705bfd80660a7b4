#pragma once

// Small-step abstract machine with enabled-event and allowed-call stores and
// its instrumented trace semantics.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lifestate/error.hpp"
#include "lifestate/life/syntax.hpp"
#include "lifestate/trace.hpp"

namespace lifestate::life {

struct Address {
  std::uint64_t id = 0;
  friend auto operator<=>(const Address&, const Address&) = default;
};

struct Handle {
  std::uint64_t id = 0;
  friend auto operator<=>(const Handle&, const Handle&) = default;
};

struct EnvNode;
using Env = std::shared_ptr<const EnvNode>;

struct Closure {
  std::shared_ptr<const FunLit> fun;
  Env env;
};

struct Thunk;
using ThunkPtr = std::shared_ptr<const Thunk>;

struct Value;
using TuplePtr = std::shared_ptr<const std::vector<Value>>;

struct Value {
  using Repr = std::variant<Unit, bool, std::int64_t, Closure, Address, ThunkPtr, Handle, TuplePtr>;
  Repr repr;

  Value() = default;
  template <typename T>
    requires std::is_constructible_v<Repr, T>
  Value(T v) : repr(std::move(v)) {}  // NOLINT(google-explicit-constructor)

  template <typename T>
  const T* get_if() const { return std::get_if<T>(&repr); }
};

/// Structural equality; closures compare by function literal and environment.
bool operator==(const Value& a, const Value& b);
bool operator==(const Closure& a, const Closure& b);

std::string describe(const Value& v);

struct EnvNode {
  std::string name;
  Value value;
  Env next;
};

Env extend(Env env, std::string name, Value value);
const Value* lookup(const Env& env, const std::string& name);
bool env_equal(const Env& a, const Env& b);

/// An immutable function-argument pair.
struct Thunk {
  Closure closure;
  Value arg;
};

bool operator==(const Thunk& a, const Thunk& b);

struct Message {
  Handle handle;
  ThunkPtr thunk;
};

bool operator==(const Message& a, const Message& b);

struct LetFrame {
  std::string var;
  ExprPtr body;
  Env env;
};

/// Active invocation. `record` is the msg_id of the cb/ci record that opened
/// it, absent for package-internal calls.
struct CallFrame {
  Message message;
  std::optional<std::uint64_t> record;
};

struct EventFrame {
  Message message;
  std::uint64_t record = 0;
};

struct ContNode;
/// nullptr is the top-level continuation. An EventFrame never has a tail.
using Cont = std::shared_ptr<const ContNode>;

struct ContNode {
  std::variant<LetFrame, CallFrame, EventFrame> frame;
  Cont next;
};

/// Package of the running message: the function package of the innermost
/// call or event frame; top-level code runs as framework code.
Package pkg_of(const Cont& k);

enum class ForceKind { callback, callin, internal };

ForceKind classify_force(Package caller, Package callee);

struct HeapObject {
  std::string type_name;
  std::map<std::string, Value> fields;
};

struct EvalControl { ExprPtr expr; };
struct ValueControl { Value value; };
struct ForceControl { Message message; };

using Control = std::variant<EvalControl, ValueControl, ForceControl>;

struct MachineState {
  bool initial = false;
  Control control;
  Env env;
  std::map<Address, HeapObject> store;
  std::map<Handle, ThunkPtr> enabled;
  std::map<Handle, ThunkPtr> allowed;
  Cont cont;

  // Allocation counters; handles share one counter so a handle lives in at
  // most one of the message stores.
  std::uint64_t next_address = 1;
  std::uint64_t next_handle = 1;
  std::uint64_t next_record = 1;
  std::uint64_t events_dispatched = 0;
  std::uint64_t steps = 0;

  static MachineState initial_state(ExprPtr program);
};

bool is_terminal(const MachineState& s);

/// True when the next step is an Event reduction.
bool at_event_loop(const MachineState& s);

enum class LabelKind { epsilon, init, evt, cb, ci, ret, dis };

struct TransitionLabel {
  LabelKind kind = LabelKind::epsilon;
  std::optional<Message> message;
  std::optional<std::uint64_t> record;
};

enum class SchedulerMode { seeded_random, round_robin };

struct SchedulerPolicy {
  SchedulerMode mode = SchedulerMode::seeded_random;
  std::uint64_t seed = 0;
};

/// Index into the handle-sorted enabled list chosen for the given event-loop
/// iteration.
std::size_t choose_event(const SchedulerPolicy& policy, std::uint64_t iteration,
                         const std::vector<Handle>& enabled_sorted);

struct StepResult {
  MachineState state;
  TransitionLabel label;
};

/// One reduction. Throws RuntimeError on stuck states.
StepResult step(const MachineState& state, const SchedulerPolicy& policy);

class RuntimeError : public Error {
 public:
  RuntimeError(ErrorCode code, std::uint64_t step_index, const std::string& what)
      : Error(code, "step " + std::to_string(step_index) + ": " + what), step_(step_index) {}
  std::uint64_t step_index() const noexcept { return step_; }

 private:
  std::uint64_t step_;
};

struct RunOptions {
  std::uint64_t fuel = 0;  // maximum Event reductions
  std::uint64_t max_steps = 5'000'000;
};

/// Runs `program` from the initial state, recording every observable label.
Trace run(const ExprPtr& program, const SchedulerPolicy& policy, const RunOptions& options);

}  // namespace lifestate::life
