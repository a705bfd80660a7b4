#include "lifestate/life/machine.hpp"

#include <sstream>
#include <unordered_map>

#include "lifestate/hash.hpp"

namespace lifestate::life {

// ---------------------------------------------------------------------------
// values

bool env_equal(const Env& a, const Env& b) {
  const EnvNode* x = a.get();
  const EnvNode* y = b.get();
  while (x != y) {
    if (x == nullptr || y == nullptr) return false;
    if (x->name != y->name || !(x->value == y->value)) return false;
    x = x->next.get();
    y = y->next.get();
  }
  return true;
}

bool operator==(const Closure& a, const Closure& b) {
  return a.fun == b.fun && env_equal(a.env, b.env);
}

bool operator==(const Thunk& a, const Thunk& b) { return a.closure == b.closure && a.arg == b.arg; }

bool operator==(const Message& a, const Message& b) {
  return a.handle == b.handle && (a.thunk == b.thunk || (a.thunk && b.thunk && *a.thunk == *b.thunk));
}

bool operator==(const Value& a, const Value& b) {
  if (a.repr.index() != b.repr.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.repr);
        if constexpr (std::is_same_v<T, ThunkPtr>) {
          return x == y || (x && y && *x == *y);
        } else if constexpr (std::is_same_v<T, TuplePtr>) {
          if (x == y) return true;
          if (!x || !y || x->size() != y->size()) return false;
          for (std::size_t i = 0; i < x->size(); ++i) {
            if (!((*x)[i] == (*y)[i])) return false;
          }
          return true;
        } else {
          return x == y;
        }
      },
      a.repr);
}

std::string describe(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Unit>) return "()";
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
        else if constexpr (std::is_same_v<T, Closure>) return "<closure>";
        else if constexpr (std::is_same_v<T, Address>) return "a" + std::to_string(x.id);
        else if constexpr (std::is_same_v<T, ThunkPtr>) return "<thunk>";
        else if constexpr (std::is_same_v<T, Handle>) return "h" + std::to_string(x.id);
        else {
          std::string out = "(";
          for (std::size_t i = 0; i < x->size(); ++i) out += (i ? " " : "") + describe((*x)[i]);
          return out + ")";
        }
      },
      v.repr);
}

Env extend(Env env, std::string name, Value value) {
  return std::make_shared<const EnvNode>(EnvNode{std::move(name), std::move(value), std::move(env)});
}

const Value* lookup(const Env& env, const std::string& name) {
  for (const EnvNode* n = env.get(); n != nullptr; n = n->next.get()) {
    if (n->name == name) return &n->value;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// continuations and packages

Package pkg_of(const Cont& k) {
  for (const ContNode* n = k.get(); n != nullptr; n = n->next.get()) {
    if (const auto* call = std::get_if<CallFrame>(&n->frame)) return call->message.thunk->closure.fun->pkg;
    if (const auto* evt = std::get_if<EventFrame>(&n->frame)) return evt->message.thunk->closure.fun->pkg;
  }
  return Package::fwk;
}

ForceKind classify_force(Package caller, Package callee) {
  if (caller == Package::fwk && callee == Package::app) return ForceKind::callback;
  if (caller == Package::app && callee == Package::fwk) return ForceKind::callin;
  return ForceKind::internal;
}

MachineState MachineState::initial_state(ExprPtr program) {
  MachineState s;
  s.initial = true;
  s.control = EvalControl{std::move(program)};
  return s;
}

bool at_event_loop(const MachineState& s) {
  return !s.initial && s.cont == nullptr && std::holds_alternative<ValueControl>(s.control);
}

bool is_terminal(const MachineState& s) { return at_event_loop(s) && s.enabled.empty(); }

// ---------------------------------------------------------------------------
// scheduling

std::size_t choose_event(const SchedulerPolicy& policy, std::uint64_t iteration,
                         const std::vector<Handle>& enabled_sorted) {
  const std::size_t n = enabled_sorted.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "no enabled event to choose");
  if (policy.mode == SchedulerMode::round_robin) return static_cast<std::size_t>(iteration % n);
  std::uint64_t h = splitmix64(policy.seed);
  h = splitmix64(h ^ iteration);
  for (const auto& handle : enabled_sorted) h = splitmix64(h ^ handle.id);
  return static_cast<std::size_t>(h % n);
}

// ---------------------------------------------------------------------------
// reduction

namespace {

class Stepper {
 public:
  Stepper(MachineState& s, const SchedulerPolicy& policy) : s_(s), policy_(policy) {}

  TransitionLabel run() {
    const std::uint64_t index = s_.steps++;
    index_ = index;
    if (s_.initial) {
      s_.initial = false;
      return {LabelKind::init, std::nullopt, std::nullopt};
    }
    // Move the control out: the step replaces it.
    Control control = std::move(s_.control);
    return std::visit([this](auto& c) { return reduce(c); }, control);
  }

 private:
  [[noreturn]] void fail(ErrorCode code, const std::string& what) const {
    throw RuntimeError(code, index_, what);
  }

  Value eval(const ValueExpr& v) const {
    return std::visit(
        [this](const auto& x) -> Value {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, VarRef>) {
            const Value* found = lookup(s_.env, x.name);
            if (!found) fail(ErrorCode::UnboundVariable, "unbound variable " + x.name);
            return *found;
          } else if constexpr (std::is_same_v<T, MeRef>) {
            const Value* found = lookup(s_.env, "me");
            if (!found) fail(ErrorCode::UnboundVariable, "'me' used outside a forced message");
            return *found;
          } else if constexpr (std::is_same_v<T, FunRef>) {
            return Closure{x.fun, s_.env};
          } else {
            return Value(x);
          }
        },
        v);
  }

  template <typename T>
  T expect(const Value& v, const char* what) const {
    const T* x = v.get_if<T>();
    if (!x) fail(ErrorCode::TypeMismatch, std::string("expected ") + what + ", got " + describe(v));
    return *x;
  }

  std::int64_t as_int(const Value& v) const { return expect<std::int64_t>(v, "an integer"); }
  bool as_bool(const Value& v) const { return expect<bool>(v, "a boolean"); }

  void produce(Value v) { s_.control = ValueControl{std::move(v)}; }

  TransitionLabel epsilon() const { return {}; }

  TransitionLabel reduce(EvalControl& c) {
    const ExprPtr expr = c.expr;
    return std::visit([this](const auto& node) { return eval_node(node); }, expr->node);
  }

  TransitionLabel eval_node(const ValueE& e) {
    produce(eval(e.value));
    return epsilon();
  }

  TransitionLabel eval_node(const IfE& e) {
    const bool guard = as_bool(eval(e.guard));
    s_.control = EvalControl{guard ? e.then_branch : e.else_branch};
    return epsilon();
  }

  TransitionLabel eval_node(const BindE& e) {
    Value fun = eval(e.fun);
    Closure closure = expect<Closure>(fun, "a function");
    produce(std::make_shared<const Thunk>(Thunk{std::move(closure), eval(e.arg)}));
    return epsilon();
  }

  TransitionLabel eval_node(const MessageE& e) {
    Value operand = eval(e.operand);
    switch (e.op) {
      case MessageOp::enable:
      case MessageOp::allow: {
        ThunkPtr thunk = expect<ThunkPtr>(operand, "a thunk");
        Handle h{s_.next_handle++};
        (e.op == MessageOp::enable ? s_.enabled : s_.allowed).emplace(h, std::move(thunk));
        produce(h);
        break;
      }
      case MessageOp::disable:
      case MessageOp::disallow: {
        Handle h = expect<Handle>(operand, "a handle");
        auto& store = e.op == MessageOp::disable ? s_.enabled : s_.allowed;
        if (store.erase(h) == 0) {
          fail(ErrorCode::DanglingHandle,
               std::string(e.op == MessageOp::disable ? "disable" : "disallow") + " of " + describe(h) +
                   " which is not in the " + (e.op == MessageOp::disable ? "enabled" : "allowed") + " store");
        }
        produce(Unit{});
        break;
      }
    }
    return epsilon();
  }

  TransitionLabel eval_node(const InvokeE& e) {
    Handle h = expect<Handle>(eval(e.handle), "a handle");
    ThunkPtr thunk = expect<ThunkPtr>(eval(e.thunk), "a thunk");
    Message m{h, thunk};
    auto it = s_.allowed.find(h);
    if (it != s_.allowed.end() && (it->second == thunk || *it->second == *thunk)) {
      s_.control = ForceControl{std::move(m)};
      return epsilon();
    }
    // Disallowed: the continuation is dropped and control returns to the loop.
    s_.control = ValueControl{Unit{}};
    s_.cont = nullptr;
    return {LabelKind::dis, std::move(m), s_.next_record++};
  }

  TransitionLabel eval_node(const LetE& e) {
    s_.cont = std::make_shared<const ContNode>(ContNode{LetFrame{e.var, e.body, s_.env}, s_.cont});
    s_.control = EvalControl{e.bound};
    return epsilon();
  }

  TransitionLabel eval_node(const NewE& e) {
    Address a{s_.next_address++};
    s_.store.emplace(a, HeapObject{e.type_name, {}});
    produce(a);
    return epsilon();
  }

  HeapObject& object(const Value& v) {
    Address a = expect<Address>(v, "an address");
    auto it = s_.store.find(a);
    if (it == s_.store.end()) fail(ErrorCode::TypeMismatch, "unallocated address " + describe(a));
    return it->second;
  }

  TransitionLabel eval_node(const GetE& e) {
    const HeapObject& obj = object(eval(e.object));
    auto it = obj.fields.find(e.field);
    if (it == obj.fields.end()) fail(ErrorCode::TypeMismatch, obj.type_name + " has no field " + e.field);
    produce(it->second);
    return epsilon();
  }

  TransitionLabel eval_node(const SetE& e) {
    Value v = eval(e.value);
    object(eval(e.object)).fields[e.field] = std::move(v);
    produce(Unit{});
    return epsilon();
  }

  TransitionLabel eval_node(const PrimE& e) {
    std::vector<Value> args;
    args.reserve(e.operands.size());
    for (const auto& o : e.operands) args.push_back(eval(o));
    auto arity = [&](std::size_t n) {
      if (args.size() != n) fail(ErrorCode::TypeMismatch, "primitive expects " + std::to_string(n) + " operands");
    };
    switch (e.op) {
      case PrimOp::add: arity(2); produce(as_int(args[0]) + as_int(args[1])); break;
      case PrimOp::sub: arity(2); produce(as_int(args[0]) - as_int(args[1])); break;
      case PrimOp::mul: arity(2); produce(as_int(args[0]) * as_int(args[1])); break;
      case PrimOp::lt: arity(2); produce(as_int(args[0]) < as_int(args[1])); break;
      case PrimOp::le: arity(2); produce(as_int(args[0]) <= as_int(args[1])); break;
      case PrimOp::eq: arity(2); produce(args[0] == args[1]); break;
      case PrimOp::not_: arity(1); produce(!as_bool(args[0])); break;
      case PrimOp::and_: arity(2); produce(as_bool(args[0]) && as_bool(args[1])); break;
      case PrimOp::or_: arity(2); produce(as_bool(args[0]) || as_bool(args[1])); break;
    }
    return epsilon();
  }

  TransitionLabel eval_node(const TupleE& e) {
    auto elems = std::make_shared<std::vector<Value>>();
    for (const auto& v : e.elements) elems->push_back(eval(v));
    produce(TuplePtr(std::move(elems)));
    return epsilon();
  }

  TransitionLabel eval_node(const NthE& e) {
    TuplePtr t = expect<TuplePtr>(eval(e.tuple), "a tuple");
    if (e.index >= t->size()) fail(ErrorCode::TypeMismatch, "tuple index " + std::to_string(e.index) + " out of range");
    produce((*t)[e.index]);
    return epsilon();
  }

  TransitionLabel reduce(ValueControl& c) {
    if (s_.cont == nullptr) return dispatch_event(std::move(c.value));
    const ContNode& top = *s_.cont;
    Cont rest = top.next;
    return std::visit(
        [&](const auto& frame) -> TransitionLabel {
          using F = std::decay_t<decltype(frame)>;
          if constexpr (std::is_same_v<F, LetFrame>) {
            s_.env = extend(frame.env, frame.var, std::move(c.value));
            s_.control = EvalControl{frame.body};
            s_.cont = std::move(rest);
            return epsilon();
          } else if constexpr (std::is_same_v<F, CallFrame>) {
            TransitionLabel label;
            if (frame.record) label = {LabelKind::ret, frame.message, frame.record};
            s_.control = ValueControl{std::move(c.value)};
            s_.cont = std::move(rest);
            return label;
          } else {
            TransitionLabel label{LabelKind::ret, frame.message, frame.record};
            s_.control = ValueControl{std::move(c.value)};
            s_.cont = nullptr;
            return label;
          }
        },
        top.frame);
  }

  TransitionLabel dispatch_event(Value v) {
    if (s_.enabled.empty()) {
      s_.control = ValueControl{std::move(v)};
      fail(ErrorCode::InvalidArgument, "step on a terminal state");
    }
    std::vector<Handle> handles;
    handles.reserve(s_.enabled.size());
    for (const auto& [h, _] : s_.enabled) handles.push_back(h);
    const std::size_t pick = choose_event(policy_, s_.events_dispatched, handles);
    const Handle h = handles[pick];
    // The chosen event stays enabled.
    Message m{h, s_.enabled.at(h)};
    const std::uint64_t record = s_.next_record++;
    s_.cont = std::make_shared<const ContNode>(ContNode{EventFrame{m, record}, nullptr});
    s_.control = ForceControl{m};
    ++s_.events_dispatched;
    return {LabelKind::evt, std::move(m), record};
  }

  TransitionLabel reduce(ForceControl& c) {
    const Message& m = c.message;
    const Closure& closure = m.thunk->closure;
    const FunLit& fun = *closure.fun;
    const ForceKind kind = classify_force(pkg_of(s_.cont), fun.pkg);

    TransitionLabel label;
    std::optional<std::uint64_t> record;
    if (kind != ForceKind::internal) {
      record = s_.next_record++;
      label = {kind == ForceKind::callback ? LabelKind::cb : LabelKind::ci, m, record};
    }
    s_.env = extend(extend(closure.env, "me", m.handle), fun.param, m.thunk->arg);
    s_.cont = std::make_shared<const ContNode>(ContNode{CallFrame{m, record}, s_.cont});
    s_.control = EvalControl{fun.body};
    return label;
  }

  MachineState& s_;
  const SchedulerPolicy& policy_;
  std::uint64_t index_ = 0;
};

void step_in_place(MachineState& s, const SchedulerPolicy& policy, TransitionLabel& label) {
  label = Stepper(s, policy).run();
}

// ---------------------------------------------------------------------------
// recording

struct Recorder {
  const MachineState& state;
  std::uint64_t step_index;

  ObjectRef object_ref(const Address& a) const {
    auto it = state.store.find(a);
    return ObjectRef{a.id, it == state.store.end() ? std::string("Object") : it->second.type_name};
  }

  void components(const Value& v, std::vector<Argument>& out) const {
    if (const auto* a = v.get_if<Address>()) out.emplace_back(object_ref(*a));
    else if (const auto* b = v.get_if<bool>()) out.emplace_back(*b);
    else if (const auto* i = v.get_if<std::int64_t>()) out.emplace_back(*i);
  }

  std::vector<Argument> flatten(const Value& arg) const {
    std::vector<Argument> out;
    if (const auto* t = arg.get_if<TuplePtr>()) {
      for (const auto& e : **t) components(e, out);
    } else {
      components(arg, out);
    }
    return out;
  }

  static std::string method_name(const FunLit& fun) {
    if (fun.annotation && !fun.annotation->method.empty()) return fun.annotation->method;
    return fun.annotation && fun.annotation->is_event ? "<event>" : "<lambda>";
  }

  TraceRecord build(const TransitionLabel& label, RecordKind kind, std::uint64_t seq) const {
    const Message& m = *label.message;
    const FunLit& fun = *m.thunk->closure.fun;
    TraceRecord r;
    r.seq = seq;
    r.kind = kind;
    r.method = method_name(fun);
    r.pkg = fun.pkg;
    r.msg_id = label.record;
    std::vector<Argument> args = flatten(m.thunk->arg);
    if (kind == RecordKind::evt) {
      r.args = std::move(args);
      return r;
    }
    if (args.empty() || !std::holds_alternative<ObjectRef>(args.front())) {
      throw RuntimeError(ErrorCode::TypeMismatch, step_index,
                         std::string(to_string(kind)) + " " + *r.method +
                             ": the argument of a recorded invocation must start with its receiver object");
    }
    r.receiver = std::get<ObjectRef>(args.front());
    r.args.assign(std::make_move_iterator(args.begin() + 1), std::make_move_iterator(args.end()));
    return r;
  }
};

}  // namespace

StepResult step(const MachineState& state, const SchedulerPolicy& policy) {
  StepResult result{state, {}};
  step_in_place(result.state, policy, result.label);
  return result;
}

Trace run(const ExprPtr& program, const SchedulerPolicy& policy, const RunOptions& options) {
  Trace trace;
  MachineState state = MachineState::initial_state(program);
  std::unordered_map<std::uint64_t, std::size_t> opened;  // msg_id -> record index
  TransitionLabel label;

  for (;;) {
    if (is_terminal(state)) {
      trace.completion = Completion::terminated;
      break;
    }
    if (at_event_loop(state) && state.events_dispatched >= options.fuel) {
      trace.completion = Completion::fuel_exhausted;
      break;
    }
    if (state.steps >= options.max_steps) {
      throw RuntimeError(ErrorCode::StepLimit, state.steps,
                         "step budget of " + std::to_string(options.max_steps) + " exhausted");
    }
    const std::uint64_t index = state.steps;
    step_in_place(state, policy, label);
    if (label.kind == LabelKind::epsilon) continue;

    const std::uint64_t seq = trace.records.size();
    Recorder rec{state, index};
    switch (label.kind) {
      case LabelKind::init: {
        TraceRecord r;
        r.seq = seq;
        trace.records.push_back(std::move(r));
        break;
      }
      case LabelKind::evt:
      case LabelKind::cb:
      case LabelKind::ci:
      case LabelKind::dis: {
        const RecordKind kind = label.kind == LabelKind::evt  ? RecordKind::evt
                                : label.kind == LabelKind::cb ? RecordKind::cb
                                : label.kind == LabelKind::ci ? RecordKind::ci
                                                              : RecordKind::dis;
        opened.emplace(*label.record, trace.records.size());
        trace.records.push_back(rec.build(label, kind, seq));
        break;
      }
      case LabelKind::ret: {
        TraceRecord r = trace.records.at(opened.at(*label.record));
        r.seq = seq;
        r.kind = RecordKind::ret;
        trace.records.push_back(std::move(r));
        break;
      }
      case LabelKind::epsilon:
        break;
    }
  }
  return trace;
}

}  // namespace lifestate::life
