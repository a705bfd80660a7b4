#include "lifestate/lifestate.hpp"

#include <fstream>
#include <sstream>

#include "lifestate/error.hpp"

namespace lifestate {

std::string to_string(const Forcing& f) {
  if (std::holds_alternative<InitForcing>(f)) return "init";
  return to_string(std::get<MessageSignature>(f));
}

RuleKind kind_of(const LifestateRule& rule) {
  const bool evt = rule.target.kind == SigKind::evt;
  if (rule.arrow == Arrow::permit) return evt ? RuleKind::enable : RuleKind::allow;
  return evt ? RuleKind::disable : RuleKind::disallow;
}

std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::enable: return "->evt";
    case RuleKind::disable: return "-/>evt";
    case RuleKind::allow: return "->ci";
    case RuleKind::disallow: return "-/>ci";
  }
  return "?";
}

LifestateRule make_rule(Forcing lhs, Arrow arrow, MessageSignature target) {
  if (arrow == Arrow::prohibit && std::holds_alternative<InitForcing>(lhs)) {
    throw Error(ErrorCode::InitProhibit, "init cannot prohibit " + to_string(target));
  }
  return {std::move(lhs), arrow, std::move(target)};
}

std::string to_string(const LifestateRule& rule) {
  return to_string(rule.lhs) + (rule.arrow == Arrow::permit ? " -> " : " -/> ") + to_string(rule.target);
}

namespace {

std::set<MessageSignature> targets(const LifestateSpec& spec, const Forcing& f, Arrow arrow, SigKind kind) {
  std::set<MessageSignature> out;
  for (auto it = spec.lower_bound(LifestateRule{f, Arrow::permit, {}}); it != spec.end() && it->lhs == f; ++it) {
    if (it->arrow == arrow && it->target.kind == kind) out.insert(it->target);
  }
  return out;
}

void fire(SignatureState& s, const LifestateSpec& spec, const Forcing& f) {
  for (const auto& m : enables(spec, f)) s.enabled.insert(m);
  for (const auto& m : disables(spec, f)) s.enabled.erase(m);
  for (const auto& m : allows(spec, f)) s.allowed.insert(m);
  for (const auto& m : disallows(spec, f)) s.allowed.erase(m);
}

}  // namespace

std::set<MessageSignature> enables(const LifestateSpec& spec, const Forcing& f) {
  return targets(spec, f, Arrow::permit, SigKind::evt);
}
std::set<MessageSignature> disables(const LifestateSpec& spec, const Forcing& f) {
  return targets(spec, f, Arrow::prohibit, SigKind::evt);
}
std::set<MessageSignature> allows(const LifestateSpec& spec, const Forcing& f) {
  return targets(spec, f, Arrow::permit, SigKind::ci);
}
std::set<MessageSignature> disallows(const LifestateSpec& spec, const Forcing& f) {
  return targets(spec, f, Arrow::prohibit, SigKind::ci);
}

std::string_view to_string(StuckReason reason) {
  switch (reason) {
    case StuckReason::NotEnabled: return "NotEnabled";
    case StuckReason::NotAllowed: return "NotAllowed";
    case StuckReason::DisOnAllowed: return "DisOnAllowed";
    case StuckReason::NoInit: return "NoInit";
  }
  return "?";
}

SignatureState initial_signature_state(const SignatureTrace& trace) {
  SignatureState s;
  s.remaining = trace.transitions;
  return s;
}

std::variant<SignatureState, StuckReason> step_signature(const SignatureState& state, const LifestateSpec& spec) {
  if (state.remaining.empty()) throw Error(ErrorCode::InvalidArgument, "no transition left to consume");
  const SigTransition& t = state.remaining.front();
  SignatureState next = state;
  next.remaining = state.remaining.subspan(1);
  if (!state.initialized) {
    if (t.kind != TransitionKind::init) return StuckReason::NoInit;
    next.initialized = true;
    next.enabled.clear();
    next.allowed.clear();
    fire(next, spec, InitForcing{});
    return next;
  }
  switch (t.kind) {
    case TransitionKind::init:
      return StuckReason::NoInit;
    case TransitionKind::evt:
      if (!state.enabled.contains(t.signature)) return StuckReason::NotEnabled;
      fire(next, spec, t.signature);
      return next;
    case TransitionKind::ci:
      if (!state.allowed.contains(t.signature)) return StuckReason::NotAllowed;
      fire(next, spec, t.signature);
      return next;
    case TransitionKind::dis:
      if (state.allowed.contains(t.signature)) return StuckReason::DisOnAllowed;
      return next;
  }
  return next;
}

CheckResult check_trace(const LifestateSpec& spec, const SignatureTrace& trace) {
  SignatureState s = initial_signature_state(trace);
  if (s.remaining.empty()) return {Verdict::Stuck, 0, StuckReason::NoInit};
  std::size_t consumed = 0;
  while (!s.remaining.empty()) {
    auto r = step_signature(s, spec);
    if (auto* reason = std::get_if<StuckReason>(&r)) {
      std::size_t index = consumed == 0 ? 0 : consumed - 1;
      return {Verdict::Stuck, index, *reason};
    }
    s = std::move(std::get<SignatureState>(r));
    ++consumed;
  }
  return {Verdict::Sound, 0, std::nullopt};
}

Sufficiency sufficiency(const LifestateSpec& spec, std::span<const SignatureTrace> traces) {
  if (traces.empty()) throw Error(ErrorCode::EmptyTestSet, "sufficiency needs at least one trace");
  Sufficiency out;
  out.total = traces.size();
  for (const auto& t : traces) {
    if (check_trace(spec, t).verdict == Verdict::Sound) ++out.sound;
  }
  out.ratio = Rational(out.sound, out.total);
  return out;
}

std::string render_decimal(const Rational& r, int digits) {
  using boost::multiprecision::cpp_int;
  cpp_int scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const bool negative = r < 0;
  Rational a = negative ? Rational(-r) : r;
  // Round half up.
  cpp_int scaled = (numerator(a) * scale * 2 + denominator(a)) / (denominator(a) * 2);
  cpp_int whole = scaled / scale;
  std::string frac = cpp_int(scaled % scale).str();
  if (frac.size() < static_cast<std::size_t>(digits)) frac.insert(0, digits - frac.size(), '0');
  std::string out = (negative && scaled != 0 ? "-" : "") + whole.str();
  if (digits > 0) out += "." + frac;
  return out;
}

namespace {

[[noreturn]] void spec_error(ErrorCode code, std::size_t line, std::size_t column, const std::string& what) {
  throw Error(code, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

std::string_view trim(std::string_view s, std::size_t& offset) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    offset += s.size();
    return {};
  }
  std::size_t e = s.find_last_not_of(" \t\r");
  offset += b;
  return s.substr(b, e - b + 1);
}

}  // namespace

LifestateSpec parse_spec(std::string_view text) {
  LifestateSpec spec;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::size_t col0 = 0;
    std::string_view line = trim(raw, col0);
    if (line.empty()) continue;

    Arrow arrow = Arrow::permit;
    std::size_t at = line.find(" -/> ");
    std::size_t width = 5;
    if (at != std::string_view::npos) {
      arrow = Arrow::prohibit;
    } else {
      at = line.find(" -> ");
      width = 4;
    }
    if (at == std::string_view::npos) spec_error(ErrorCode::ParseError, line_no, col0 + 1, "expected '->' or '-/>'");

    std::size_t lhs_col = col0;
    std::string_view lhs_text = trim(line.substr(0, at), lhs_col);
    std::size_t rhs_col = col0 + at + width;
    std::string_view rhs_text = trim(line.substr(at + width), rhs_col);

    Forcing lhs = InitForcing{};
    if (lhs_text != "init") {
      auto sig = parse_signature(lhs_text);
      if (!sig) spec_error(ErrorCode::ParseError, line_no, lhs_col + 1, "expected init, evt:<text> or ci:<text>");
      lhs = *sig;
    }
    auto rhs = parse_signature(rhs_text);
    if (!rhs) spec_error(ErrorCode::ParseError, line_no, rhs_col + 1, "expected evt:<text> or ci:<text>");
    if (arrow == Arrow::prohibit && std::holds_alternative<InitForcing>(lhs)) {
      spec_error(ErrorCode::InitProhibit, line_no, lhs_col + 1, "init cannot prohibit a message");
    }
    spec.insert(LifestateRule{std::move(lhs), arrow, std::move(*rhs)});
  }
  return spec;
}

LifestateSpec read_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_spec(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string render_spec(const LifestateSpec& spec) {
  std::string out;
  for (const auto& r : spec) out += to_string(r) + "\n";
  return out;
}

void write_spec(const LifestateSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << render_spec(spec);
}

}  // namespace lifestate
