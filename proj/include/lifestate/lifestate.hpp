#pragma once

// Lifestate rules, the signature-state machine that checks traces against
// them, and the sufficiency metric.

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include <boost/multiprecision/cpp_int.hpp>

#include "lifestate/signature.hpp"

namespace lifestate {

using Rational = boost::multiprecision::cpp_rational;

struct InitForcing {
  friend auto operator<=>(const InitForcing&, const InitForcing&) = default;
};

/// Left-hand side of a rule; init orders before every signature.
using Forcing = std::variant<InitForcing, MessageSignature>;

std::string to_string(const Forcing& f);

enum class Arrow { permit, prohibit };

/// `lhs -> target` or `lhs -/> target`. The rule kind (enable, disable,
/// allow, disallow) follows from the arrow and the target's kind.
struct LifestateRule {
  Forcing lhs;
  Arrow arrow = Arrow::permit;
  MessageSignature target;

  friend bool operator==(const LifestateRule&, const LifestateRule&) = default;
  friend auto operator<=>(const LifestateRule&, const LifestateRule&) = default;
};

enum class RuleKind { enable, disable, allow, disallow };

RuleKind kind_of(const LifestateRule& rule);
std::string_view to_string(RuleKind kind);  // "->evt", "-/>evt", "->ci", "-/>ci"

/// Throws Error{InitProhibit} for `init -/> ...`.
LifestateRule make_rule(Forcing lhs, Arrow arrow, MessageSignature target);

std::string to_string(const LifestateRule& rule);

using LifestateSpec = std::set<LifestateRule>;

std::set<MessageSignature> enables(const LifestateSpec& spec, const Forcing& f);
std::set<MessageSignature> disables(const LifestateSpec& spec, const Forcing& f);
std::set<MessageSignature> allows(const LifestateSpec& spec, const Forcing& f);
std::set<MessageSignature> disallows(const LifestateSpec& spec, const Forcing& f);

enum class StuckReason { NotEnabled, NotAllowed, DisOnAllowed, NoInit };

std::string_view to_string(StuckReason reason);

struct SignatureState {
  std::span<const SigTransition> remaining;
  bool initialized = false;
  std::set<MessageSignature> enabled;  // evt-kind only
  std::set<MessageSignature> allowed;  // ci-kind only
};

SignatureState initial_signature_state(const SignatureTrace& trace);

/// Consumes the first remaining transition, or reports why it cannot.
std::variant<SignatureState, StuckReason> step_signature(const SignatureState& state,
                                                         const LifestateSpec& spec);

enum class Verdict { Sound, Stuck };

struct CheckResult {
  Verdict verdict = Verdict::Sound;
  /// 0-based position among the transitions after init; 0 for NoInit.
  std::size_t stuck_index = 0;
  std::optional<StuckReason> stuck_reason;

  friend bool operator==(const CheckResult&, const CheckResult&) = default;
};

CheckResult check_trace(const LifestateSpec& spec, const SignatureTrace& trace);

struct Sufficiency {
  std::size_t sound = 0;
  std::size_t total = 0;
  Rational ratio;
};

/// Throws Error{EmptyTestSet} when `traces` is empty.
Sufficiency sufficiency(const LifestateSpec& spec, std::span<const SignatureTrace> traces);

/// Fixed six-digit decimal rendering of a rational, e.g. "0.500000".
std::string render_decimal(const Rational& r, int digits = 6);

/// Rule file: one rule per line; blank lines and `#` comments are ignored.
/// Throws Error{ParseError} or Error{InitProhibit} with line and column.
LifestateSpec parse_spec(std::string_view text);
LifestateSpec read_spec(const std::filesystem::path& path);
std::string render_spec(const LifestateSpec& spec);
void write_spec(const LifestateSpec& spec, const std::filesystem::path& path);

}  // namespace lifestate
