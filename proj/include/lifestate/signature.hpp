#pragma once

// Message signatures and signature traces: the abstraction of concrete
// messages that lifestate rules talk about.

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lifestate/trace.hpp"

namespace lifestate {

/// Separator between an event name and the callback it triggers (U+226B).
inline constexpr std::string_view kEventSeparator = "\xE2\x89\xAB";

// Declaration order is the alphabet order: "ci" sorts before "evt".
enum class SigKind { ci, evt };

std::string_view to_string(SigKind kind);

struct MessageSignature {
  SigKind kind = SigKind::ci;
  std::string text;

  friend bool operator==(const MessageSignature&, const MessageSignature&) = default;
  friend auto operator<=>(const MessageSignature&, const MessageSignature&) = default;

  static MessageSignature ci(std::string text) { return {SigKind::ci, std::move(text)}; }
  static MessageSignature evt(std::string text) { return {SigKind::evt, std::move(text)}; }
};

/// "ci:Button.setEnabled(false)" / "evt:Click≫OnClickListener.onClick()".
std::string to_string(const MessageSignature& sig);
std::optional<MessageSignature> parse_signature(std::string_view text);

enum class TransitionKind { init, evt, ci, dis };

std::string_view to_string(TransitionKind kind);

struct SigTransition {
  TransitionKind kind = TransitionKind::init;
  MessageSignature signature;  // unused for init

  friend bool operator==(const SigTransition&, const SigTransition&) = default;

  static SigTransition init() { return {}; }
  static SigTransition evt(std::string text) { return {TransitionKind::evt, MessageSignature::evt(std::move(text))}; }
  static SigTransition ci(std::string text) { return {TransitionKind::ci, MessageSignature::ci(std::move(text))}; }
  static SigTransition dis(std::string text) { return {TransitionKind::dis, MessageSignature::ci(std::move(text))}; }
};

struct SignatureTrace {
  std::vector<SigTransition> transitions;

  friend bool operator==(const SignatureTrace&, const SignatureTrace&) = default;

  /// Transitions after the leading init.
  std::span<const SigTransition> body() const;
};

/// Throws Error{MalformedRecord} when init is missing, misplaced, or a
/// transition carries a signature of the wrong kind.
void validate(const SignatureTrace& trace);

/// Deduplicated signatures in (kind, text) order.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<MessageSignature> signatures);

  const std::vector<MessageSignature>& signatures() const { return signatures_; }
  std::size_t size() const { return signatures_.size(); }
  bool empty() const { return signatures_.empty(); }
  std::optional<std::size_t> index_of(const MessageSignature& sig) const;
  bool contains(const MessageSignature& sig) const { return index_of(sig).has_value(); }
  std::size_t count(SigKind kind) const;

  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.signatures_ == b.signatures_; }

 private:
  std::vector<MessageSignature> signatures_;
  std::map<MessageSignature, std::size_t> index_;
};

Alphabet alphabet_of(std::span<const SignatureTrace> traces);

/// Renders primitive arguments canonically: "(false)", "(true,3)", "()".
std::string render_primitive_args(std::span<const Argument> args);

/// Abstracts one evt/ci/dis record. For evt the signature is built from the
/// event name and the first callback of the extent; an evt with no callback
/// throws Error{EventWithoutCallback}.
MessageSignature abstract_message(const TraceRecord& record,
                                  std::span<const TraceRecord> callbacks_in_extent);

std::string render_signature_trace(const SignatureTrace& trace);
SignatureTrace parse_signature_trace(std::istream& in);
SignatureTrace read_signature_trace(const std::filesystem::path& path);
void write_signature_trace(const SignatureTrace& trace, const std::filesystem::path& path);

/// All `*.sig` files under `dir`, in filename order.
std::vector<SignatureTrace> read_signature_trace_dir(const std::filesystem::path& dir);

}  // namespace lifestate
