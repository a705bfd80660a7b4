#pragma once

// Concrete instrumented traces: one record per observable transition.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lifestate {

enum class Package { app, fwk };

enum class RecordKind { init, evt, cb, ci, ret, dis };

std::string_view to_string(Package pkg);
std::string_view to_string(RecordKind kind);
std::optional<Package> parse_package(std::string_view text);
std::optional<RecordKind> parse_record_kind(std::string_view text);

/// A framework object as seen by the trace: identity plus the most precise
/// framework supertype.
struct ObjectRef {
  std::uint64_t id = 0;
  std::string fwk_type;

  friend bool operator==(const ObjectRef&, const ObjectRef&) = default;
  friend auto operator<=>(const ObjectRef& a, const ObjectRef& b) { return a.id <=> b.id; }
};

/// Argument of a recorded message: an object or a primitive literal.
using Argument = std::variant<ObjectRef, bool, std::int64_t>;

struct TraceRecord {
  std::uint64_t seq = 0;
  RecordKind kind = RecordKind::init;
  std::optional<std::string> method;
  std::optional<ObjectRef> receiver;
  std::vector<Argument> args;
  std::optional<Package> pkg;
  std::optional<std::uint64_t> msg_id;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

enum class Completion { terminated, fuel_exhausted, recorded };

std::string_view to_string(Completion c);

struct Trace {
  std::vector<TraceRecord> records;
  // Not serialized; traces read from disk are `recorded`.
  Completion completion = Completion::recorded;
};

/// Objects mentioned by a record: the receiver first, then object arguments.
std::vector<ObjectRef> objects_of(const TraceRecord& record);

/// Checks every record invariant and the msg_id nesting discipline.
/// Throws Error{MalformedRecord | UnbalancedNesting | DanglingMsgId}.
void validate_trace(const Trace& trace);

std::string record_to_json_line(const TraceRecord& record);

Trace read_trace(std::istream& in);
Trace read_trace(const std::filesystem::path& path);
void write_trace(const Trace& trace, std::ostream& out);
void write_trace(const Trace& trace, const std::filesystem::path& path);

}  // namespace lifestate
