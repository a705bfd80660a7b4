#include "lifestate/signature.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "lifestate/error.hpp"

namespace lifestate {

std::string_view to_string(SigKind kind) { return kind == SigKind::ci ? "ci" : "evt"; }

std::string to_string(const MessageSignature& sig) {
  return std::string(to_string(sig.kind)) + ":" + sig.text;
}

std::optional<MessageSignature> parse_signature(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos || colon + 1 == text.size()) return std::nullopt;
  auto kind = text.substr(0, colon);
  std::string body(text.substr(colon + 1));
  if (kind == "ci") return MessageSignature::ci(std::move(body));
  if (kind == "evt") return MessageSignature::evt(std::move(body));
  return std::nullopt;
}

std::string_view to_string(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::init: return "init";
    case TransitionKind::evt: return "evt";
    case TransitionKind::ci: return "ci";
    case TransitionKind::dis: return "dis";
  }
  return "?";
}

std::span<const SigTransition> SignatureTrace::body() const {
  std::span<const SigTransition> all(transitions);
  if (!all.empty() && all.front().kind == TransitionKind::init) return all.subspan(1);
  return all;
}

void validate(const SignatureTrace& trace) {
  if (trace.transitions.empty() || trace.transitions.front().kind != TransitionKind::init) {
    throw Error(ErrorCode::MalformedRecord, "signature trace must start with init");
  }
  for (std::size_t i = 1; i < trace.transitions.size(); ++i) {
    const auto& t = trace.transitions[i];
    const std::string where = "transition " + std::to_string(i);
    if (t.kind == TransitionKind::init) {
      throw Error(ErrorCode::MalformedRecord, where + ": init may only appear first");
    }
    const SigKind want = t.kind == TransitionKind::evt ? SigKind::evt : SigKind::ci;
    if (t.signature.kind != want || t.signature.text.empty()) {
      throw Error(ErrorCode::MalformedRecord, where + ": signature kind does not match transition");
    }
  }
}

Alphabet::Alphabet(std::vector<MessageSignature> signatures) : signatures_(std::move(signatures)) {
  std::sort(signatures_.begin(), signatures_.end());
  signatures_.erase(std::unique(signatures_.begin(), signatures_.end()), signatures_.end());
  for (std::size_t i = 0; i < signatures_.size(); ++i) index_.emplace(signatures_[i], i);
}

std::optional<std::size_t> Alphabet::index_of(const MessageSignature& sig) const {
  auto it = index_.find(sig);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Alphabet::count(SigKind kind) const {
  return static_cast<std::size_t>(std::count_if(signatures_.begin(), signatures_.end(),
                                                [kind](const auto& s) { return s.kind == kind; }));
}

Alphabet alphabet_of(std::span<const SignatureTrace> traces) {
  std::vector<MessageSignature> all;
  for (const auto& trace : traces) {
    for (const auto& t : trace.body()) all.push_back(t.signature);
  }
  return Alphabet(std::move(all));
}

std::string render_primitive_args(std::span<const Argument> args) {
  std::string out = "(";
  bool first = true;
  for (const auto& arg : args) {
    if (std::holds_alternative<ObjectRef>(arg)) continue;
    if (!first) out += ',';
    first = false;
    if (const auto* b = std::get_if<bool>(&arg)) {
      out += *b ? "true" : "false";
    } else {
      out += std::to_string(std::get<std::int64_t>(arg));
    }
  }
  out += ')';
  return out;
}

namespace {

std::string invocation_text(const TraceRecord& r) {
  if (!r.receiver || !r.method) {
    throw Error(ErrorCode::MalformedRecord,
                "seq " + std::to_string(r.seq) + ": invocation without receiver or method");
  }
  return r.receiver->fwk_type + "." + *r.method + render_primitive_args(r.args);
}

}  // namespace

MessageSignature abstract_message(const TraceRecord& record,
                                  std::span<const TraceRecord> callbacks_in_extent) {
  switch (record.kind) {
    case RecordKind::ci:
    case RecordKind::dis:
      return MessageSignature::ci(invocation_text(record));
    case RecordKind::evt: {
      auto first_cb = std::find_if(callbacks_in_extent.begin(), callbacks_in_extent.end(),
                                   [](const auto& r) { return r.kind == RecordKind::cb; });
      if (first_cb == callbacks_in_extent.end()) {
        throw Error(ErrorCode::EventWithoutCallback,
                    "seq " + std::to_string(record.seq) + ": event " + record.method.value_or("?") +
                        " triggers no callback");
      }
      return MessageSignature::evt(record.method.value_or("") + std::string(kEventSeparator) +
                                   invocation_text(*first_cb));
    }
    default:
      throw Error(ErrorCode::InvalidArgument,
                  "only evt, ci and dis records have signatures (seq " + std::to_string(record.seq) + ")");
  }
}

std::string render_signature_trace(const SignatureTrace& trace) {
  std::string out;
  for (const auto& t : trace.transitions) {
    out += to_string(t.kind);
    if (t.kind != TransitionKind::init) {
      out += ' ';
      out += t.signature.text;
    }
    out += '\n';
  }
  return out;
}

SignatureTrace parse_signature_trace(std::istream& in) {
  SignatureTrace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "init") {
      trace.transitions.push_back(SigTransition::init());
      continue;
    }
    auto space = line.find(' ');
    if (space == std::string::npos || space + 1 == line.size()) {
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(lineno) + ": expected '<kind> <signature>'");
    }
    auto kind = line.substr(0, space);
    auto text = line.substr(space + 1);
    if (kind == "evt") {
      trace.transitions.push_back(SigTransition::evt(text));
    } else if (kind == "ci") {
      trace.transitions.push_back(SigTransition::ci(text));
    } else if (kind == "dis") {
      trace.transitions.push_back(SigTransition::dis(text));
    } else {
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(lineno) + ": unknown kind " + kind);
    }
  }
  validate(trace);
  return trace;
}

SignatureTrace read_signature_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return parse_signature_trace(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_signature_trace(const SignatureTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << render_signature_trace(trace);
}

std::vector<SignatureTrace> read_signature_trace_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::Io, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".sig") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<SignatureTrace> traces;
  traces.reserve(files.size());
  for (const auto& f : files) traces.push_back(read_signature_trace(f));
  return traces;
}

}  // namespace lifestate
