#include "lifestate/trace.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lifestate/error.hpp"

namespace lifestate {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Package pkg) { return pkg == Package::app ? "app" : "fwk"; }

std::string_view to_string(RecordKind kind) {
  switch (kind) {
    case RecordKind::init: return "init";
    case RecordKind::evt: return "evt";
    case RecordKind::cb: return "cb";
    case RecordKind::ci: return "ci";
    case RecordKind::ret: return "ret";
    case RecordKind::dis: return "dis";
  }
  return "?";
}

std::optional<Package> parse_package(std::string_view text) {
  if (text == "app") return Package::app;
  if (text == "fwk") return Package::fwk;
  return std::nullopt;
}

std::optional<RecordKind> parse_record_kind(std::string_view text) {
  for (auto k : {RecordKind::init, RecordKind::evt, RecordKind::cb, RecordKind::ci, RecordKind::ret,
                 RecordKind::dis}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Completion c) {
  switch (c) {
    case Completion::terminated: return "terminated";
    case Completion::fuel_exhausted: return "fuel_exhausted";
    case Completion::recorded: return "recorded";
  }
  return "?";
}

std::vector<ObjectRef> objects_of(const TraceRecord& record) {
  std::vector<ObjectRef> out;
  if (record.receiver) out.push_back(*record.receiver);
  for (const auto& arg : record.args) {
    if (const auto* obj = std::get_if<ObjectRef>(&arg)) out.push_back(*obj);
  }
  return out;
}

namespace {

[[noreturn]] void malformed(std::uint64_t line, const std::string& why) {
  throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line) + ": " + why);
}

}  // namespace

void validate_trace(const Trace& trace) {
  if (trace.records.empty()) malformed(1, "trace must start with an init record");

  std::map<std::uint64_t, std::string> object_types;
  std::set<std::uint64_t> introduced;
  std::vector<std::uint64_t> open;

  auto check_object = [&](std::uint64_t line, const ObjectRef& obj) {
    if (obj.fwk_type.empty()) malformed(line, "object " + std::to_string(obj.id) + " has no type");
    auto [it, fresh] = object_types.emplace(obj.id, obj.fwk_type);
    if (!fresh && it->second != obj.fwk_type) {
      malformed(line, "object " + std::to_string(obj.id) + " changes type from " + it->second +
                          " to " + obj.fwk_type);
    }
  };

  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const TraceRecord& r = trace.records[i];
    const std::uint64_t line = i + 1;
    if (r.seq != i) malformed(line, "seq " + std::to_string(r.seq) + " out of order");

    if (r.kind == RecordKind::init) {
      if (i != 0) malformed(line, "init may only appear as the first record");
      if (r.method || r.receiver || r.pkg || r.msg_id || !r.args.empty()) {
        malformed(line, "init carries no payload");
      }
      continue;
    }
    if (i == 0) malformed(line, "trace must start with an init record");
    if (!r.method || r.method->empty()) malformed(line, "missing method");
    if (!r.pkg) malformed(line, "missing pkg");
    if (!r.msg_id) malformed(line, "missing msg_id");

    const bool needs_receiver =
        r.kind == RecordKind::cb || r.kind == RecordKind::ci || r.kind == RecordKind::dis;
    if (needs_receiver && !r.receiver) malformed(line, "missing receiver");
    if (r.kind == RecordKind::evt && r.receiver) malformed(line, "evt records carry no receiver");
    for (const auto& obj : objects_of(r)) check_object(line, obj);

    const std::uint64_t id = *r.msg_id;
    switch (r.kind) {
      case RecordKind::evt:
        if (!open.empty()) {
          throw Error(ErrorCode::UnbalancedNesting,
                      "seq " + std::to_string(r.seq) + ": event dispatched inside an open frame");
        }
        [[fallthrough]];
      case RecordKind::cb:
      case RecordKind::ci:
      case RecordKind::dis:
        if (!introduced.insert(id).second) malformed(line, "msg_id " + std::to_string(id) + " reused");
        if (r.kind == RecordKind::dis) {
          // A disallowed invocation drops the whole continuation.
          open.clear();
        } else {
          open.push_back(id);
        }
        break;
      case RecordKind::ret:
        if (open.empty()) {
          throw Error(ErrorCode::UnbalancedNesting,
                      "seq " + std::to_string(r.seq) + ": ret with no open frame");
        }
        if (open.back() != id) {
          if (!introduced.contains(id)) {
            throw Error(ErrorCode::DanglingMsgId,
                        "seq " + std::to_string(r.seq) + ": ret names unknown msg_id " +
                            std::to_string(id));
          }
          throw Error(ErrorCode::UnbalancedNesting,
                      "seq " + std::to_string(r.seq) + ": ret for msg_id " + std::to_string(id) +
                          " does not close the innermost frame " + std::to_string(open.back()));
        }
        open.pop_back();
        break;
      case RecordKind::init:
        break;
    }
  }
}

std::string record_to_json_line(const TraceRecord& r) {
  ordered_json j;
  j["seq"] = r.seq;
  j["kind"] = std::string(to_string(r.kind));
  j["method"] = r.method ? ordered_json(*r.method) : ordered_json(nullptr);
  j["recv_id"] = r.receiver ? ordered_json(r.receiver->id) : ordered_json(nullptr);
  j["recv_type"] = r.receiver ? ordered_json(r.receiver->fwk_type) : ordered_json(nullptr);
  ordered_json args = ordered_json::array();
  for (const auto& arg : r.args) {
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, ObjectRef>) {
            ordered_json obj;
            obj["id"] = a.id;
            obj["type"] = a.fwk_type;
            args.push_back(std::move(obj));
          } else {
            args.push_back(a);
          }
        },
        arg);
  }
  j["args"] = std::move(args);
  j["pkg"] = r.pkg ? ordered_json(std::string(to_string(*r.pkg))) : ordered_json(nullptr);
  j["msg_id"] = r.msg_id ? ordered_json(*r.msg_id) : ordered_json(nullptr);
  return j.dump();
}

namespace {

const char* const kFields[] = {"seq", "kind", "method", "recv_id", "recv_type", "args", "pkg", "msg_id"};

TraceRecord parse_record(const std::string& text, std::uint64_t line) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    malformed(line, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) malformed(line, "record is not an object");
  for (const char* field : kFields) {
    if (!j.contains(field)) malformed(line, std::string("missing field ") + field);
  }
  if (j.size() != std::size(kFields)) malformed(line, "unexpected extra fields");

  TraceRecord r;
  if (!j["seq"].is_number_unsigned()) malformed(line, "seq must be an unsigned integer");
  r.seq = j["seq"].get<std::uint64_t>();

  if (!j["kind"].is_string()) malformed(line, "kind must be a string");
  auto kind = parse_record_kind(j["kind"].get<std::string>());
  if (!kind) malformed(line, "unknown kind " + j["kind"].get<std::string>());
  r.kind = *kind;

  const auto& method = j["method"];
  if (method.is_string()) {
    r.method = method.get<std::string>();
  } else if (!method.is_null()) {
    malformed(line, "method must be a string or null");
  }

  const auto& rid = j["recv_id"];
  const auto& rtype = j["recv_type"];
  if (rid.is_null() != rtype.is_null()) malformed(line, "recv_id and recv_type must both be set");
  if (!rid.is_null()) {
    if (!rid.is_number_unsigned() || !rtype.is_string()) malformed(line, "bad receiver");
    r.receiver = ObjectRef{rid.get<std::uint64_t>(), rtype.get<std::string>()};
  }

  const auto& args = j["args"];
  if (!args.is_array()) malformed(line, "args must be an array");
  for (const auto& a : args) {
    if (a.is_boolean()) {
      r.args.emplace_back(a.get<bool>());
    } else if (a.is_number_integer()) {
      r.args.emplace_back(a.get<std::int64_t>());
    } else if (a.is_object() && a.size() == 2 && a.contains("id") && a.contains("type") &&
               a["id"].is_number_unsigned() && a["type"].is_string()) {
      r.args.emplace_back(ObjectRef{a["id"].get<std::uint64_t>(), a["type"].get<std::string>()});
    } else {
      malformed(line, "argument must be a boolean, an integer or an {id,type} object");
    }
  }

  const auto& pkg = j["pkg"];
  if (pkg.is_string()) {
    auto p = parse_package(pkg.get<std::string>());
    if (!p) malformed(line, "unknown pkg " + pkg.get<std::string>());
    r.pkg = *p;
  } else if (!pkg.is_null()) {
    malformed(line, "pkg must be a string or null");
  }

  const auto& mid = j["msg_id"];
  if (mid.is_number_unsigned()) {
    r.msg_id = mid.get<std::uint64_t>();
  } else if (!mid.is_null()) {
    malformed(line, "msg_id must be an unsigned integer or null");
  }
  return r;
}

}  // namespace

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) malformed(lineno, "empty line");
    trace.records.push_back(parse_record(line, lineno));
  }
  validate_trace(trace);
  return trace;
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_trace(in);
}

void write_trace(const Trace& trace, std::ostream& out) {
  for (const auto& r : trace.records) out << record_to_json_line(r) << '\n';
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_trace(trace, out);
}

}  // namespace lifestate
