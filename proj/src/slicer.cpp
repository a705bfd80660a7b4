#include "lifestate/slicer.hpp"

#include "lifestate/error.hpp"

namespace lifestate {

std::vector<EventExtent> event_extents(const Trace& trace) {
  validate_trace(trace);
  std::vector<EventExtent> out;
  const auto& rs = trace.records;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (rs[i].kind != RecordKind::evt) continue;
    EventExtent ext{i, i + 1, rs.size()};
    for (std::size_t j = i + 1; j < rs.size(); ++j) {
      if (rs[j].kind == RecordKind::ret && rs[j].msg_id == rs[i].msg_id) {
        ext.last = j;
        break;
      }
      if (rs[j].kind == RecordKind::dis) {
        ext.last = j + 1;
        break;
      }
    }
    out.push_back(ext);
  }
  return out;
}

std::vector<TraceRecord> callbacks_in(const Trace& trace, const EventExtent& extent) {
  std::vector<TraceRecord> out;
  for (std::size_t j = extent.first; j < extent.last; ++j) {
    if (trace.records[j].kind == RecordKind::cb) out.push_back(trace.records[j]);
  }
  return out;
}

namespace {

std::set<ObjectRef> direct_args(const TraceRecord& r) {
  auto objs = objects_of(r);
  return {objs.begin(), objs.end()};
}

std::set<ObjectRef> event_args(const std::vector<TraceRecord>& callbacks) {
  std::set<ObjectRef> out;
  for (const auto& cb : callbacks) {
    auto a = direct_args(cb);
    out.insert(a.begin(), a.end());
  }
  return out;
}

}  // namespace

std::set<ObjectRef> args_of(const TraceRecord& record, const Trace& trace) {
  switch (record.kind) {
    case RecordKind::ci:
    case RecordKind::dis:
    case RecordKind::cb:
      return direct_args(record);
    case RecordKind::evt:
      for (const auto& ext : event_extents(trace)) {
        if (trace.records[ext.event].msg_id == record.msg_id) return event_args(callbacks_in(trace, ext));
      }
      return {};
    default:
      return {};
  }
}

SliceSet slice(const Trace& trace) {
  auto extents = event_extents(trace);
  std::map<std::size_t, std::vector<TraceRecord>> callbacks;
  for (const auto& ext : extents) callbacks[ext.event] = callbacks_in(trace, ext);

  SliceSet out;
  std::map<ObjectRef, std::vector<SigTransition>> bodies;
  const auto& rs = trace.records;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const TraceRecord& r = rs[i];
    std::set<ObjectRef> objs;
    SigTransition t;
    if (r.kind == RecordKind::evt) {
      const auto& cbs = callbacks[i];
      if (cbs.empty()) continue;
      objs = event_args(cbs);
      t = {TransitionKind::evt, abstract_message(r, cbs)};
    } else if (r.kind == RecordKind::ci || r.kind == RecordKind::dis) {
      objs = direct_args(r);
      t = {r.kind == RecordKind::ci ? TransitionKind::ci : TransitionKind::dis, abstract_message(r, {})};
    } else {
      continue;
    }
    for (const auto& o : objs) {
      out.slices[o].push_back(i);
      bodies[o].push_back(t);
    }
  }
  for (auto& [obj, body] : bodies) {
    SignatureTrace st;
    st.transitions.reserve(body.size() + 1);
    st.transitions.push_back(SigTransition::init());
    st.transitions.insert(st.transitions.end(), body.begin(), body.end());
    out.groups[obj.fwk_type].push_back(st);
    out.abstract.emplace(obj, std::move(st));
  }
  return out;
}

void merge_groups(std::map<std::string, std::vector<SignatureTrace>>& into,
                  const std::map<std::string, std::vector<SignatureTrace>>& from) {
  for (const auto& [type, traces] : from) {
    auto& dst = into[type];
    dst.insert(dst.end(), traces.begin(), traces.end());
  }
}

std::uint64_t rule_space_size(std::uint64_t signatures) { return signatures * (2 * signatures + 1); }

GroupStats stats_of(const std::vector<SignatureTrace>& traces) {
  GroupStats g;
  g.traces = traces.size();
  std::size_t total = 0;
  for (const auto& t : traces) total += t.body().size();
  g.mean_length = traces.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(traces.size());
  Alphabet sigma = alphabet_of(traces);
  g.evt_signatures = sigma.count(SigKind::evt);
  g.ci_signatures = sigma.count(SigKind::ci);
  g.rule_space = rule_space_size(sigma.size());
  return g;
}

std::map<std::string, GroupStats> group_stats(
    const std::map<std::string, std::vector<SignatureTrace>>& groups) {
  std::map<std::string, GroupStats> out;
  for (const auto& [type, traces] : groups) out[type] = stats_of(traces);
  return out;
}

}  // namespace lifestate
