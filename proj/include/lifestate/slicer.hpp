#pragma once

// Callback-driven slicing: one sub-trace per framework object, where an event
// is attributed to the objects its callbacks touch.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lifestate/signature.hpp"
#include "lifestate/trace.hpp"

namespace lifestate {

/// An evt record and the records processed on its behalf: everything up to
/// the matching ret, a dis that discards the continuation, or the end of the
/// trace. Indices are into Trace::records.
struct EventExtent {
  std::size_t event = 0;
  std::size_t first = 0;  // first nested record
  std::size_t last = 0;   // one past the last nested record
};

/// Extents of every evt record, in trace order. Validates the trace first.
std::vector<EventExtent> event_extents(const Trace& trace);

/// Callback records inside `extent`.
std::vector<TraceRecord> callbacks_in(const Trace& trace, const EventExtent& extent);

/// ci/dis/cb: receiver plus object arguments. evt: union over the callbacks
/// of its extent. Other kinds: empty.
std::set<ObjectRef> args_of(const TraceRecord& record, const Trace& trace);

struct SliceSet {
  /// Record indices of each object's concrete sub-trace.
  std::map<ObjectRef, std::vector<std::size_t>> slices;
  /// Abstracted sub-trace of each object, init first.
  std::map<ObjectRef, SignatureTrace> abstract;
  /// Abstract sub-traces by framework type, in object-id order. Kept as a
  /// list: equal slices of different objects are separate observations.
  std::map<std::string, std::vector<SignatureTrace>> groups;
};

SliceSet slice(const Trace& trace);

/// Merges the groups of `from` into `into`, preserving order.
void merge_groups(std::map<std::string, std::vector<SignatureTrace>>& into,
                  const std::map<std::string, std::vector<SignatureTrace>>& from);

struct GroupStats {
  std::size_t traces = 0;
  double mean_length = 0.0;  // post-init transitions per trace
  std::size_t evt_signatures = 0;
  std::size_t ci_signatures = 0;
  std::uint64_t rule_space = 0;
};

/// |Σ|(2|Σ|+1) for |Σ| signatures.
std::uint64_t rule_space_size(std::uint64_t signatures);

GroupStats stats_of(const std::vector<SignatureTrace>& traces);

std::map<std::string, GroupStats> group_stats(
    const std::map<std::string, std::vector<SignatureTrace>>& groups);

}  // namespace lifestate
