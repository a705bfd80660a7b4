#pragma once

// Probabilistic finite-state automata over signatures: a state-merging
// learner, text import/export, and extraction of weighted lifestate rules
// from permitted-set changes along transitions.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "lifestate/lifestate.hpp"
#include "lifestate/signature.hpp"

namespace lifestate {

/// Deterministic on labels. Probabilities derive from counts: a transition's
/// probability is its count over the state's total (outgoing plus final).
class ProbAutomaton {
 public:
  struct Edge {
    std::size_t target = 0;
    std::uint64_t count = 0;
  };

  std::size_t add_state();
  /// Adds `count` to the (source, label) edge, creating it with `target`.
  /// Throws Error{InvalidArgument} if the edge exists with another target.
  void add_transition(std::size_t source, const MessageSignature& label, std::size_t target, std::uint64_t count);
  void add_final(std::size_t state, std::uint64_t count);

  std::size_t size() const { return states_.size(); }
  std::size_t initial() const { return initial_; }
  void set_initial(std::size_t s) { initial_ = s; }

  const std::map<MessageSignature, Edge>& out(std::size_t state) const { return states_.at(state).out; }
  std::uint64_t final_count(std::size_t state) const { return states_.at(state).final_count; }
  std::uint64_t total(std::size_t state) const;
  Rational probability(std::size_t state, const MessageSignature& label) const;

  /// Labels of outgoing transitions with nonzero probability.
  std::set<MessageSignature> permitted(std::size_t state) const;
  /// Every label of the automaton.
  std::set<MessageSignature> labels() const;

  /// The target reached by `label`, if any.
  std::optional<std::size_t> next(std::size_t state, const MessageSignature& label) const;

  friend bool operator==(const ProbAutomaton&, const ProbAutomaton&);

 private:
  struct State {
    std::map<MessageSignature, Edge> out;
    std::uint64_t final_count = 0;
  };
  std::vector<State> states_;
  std::size_t initial_ = 0;
};

bool operator==(const ProbAutomaton::Edge& a, const ProbAutomaton::Edge& b);

/// Transitions of a signature trace that the automaton models: everything
/// after init except disallowed invocations.
std::vector<MessageSignature> pfsa_word(const SignatureTrace& trace);

/// Frequency prefix tree plus Hoeffding-bound state merging at level alpha,
/// red/blue in breadth-first, label-lexicographic order. A blue state is only
/// merged when the test at that pair could reject a maximal difference.
ProbAutomaton train_pfsa(std::span<const SignatureTrace> traces, double alpha = 0.05);

struct WeightedRule {
  LifestateRule rule;
  Rational weight;

  friend bool operator==(const WeightedRule&, const WeightedRule&) = default;
};

/// In rule order.
std::vector<WeightedRule> extract_rules(const ProbAutomaton& automaton);

/// Weight descending, ties by rule order.
std::vector<WeightedRule> top_k(std::vector<WeightedRule> rules, std::size_t k = 20);

LifestateSpec spec_of(std::span<const WeightedRule> rules);

/// Text format:
///   initial <state>
///   <src> <label> <dst> <count>
///   final <state> <count>
/// Labels are rendered signatures ("ci:..." / "evt:..."); '#' starts a comment.
ProbAutomaton read_automaton(std::istream& in);
ProbAutomaton read_automaton(const std::filesystem::path& path);
void write_automaton(const ProbAutomaton& automaton, std::ostream& out);

}  // namespace lifestate
