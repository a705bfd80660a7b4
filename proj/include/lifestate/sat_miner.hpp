#pragma once

// Symbolic-sampling miner: all abstract paths of a signature trace under the
// nondeterministic relation are encoded as CNF, and rule frequencies are the
// ratios of exact model counts.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "lifestate/cnf.hpp"
#include "lifestate/lifestate.hpp"
#include "lifestate/signature.hpp"

namespace lifestate {

struct RuleUniverse {
  Alphabet alphabet;
  std::vector<LifestateRule> rules;
};

/// Permit rules from init and every signature, prohibit rules from every
/// signature, to every signature: |Σ|(2|Σ|+1) rules in rule order.
RuleUniverse rule_universe(const Alphabet& alphabet);

/// One variable x[s][i] per signature s and state i in 0..n, where n is the
/// number of transitions after init and state 0 is the post-init state.
struct PathEncoding {
  SignatureTrace trace;
  Alphabet alphabet;
  std::size_t states = 0;
  Cnf cnf;

  int var(std::size_t signature, std::size_t state) const {
    return static_cast<int>(state * alphabet.size() + signature + 1);
  }
};

/// Throws Error{UnknownSignature} for signatures outside the alphabet and
/// Error{MalformedRecord} for malformed traces.
PathEncoding encode_paths(const SignatureTrace& trace, const Alphabet& alphabet);

enum class MatchState { post, pre };

struct RuleQuery {
  LifestateRule rule;
  Rational w;
  /// States read by each occurrence of the rule's left-hand side.
  std::vector<std::size_t> occurrences;
  std::vector<int> match_vars;
  std::size_t threshold = 0;  // ceil(w * occurrences)
  bool applicable = false;
  Cnf cnf;  // base encoding plus match and cardinality constraints
};

/// w must lie in (0,1].
RuleQuery encode_rule_paths(const PathEncoding& encoding, const LifestateRule& rule, const Rational& w,
                            MatchState match = MatchState::post);

/// Clauses forcing at least `k` of `lits` true through a sequential counter
/// whose auxiliaries are fully defined, so the model count over the original
/// variables is preserved.
void add_at_least(Cnf& cnf, std::span<const int> lits, std::size_t k);

struct FreqOptions {
  MatchState match = MatchState::post;
  CountOptions count;
};

struct PathCounts {
  BigInt paths;
  BigInt rule_paths;
};

/// Counts for one rule on one trace; nullopt when the rule's lhs never occurs
/// or the trace has no path at all.
std::optional<PathCounts> path_counts(const LifestateRule& rule, const SignatureTrace& trace,
                                      const Alphabet& alphabet, const Rational& w, const FreqOptions& options = {});

std::optional<Rational> freq(const LifestateRule& rule, const SignatureTrace& trace, const Alphabet& alphabet,
                             const Rational& w, const FreqOptions& options = {});

/// Geometric mean over the applicable entries; 0 when none applies.
long double geometric_mean(std::span<const std::optional<Rational>> freqs);

long double freq_set(const LifestateRule& rule, std::span<const SignatureTrace> traces, const Rational& w,
                     const FreqOptions& options = {});

struct FreqTable {
  Rational w;
  long double delta = 0.5;
  std::vector<LifestateRule> rules;                        // universe order
  std::vector<std::vector<std::optional<Rational>>> freqs;  // [rule][trace]
  std::vector<long double> aggregate;                      // [rule]
};

struct MineResult {
  LifestateSpec spec;
  /// Selected rules, aggregate descending then rule order.
  std::vector<std::pair<LifestateRule, long double>> ranked;
  FreqTable table;
};

MineResult mine_sat(std::span<const SignatureTrace> traces, const Rational& w, long double delta,
                    const FreqOptions& options = {});

/// Tab-separated: rule, kind, aggregate, then one exact column per trace
/// ("-" when inapplicable).
void write_freq_table(const FreqTable& table, std::ostream& out);

/// Parses "0.6", "3/5" or "1" into an exact rational.
Rational parse_rational(std::string_view text);

}  // namespace lifestate
