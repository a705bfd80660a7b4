#include "lifestate/sat_miner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "lifestate/error.hpp"

namespace lifestate {

RuleUniverse rule_universe(const Alphabet& alphabet) {
  RuleUniverse u{alphabet, {}};
  const auto& sigma = alphabet.signatures();
  u.rules.reserve(sigma.size() * (2 * sigma.size() + 1));
  for (const auto& t : sigma) u.rules.push_back({InitForcing{}, Arrow::permit, t});
  for (const auto& lhs : sigma) {
    for (Arrow arrow : {Arrow::permit, Arrow::prohibit}) {
      for (const auto& t : sigma) u.rules.push_back({lhs, arrow, t});
    }
  }
  return u;
}

namespace {

std::size_t signature_index(const Alphabet& alphabet, const MessageSignature& sig) {
  auto idx = alphabet.index_of(sig);
  if (!idx) throw Error(ErrorCode::UnknownSignature, to_string(sig) + " is not in the alphabet");
  return *idx;
}

// A literal or a constant, for clause construction over partially known
// operands.
struct Operand {
  int lit = 0;  // 0 means constant
  bool value = false;

  static Operand var(int v) { return {v, false}; }
  static Operand constant(bool b) { return {0, b}; }
  Operand negated() const { return lit != 0 ? Operand{-lit, false} : Operand{0, !value}; }
};

void add_clause(Cnf& cnf, std::initializer_list<Operand> ops) {
  std::vector<int> clause;
  for (const auto& o : ops) {
    if (o.lit == 0) {
      if (o.value) return;  // satisfied
      continue;
    }
    clause.push_back(o.lit);
  }
  cnf.add(std::move(clause));
}

// a <-> b | (c & d)
void define_or_and(Cnf& cnf, int a, Operand b, Operand c, Operand d) {
  Operand A = Operand::var(a);
  add_clause(cnf, {A.negated(), b, c});
  add_clause(cnf, {A.negated(), b, d});
  add_clause(cnf, {b.negated(), A});
  add_clause(cnf, {c.negated(), d.negated(), A});
}

}  // namespace

PathEncoding encode_paths(const SignatureTrace& trace, const Alphabet& alphabet) {
  validate(trace);
  PathEncoding enc;
  enc.trace = trace;
  enc.alphabet = alphabet;
  auto body = trace.body();
  const std::size_t k = alphabet.size();
  enc.states = body.size() + 1;
  enc.cnf.num_vars = static_cast<int>(k * enc.states);
  for (std::size_t j = 1; j <= body.size(); ++j) {
    const SigTransition& t = body[j - 1];
    const std::size_t idx = signature_index(alphabet, t.signature);
    if (t.kind == TransitionKind::dis) {
      enc.cnf.add_unit(-enc.var(idx, j - 1));
      for (std::size_t s = 0; s < k; ++s) enc.cnf.add_equiv(enc.var(s, j), enc.var(s, j - 1));
    } else {
      enc.cnf.add_unit(enc.var(idx, j - 1));
    }
  }
  return enc;
}

void add_at_least(Cnf& cnf, std::span<const int> lits, std::size_t k) {
  if (k == 0) return;
  const std::size_t n = lits.size();
  if (k > n) {
    cnf.add({});
    return;
  }
  // c[i][j]: at least j of the first i literals hold, for 1 <= j <= min(i, k).
  std::vector<std::vector<int>> c(n + 1, std::vector<int>(k + 1, 0));
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= std::min(i, k); ++j) {
      c[i][j] = cnf.new_var();
      Operand b = j <= i - 1 ? Operand::var(c[i - 1][j]) : Operand::constant(false);
      Operand carry = j == 1 ? Operand::constant(true) : Operand::var(c[i - 1][j - 1]);
      define_or_and(cnf, c[i][j], b, carry, Operand::var(lits[i - 1]));
    }
  }
  cnf.add_unit(c[n][k]);
}

RuleQuery encode_rule_paths(const PathEncoding& encoding, const LifestateRule& rule, const Rational& w,
                            MatchState match) {
  if (w <= 0 || w > 1) throw Error(ErrorCode::InvalidArgument, "w must lie in (0,1]");
  RuleQuery q;
  q.rule = rule;
  q.w = w;
  q.cnf = encoding.cnf;
  if (std::holds_alternative<InitForcing>(rule.lhs)) {
    q.occurrences.push_back(0);
  } else {
    const auto& lhs = std::get<MessageSignature>(rule.lhs);
    auto body = encoding.trace.body();
    for (std::size_t j = 1; j <= body.size(); ++j) {
      const SigTransition& t = body[j - 1];
      if (t.kind == TransitionKind::dis || t.signature != lhs) continue;
      q.occurrences.push_back(match == MatchState::post ? j : j - 1);
    }
  }
  q.applicable = !q.occurrences.empty();
  if (!q.applicable) return q;

  const std::size_t target = signature_index(encoding.alphabet, rule.target);
  const bool polarity = rule.arrow == Arrow::permit;
  for (std::size_t state : q.occurrences) {
    const int x = encoding.var(target, state);
    const int m = q.cnf.new_var();
    q.cnf.add_equiv(m, polarity ? x : -x);
    q.match_vars.push_back(m);
  }
  const auto& num = numerator(w);
  const auto& den = denominator(w);
  BigInt need = (num * q.occurrences.size() + den - 1) / den;
  q.threshold = need.convert_to<std::size_t>();
  add_at_least(q.cnf, q.match_vars, q.threshold);
  return q;
}

std::optional<PathCounts> path_counts(const LifestateRule& rule, const SignatureTrace& trace,
                                      const Alphabet& alphabet, const Rational& w, const FreqOptions& options) {
  PathEncoding enc = encode_paths(trace, alphabet);
  RuleQuery q = encode_rule_paths(enc, rule, w, options.match);
  if (!q.applicable) return std::nullopt;
  PathCounts pc{count_models(enc.cnf, options.count), 0};
  if (pc.paths == 0) return std::nullopt;
  pc.rule_paths = count_models(q.cnf, options.count);
  return pc;
}

std::optional<Rational> freq(const LifestateRule& rule, const SignatureTrace& trace, const Alphabet& alphabet,
                             const Rational& w, const FreqOptions& options) {
  auto pc = path_counts(rule, trace, alphabet, w, options);
  if (!pc) return std::nullopt;
  return Rational(pc->rule_paths, pc->paths);
}

long double geometric_mean(std::span<const std::optional<Rational>> freqs) {
  long double log_sum = 0.0L;
  std::size_t n = 0;
  for (const auto& f : freqs) {
    if (!f) continue;
    if (*f == 0) return 0.0L;
    log_sum += std::log(numerator(*f).convert_to<long double>()) - std::log(denominator(*f).convert_to<long double>());
    ++n;
  }
  if (n == 0) return 0.0L;
  return std::exp(log_sum / static_cast<long double>(n));
}

namespace {

// Scores rules on one trace over the trace's own signatures plus the rule's
// target. Unused signatures scale both counts by the same power of two, so
// the ratio equals the one over the full alphabet.
class TraceScorer {
 public:
  TraceScorer(const SignatureTrace& trace, const FreqOptions& options)
      : trace_(trace), options_(options), base_(alphabet_of(std::span(&trace, 1))) {}

  std::optional<Rational> score(const LifestateRule& rule, const Rational& w) {
    if (const auto* lhs = std::get_if<MessageSignature>(&rule.lhs); lhs && !base_.contains(*lhs)) {
      return std::nullopt;
    }
    const bool extra = !base_.contains(rule.target);
    auto& slot = extra ? padded_[rule.target] : plain_;
    if (!slot) {
      Alphabet alphabet = base_;
      if (extra) {
        auto sigs = base_.signatures();
        sigs.push_back(rule.target);
        alphabet = Alphabet(std::move(sigs));
      }
      PathEncoding enc = encode_paths(trace_, alphabet);
      BigInt paths = count_models(enc.cnf, options_.count);
      slot = Entry{std::move(enc), std::move(paths)};
    }
    if (slot->paths == 0) return std::nullopt;
    RuleQuery q = encode_rule_paths(slot->encoding, rule, w, options_.match);
    if (!q.applicable) return std::nullopt;
    return Rational(count_models(q.cnf, options_.count), slot->paths);
  }

 private:
  struct Entry {
    PathEncoding encoding;
    BigInt paths;
  };

  const SignatureTrace& trace_;
  FreqOptions options_;
  Alphabet base_;
  std::optional<Entry> plain_;
  std::map<MessageSignature, std::optional<Entry>> padded_;
};

}  // namespace

long double freq_set(const LifestateRule& rule, std::span<const SignatureTrace> traces, const Rational& w,
                     const FreqOptions& options) {
  std::vector<std::optional<Rational>> fs;
  for (const auto& t : traces) fs.push_back(TraceScorer(t, options).score(rule, w));
  return geometric_mean(fs);
}

MineResult mine_sat(std::span<const SignatureTrace> traces, const Rational& w, long double delta,
                    const FreqOptions& options) {
  if (delta <= 0 || delta > 1) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0,1]");
  if (w <= 0 || w > 1) throw Error(ErrorCode::InvalidArgument, "w must lie in (0,1]");
  MineResult out;
  out.table.w = w;
  out.table.delta = delta;
  RuleUniverse u = rule_universe(alphabet_of(traces));
  out.table.rules = u.rules;

  std::vector<TraceScorer> scorers;
  scorers.reserve(traces.size());
  for (const auto& t : traces) scorers.emplace_back(t, options);

  for (const auto& rule : u.rules) {
    std::vector<std::optional<Rational>> row;
    row.reserve(traces.size());
    for (auto& s : scorers) row.push_back(s.score(rule, w));
    long double agg = geometric_mean(row);
    out.table.freqs.push_back(std::move(row));
    out.table.aggregate.push_back(agg);
    if (agg >= delta) {
      out.spec.insert(rule);
      out.ranked.emplace_back(rule, agg);
    }
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

namespace {

std::string render_rational(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

std::string render_real(long double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6Lf", x);
  return buf;
}

}  // namespace

void write_freq_table(const FreqTable& table, std::ostream& out) {
  const std::size_t ntraces = table.freqs.empty() ? 0 : table.freqs.front().size();
  out << "# w=" << render_rational(table.w) << " delta=" << render_real(table.delta) << " traces=" << ntraces
      << " rules=" << table.rules.size() << '\n';
  out << "rule\tkind\taggregate";
  for (std::size_t t = 0; t < ntraces; ++t) out << "\tt" << t;
  out << '\n';
  for (std::size_t i = 0; i < table.rules.size(); ++i) {
    out << to_string(table.rules[i]) << '\t' << to_string(kind_of(table.rules[i])) << '\t'
        << render_real(table.aggregate[i]);
    for (const auto& f : table.freqs[i]) out << '\t' << (f ? render_rational(*f) : std::string("-"));
    out << '\n';
  }
}

Rational parse_rational(std::string_view text) {
  auto bad = [&] { return Error(ErrorCode::InvalidArgument, "not a rational number: '" + std::string(text) + "'"); };
  auto parse_uint = [&](std::string_view s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos) throw bad();
    return BigInt(std::string(s));
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt den = parse_uint(text.substr(slash + 1));
    if (den == 0) throw bad();
    return Rational(parse_uint(text.substr(0, slash)), den);
  }
  auto dot = text.find('.');
  if (dot == std::string_view::npos) return Rational(parse_uint(text));
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = text.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw bad();
  BigInt w = whole.empty() ? BigInt(0) : parse_uint(whole);
  BigInt f = frac.empty() ? BigInt(0) : parse_uint(frac);
  BigInt scale = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
  return Rational(w * scale + f, scale);
}

}  // namespace lifestate
