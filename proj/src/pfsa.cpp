#include "lifestate/pfsa.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "lifestate/error.hpp"

namespace lifestate {

std::size_t ProbAutomaton::add_state() {
  states_.emplace_back();
  return states_.size() - 1;
}

void ProbAutomaton::add_transition(std::size_t source, const MessageSignature& label, std::size_t target,
                                   std::uint64_t count) {
  if (source >= states_.size() || target >= states_.size()) {
    throw Error(ErrorCode::InvalidArgument, "transition references an unknown state");
  }
  auto [it, fresh] = states_[source].out.emplace(label, Edge{target, 0});
  if (!fresh && it->second.target != target) {
    throw Error(ErrorCode::InvalidArgument, "automaton is not deterministic on " + to_string(label));
  }
  it->second.count += count;
}

void ProbAutomaton::add_final(std::size_t state, std::uint64_t count) { states_.at(state).final_count += count; }

std::uint64_t ProbAutomaton::total(std::size_t state) const {
  const State& s = states_.at(state);
  std::uint64_t n = s.final_count;
  for (const auto& [label, e] : s.out) n += e.count;
  return n;
}

Rational ProbAutomaton::probability(std::size_t state, const MessageSignature& label) const {
  const auto& out = states_.at(state).out;
  auto it = out.find(label);
  if (it == out.end() || it->second.count == 0) return 0;
  return Rational(it->second.count, total(state));
}

std::set<MessageSignature> ProbAutomaton::permitted(std::size_t state) const {
  std::set<MessageSignature> out;
  for (const auto& [label, e] : states_.at(state).out) {
    if (e.count > 0) out.insert(label);
  }
  return out;
}

std::set<MessageSignature> ProbAutomaton::labels() const {
  std::set<MessageSignature> out;
  for (const auto& s : states_) {
    for (const auto& [label, e] : s.out) out.insert(label);
  }
  return out;
}

std::optional<std::size_t> ProbAutomaton::next(std::size_t state, const MessageSignature& label) const {
  const auto& out = states_.at(state).out;
  auto it = out.find(label);
  if (it == out.end()) return std::nullopt;
  return it->second.target;
}

bool operator==(const ProbAutomaton::Edge& a, const ProbAutomaton::Edge& b) {
  return a.target == b.target && a.count == b.count;
}

bool operator==(const ProbAutomaton& a, const ProbAutomaton& b) {
  if (a.initial_ != b.initial_ || a.states_.size() != b.states_.size()) return false;
  for (std::size_t i = 0; i < a.states_.size(); ++i) {
    if (a.states_[i].final_count != b.states_[i].final_count || a.states_[i].out != b.states_[i].out) return false;
  }
  return true;
}

std::vector<MessageSignature> pfsa_word(const SignatureTrace& trace) {
  std::vector<MessageSignature> word;
  for (const auto& t : trace.body()) {
    if (t.kind != TransitionKind::dis) word.push_back(t.signature);
  }
  return word;
}

namespace {

struct Node {
  std::map<MessageSignature, ProbAutomaton::Edge> out;
  std::uint64_t final_count = 0;
  std::size_t order = 0;  // breadth-first position in the prefix tree

  std::uint64_t total() const {
    std::uint64_t n = final_count;
    for (const auto& [l, e] : out) n += e.count;
    return n;
  }
};

class Alergia {
 public:
  Alergia(std::span<const SignatureTrace> traces, double alpha)
      : bound_(std::sqrt(0.5 * std::log(2.0 / alpha))) {
    nodes_.emplace_back();
    for (const auto& t : traces) {
      std::size_t q = 0;
      for (const auto& sig : pfsa_word(t)) {
        auto it = nodes_[q].out.find(sig);
        if (it == nodes_[q].out.end()) {
          nodes_.emplace_back();
          it = nodes_[q].out.emplace(sig, ProbAutomaton::Edge{nodes_.size() - 1, 0}).first;
        }
        ++it->second.count;
        q = it->second.target;
      }
      ++nodes_[q].final_count;
    }
    number_breadth_first();
  }

  ProbAutomaton learn() {
    std::vector<bool> red(nodes_.size(), false);
    std::vector<std::size_t> reds{0};
    red[0] = true;
    for (;;) {
      std::optional<std::size_t> blue;
      for (std::size_t r : reds) {
        for (const auto& [l, e] : nodes_[r].out) {
          if (!red[e.target] && (!blue || nodes_[e.target].order < nodes_[*blue].order)) blue = e.target;
        }
      }
      if (!blue) break;
      std::sort(reds.begin(), reds.end(), [&](std::size_t a, std::size_t b) { return nodes_[a].order < nodes_[b].order; });
      bool merged = false;
      for (std::size_t r : reds) {
        if (!decidable(r, *blue) || !compatible(r, *blue)) continue;
        redirect(reds, *blue, r);
        fold(r, *blue);
        merged = true;
        break;
      }
      if (!merged) {
        red[*blue] = true;
        reds.push_back(*blue);
      }
    }
    return export_reachable();
  }

 private:
  bool different(std::uint64_t f1, std::uint64_t n1, std::uint64_t f2, std::uint64_t n2) const {
    if (n1 == 0 || n2 == 0) return false;
    const double gap = std::fabs(static_cast<double>(f1) / static_cast<double>(n1) -
                                 static_cast<double>(f2) / static_cast<double>(n2));
    return gap > bound_ * (1.0 / std::sqrt(static_cast<double>(n1)) + 1.0 / std::sqrt(static_cast<double>(n2)));
  }

  // The test at a candidate pair must be able to reject at all: a gap of 1
  // has to exceed the bound. Pairs with less evidence are kept apart.
  bool decidable(std::size_t a, std::size_t b) const {
    const std::uint64_t ta = nodes_[a].total();
    const std::uint64_t tb = nodes_[b].total();
    if (ta == 0 || tb == 0) return false;
    return bound_ * (1.0 / std::sqrt(static_cast<double>(ta)) + 1.0 / std::sqrt(static_cast<double>(tb))) < 1.0;
  }

  // `b` roots an unmerged subtree, so the recursion follows a tree.
  bool compatible(std::size_t a, std::size_t b) const {
    const Node& na = nodes_[a];
    const Node& nb = nodes_[b];
    const std::uint64_t ta = na.total();
    const std::uint64_t tb = nb.total();
    if (different(na.final_count, ta, nb.final_count, tb)) return false;
    std::set<MessageSignature> labels;
    for (const auto& [l, e] : na.out) labels.insert(l);
    for (const auto& [l, e] : nb.out) labels.insert(l);
    for (const auto& l : labels) {
      auto ia = na.out.find(l);
      auto ib = nb.out.find(l);
      const std::uint64_t ca = ia == na.out.end() ? 0 : ia->second.count;
      const std::uint64_t cb = ib == nb.out.end() ? 0 : ib->second.count;
      if (different(ca, ta, cb, tb)) return false;
      if (ia != na.out.end() && ib != nb.out.end() && !compatible(ia->second.target, ib->second.target)) return false;
    }
    return true;
  }

  void redirect(const std::vector<std::size_t>& reds, std::size_t from, std::size_t to) {
    for (std::size_t r : reds) {
      for (auto& [l, e] : nodes_[r].out) {
        if (e.target == from) e.target = to;
      }
    }
  }

  void fold(std::size_t q, std::size_t b) {
    nodes_[q].final_count += nodes_[b].final_count;
    for (const auto& [l, e] : nodes_[b].out) {
      auto it = nodes_[q].out.find(l);
      if (it == nodes_[q].out.end()) {
        nodes_[q].out.emplace(l, e);
      } else {
        it->second.count += e.count;
        fold(it->second.target, e.target);
      }
    }
  }

  void number_breadth_first() {
    std::deque<std::size_t> queue{0};
    std::size_t next = 0;
    while (!queue.empty()) {
      std::size_t q = queue.front();
      queue.pop_front();
      nodes_[q].order = next++;
      for (const auto& [l, e] : nodes_[q].out) queue.push_back(e.target);
    }
  }

  ProbAutomaton export_reachable() const {
    ProbAutomaton a;
    std::unordered_map<std::size_t, std::size_t> id;
    std::vector<std::size_t> order{0};
    id[0] = a.add_state();
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (const auto& [l, e] : nodes_[order[i]].out) {
        if (id.emplace(e.target, 0).second) {
          id[e.target] = a.add_state();
          order.push_back(e.target);
        }
      }
    }
    for (std::size_t q : order) {
      for (const auto& [l, e] : nodes_[q].out) a.add_transition(id[q], l, id[e.target], e.count);
      a.add_final(id[q], nodes_[q].final_count);
    }
    a.set_initial(0);
    return a;
  }

  std::vector<Node> nodes_;
  double bound_;
};

}  // namespace

ProbAutomaton train_pfsa(std::span<const SignatureTrace> traces, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0,1)");
  return Alergia(traces, alpha).learn();
}

std::vector<WeightedRule> extract_rules(const ProbAutomaton& automaton) {
  if (automaton.size() == 0) return {};
  const auto sigma = automaton.labels();
  std::vector<std::set<MessageSignature>> permitted;
  for (std::size_t x = 0; x < automaton.size(); ++x) permitted.push_back(automaton.permitted(x));

  std::map<LifestateRule, Rational> sums;
  for (std::size_t x = 0; x < automaton.size(); ++x) {
    for (const auto& [m, e] : automaton.out(x)) {
      if (e.count == 0) continue;
      const Rational p = automaton.probability(x, m);
      const auto& px = permitted[x];
      const auto& py = permitted[e.target];
      for (const auto& n : sigma) {
        const bool before = px.contains(n);
        const bool after = py.contains(n);
        if (!before && after) sums[LifestateRule{m, Arrow::permit, n}] += p;
        if (before && !after) sums[LifestateRule{m, Arrow::prohibit, n}] += p;
      }
    }
  }

  std::map<LifestateRule, Rational> weights;
  for (const auto& n : permitted[automaton.initial()]) weights[LifestateRule{InitForcing{}, Arrow::permit, n}] = 1;
  for (const auto& [rule, sum] : sums) {
    const auto& lhs = std::get<MessageSignature>(rule.lhs);
    std::size_t holders = 0;
    for (const auto& p : permitted) holders += p.contains(lhs) ? 1 : 0;
    weights[rule] = sum / holders;
  }
  std::vector<WeightedRule> out;
  out.reserve(weights.size());
  for (auto& [rule, w] : weights) out.push_back({rule, w});
  return out;
}

std::vector<WeightedRule> top_k(std::vector<WeightedRule> rules, std::size_t k) {
  std::sort(rules.begin(), rules.end(), [](const WeightedRule& a, const WeightedRule& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.rule < b.rule;
  });
  if (rules.size() > k) rules.resize(k);
  return rules;
}

LifestateSpec spec_of(std::span<const WeightedRule> rules) {
  LifestateSpec spec;
  for (const auto& r : rules) spec.insert(r.rule);
  return spec;
}

namespace {

[[noreturn]] void format_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "automaton line " + std::to_string(line) + ": " + what);
}

std::uint64_t parse_count(const std::string& s, std::size_t line) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) format_error(line, "bad count '" + s + "'");
  return std::stoull(s);
}

}  // namespace

ProbAutomaton read_automaton(std::istream& in) {
  ProbAutomaton a;
  std::map<std::string, std::size_t> ids;
  auto state = [&](const std::string& name) {
    auto [it, fresh] = ids.emplace(name, 0);
    if (fresh) it->second = a.add_state();
    return it->second;
  };
  std::optional<std::size_t> initial;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ss(raw);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "initial") {
      if (tok.size() != 2) format_error(line, "expected: initial <state>");
      if (initial) format_error(line, "duplicate initial state");
      initial = state(tok[1]);
    } else if (tok[0] == "final") {
      if (tok.size() != 3) format_error(line, "expected: final <state> <count>");
      a.add_final(state(tok[1]), parse_count(tok[2], line));
    } else {
      if (tok.size() != 4) format_error(line, "expected: <src> <label> <dst> <count>");
      auto label = parse_signature(tok[1]);
      if (!label) format_error(line, "bad label '" + tok[1] + "'");
      std::size_t src = state(tok[0]);
      std::size_t dst = state(tok[2]);
      try {
        a.add_transition(src, *label, dst, parse_count(tok[3], line));
      } catch (const Error& e) {
        format_error(line, e.what());
      }
    }
  }
  if (!initial) format_error(line, "missing 'initial' header");
  a.set_initial(*initial);
  return a;
}

ProbAutomaton read_automaton(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_automaton(in);
}

void write_automaton(const ProbAutomaton& automaton, std::ostream& out) {
  out << "initial q" << automaton.initial() << '\n';
  for (std::size_t x = 0; x < automaton.size(); ++x) {
    for (const auto& [label, e] : automaton.out(x)) {
      out << 'q' << x << ' ' << to_string(label) << " q" << e.target << ' ' << e.count << '\n';
    }
  }
  for (std::size_t x = 0; x < automaton.size(); ++x) {
    if (automaton.final_count(x) > 0) out << "final q" << x << ' ' << automaton.final_count(x) << '\n';
  }
}

}  // namespace lifestate
