#include "doctest.h"

#include <random>
#include <sstream>

#include "lifestate/error.hpp"
#include "lifestate/sat_miner.hpp"
#include "support/corpus.hpp"
#include "support/oracle.hpp"

using namespace lifestate;
using testing::Weight;

namespace {

const auto kM = MessageSignature::evt("E≫T.m()");

const Rational kW6{3, 5};
const Rational kW8{4, 5};

Alphabet sized(std::size_t evt, std::size_t ci) {
  std::vector<MessageSignature> sigs;
  for (std::size_t i = 0; i < evt; ++i) sigs.push_back(MessageSignature::evt("E" + std::to_string(i) + "≫T.cb()"));
  for (std::size_t i = 0; i < ci; ++i) sigs.push_back(MessageSignature::ci("T.m" + std::to_string(i) + "()"));
  return Alphabet(sigs);
}

std::vector<std::vector<bool>> models_of(const Cnf& cnf) {
  std::vector<std::vector<bool>> out;
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << cnf.num_vars); ++a) {
    bool ok = true;
    for (const auto& c : cnf.clauses) {
      bool sat = false;
      for (int lit : c) sat = sat || (((a >> (std::abs(lit) - 1)) & 1) == (lit > 0 ? 1u : 0u));
      if (!sat) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    std::vector<bool> m(cnf.num_vars + 1);
    for (int v = 1; v <= cnf.num_vars; ++v) m[v] = (a >> (v - 1)) & 1;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

TEST_CASE("rule universe size and order") {
  CHECK(rule_universe(sized(1, 4)).rules.size() == 55);
  CHECK(rule_universe(sized(6, 19)).rules.size() == 1275);
  CHECK(rule_universe(sized(10, 34)).rules.size() == 3916);
  CHECK(rule_universe(Alphabet{}).rules.empty());
  auto u = rule_universe(sized(1, 2));
  CHECK(std::is_sorted(u.rules.begin(), u.rules.end()));
  CHECK(std::holds_alternative<InitForcing>(u.rules.front().lhs));
  std::size_t init_rules = 0, prohibit = 0;
  for (const auto& r : u.rules) {
    init_rules += std::holds_alternative<InitForcing>(r.lhs);
    prohibit += r.arrow == Arrow::prohibit;
  }
  CHECK(init_rules == 3);
  CHECK(prohibit == 9);
}

TEST_CASE("path counts of small encodings") {
  Alphabet one({kM});
  SignatureTrace evt{{SigTransition::init(), {TransitionKind::evt, kM}}};
  auto enc = encode_paths(evt, one);
  CHECK(enc.states == 2);
  CHECK(count_models(enc.cnf) == 2);

  auto four = sized(2, 2);
  CHECK(count_models(encode_paths(SignatureTrace{{SigTransition::init()}}, four).cnf) == 16);

  Alphabet ci_one({MessageSignature::ci("T.m()")});
  SignatureTrace dis{{SigTransition::init(), SigTransition::dis("T.m()")}};
  CHECK(count_models(encode_paths(dis, ci_one).cnf) == 1);

  SignatureTrace unknown{{SigTransition::init(), SigTransition::ci("Q.q()")}};
  try {
    encode_paths(unknown, ci_one);
    FAIL("expected an unknown signature");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownSignature);
  }
}

TEST_CASE("frequency of a self-enable after one event") {
  Alphabet one({kM});
  SignatureTrace t{{SigTransition::init(), {TransitionKind::evt, kM}}};
  const LifestateRule rule{kM, Arrow::permit, kM};
  auto q = encode_rule_paths(encode_paths(t, one), rule, kW6);
  CHECK(q.applicable);
  CHECK(q.occurrences == std::vector<std::size_t>{1});
  CHECK(q.threshold == 1);
  CHECK(count_models(q.cnf) == 1);
  CHECK(freq(rule, t, one, kW6) == Rational(1, 2));
  auto pc = path_counts(rule, t, one, kW6);
  REQUIRE(pc);
  CHECK(pc->paths == 2);
  CHECK(pc->rule_paths == 1);

  // pre-state matching reads the forced bit
  CHECK(freq(rule, t, one, kW6, FreqOptions{MatchState::pre, {}}) == Rational(1));
  CHECK(freq(LifestateRule{kM, Arrow::prohibit, kM}, t, one, kW6, FreqOptions{MatchState::pre, {}}) == Rational(0));
}

TEST_CASE("init rules read state zero") {
  auto sigma = sized(1, 2);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    auto c = testing::random_case(rng, 5, 3);
    for (const auto& target : c.alphabet.signatures()) {
      LifestateRule r{InitForcing{}, Arrow::permit, target};
      auto q = encode_rule_paths(encode_paths(c.trace, c.alphabet), r, kW8);
      CHECK(q.occurrences == std::vector<std::size_t>{0});
      const auto idx = *c.alphabet.index_of(target);
      Cnf forced = encode_paths(c.trace, c.alphabet).cnf;
      forced.add_unit(encode_paths(c.trace, c.alphabet).var(idx, 0));
      CHECK(count_models(q.cnf) == count_models(forced));
    }
  }
}

TEST_CASE("rules whose left side never fires are inapplicable") {
  auto sigma = sized(1, 2);
  SignatureTrace t{{SigTransition::init(), SigTransition::ci("T.m0()")}};
  LifestateRule r{MessageSignature::ci("T.m1()"), Arrow::permit, MessageSignature::ci("T.m0()")};
  CHECK_FALSE(encode_rule_paths(encode_paths(t, sigma), r, kW6).applicable);
  CHECK_FALSE(freq(r, t, sigma, kW6));
  // a dis occurrence is not a firing
  SignatureTrace d{{SigTransition::init(), SigTransition::dis("T.m1()")}};
  CHECK_FALSE(freq(r, d, sigma, kW6));
  CHECK_THROWS_AS(encode_rule_paths(encode_paths(t, sigma), r, Rational(0)), Error);
  CHECK_THROWS_AS(encode_rule_paths(encode_paths(t, sigma), r, Rational(3, 2)), Error);
}

TEST_CASE("counts match explicit enumeration under both match states") {
  std::mt19937_64 rng(11);
  const std::vector<Weight> weights{{3, 5}, {4, 5}, {1, 1}, {1, 3}};
  const std::vector<Rational> ws{kW6, kW8, Rational(1), Rational(1, 3)};
  for (int i = 0; i < 40; ++i) {
    auto c = testing::random_case(rng, 5, 3);
    auto rules = rule_universe(c.alphabet).rules;
    for (bool pre : {false, true}) {
      auto e = testing::enumerate_paths(c.trace, c.alphabet, rules, weights, pre);
      const auto enc = encode_paths(c.trace, c.alphabet);
      CHECK(count_models(enc.cnf) == e.paths);
      for (std::size_t r = 0; r < rules.size(); ++r) {
        for (std::size_t w = 0; w < ws.size(); ++w) {
          auto q = encode_rule_paths(enc, rules[r], ws[w], pre ? MatchState::pre : MatchState::post);
          REQUIRE(q.applicable == e.rule_paths[r][w].has_value());
          if (q.applicable) CHECK(count_models(q.cnf) == *e.rule_paths[r][w]);
        }
      }
    }
  }
}

TEST_CASE("path counts equal the closed form over dis-joined state classes") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    auto c = testing::random_case(rng, 12, 5);
    CHECK(count_models(encode_paths(c.trace, c.alphabet).cnf) == testing::closed_form_paths(c.trace, c.alphabet));
  }
  // a callin forced true and a dis forced false in the same class
  Alphabet a({MessageSignature::ci("T.m()")});
  SignatureTrace conflict{{SigTransition::init(), SigTransition::dis("T.m()"), SigTransition::ci("T.m()")}};
  CHECK(testing::closed_form_paths(conflict, a) == 0);
  CHECK(count_models(encode_paths(conflict, a).cnf) == 0);
  CHECK_FALSE(freq(LifestateRule{InitForcing{}, Arrow::permit, MessageSignature::ci("T.m()")}, conflict, a, kW6));
}

TEST_CASE("every model keeps the state vector across a dis") {
  std::mt19937_64 rng(9);
  int checked = 0;
  while (checked < 40) {
    auto c = testing::random_case(rng, 4, 3);
    const auto enc = encode_paths(c.trace, c.alphabet);
    if (enc.cnf.num_vars > 18) continue;
    ++checked;
    auto body = c.trace.body();
    for (const auto& m : models_of(enc.cnf)) {
      for (std::size_t j = 1; j <= body.size(); ++j) {
        if (body[j - 1].kind != TransitionKind::dis) continue;
        for (std::size_t s = 0; s < c.alphabet.size(); ++s) CHECK(m[enc.var(s, j)] == m[enc.var(s, j - 1)]);
      }
    }
  }
}

TEST_CASE("frequency is antitone in w and lies in the unit interval") {
  std::mt19937_64 rng(13);
  const std::vector<Rational> ws{Rational(1, 10), Rational(1, 3), Rational(1, 2), kW6, Rational(2, 3), kW8, Rational(1)};
  for (int i = 0; i < 60; ++i) {
    auto c = testing::random_case(rng, 6, 4);
    for (const auto& r : rule_universe(c.alphabet).rules) {
      std::optional<Rational> prev;
      for (const auto& w : ws) {
        auto f = freq(r, c.trace, c.alphabet, w);
        if (!f) break;
        CHECK(*f >= 0);
        CHECK(*f <= 1);
        if (prev) CHECK(*prev >= *f);
        prev = f;
      }
    }
  }
}

TEST_CASE("unused signatures leave frequencies unchanged") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 40; ++i) {
    auto c = testing::random_case(rng, 5, 3);
    auto sigs = c.alphabet.signatures();
    sigs.push_back(MessageSignature::ci("Pad.one()"));
    sigs.push_back(MessageSignature::evt("Pad≫Pad.two()"));
    const Alphabet padded(sigs);
    // Each padding signature is free once per class of dis-joined states.
    std::size_t classes = 1;
    for (const auto& t : c.trace.body()) classes += t.kind != TransitionKind::dis;
    const std::size_t extra_vars = 2 * classes;
    for (const auto& r : rule_universe(c.alphabet).rules) {
      auto a = path_counts(r, c.trace, c.alphabet, kW8);
      auto b = path_counts(r, c.trace, padded, kW8);
      REQUIRE(a.has_value() == b.has_value());
      if (!a) continue;
      CHECK(b->paths == a->paths << extra_vars);
      CHECK(b->rule_paths == a->rule_paths << extra_vars);
    }
  }
}

TEST_CASE("geometric mean over applicable traces") {
  using F = std::optional<Rational>;
  CHECK(geometric_mean(std::vector<F>{Rational(1, 2)}) == doctest::Approx(0.5));
  CHECK(geometric_mean(std::vector<F>{Rational(1, 2), Rational(1, 8)}) == doctest::Approx(0.25));
  CHECK(geometric_mean(std::vector<F>{Rational(1, 2), std::nullopt}) == doctest::Approx(0.5));
  CHECK(geometric_mean(std::vector<F>{std::nullopt}) == 0.0L);
  CHECK(geometric_mean(std::vector<F>{}) == 0.0L);
  CHECK(geometric_mean(std::vector<F>{Rational(0), Rational(1)}) == 0.0L);

  // skip-inapplicable aggregate cross-checked against enumeration
  Alphabet one({kM});
  SignatureTrace fires{{SigTransition::init(), {TransitionKind::evt, kM}}};
  SignatureTrace silent{{SigTransition::init()}};
  const LifestateRule rule{kM, Arrow::permit, kM};
  auto e = testing::enumerate_paths(fires, one, {rule}, {{3, 5}});
  CHECK(Rational(*e.rule_paths[0][0], e.paths) == Rational(1, 2));
  CHECK(freq_set(rule, std::vector<SignatureTrace>{fires, silent}, kW6) == doctest::Approx(0.5));
}

TEST_CASE("mining thresholds and ordering") {
  CHECK(mine_sat(std::vector<SignatureTrace>{}, kW6, 0.5L).spec.empty());
  CHECK_THROWS_AS(mine_sat(std::vector<SignatureTrace>{}, kW6, 0.0L), Error);
  CHECK_THROWS_AS(mine_sat(std::vector<SignatureTrace>{}, Rational(0), 0.5L), Error);

  std::mt19937_64 rng(21);
  std::vector<SignatureTrace> traces;
  auto c = testing::random_case(rng, 5, 3);
  for (int i = 0; i < 4; ++i) {
    auto more = testing::random_case(rng, 5, 3);
    traces.push_back(more.trace);
  }
  traces.push_back(c.trace);
  const Alphabet sigma = alphabet_of(traces);
  auto strict = mine_sat(traces, kW8, 1.0L);
  for (const auto& r : strict.spec) {
    for (const auto& t : traces) {
      auto f = freq(r, t, sigma, kW8);
      if (f) CHECK(*f == 1);
    }
  }
  auto loose = mine_sat(traces, kW8, 0.3L);
  CHECK(std::includes(loose.spec.begin(), loose.spec.end(), strict.spec.begin(), strict.spec.end()));
  CHECK(loose.table.rules == rule_universe(sigma).rules);
  CHECK(loose.ranked.size() == loose.spec.size());
  for (std::size_t i = 1; i < loose.ranked.size(); ++i) {
    const auto& a = loose.ranked[i - 1];
    const auto& b = loose.ranked[i];
    CHECK((a.second > b.second || (a.second == b.second && a.first < b.first)));
  }
  for (std::size_t r = 0; r < loose.table.rules.size(); ++r) {
    const long double agg = loose.table.aggregate[r];
    CHECK(loose.spec.contains(loose.table.rules[r]) == (agg >= 0.3L));
    for (std::size_t t = 0; t < traces.size(); ++t) {
      CHECK(loose.table.freqs[r][t] == freq(loose.table.rules[r], traces[t], sigma, kW8));
    }
  }
}

TEST_CASE("frequency table format") {
  Alphabet one({kM});
  SignatureTrace fires{{SigTransition::init(), {TransitionKind::evt, kM}}};
  SignatureTrace silent{{SigTransition::init()}};
  auto res = mine_sat(std::vector<SignatureTrace>{fires, silent}, kW6, 0.5L);
  std::ostringstream out;
  write_freq_table(res.table, out);
  const std::string text = out.str();
  CHECK(text.rfind("# w=3/5 delta=0.500000 traces=2 rules=3\n", 0) == 0);
  CHECK(text.find("evt:E≫T.m() -> evt:E≫T.m()\t->evt\t0.500000\t1/2\t-\n") != std::string::npos);
  CHECK(text.find("init -> evt:E≫T.m()\t->evt\t0.707107\t1\t1/2\n") != std::string::npos);
}

TEST_CASE("exact weights from text") {
  CHECK(parse_rational("0.6") == kW6);
  CHECK(parse_rational("3/5") == kW6);
  CHECK(parse_rational("1") == Rational(1));
  CHECK(parse_rational("0.125") == Rational(1, 8));
  CHECK_THROWS_AS(parse_rational("abc"), Error);
  CHECK_THROWS_AS(parse_rational("1/0"), Error);
}
