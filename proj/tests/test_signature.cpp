#include "doctest.h"

#include <algorithm>
#include <sstream>

#include "lifestate/error.hpp"
#include "lifestate/signature.hpp"

using namespace lifestate;

namespace {

TraceRecord ci(std::uint64_t id, std::string type, std::string method, std::vector<Argument> args = {}) {
  TraceRecord r;
  r.kind = RecordKind::ci;
  r.method = std::move(method);
  r.receiver = ObjectRef{id, std::move(type)};
  r.args = std::move(args);
  r.pkg = Package::fwk;
  r.msg_id = 1;
  return r;
}

SignatureTrace asynctask_slice() {
  return {{SigTransition::init(), SigTransition::ci("AsyncTask.<init>()"), SigTransition::ci("AsyncTask.execute()"),
           SigTransition::evt("PostExecute≫AsyncTask.onPostExecute()")}};
}

}  // namespace

TEST_CASE("callins abstract to type, method and primitive literals") {
  CHECK(abstract_message(ci(7, "Button", "setEnabled", {false}), {}) == MessageSignature::ci("Button.setEnabled(false)"));
  CHECK(abstract_message(ci(7, "Button", "setEnabled", {true}), {}) != abstract_message(ci(7, "Button", "setEnabled", {false}), {}));
  CHECK(abstract_message(ci(1, "Button", "setEnabled", {false}), {}) ==
        abstract_message(ci(2, "Button", "setEnabled", {false}), {}));
  CHECK(abstract_message(ci(1, "Button", "setText", {ObjectRef{5, "String"}, std::int64_t{-3}, true}), {}).text ==
        "Button.setText(-3,true)");
  auto dis = ci(3, "AsyncTask", "execute");
  dis.kind = RecordKind::dis;
  CHECK(abstract_message(dis, {}) == MessageSignature::ci("AsyncTask.execute()"));
}

TEST_CASE("events abstract through their first callback") {
  TraceRecord evt;
  evt.kind = RecordKind::evt;
  evt.method = "PostExecute";
  evt.pkg = Package::fwk;
  evt.msg_id = 1;
  TraceRecord cb = ci(3, "AsyncTask", "onPostExecute");
  cb.kind = RecordKind::cb;
  TraceRecord cb2 = ci(3, "AsyncTask", "onCancelled");
  cb2.kind = RecordKind::cb;
  std::vector<TraceRecord> extent{ci(3, "AsyncTask", "get"), cb, cb2};
  CHECK(abstract_message(evt, extent) == MessageSignature::evt("PostExecute≫AsyncTask.onPostExecute()"));
  CHECK_THROWS_AS(abstract_message(evt, std::vector<TraceRecord>{ci(3, "AsyncTask", "get")}), Error);
  try {
    abstract_message(evt, {});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EventWithoutCallback);
  }
}

TEST_CASE("rendered signatures parse back") {
  for (const auto& s : {MessageSignature::ci("Button.setEnabled(false)"),
                        MessageSignature::evt("Click≫OnClickListener.onClick()")}) {
    CHECK(parse_signature(to_string(s)) == s);
  }
  CHECK(to_string(MessageSignature::ci("A.b()")) == "ci:A.b()");
  CHECK_FALSE(parse_signature("cb:A.b()"));
  CHECK_FALSE(parse_signature("ci:"));
}

TEST_CASE("alphabets are deduplicated and ordered by kind then text") {
  CHECK(alphabet_of(std::vector<SignatureTrace>{}).empty());

  auto a = alphabet_of(std::vector<SignatureTrace>{asynctask_slice()});
  REQUIRE(a.size() == 3);
  CHECK(a.signatures()[0] == MessageSignature::ci("AsyncTask.<init>()"));
  CHECK(a.signatures()[1] == MessageSignature::ci("AsyncTask.execute()"));
  CHECK(a.signatures()[2] == MessageSignature::evt("PostExecute≫AsyncTask.onPostExecute()"));
  CHECK(a.count(SigKind::ci) == 2);
  CHECK(a.count(SigKind::evt) == 1);

  SignatureTrace other{{SigTransition::init(), SigTransition::ci("AsyncTask.execute()"), SigTransition::evt("A≫B.c()")}};
  auto both = alphabet_of(std::vector<SignatureTrace>{asynctask_slice(), other});
  CHECK(both.size() == 4);
  CHECK(both == alphabet_of(std::vector<SignatureTrace>{other, asynctask_slice()}));
  CHECK(both.index_of(MessageSignature::evt("A≫B.c()")) == 2u);
  CHECK_FALSE(both.contains(MessageSignature::ci("A≫B.c()")));
}

TEST_CASE("alphabet order does not depend on trace order") {
  std::vector<SignatureTrace> traces;
  const char* names[] = {"Z.z()", "A.a()", "M.m()", "B.b()", "Q.q()"};
  for (int i = 0; i < 5; ++i) {
    SignatureTrace t{{SigTransition::init()}};
    t.transitions.push_back(SigTransition::ci(names[i]));
    t.transitions.push_back(SigTransition::evt(std::string("E") + names[(i + 2) % 5]));
    traces.push_back(t);
  }
  const Alphabet expected = alphabet_of(traces);
  CHECK(std::is_sorted(expected.signatures().begin(), expected.signatures().end()));
  std::sort(traces.begin(), traces.end(), [](const auto& x, const auto& y) {
    return to_string(x.transitions[1].signature) < to_string(y.transitions[1].signature);
  });
  do {
    CHECK(alphabet_of(traces) == expected);
  } while (std::next_permutation(traces.begin(), traces.end(), [](const auto& x, const auto& y) {
    return to_string(x.transitions[1].signature) < to_string(y.transitions[1].signature);
  }));
}

TEST_CASE("signature trace files round-trip and validate") {
  const auto t = asynctask_slice();
  const std::string text = render_signature_trace(t);
  CHECK(text ==
        "init\nci AsyncTask.<init>()\nci AsyncTask.execute()\nevt PostExecute≫AsyncTask.onPostExecute()\n");
  std::istringstream in(text);
  CHECK(parse_signature_trace(in) == t);
  CHECK(t.body().size() == 3);

  SignatureTrace no_init{{SigTransition::ci("A.b()")}};
  CHECK_THROWS_AS(validate(no_init), Error);
  SignatureTrace late_init{{SigTransition::init(), SigTransition::init()}};
  CHECK_THROWS_AS(validate(late_init), Error);
  SignatureTrace wrong_kind{{SigTransition::init(), {TransitionKind::evt, MessageSignature::ci("A.b()")}}};
  CHECK_THROWS_AS(validate(wrong_kind), Error);

  std::istringstream bad("init\nfoo A.b()\n");
  CHECK_THROWS_AS(parse_signature_trace(bad), Error);
}

TEST_CASE("primitive arguments render canonically") {
  CHECK(render_primitive_args(std::vector<Argument>{}) == "()");
  CHECK(render_primitive_args(std::vector<Argument>{true, std::int64_t{3}}) == "(true,3)");
  CHECK(render_primitive_args(std::vector<Argument>{ObjectRef{1, "T"}}) == "()");
}
