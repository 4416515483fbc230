#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "relpax/core.hpp"
#include "test_helpers.hpp"

using namespace relpax;
using namespace relpax::testing;

TEST_CASE("register value lifecycle") {
  RegisterValue rv;
  CHECK(rv.is_unwritten());
  CHECK(RegisterValue::nil().is_nil());
  CHECK(RegisterValue::val("A").is_val());
  CHECK(RegisterValue::val("A").value() == "A");
  CHECK(RegisterValue::val("A") != RegisterValue::val("B"));
  CHECK(RegisterValue::nil() != RegisterValue::val("A"));
  CHECK_THROWS_AS(RegisterValue::nil().value(), Error);
}

TEST_CASE("state table write-once") {
  StateTable t;
  CHECK(t.write(0, 0, RegisterValue::val("A")));
  CHECK(t.read(0, 0) == RegisterValue::val("A"));

  // A second write to the same cell is refused and changes nothing.
  CHECK_FALSE(t.write(0, 0, RegisterValue::val("B")));
  CHECK(t.read(0, 0) == RegisterValue::val("A"));

  CHECK(t.write(1, 0, RegisterValue::nil()));
  CHECK(t.read(1, 0).is_nil());

  CHECK(t.read(2, 7).is_unwritten());
  CHECK_THROWS_AS(t.write(2, 0, RegisterValue::unwritten()), Error);
}

TEST_CASE("state table merge outcomes") {
  StateTable t;
  CHECK(t.merge_fact(0, 1, RegisterValue::val("A")) == StateTable::MergeOutcome::kNew);
  CHECK(t.merge_fact(0, 1, RegisterValue::val("A")) == StateTable::MergeOutcome::kDuplicate);
  CHECK(t.merge_fact(0, 1, RegisterValue::nil()) == StateTable::MergeOutcome::kConflict);
  CHECK(t.read(0, 1) == RegisterValue::val("A"));  // first write wins

  StateTable bigger = t;
  bigger.write(1, 1, RegisterValue::nil());
  CHECK(t.subset_of(bigger));
  CHECK_FALSE(bigger.subset_of(t));
}

TEST_CASE("quorum normalization") {
  Quorum q{2, 0, 2};
  CHECK(q.members() == std::vector<AcceptorId>{0, 2});
  CHECK(q.contains(0));
  CHECK_FALSE(q.contains(1));
  CHECK_THROWS_AS(Quorum{std::vector<AcceptorId>{}}, Error);
}

TEST_CASE("quorums per round follow the first matching rule") {
  std::vector<Quorum> majorities{Quorum{0, 1}, Quorum{0, 2}, Quorum{1, 2}};

  SUBCASE("uniform majorities") {
    QuorumConfig c = majority3();
    CHECK(c.quorums_for(5) == majorities);
    CHECK(c.quorums_for(0) == majorities);
  }
  SUBCASE("round 0 uses all acceptors") {
    QuorumConfig c = mixed3();
    CHECK(c.quorums_for(0) == std::vector<Quorum>{Quorum{0, 1, 2}});
    CHECK(c.quorums_for(1) == majorities);
  }
  SUBCASE("disjoint even/odd quorums") {
    QuorumConfig c = disjoint4();
    CHECK(c.quorums_for(3) == std::vector<Quorum>{Quorum{2, 3}});
    CHECK(c.quorums_for(2) == std::vector<Quorum>{Quorum{0, 1}});
  }
  SUBCASE("a round without a rule is an error") {
    QuorumConfig c(2, {QuorumRule{RoundMatcher::exact({0, 1}), {Quorum{0}}}});
    CHECK_NOTHROW(c.quorums_for(1));
    CHECK_THROWS_AS(c.quorums_for(2), NoRuleMatchesError);
  }
  SUBCASE("config validation") {
    CHECK_THROWS_AS(QuorumConfig(0, {}), Error);
    CHECK_THROWS_AS(QuorumConfig(3, {}), Error);
    CHECK_THROWS_AS(QuorumConfig(3, {QuorumRule{RoundMatcher::from(0), {}}}), Error);
    CHECK_THROWS_AS(QuorumConfig(2, {QuorumRule{RoundMatcher::from(0), {Quorum{0, 5}}}}), Error);
    CHECK_THROWS_AS(RoundMatcher::mod(0, 0), Error);
    CHECK_THROWS_AS(RoundMatcher::mod(2, 2), Error);
  }
}

namespace {

// State of Fig. 2a: r0 = (nil, nil, B), r1 all nil, r2 = (-, A, A).
StateTable fig2a_table() {
  StateTable t;
  t.write(0, 0, RegisterValue::nil());
  t.write(1, 0, RegisterValue::nil());
  t.write(2, 0, RegisterValue::val("B"));
  t.write(0, 1, RegisterValue::nil());
  t.write(1, 1, RegisterValue::nil());
  t.write(2, 1, RegisterValue::nil());
  t.write(1, 2, RegisterValue::val("A"));
  t.write(2, 2, RegisterValue::val("A"));
  return t;
}

// State of Fig. 2b: r0 = (nil, A, A), r1 = (A, A, -).
StateTable fig2b_table() {
  StateTable t;
  t.write(0, 0, RegisterValue::nil());
  t.write(1, 0, RegisterValue::val("A"));
  t.write(2, 0, RegisterValue::val("A"));
  t.write(0, 1, RegisterValue::val("A"));
  t.write(1, 1, RegisterValue::val("A"));
  return t;
}

}  // namespace

TEST_CASE("reading registers") {
  StateTable t = fig2a_table();
  CHECK(t.read(2, 0) == RegisterValue::val("B"));
  CHECK(t.read(0, 2).is_unwritten());
  CHECK(StateTable().read(1, 1).is_unwritten());
}

TEST_CASE("decided values") {
  QuorumConfig majorities = majority3();

  SUBCASE("no decision in rounds 0 and 1, A decided in round 2") {
    std::vector<Decision> d = decided_values(fig2a_table(), majorities, 2);
    REQUIRE(d.size() == 1);
    CHECK(d[0] == Decision{2, Quorum{1, 2}, "A"});
  }
  SUBCASE("A decided in rounds 0 and 1") {
    std::vector<Decision> d = decided_values(fig2b_table(), majorities, 1);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == Decision{0, Quorum{1, 2}, "A"});
    CHECK(d[1] == Decision{1, Quorum{0, 1}, "A"});
  }
  SUBCASE("empty table decides nothing") {
    CHECK(decided_values(StateTable(), majorities, 3).empty());
  }
}

TEST_CASE("decided_values is monotone under random legal writes") {
  std::mt19937_64 rng(42);
  QuorumConfig config = majority3();
  for (int trial = 0; trial < 50; ++trial) {
    StateTable t;
    std::vector<Decision> previous;
    for (int step = 0; step < 30; ++step) {
      AcceptorId a = rng() % 3;
      Round i = rng() % 3;
      // Per-round single value keeps the writes legal; nils are always fine.
      RegisterValue rv =
          (rng() % 2) ? RegisterValue::nil() : RegisterValue::val(i == 0 ? "A" : "B");
      t.write(a, i, rv);
      std::vector<Decision> now = decided_values(t, config, 2);
      for (const Decision& d : previous) {
        CHECK(std::find(now.begin(), now.end(), d) != now.end());
      }
      previous = std::move(now);
    }
  }
}
