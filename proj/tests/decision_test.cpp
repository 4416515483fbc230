#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "relpax/decision.hpp"
#include "test_helpers.hpp"

using namespace relpax;
using namespace relpax::testing;

namespace {

struct Observation {
  AcceptorId acceptor;
  Round round;
  RegisterValue content;
};

// Merges the fact first, then feeds it to the table, the way a proposer does.
void feed(DecisionTable& dt, StateTable& reads, const QuorumConfig& config, AcceptorId a, Round i,
          const RegisterValue& rv) {
  reads.merge_fact(a, i, rv);
  dt.observe(config, reads, a, i, rv);
}

DecisionTable replay_observations(const QuorumConfig& config,
                                  const std::vector<Observation>& obs) {
  DecisionTable dt;
  StateTable reads;
  for (const Observation& o : obs) {
    feed(dt, reads, config, o.acceptor, o.round, o.content);
  }
  return dt;
}

}  // namespace

TEST_CASE("observing a value marks every covered quorum Maybe") {
  QuorumConfig config = majority3();
  DecisionTable dt;
  StateTable reads;
  feed(dt, reads, config, 0, 0, RegisterValue::val("A"));
  for (const Quorum& q : config.quorums_for(0)) {
    CHECK(dt.state(0, q) == DecisionState::maybe("A"));
  }
  CHECK(dt.max_seen() == Round{0});
  CHECK(dt.anomalies().empty());
}

TEST_CASE("a full quorum of reads promotes to Decided") {
  QuorumConfig config = majority3();
  DecisionTable dt;
  StateTable reads;
  feed(dt, reads, config, 0, 0, RegisterValue::val("A"));
  feed(dt, reads, config, 1, 0, RegisterValue::val("A"));
  CHECK(dt.state(0, Quorum{0, 1}) == DecisionState::decided("A"));
  CHECK(dt.state(0, Quorum{0, 2}) == DecisionState::maybe("A"));
  CHECK(dt.state(0, Quorum{1, 2}) == DecisionState::maybe("A"));
}

TEST_CASE("a nil read kills exactly the quorums containing the acceptor") {
  QuorumConfig config = majority3();
  DecisionTable dt;
  StateTable reads;
  feed(dt, reads, config, 2, 0, RegisterValue::nil());
  CHECK(dt.state(0, Quorum{0, 2}) == DecisionState::none());
  CHECK(dt.state(0, Quorum{1, 2}) == DecisionState::none());
  CHECK(dt.state(0, Quorum{0, 1}) == DecisionState::any());
}

TEST_CASE("a later conflicting value turns Maybe into None") {
  QuorumConfig config = majority3();
  DecisionTable dt;
  StateTable reads;
  feed(dt, reads, config, 0, 0, RegisterValue::val("A"));
  feed(dt, reads, config, 0, 1, RegisterValue::val("B"));
  for (const Quorum& q : config.quorums_for(0)) {
    CHECK(dt.state(0, q) == DecisionState::none());
  }
  for (const Quorum& q : config.quorums_for(1)) {
    CHECK(dt.state(1, q) == DecisionState::maybe("B"));
  }
}

TEST_CASE("observations must be written cells") {
  QuorumConfig config = majority3();
  DecisionTable dt;
  StateTable reads;
  CHECK_THROWS_AS(dt.observe(config, reads, 0, 0, RegisterValue::unwritten()),
                  UnwrittenObservationError);
  // The fact must be merged before it is observed.
  CHECK_THROWS_AS(dt.observe(config, reads, 0, 0, RegisterValue::val("A")), Error);
}

TEST_CASE("two values read in one round are reported, not masked") {
  QuorumConfig config = majority3();
  DecisionTable dt;
  StateTable reads;
  feed(dt, reads, config, 0, 0, RegisterValue::val("A"));
  feed(dt, reads, config, 1, 0, RegisterValue::val("B"));
  REQUIRE_FALSE(dt.anomalies().empty());
  CHECK(dt.anomalies().front().find("two distinct values") != std::string::npos);
}

TEST_CASE("phase one status") {
  QuorumConfig config = majority3();

  SUBCASE("round 0 is vacuously ready") {
    DecisionTable dt;
    CHECK(dt.phase_one_status(config, 0) == PhaseOneStatus::ready_free());
  }
  SUBCASE("all Maybe A forces A") {
    DecisionTable dt;
    StateTable reads;
    feed(dt, reads, config, 0, 0, RegisterValue::val("A"));
    CHECK(dt.phase_one_status(config, 1) == PhaseOneStatus::ready_forced("A"));
  }
  SUBCASE("an untouched table is pending for round 1") {
    DecisionTable dt;
    CHECK(dt.phase_one_status(config, 1) == PhaseOneStatus::pending());
  }
  SUBCASE("nil on two acceptors blanks every majority of round 0") {
    DecisionTable dt;
    StateTable reads;
    feed(dt, reads, config, 0, 0, RegisterValue::nil());
    CHECK(dt.phase_one_status(config, 1) == PhaseOneStatus::pending());
    feed(dt, reads, config, 1, 0, RegisterValue::nil());
    CHECK(dt.phase_one_status(config, 1) == PhaseOneStatus::ready_free());
  }
  SUBCASE("a Decided quorum forces the value like Maybe does") {
    DecisionTable dt;
    StateTable reads;
    feed(dt, reads, config, 0, 0, RegisterValue::val("A"));
    feed(dt, reads, config, 1, 0, RegisterValue::val("A"));
    REQUIRE(dt.state(0, Quorum{0, 1}) == DecisionState::decided("A"));
    CHECK(dt.phase_one_status(config, 1) == PhaseOneStatus::ready_forced("A"));
  }
}

TEST_CASE("decided_value") {
  QuorumConfig config = majority3();

  SUBCASE("fresh table has no decision") {
    CHECK_FALSE(DecisionTable().decided_value().has_value());
  }
  SUBCASE("round 0 decision") {
    DecisionTable dt;
    StateTable reads;
    feed(dt, reads, config, 0, 0, RegisterValue::val("A"));
    feed(dt, reads, config, 1, 0, RegisterValue::val("A"));
    CHECK(dt.decided_value() == Value("A"));
  }
  SUBCASE("round 1 decision after phase-one knowledge") {
    DecisionTable dt;
    StateTable reads;
    feed(dt, reads, config, 0, 0, RegisterValue::val("A"));
    feed(dt, reads, config, 0, 1, RegisterValue::val("A"));
    CHECK_FALSE(dt.decided_value().has_value());
    feed(dt, reads, config, 1, 1, RegisterValue::val("A"));
    CHECK(dt.decided_value() == Value("A"));
    CHECK(dt.state(1, Quorum{0, 1}) == DecisionState::decided("A"));
  }
}

TEST_CASE("retiring an unused round") {
  QuorumConfig config = majority3();

  SUBCASE("every quorum of the round becomes None") {
    DecisionTable dt;
    dt.mark_unused_round(config, 1);
    for (const Quorum& q : config.quorums_for(1)) {
      CHECK(dt.state(1, q) == DecisionState::none());
    }
    CHECK(dt.state(0, Quorum{0, 1}) == DecisionState::any());
  }
  SUBCASE("idempotent") {
    DecisionTable dt;
    dt.mark_unused_round(config, 1);
    DecisionTable once = dt;
    dt.mark_unused_round(config, 1);
    CHECK(dt == once);
  }
  SUBCASE("later values do not resurrect a retired round") {
    DecisionTable dt;
    StateTable reads;
    dt.mark_unused_round(config, 1);
    feed(dt, reads, config, 0, 2, RegisterValue::val("B"));
    for (const Quorum& q : config.quorums_for(1)) {
      CHECK(dt.state(1, q) == DecisionState::none());
    }
  }
  SUBCASE("a Decided quorum in the round makes retirement impossible") {
    DecisionTable dt;
    StateTable reads;
    feed(dt, reads, config, 0, 1, RegisterValue::val("A"));
    feed(dt, reads, config, 1, 1, RegisterValue::val("A"));
    CHECK_THROWS_AS(dt.mark_unused_round(config, 1), Error);
  }
}

TEST_CASE("terminal states absorb later observations") {
  QuorumConfig config = majority3();
  DecisionTable dt;
  StateTable reads;
  feed(dt, reads, config, 2, 0, RegisterValue::nil());
  REQUIRE(dt.state(0, Quorum{1, 2}) == DecisionState::none());
  feed(dt, reads, config, 0, 0, RegisterValue::val("A"));
  feed(dt, reads, config, 1, 0, RegisterValue::val("A"));
  // {0,1} decides; the nil-blocked quorums stay None.
  CHECK(dt.state(0, Quorum{0, 1}) == DecisionState::decided("A"));
  CHECK(dt.state(0, Quorum{1, 2}) == DecisionState::none());
  CHECK(dt.state(0, Quorum{0, 2}) == DecisionState::none());
}

TEST_CASE("observation order does not matter") {
  std::mt19937_64 rng(7);
  QuorumConfig config = majority3();
  const std::vector<Value> inputs{"A", "B"};

  for (int trial = 0; trial < 200; ++trial) {
    StateTable ground = random_legal_table(rng, config, inputs, 2, 12);
    if (ground.empty()) {
      continue;
    }
    // Sample a multiset of reads of the ground truth, duplicates included.
    std::vector<Cell> cells;
    for (const auto& [cell, rv] : ground.cells()) {
      cells.push_back(cell);
    }
    std::vector<Observation> obs;
    const std::size_t count = 1 + rng() % 6;
    for (std::size_t k = 0; k < count; ++k) {
      const Cell& c = cells[rng() % cells.size()];
      obs.push_back(Observation{c.acceptor, c.round, ground.read(c.acceptor, c.round)});
    }

    DecisionTable reference = replay_observations(config, obs);
    CHECK(reference.anomalies().empty());

    std::vector<std::size_t> order(obs.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      order[k] = k;
    }
    std::sort(order.begin(), order.end());
    int permutations = 0;
    do {
      std::vector<Observation> permuted;
      for (std::size_t idx : order) {
        permuted.push_back(obs[idx]);
      }
      CHECK(replay_observations(config, permuted) == reference);
    } while (std::next_permutation(order.begin(), order.end()) && ++permutations < 120);

    // At most one distinct value may ever appear as a Maybe/Decided state.
    std::set<Value> pinned;
    for (const auto& [key, st] : reference.entries()) {
      if (st.is_maybe() || st.is_decided()) {
        pinned.insert(st.value());
      }
    }
    CHECK(pinned.size() <= 1);
  }
}

TEST_CASE("every transition follows a legal edge") {
  // Replay random legal observation sequences and watch each entry: the only
  // moves are Any->Maybe/Decided/None, Maybe->Decided (same value), and
  // Maybe->None.
  std::mt19937_64 rng(11);
  QuorumConfig config = majority3();
  const std::vector<Value> inputs{"A", "B"};

  auto legal_edge = [](const DecisionState& from, const DecisionState& to) {
    if (from == to) {
      return true;
    }
    if (from.is_any()) {
      return !to.is_any();
    }
    if (from.is_maybe()) {
      if (to.is_decided()) {
        return from.value() == to.value();
      }
      return to.is_none();
    }
    return false;  // terminals never move
  };

  for (int trial = 0; trial < 100; ++trial) {
    StateTable ground = random_legal_table(rng, config, inputs, 2, 14);
    DecisionTable dt;
    StateTable reads;
    DecisionTable before = dt;
    for (const auto& [cell, rv] : ground.cells()) {
      feed(dt, reads, config, cell.acceptor, cell.round, rv);
      for (Round i = 0; i <= 2; ++i) {
        for (const Quorum& q : config.quorums_for(i)) {
          CHECK(legal_edge(before.state(i, q), dt.state(i, q)));
        }
      }
      before = dt;
    }
    CHECK(dt.anomalies().empty());
  }
}
