#pragma once

#include <memory>
#include <vector>

#include "relpax/core.hpp"
#include "relpax/scenario.hpp"

namespace relpax::testing {

/// Majority quorums over 3 acceptors for every round.
inline QuorumConfig majority3() {
  std::vector<Quorum> majorities{Quorum{0, 1}, Quorum{0, 2}, Quorum{1, 2}};
  return QuorumConfig(3, {QuorumRule{RoundMatcher::from(0), majorities}});
}

/// Round 0 takes all three acceptors, later rounds majorities.
inline QuorumConfig mixed3() {
  std::vector<Quorum> majorities{Quorum{0, 1}, Quorum{0, 2}, Quorum{1, 2}};
  return QuorumConfig(3, {QuorumRule{RoundMatcher::exact({0}), {Quorum{0, 1, 2}}},
                          QuorumRule{RoundMatcher::from(1), majorities}});
}

/// Disjoint quorums over 4 acceptors: even rounds {a0,a1}, odd {a2,a3}.
inline QuorumConfig disjoint4() {
  return QuorumConfig(4, {QuorumRule{RoundMatcher::mod(2, 0), {Quorum{0, 1}}},
                          QuorumRule{RoundMatcher::mod(2, 1), {Quorum{2, 3}}}});
}

/// One acceptor whose sole quorum is itself.
inline QuorumConfig single1() {
  return QuorumConfig(1, {QuorumRule{RoundMatcher::from(0), {Quorum{0}}}});
}

inline Scenario basic_scenario(QuorumConfig config, std::vector<Value> inputs) {
  Scenario s(std::move(config));
  s.n_acceptors = s.quorums.acceptor_count();
  for (ProposerId p = 0; p < inputs.size(); ++p) {
    s.proposers.push_back(ProposerSpec{p, inputs[p]});
  }
  return s;
}

/// Drives the abstract register model directly: nil writes are unrestricted,
/// each round gets at most one value (chosen by its round-robin owner), and a
/// value is only written while no earlier round can still decide a different
/// one. Tables produced this way are exactly the worlds a rule-respecting
/// run can reach, so reads taken from them must commute.
template <typename Rng>
StateTable random_legal_table(Rng& rng, const QuorumConfig& config,
                              const std::vector<Value>& inputs, Round max_round, int steps) {
  StateTable table;
  std::map<Round, Value> round_value;
  const auto n_proposers = static_cast<std::uint32_t>(inputs.size());

  // Could any value other than v still be decided below this round? A round
  // already pinned to v can only decide v. Any other round blocks a quorum
  // only through a nil on one of its members: the remaining cells are
  // unwritten or hold that round's single value, either of which can still
  // complete against v.
  auto other_value_decidable = [&](Round below, const Value& v) {
    for (Round j = 0; j < below; ++j) {
      auto it = round_value.find(j);
      if (it != round_value.end() && it->second == v) {
        continue;
      }
      for (const Quorum& q : config.quorums_for(j)) {
        bool blocked = false;
        for (AcceptorId a : q.members()) {
          if (table.read(a, j).is_nil()) {
            blocked = true;
            break;
          }
        }
        if (!blocked) {
          return true;
        }
      }
    }
    return false;
  };

  for (int s = 0; s < steps; ++s) {
    AcceptorId a = static_cast<AcceptorId>(rng() % config.acceptor_count());
    Round i = static_cast<Round>(rng() % (max_round + 1));
    if (!table.read(a, i).is_unwritten()) {
      continue;
    }
    if (rng() % 2 == 0) {
      table.write(a, i, RegisterValue::nil());
      continue;
    }
    Value v;
    if (auto it = round_value.find(i); it != round_value.end()) {
      v = it->second;
    } else {
      v = inputs[i % n_proposers];
    }
    if (other_value_decidable(i, v)) {
      continue;  // rule 4 forbids this write for now
    }
    table.write(a, i, RegisterValue::val(v));
    round_value.emplace(i, v);
  }
  return table;
}

}  // namespace relpax::testing
