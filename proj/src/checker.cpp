#include "relpax/checker.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "relpax/json_io.hpp"

namespace relpax {

const char* violation_kind_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::kNonTriviality:
      return "non_triviality";
    case ViolationKind::kAgreement:
      return "agreement";
    case ViolationKind::kWriteOnce:
      return "write_once";
    case ViolationKind::kSingleValuePerRound:
      return "single_value_per_round";
    case ViolationKind::kDecisionSoundness:
      return "decision_soundness";
    case ViolationKind::kRuleOracleMismatch:
      return "rule_oracle_mismatch";
  }
  return "?";
}

namespace {

class ViolationSink {
 public:
  void report(ViolationKind kind, std::string detail, std::uint64_t step) {
    if (seen_.insert(kind).second) {
      violations_.push_back(Violation{kind, std::move(detail), step});
    }
  }

  std::vector<Violation> take() { return std::move(violations_); }

 private:
  std::set<ViolationKind> seen_;
  std::vector<Violation> violations_;
};

void check_outputs_against(const std::map<ProposerId, Value>& outputs,
                           const std::set<Value>& input_values, std::uint64_t step,
                           ViolationSink& sink) {
  std::set<Value> distinct;
  for (const auto& [p, v] : outputs) {
    distinct.insert(v);
    if (input_values.count(v) == 0) {
      sink.report(ViolationKind::kNonTriviality,
                  "proposer " + std::to_string(p) + " output \"" + v +
                      "\" which is no proposer's input",
                  step);
    }
  }
  if (distinct.size() > 1) {
    std::string detail = "proposers output different values:";
    for (const auto& [p, v] : outputs) {
      detail += " p" + std::to_string(p) + "=" + v;
    }
    sink.report(ViolationKind::kAgreement, detail, step);
  }
}

std::set<Value> input_value_set(const std::map<ProposerId, Value>& inputs) {
  std::set<Value> out;
  for (const auto& [p, v] : inputs) {
    out.insert(v);
  }
  return out;
}

/// Ground decision of (round, quorum) if every member holds the same value.
std::optional<Value> ground_decided(const StateTable& ground, Round i, const Quorum& q) {
  const RegisterValue& first = ground.read(q.members().front(), i);
  if (!first.is_val()) {
    return std::nullopt;
  }
  for (AcceptorId a : q.members()) {
    if (ground.read(a, i) != first) {
      return std::nullopt;
    }
  }
  return first.value();
}

/// Rule 4 over a ground table: every value written above a decided round
/// must equal the decided value.
void check_rule4_table(const StateTable& ground, const QuorumConfig& config, Round max_round,
                       std::uint64_t step, ViolationSink& sink) {
  std::vector<Decision> decided = decided_values(ground, config, max_round);
  if (decided.empty()) {
    return;
  }
  std::map<Round, std::set<Value>> values_by_round;
  for (const auto& [cell, rv] : ground.cells()) {
    if (rv.is_val()) {
      values_by_round[cell.round].insert(rv.value());
    }
  }
  for (const Decision& d : decided) {
    for (const auto& [round, values] : values_by_round) {
      if (round <= d.round) {
        continue;
      }
      for (const Value& v : values) {
        if (v != d.value) {
          sink.report(ViolationKind::kRuleOracleMismatch,
                      "rule 4: \"" + v + "\" written to round " + std::to_string(round) +
                          " while round " + std::to_string(d.round) + " decided \"" + d.value +
                          "\"",
                      step);
        }
      }
    }
  }
}

/// Rule 1 over a proposer's reads: the output must be covered by a full
/// quorum of reads of that value in some round.
bool output_backed_by_reads(const StateTable& reads, const QuorumConfig& config, const Value& v) {
  std::optional<Round> max_round = reads.max_written_round();
  if (!max_round) {
    return false;
  }
  for (Round i = 0;; ++i) {
    for (const Quorum& q : config.quorums_for(i)) {
      bool all = true;
      for (AcceptorId a : q.members()) {
        const RegisterValue& rv = reads.read(a, i);
        if (!rv.is_val() || rv.value() != v) {
          all = false;
          break;
        }
      }
      if (all) {
        return true;
      }
    }
    if (i == *max_round) {
      break;
    }
  }
  return false;
}

/// Rule 2: the value must be the writer's input or read from a register of
/// another round (the written round itself only ever echoes this write).
bool value_justified(const StateTable& reads, const Value& input, Round written_round,
                     const Value& v) {
  if (v == input) {
    return true;
  }
  for (const auto& [cell, rv] : reads.cells()) {
    if (cell.round != written_round && rv.is_val() && rv.value() == v) {
      return true;
    }
  }
  return false;
}

ViolationKind classify_anomaly(const std::string& a) {
  if (a.find("contradictory read") != std::string::npos) {
    return ViolationKind::kWriteOnce;
  }
  if (a.find("two distinct values read") != std::string::npos) {
    return ViolationKind::kSingleValuePerRound;
  }
  if (a.find("two quorums decided") != std::string::npos ||
      a.find("P3a with conflicting") != std::string::npos) {
    return ViolationKind::kAgreement;
  }
  return ViolationKind::kDecisionSoundness;
}

}  // namespace

std::vector<Violation> check_safety(const Trace& t, const std::map<ProposerId, Value>& inputs) {
  ViolationSink sink;
  const std::set<Value> input_values = input_value_set(inputs);
  StateTable ground;
  std::map<Round, std::set<Value>> values_by_round;
  for (const TraceRecord& rec : t.records) {
    for (const RegisterWrite& w : rec.writes) {
      if (ground.merge_fact(w.acceptor, w.round, w.content) ==
          StateTable::MergeOutcome::kConflict) {
        sink.report(ViolationKind::kWriteOnce,
                    "register (" + std::to_string(w.acceptor) + ", " + std::to_string(w.round) +
                        ") rewritten",
                    rec.step);
      }
      if (w.content.is_val()) {
        auto& values = values_by_round[w.round];
        values.insert(w.content.value());
        if (values.size() > 1) {
          sink.report(ViolationKind::kSingleValuePerRound,
                      "round " + std::to_string(w.round) + " holds two distinct values",
                      rec.step);
        }
      }
    }
    check_outputs_against(rec.outputs_after, input_values, rec.step, sink);
  }
  return sink.take();
}

std::vector<Violation> oracle_four_rules(const Trace& t,
                                         const std::map<ProposerId, Value>& inputs) {
  ViolationSink sink;
  const QuorumConfig& config = t.scenario.quorums;
  const auto n_proposers = static_cast<std::uint32_t>(t.scenario.proposers.size());
  StateTable ground;
  std::map<Round, std::set<Value>> values_by_round;
  std::vector<StateTable> reads(n_proposers);
  std::map<ProposerId, Value> prev_outputs;

  for (const TraceRecord& rec : t.records) {
    // Reads a proposer gained from this step, straight from the payload.
    if (rec.event.kind == SimEvent::Kind::kDeliver && rec.event_msg) {
      const Message& m = *rec.event_msg;
      if (m.kind == MsgKind::kP1b && m.to < n_proposers) {
        for (const auto& [round, rv] : m.written) {
          reads[m.to].merge_fact(m.from, round, rv);
        }
      } else if (m.kind == MsgKind::kP2b && m.to < n_proposers) {
        reads[m.to].merge_fact(m.from, m.round, m.content);
      }
    }
    // Register writes performed by this step.
    for (const RegisterWrite& w : rec.writes) {
      ground.merge_fact(w.acceptor, w.round, w.content);
      if (!w.content.is_val()) {
        continue;  // nil writes are unrestricted
      }
      const Value& v = w.content.value();
      values_by_round[w.round].insert(v);
      ProposerId owner = w.round % n_proposers;
      ProposerId writer = owner;
      if (rec.event_msg && rec.event_msg->kind == MsgKind::kP2a) {
        writer = rec.event_msg->from;
        if (writer != owner) {
          sink.report(ViolationKind::kRuleOracleMismatch,
                      "rule 3: round " + std::to_string(w.round) + " written by proposer " +
                          std::to_string(writer) + " which does not own it",
                      rec.step);
        }
      }
      if (values_by_round[w.round].size() > 1) {
        sink.report(ViolationKind::kRuleOracleMismatch,
                    "rule 3: round " + std::to_string(w.round) + " holds two distinct values",
                    rec.step);
      }
      if (writer < n_proposers &&
          !value_justified(reads[writer], inputs.at(writer), w.round, v)) {
        sink.report(ViolationKind::kRuleOracleMismatch,
                    "rule 2: \"" + v + "\" was neither proposer " + std::to_string(writer) +
                        "'s input nor read from a register",
                    rec.step);
      }
    }
    if (!rec.writes.empty()) {
      if (auto max_round = ground.max_written_round()) {
        check_rule4_table(ground, config, *max_round, rec.step, sink);
      }
    }
    // Outputs appearing at this step.
    for (const auto& [p, v] : rec.outputs_after) {
      if (prev_outputs.count(p) != 0) {
        continue;
      }
      if (p >= n_proposers || !output_backed_by_reads(reads[p], config, v)) {
        sink.report(ViolationKind::kRuleOracleMismatch,
                    "rule 1: proposer " + std::to_string(p) + " output \"" + v +
                        "\" without reading it from a full quorum",
                    rec.step);
      }
    }
    prev_outputs = rec.outputs_after;
  }
  return sink.take();
}

std::vector<Violation> check_world_state(const World& w, const TraceRecord* rec,
                                         bool check_decisions) {
  ViolationSink sink;
  const std::uint64_t step = rec ? rec->step : 0;
  const QuorumConfig& config = w.config();
  const auto n_proposers = static_cast<std::uint32_t>(w.proposers().size());

  check_outputs_against(w.outputs(), input_value_set(w.inputs()), step, sink);

  for (const std::string& breach : w.ground_breaches()) {
    sink.report(ViolationKind::kWriteOnce, breach, step);
  }

  const StateTable& ground = w.ground_truth();
  std::map<Round, std::set<Value>> values_by_round;
  for (const auto& [cell, rv] : ground.cells()) {
    if (rv.is_val()) {
      values_by_round[cell.round].insert(rv.value());
    }
  }
  for (const auto& [round, values] : values_by_round) {
    if (values.size() > 1) {
      sink.report(ViolationKind::kSingleValuePerRound,
                  "round " + std::to_string(round) + " holds two distinct values", step);
      sink.report(ViolationKind::kRuleOracleMismatch,
                  "rule 3: round " + std::to_string(round) + " holds two distinct values", step);
    }
  }

  check_rule4_table(ground, config, w.max_written_round(), step, sink);

  // Rule 3, ownership facet: only the owner's P2a may write a value.
  if (rec && rec->event_msg && rec->event_msg->kind == MsgKind::kP2a) {
    for (const RegisterWrite& wr : rec->writes) {
      if (wr.content.is_val() && wr.round % n_proposers != rec->event_msg->from) {
        sink.report(ViolationKind::kRuleOracleMismatch,
                    "rule 3: round " + std::to_string(wr.round) + " written by proposer " +
                        std::to_string(rec->event_msg->from) + " which does not own it",
                    step);
      }
    }
  }

  // Rule 1: every output is backed by delivered reads.
  for (const auto& [p, v] : w.outputs()) {
    if (!output_backed_by_reads(w.delivered_reads(p), config, v)) {
      sink.report(ViolationKind::kRuleOracleMismatch,
                  "rule 1: proposer " + std::to_string(p) + " output \"" + v +
                      "\" without reading it from a full quorum",
                  step);
    }
  }

  // Rule 2: every written value is its owner's input or was read by it.
  for (const auto& [round, values] : values_by_round) {
    ProposerId owner = round % n_proposers;
    for (const Value& v : values) {
      if (!value_justified(w.delivered_reads(owner), w.inputs().at(owner), round, v)) {
        sink.report(ViolationKind::kRuleOracleMismatch,
                    "rule 2: \"" + v + "\" in round " + std::to_string(round) +
                        " was neither its owner's input nor read by it",
                    step);
      }
    }
  }

  if (check_decisions) {
    for (const Proposer& p : w.proposers()) {
      if (!p.state_copy().subset_of(ground)) {
        sink.report(ViolationKind::kDecisionSoundness,
                    "proposer " + std::to_string(p.id()) +
                        " has a state copy entry missing from the ground truth",
                    step);
      }
      for (const auto& [key, st] : p.decision_table().entries()) {
        const auto& [round, quorum] = key;
        std::optional<Value> decided = ground_decided(ground, round, quorum);
        switch (st.kind()) {
          case DecisionState::Kind::kDecided:
            if (!decided || *decided != st.value()) {
              sink.report(ViolationKind::kDecisionSoundness,
                          "proposer " + std::to_string(p.id()) + " claims Decided " + st.value() +
                              " at round " + std::to_string(round) +
                              " but the ground truth disagrees",
                          step);
            }
            break;
          case DecisionState::Kind::kMaybe:
            if (decided && *decided != st.value()) {
              sink.report(ViolationKind::kDecisionSoundness,
                          "proposer " + std::to_string(p.id()) + " claims Maybe " + st.value() +
                              " at round " + std::to_string(round) + " but \"" + *decided +
                              "\" was decided there",
                          step);
            }
            break;
          case DecisionState::Kind::kNone:
            if (decided) {
              sink.report(ViolationKind::kDecisionSoundness,
                          "proposer " + std::to_string(p.id()) + " claims None at round " +
                              std::to_string(round) + " but \"" + *decided + "\" was decided there",
                          step);
            }
            break;
          case DecisionState::Kind::kAny:
            break;
        }
      }
    }
  }

  for (const Proposer& p : w.proposers()) {
    for (const std::string& a : p.anomalies()) {
      sink.report(classify_anomaly(a), "proposer " + std::to_string(p.id()) + " reported: " + a,
                  step);
    }
  }
  for (const Acceptor& a : w.acceptors()) {
    for (const std::string& s : a.anomalies()) {
      sink.report(classify_anomaly(s), "acceptor " + std::to_string(a.id()) + " reported: " + s,
                  step);
    }
  }
  return sink.take();
}

namespace {

struct Digest {
  std::uint64_t a = 0;
  std::uint64_t b = 0;

  friend bool operator==(const Digest&, const Digest&) = default;
};

struct DigestHash {
  std::size_t operator()(const Digest& d) const {
    return static_cast<std::size_t>(d.a ^ (d.b * 0x9e3779b97f4a7c15ULL));
  }
};

Digest digest_of(const std::string& s) {
  std::uint64_t h1 = 14695981039346656037ULL;
  std::uint64_t h2 = 0x2545f4914f6cdd1dULL;
  for (unsigned char c : s) {
    h1 = (h1 ^ c) * 1099511628211ULL;
    h2 = (h2 ^ (c * 0x9e3779b97f4a7c15ULL + 1)) * 0xff51afd7ed558ccdULL;
  }
  return Digest{h1, h2};
}

std::optional<Message> lookup_message(const World& w, const SimEvent& e) {
  if (e.kind != SimEvent::Kind::kDeliver && e.kind != SimEvent::Kind::kDrop &&
      e.kind != SimEvent::Kind::kDuplicate) {
    return std::nullopt;
  }
  for (const InFlightMessage& m : w.in_flight()) {
    if (m.id == e.msg_id) {
      return m.msg;
    }
  }
  return std::nullopt;
}

}  // namespace

ExplorationReport explore(const Scenario& s) {
  ExplorationReport report;
  const ExploreOptions& opts = s.explore;
  std::unordered_set<Digest, DigestHash> visited;
  std::set<ViolationKind> reported_kinds;
  std::vector<TraceRecord> path;

  struct Frame {
    World world;
    std::vector<SimEvent> events;
    std::size_t next = 0;
  };

  auto record_violations = [&](const World& w, const TraceRecord* rec) {
    for (Violation& v : check_world_state(w, rec, opts.check_decisions)) {
      if (reported_kinds.insert(v.kind).second) {
        Trace counterexample(s);
        counterexample.stop_reason = "violation";
        counterexample.records = path;
        counterexample.final_world = world_to_json(w);
        report.violations.emplace_back(std::move(v), std::move(counterexample));
      }
    }
  };

  World initial = make_world(s);
  visited.insert(digest_of(initial.fingerprint(opts.ground_truth_dedup)));
  report.states_visited = 1;
  record_violations(initial, nullptr);

  std::vector<Frame> stack;
  std::vector<SimEvent> initial_events;
  if (opts.depth > 0) {
    initial_events = initial.enabled_events(s.sim);
  }
  stack.push_back(Frame{std::move(initial), std::move(initial_events), 0});

  while (!stack.empty()) {
    Frame& frame = stack.back();
    if (frame.next >= frame.events.size()) {
      stack.pop_back();
      if (!path.empty()) {
        path.pop_back();
      }
      continue;
    }
    SimEvent event = frame.events[frame.next++];
    TraceRecord rec;
    rec.step = frame.world.step_count();
    rec.event = event;
    rec.event_msg = lookup_message(frame.world, event);
    World next = frame.world;
    World::StepResult result = next.apply_event(event);
    rec.emitted = std::move(result.emitted);
    rec.writes = std::move(result.writes);
    rec.outputs_after = next.outputs();

    if (!visited.insert(digest_of(next.fingerprint(opts.ground_truth_dedup))).second) {
      ++report.revisits;
      continue;
    }
    ++report.states_visited;
    if (report.states_visited > opts.state_cap) {
      report.complete = false;
      break;
    }
    path.push_back(std::move(rec));
    report.max_depth = std::max<std::uint64_t>(report.max_depth, path.size());
    record_violations(next, &path.back());
    std::vector<SimEvent> child_events;
    if (path.size() < opts.depth) {
      child_events = next.enabled_events(s.sim);
    }
    stack.push_back(Frame{std::move(next), std::move(child_events), 0});
  }
  return report;
}

}  // namespace relpax
