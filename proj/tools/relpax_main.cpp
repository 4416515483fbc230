// Command-line front end: run seeded or scripted simulations, explore the
// bounded interleaving space, and replay recorded traces.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "relpax/checker.hpp"
#include "relpax/json_io.hpp"
#include "relpax/scenario.hpp"
#include "relpax/trace.hpp"

namespace {

using namespace relpax;

constexpr int kExitClean = 0;
constexpr int kExitViolations = 1;
constexpr int kExitUsage = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> max_steps;
  std::optional<std::string> drops;
  std::optional<std::string> duplicates;
  std::optional<std::string> crashes;
  std::optional<std::string> mutant;
  std::optional<std::uint64_t> depth;
  std::optional<std::uint64_t> state_cap;
  std::optional<std::string> check_decisions;
};

void apply_overrides(Scenario& s, const Overrides& o) {
  if (o.seed) s.sim.seed = *o.seed;
  if (o.max_steps) s.sim.max_steps = *o.max_steps;
  if (o.drops) s.sim.allow_drops = *o.drops == "on";
  if (o.duplicates) s.sim.allow_duplicates = *o.duplicates == "on";
  if (o.crashes) s.sim.allow_crashes = *o.crashes == "on";
  if (o.mutant) s.mutant = mutant_from_name(*o.mutant);
  if (o.depth) s.explore.depth = *o.depth;
  if (o.state_cap) s.explore.state_cap = *o.state_cap;
  if (o.check_decisions) s.explore.check_decisions = *o.check_decisions == "on";
}

std::map<ProposerId, Value> scenario_inputs(const Scenario& s) {
  std::map<ProposerId, Value> inputs;
  for (const ProposerSpec& p : s.proposers) {
    inputs.emplace(p.id, p.input);
  }
  return inputs;
}

void print_violations(const std::vector<Violation>& violations) {
  if (violations.empty()) {
    std::cout << "violations: none\n";
    return;
  }
  for (const Violation& v : violations) {
    std::cout << "violation: " << violation_kind_name(v.kind) << " at step " << v.step << ": "
              << v.detail << "\n";
  }
}

/// Re-steps the trace on a fresh world, collecting each proposer's table
/// snapshot at start and after every message it receives.
nlohmann::json collect_snapshots(const Trace& t) {
  World w = make_world(t.scenario);
  nlohmann::json snapshots = nlohmann::json::array();
  for (const Proposer& p : w.proposers()) {
    snapshots.push_back(proposer_snapshot(p, w.config(), nlohmann::json(nullptr)));
  }
  for (const TraceRecord& rec : t.records) {
    w.apply_event(rec.event);
    if (rec.event.kind == SimEvent::Kind::kDeliver && rec.event_msg &&
        (rec.event_msg->kind == MsgKind::kP1b || rec.event_msg->kind == MsgKind::kP2b)) {
      const Proposer& p = w.proposers().at(rec.event_msg->to);
      snapshots.push_back(proposer_snapshot(p, w.config(), nlohmann::json(rec.step)));
    }
  }
  return snapshots;
}

int report_run(const Trace& trace, const std::string& trace_path) {
  const std::map<ProposerId, Value> inputs = scenario_inputs(trace.scenario);
  std::vector<Violation> violations = check_safety(trace, inputs);
  for (Violation& v : oracle_four_rules(trace, inputs)) {
    violations.push_back(std::move(v));
  }

  World w = replay_trace(trace);
  std::cout << "steps: " << trace.records.size() << " (" << trace.stop_reason << ")\n";
  std::cout << "outputs:";
  if (w.outputs().empty()) {
    std::cout << " (none)";
  }
  for (const auto& [p, v] : w.outputs()) {
    std::cout << " p" << p << "=" << v;
  }
  std::cout << "\n";
  std::cout << "decided:";
  std::vector<Decision> decided = decided_values(w.ground_truth(), w.config(),
                                                 w.max_written_round());
  if (decided.empty()) {
    std::cout << " (none)";
  }
  for (const Decision& d : decided) {
    std::cout << " round=" << d.round << " quorum=[";
    for (std::size_t i = 0; i < d.quorum.members().size(); ++i) {
      std::cout << (i ? "," : "") << d.quorum.members()[i];
    }
    std::cout << "] value=" << d.value << ";";
  }
  std::cout << "\n";
  if (!trace_path.empty()) {
    std::cout << "trace: " << trace_path << "\n";
  }
  print_violations(violations);
  return violations.empty() ? kExitClean : kExitViolations;
}

int cmd_run(const std::string& config_path, const Overrides& overrides,
            const std::string& trace_path, const std::string& snapshots_path) {
  Scenario s = load_scenario(config_path);
  apply_overrides(s, overrides);
  Trace trace = run_scenario(s);
  if (!trace_path.empty()) {
    write_trace_file(trace, trace_path);
  }
  if (!snapshots_path.empty()) {
    std::ofstream out(snapshots_path);
    if (!out) {
      throw Error("cannot open snapshots file: " + snapshots_path);
    }
    out << collect_snapshots(trace).dump(2) << "\n";
    std::cout << "snapshots: " << snapshots_path << "\n";
  }
  return report_run(trace, trace_path);
}

int cmd_explore(const std::string& config_path, const Overrides& overrides,
                const std::string& trace_prefix) {
  Scenario s = load_scenario(config_path);
  apply_overrides(s, overrides);
  ExplorationReport report = explore(s);
  std::cout << "states: " << report.states_visited << "\n";
  std::cout << "revisits: " << report.revisits << "\n";
  std::cout << "max_depth: " << report.max_depth << "\n";
  std::cout << "complete: " << (report.complete ? "true" : "false") << "\n";
  if (report.violations.empty()) {
    std::cout << "violations: none\n";
    return kExitClean;
  }
  for (const auto& [violation, counterexample] : report.violations) {
    std::string path =
        trace_prefix + "." + violation_kind_name(violation.kind) + ".jsonl";
    write_trace_file(counterexample, path);
    std::cout << "violation: " << violation_kind_name(violation.kind) << " at step "
              << violation.step << ": " << violation.detail << " (counterexample: " << path
              << ")\n";
  }
  return kExitViolations;
}

int cmd_replay(const std::string& trace_path) {
  Trace trace = read_trace_file(trace_path);
  try {
    replay_trace(trace);
  } catch (const TraceMismatchError& e) {
    std::cout << "replay: MISMATCH: " << e.what() << "\n";
    return kExitViolations;
  }
  std::cout << "replay: final world matches\n";
  return report_run(trace, "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxed Paxos simulator, bounded model checker and trace replayer"};
  app.require_subcommand(1);

  Overrides overrides;
  std::string config_path;
  std::string trace_path = "trace.jsonl";
  std::string snapshots_path;
  std::string replay_path;
  std::string counterexample_prefix = "counterexample";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "scenario file")->required();
    cmd->add_option("--seed", overrides.seed, "event picker seed");
    cmd->add_option("--max-steps", overrides.max_steps, "step budget for a single run");
    cmd->add_option("--drops", overrides.drops, "enable message drops")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--duplicates", overrides.duplicates, "enable message duplication")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--crashes", overrides.crashes, "enable acceptor crashes")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--mutant", overrides.mutant,
                    "protocol mutant: none|skip-phase-one|no-nil-fill|ignore-forced-value");
  };

  CLI::App* run = app.add_subcommand("run", "run one seeded or scripted simulation");
  add_common(run);
  run->add_option("--trace", trace_path, "trace output path");
  run->add_option("--snapshots", snapshots_path, "write proposer table snapshots here");

  CLI::App* explore_cmd = app.add_subcommand("explore", "exhaustively explore interleavings");
  add_common(explore_cmd);
  explore_cmd->add_option("--depth", overrides.depth, "exploration depth bound");
  explore_cmd->add_option("--state-cap", overrides.state_cap, "visited-state budget");
  explore_cmd->add_option("--check-decisions", overrides.check_decisions,
                          "validate decision tables against the ground truth")
      ->check(CLI::IsMember({"on", "off"}));
  explore_cmd->add_option("--trace", counterexample_prefix, "counterexample path prefix");

  CLI::App* replay = app.add_subcommand("replay", "re-execute and verify a recorded trace");
  replay->add_option("--trace", replay_path, "trace file to replay")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitClean : kExitUsage;
  }

  try {
    if (run->parsed()) {
      return cmd_run(config_path, overrides, trace_path, snapshots_path);
    }
    if (explore_cmd->parsed()) {
      return cmd_explore(config_path, overrides, counterexample_prefix);
    }
    if (replay->parsed()) {
      return cmd_replay(replay_path);
    }
  } catch (const TraceParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnknownMutantError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ScheduleNotEnabledError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
