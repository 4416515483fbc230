#pragma once

#include <json.hpp>
#include <string>

#include "relpax/core.hpp"
#include "relpax/decision.hpp"
#include "relpax/protocol.hpp"
#include "relpax/simnet.hpp"

namespace relpax {

// JSON encodings for all externally visible formats. nlohmann::json keeps
// object keys sorted, so every encoder here is byte-deterministic.

/// "nil" or the value itself. Unwritten cells are never encoded.
std::string register_value_to_string(const RegisterValue& rv);
RegisterValue register_value_from_string(const std::string& s);

nlohmann::json message_to_json(const Message& m);
Message message_from_json(const nlohmann::json& j);

nlohmann::json event_to_json(const SimEvent& e);
SimEvent event_from_json(const nlohmann::json& j);

nlohmann::json quorum_config_to_json(const QuorumConfig& c);
QuorumConfig quorum_config_from_json(const nlohmann::json& j);

nlohmann::json sim_config_to_json(const SimConfig& c);
SimConfig sim_config_from_json(const nlohmann::json& j);

/// Cells as [[acceptor, round, content], ...] in canonical order.
nlohmann::json state_table_to_json(const StateTable& t);

/// Entries as [{"round", "quorum", "state", "value"?}, ...].
nlohmann::json decision_table_to_json(const DecisionTable& dt);

nlohmann::json register_write_to_json(const RegisterWrite& w);
RegisterWrite register_write_from_json(const nlohmann::json& j);

/// Canonical encoding of a full world; replay equality is byte equality of
/// this form.
nlohmann::json world_to_json(const World& w);

/// Snapshot of one proposer's tables, rows bounded as in the protocol
/// figures: up to the highest observed round, or the current round's
/// phase-one scan range before anything was observed.
nlohmann::json proposer_snapshot(const Proposer& p, const QuorumConfig& config,
                                 const nlohmann::json& after_step);

std::string mutant_name(Mutant m);

}  // namespace relpax
