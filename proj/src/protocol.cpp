#include "relpax/protocol.hpp"

#include <algorithm>

namespace relpax {

Message make_p1a(ProposerId from, AcceptorId to, Round i) {
  Message m;
  m.kind = MsgKind::kP1a;
  m.from = from;
  m.to = to;
  m.round = i;
  return m;
}

Message make_p1b(AcceptorId from, ProposerId to, Round i, std::map<Round, RegisterValue> written) {
  Message m;
  m.kind = MsgKind::kP1b;
  m.from = from;
  m.to = to;
  m.round = i;
  m.written = std::move(written);
  return m;
}

Message make_p2a(ProposerId from, AcceptorId to, Round i, Value v) {
  Message m;
  m.kind = MsgKind::kP2a;
  m.from = from;
  m.to = to;
  m.round = i;
  m.value = std::move(v);
  return m;
}

Message make_p2b(AcceptorId from, ProposerId to, Round i, RegisterValue content) {
  Message m;
  m.kind = MsgKind::kP2b;
  m.from = from;
  m.to = to;
  m.round = i;
  m.content = std::move(content);
  return m;
}

Message make_p3a(ProposerId from, AcceptorId to, Value v) {
  Message m;
  m.kind = MsgKind::kP3a;
  m.from = from;
  m.to = to;
  m.value = std::move(v);
  return m;
}

Acceptor::Acceptor(AcceptorId id, Mutant mutant) : id_(id), mutant_(mutant) {}

const RegisterValue& Acceptor::register_at(Round i) const {
  static const RegisterValue kUnwritten = RegisterValue::unwritten();
  auto it = registers_.find(i);
  return it == registers_.end() ? kUnwritten : it->second;
}

void Acceptor::nil_fill_below(Round i, std::vector<RegisterWrite>& writes) {
  if (mutant_ == Mutant::kNoNilFill) {
    return;
  }
  for (Round j = 0; j < i; ++j) {
    if (registers_.count(j) == 0) {
      registers_.emplace(j, RegisterValue::nil());
      writes.push_back(RegisterWrite{id_, j, RegisterValue::nil()});
    }
  }
}

Acceptor::HandleResult Acceptor::handle(const Message& m) {
  HandleResult result;
  switch (m.kind) {
    case MsgKind::kP1a: {
      if (register_at(m.round).is_unwritten()) {
        nil_fill_below(m.round, result.writes);
      }
      // Register contents are immutable facts; share them all either way.
      result.replies.push_back(make_p1b(id_, m.from, m.round, registers_));
      break;
    }
    case MsgKind::kP2a: {
      if (register_at(m.round).is_unwritten()) {
        nil_fill_below(m.round, result.writes);
        registers_.emplace(m.round, RegisterValue::val(m.value));
        result.writes.push_back(RegisterWrite{id_, m.round, RegisterValue::val(m.value)});
      }
      // Reply with the actual register content; on a refused write this may
      // be nil or another value, which still advances the proposer's tables.
      result.replies.push_back(make_p2b(id_, m.from, m.round, register_at(m.round)));
      break;
    }
    case MsgKind::kP3a: {
      if (learned_ && *learned_ != m.value) {
        anomalies_.push_back("P3a with conflicting decided values");
      } else {
        learned_ = m.value;
      }
      break;
    }
    default:
      throw Error("acceptor cannot handle this message kind");
  }
  return result;
}

Round next_owned_round(ProposerId p, std::uint32_t n_proposers, std::optional<Round> after) {
  if (n_proposers == 0 || p >= n_proposers) {
    throw Error("proposer id out of range");
  }
  if (!after || *after < p) {
    return p;
  }
  Round steps = (*after - p) / n_proposers + 1;
  return p + steps * n_proposers;
}

Proposer::Proposer(ProposerId id, Value input, std::uint32_t n_proposers,
                   std::uint32_t n_acceptors, Mutant mutant, bool broadcast_p3a)
    : id_(id),
      input_(std::move(input)),
      n_proposers_(n_proposers),
      n_acceptors_(n_acceptors),
      mutant_(mutant),
      broadcast_p3a_(broadcast_p3a) {
  if (n_proposers_ == 0 || id_ >= n_proposers_) {
    throw Error("proposer id out of range");
  }
  if (n_acceptors_ == 0) {
    throw Error("at least one acceptor required");
  }
}

std::vector<Message> Proposer::begin_round(const QuorumConfig& config, Round i) {
  if (i % n_proposers_ != id_) {
    throw RoundNotOwnedError("proposer " + std::to_string(id_) + " does not own round " +
                             std::to_string(i));
  }
  if (used_rounds_.count(i) != 0) {
    throw RoundAlreadyUsedError("round " + std::to_string(i) + " was already used");
  }
  if (dt_.unused_rounds().count(i) != 0) {
    throw RoundAlreadyUsedError("round " + std::to_string(i) + " was retired");
  }
  current_round_ = i;
  if (mutant_ == Mutant::kSkipPhaseOne) {
    return enter_phase_two(config, i, input_);
  }
  PhaseOneStatus status = dt_.phase_one_status(config, i);
  switch (status.kind) {
    case PhaseOneStatus::Kind::kPending: {
      phase_ = Phase::kPhaseOne;
      std::vector<Message> out;
      for (AcceptorId a = 0; a < n_acceptors_; ++a) {
        out.push_back(make_p1a(id_, a, i));
      }
      return out;
    }
    case PhaseOneStatus::Kind::kReadyFree:
      return enter_phase_two(config, i, input_);
    case PhaseOneStatus::Kind::kReadyForced:
      return enter_phase_two(config, i,
                             mutant_ == Mutant::kIgnoreForcedValue ? input_ : status.forced);
  }
  throw Error("unreachable phase-one status");
}

std::vector<Message> Proposer::enter_phase_two(const QuorumConfig&, Round i, Value v) {
  phase_ = Phase::kPhaseTwo;
  chosen_ = std::move(v);
  used_rounds_.insert(i);
  std::vector<Message> out;
  for (AcceptorId a = 0; a < n_acceptors_; ++a) {
    out.push_back(make_p2a(id_, a, i, chosen_));
  }
  return out;
}

void Proposer::ingest_fact(const QuorumConfig& config, AcceptorId from, Round i,
                           const RegisterValue& rv) {
  switch (state_copy_.merge_fact(from, i, rv)) {
    case StateTable::MergeOutcome::kNew:
      dt_.observe(config, state_copy_, from, i, rv);
      break;
    case StateTable::MergeOutcome::kDuplicate:
      break;
    case StateTable::MergeOutcome::kConflict:
      anomalies_.push_back("contradictory read of register (" + std::to_string(from) + ", " +
                           std::to_string(i) + ")");
      break;
  }
}

std::vector<Message> Proposer::check_decided(const QuorumConfig&) {
  if (phase_ == Phase::kDone) {
    return {};
  }
  std::optional<Value> decided = dt_.decided_value();
  if (!decided) {
    return {};
  }
  phase_ = Phase::kDone;
  output_ = *decided;
  std::vector<Message> out;
  if (broadcast_p3a_) {
    for (AcceptorId a = 0; a < n_acceptors_; ++a) {
      out.push_back(make_p3a(id_, a, *decided));
    }
  }
  return out;
}

std::vector<Message> Proposer::handle(const QuorumConfig& config, const Message& m) {
  switch (m.kind) {
    case MsgKind::kP1b:
      for (const auto& [round, rv] : m.written) {
        ingest_fact(config, m.from, round, rv);
      }
      break;
    case MsgKind::kP2b:
      ingest_fact(config, m.from, m.round, m.content);
      break;
    default:
      throw Error("proposer cannot handle this message kind");
  }
  if (std::vector<Message> out = check_decided(config); phase_ == Phase::kDone) {
    return out;
  }
  if (phase_ == Phase::kPhaseOne) {
    PhaseOneStatus status = dt_.phase_one_status(config, current_round_);
    if (status.kind == PhaseOneStatus::Kind::kReadyFree) {
      return enter_phase_two(config, current_round_, input_);
    }
    if (status.kind == PhaseOneStatus::Kind::kReadyForced) {
      return enter_phase_two(config, current_round_,
                             mutant_ == Mutant::kIgnoreForcedValue ? input_ : status.forced);
    }
  }
  return {};
}

std::vector<Message> Proposer::handle_timeout(const QuorumConfig& config) {
  if (phase_ != Phase::kPhaseOne && phase_ != Phase::kPhaseTwo) {
    throw Error("timeout while not running a round");
  }
  Round abandoned = current_round_;
  if (phase_ == Phase::kPhaseOne) {
    // No value was ever written to this round and none will be.
    dt_.mark_unused_round(config, abandoned);
  }
  return begin_round(config, next_owned_round(id_, n_proposers_, abandoned));
}

std::vector<Message> Proposer::broadcast_decided() const {
  if (phase_ != Phase::kDone) {
    throw NotDecidedError("proposer " + std::to_string(id_) + " has not decided");
  }
  std::vector<Message> out;
  for (AcceptorId a = 0; a < n_acceptors_; ++a) {
    out.push_back(make_p3a(id_, a, *output_));
  }
  return out;
}

std::vector<std::string> Proposer::anomalies() const {
  std::vector<std::string> out = anomalies_;
  out.insert(out.end(), dt_.anomalies().begin(), dt_.anomalies().end());
  return out;
}

}  // namespace relpax
