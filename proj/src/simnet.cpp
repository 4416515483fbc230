#include "relpax/simnet.hpp"

#include <algorithm>

namespace relpax {

World::World(std::shared_ptr<const QuorumConfig> config, std::vector<Value> proposer_inputs,
             std::uint32_t n_acceptors, Mutant mutant, bool broadcast_p3a)
    : config_(std::move(config)) {
  if (!config_) {
    throw Error("world needs a quorum configuration");
  }
  if (config_->acceptor_count() != n_acceptors) {
    throw Error("acceptor count does not match the quorum configuration");
  }
  if (proposer_inputs.empty()) {
    throw Error("world needs at least one proposer");
  }
  const auto n_proposers = static_cast<std::uint32_t>(proposer_inputs.size());
  for (AcceptorId a = 0; a < n_acceptors; ++a) {
    acceptors_.emplace_back(a, mutant);
  }
  timeouts_used_.assign(n_proposers, 0);
  delivered_reads_.resize(n_proposers);
  for (ProposerId p = 0; p < n_proposers; ++p) {
    inputs_.emplace(p, proposer_inputs[p]);
    proposers_.emplace_back(p, std::move(proposer_inputs[p]), n_proposers, n_acceptors, mutant,
                            broadcast_p3a);
  }
  // Every proposer starts its first owned round up front; schedules control
  // timing purely through delivery order.
  StepResult ignored;
  for (Proposer& p : proposers_) {
    enqueue(p.begin_round(*config_, next_owned_round(p.id(), n_proposers)), ignored);
  }
}

std::vector<SimEvent> World::enabled_events(const SimConfig& sc) const {
  std::vector<SimEvent> out;
  const bool faults_on = !sc.synchronous_after || step_count_ < *sc.synchronous_after;
  for (const InFlightMessage& m : in_flight_) {
    out.push_back(SimEvent::deliver(m.id));
  }
  if (sc.allow_drops && faults_on && (!sc.max_drops || drops_used_ < *sc.max_drops)) {
    for (const InFlightMessage& m : in_flight_) {
      out.push_back(SimEvent::drop(m.id));
    }
  }
  if (sc.allow_duplicates && faults_on &&
      (!sc.max_duplicates || duplicates_used_ < *sc.max_duplicates)) {
    for (const InFlightMessage& m : in_flight_) {
      out.push_back(SimEvent::duplicate(m.id));
    }
  }
  for (const Proposer& p : proposers_) {
    if (p.phase() != Phase::kPhaseOne && p.phase() != Phase::kPhaseTwo) {
      continue;
    }
    if (sc.max_timeouts_per_proposer && timeouts_used_[p.id()] >= *sc.max_timeouts_per_proposer) {
      continue;
    }
    if (sc.max_round &&
        next_owned_round(p.id(), static_cast<std::uint32_t>(proposers_.size()),
                         p.current_round()) > *sc.max_round) {
      continue;
    }
    out.push_back(SimEvent::timeout(p.id()));
  }
  if (sc.allow_crashes && faults_on && crashed_.size() < sc.max_crashes) {
    for (const Acceptor& a : acceptors_) {
      if (crashed_.count(a.id()) == 0) {
        out.push_back(SimEvent::crash(a.id()));
      }
    }
  }
  return out;
}

std::vector<InFlightMessage>::const_iterator World::find_message(std::uint64_t id) const {
  auto it = std::lower_bound(in_flight_.begin(), in_flight_.end(), id,
                             [](const InFlightMessage& m, std::uint64_t v) { return m.id < v; });
  if (it == in_flight_.end() || it->id != id) {
    throw EventNotEnabledError("message " + std::to_string(id) + " is not in flight");
  }
  return it;
}

void World::enqueue(std::vector<Message> msgs, StepResult& result) {
  for (Message& m : msgs) {
    InFlightMessage ifm{next_msg_id_++, std::move(m)};
    result.emitted.push_back(ifm);
    in_flight_.push_back(std::move(ifm));
  }
}

void World::note_writes(const std::vector<RegisterWrite>& writes) {
  for (const RegisterWrite& w : writes) {
    if (ground_.merge_fact(w.acceptor, w.round, w.content) == StateTable::MergeOutcome::kConflict) {
      ground_breaches_.push_back("register (" + std::to_string(w.acceptor) + ", " +
                                 std::to_string(w.round) + ") rewritten");
    }
    max_written_round_ = std::max(max_written_round_, w.round);
  }
}

void World::note_output(ProposerId p, StepResult& result) {
  const std::optional<Value>& out = proposers_[p].output();
  if (out && outputs_.count(p) == 0) {
    outputs_.emplace(p, *out);
    result.new_outputs.emplace(p, *out);
  }
}

World::StepResult World::deliver(std::uint64_t msg_id) {
  StepResult result;
  auto it = find_message(msg_id);
  Message msg = it->msg;
  in_flight_.erase(it);
  result.delivered = msg;
  switch (msg.kind) {
    case MsgKind::kP1a:
    case MsgKind::kP2a:
    case MsgKind::kP3a: {
      if (crashed_.count(msg.to) != 0) {
        break;  // consumed by a crashed acceptor
      }
      Acceptor::HandleResult r = acceptors_.at(msg.to).handle(msg);
      note_writes(r.writes);
      result.writes = std::move(r.writes);
      enqueue(std::move(r.replies), result);
      break;
    }
    case MsgKind::kP1b:
    case MsgKind::kP2b: {
      ProposerId p = msg.to;
      if (msg.kind == MsgKind::kP1b) {
        for (const auto& [round, rv] : msg.written) {
          delivered_reads_.at(p).merge_fact(msg.from, round, rv);
        }
      } else {
        delivered_reads_.at(p).merge_fact(msg.from, msg.round, msg.content);
      }
      enqueue(proposers_.at(p).handle(*config_, msg), result);
      note_output(p, result);
      break;
    }
  }
  return result;
}

World::StepResult World::apply_event(const SimEvent& e) {
  StepResult result;
  switch (e.kind) {
    case SimEvent::Kind::kDeliver:
      result = deliver(e.msg_id);
      break;
    case SimEvent::Kind::kDrop:
      in_flight_.erase(find_message(e.msg_id));
      ++drops_used_;
      break;
    case SimEvent::Kind::kDuplicate: {
      Message copy = find_message(e.msg_id)->msg;
      InFlightMessage dup{next_msg_id_++, std::move(copy)};
      result.emitted.push_back(dup);
      in_flight_.push_back(std::move(dup));
      ++duplicates_used_;
      break;
    }
    case SimEvent::Kind::kTimeout: {
      Proposer& p = proposers_.at(e.proposer);
      enqueue(p.handle_timeout(*config_), result);
      ++timeouts_used_.at(e.proposer);
      note_output(e.proposer, result);
      break;
    }
    case SimEvent::Kind::kCrash:
      if (e.acceptor >= acceptors_.size()) {
        throw EventNotEnabledError("no such acceptor");
      }
      crashed_.insert(e.acceptor);
      break;
  }
  ++step_count_;
  return result;
}

World::StepResult World::apply_checked(const SimEvent& e, const SimConfig& sc) {
  std::vector<SimEvent> enabled = enabled_events(sc);
  if (std::find(enabled.begin(), enabled.end(), e) == enabled.end()) {
    throw EventNotEnabledError("event is not enabled in this world");
  }
  return apply_event(e);
}

bool World::all_done() const {
  return std::all_of(proposers_.begin(), proposers_.end(),
                     [](const Proposer& p) { return p.phase() == Phase::kDone; });
}

namespace {

void put_u32(std::string& out, std::uint64_t v) {
  out += std::to_string(v);
  out += ',';
}

void put_rv(std::string& out, const RegisterValue& rv) {
  if (rv.is_unwritten()) {
    out += "u;";
  } else if (rv.is_nil()) {
    out += "n;";
  } else {
    out += "v:";
    out += rv.value();
    out += ';';
  }
}

void put_table(std::string& out, const StateTable& t) {
  for (const auto& [cell, rv] : t.cells()) {
    put_u32(out, cell.acceptor);
    put_u32(out, cell.round);
    put_rv(out, rv);
  }
  out += '|';
}

void put_message(std::string& out, const Message& m) {
  put_u32(out, static_cast<std::uint64_t>(m.kind));
  put_u32(out, m.from);
  put_u32(out, m.to);
  put_u32(out, m.round);
  out += m.value;
  out += ';';
  put_rv(out, m.content);
  for (const auto& [round, rv] : m.written) {
    put_u32(out, round);
    put_rv(out, rv);
  }
  out += '|';
}

}  // namespace

std::string World::fingerprint(bool ground_truth_only) const {
  std::string out;
  out.reserve(512);
  out += "A|";
  for (const Acceptor& a : acceptors_) {
    for (const auto& [round, rv] : a.registers()) {
      put_u32(out, round);
      put_rv(out, rv);
    }
    if (a.learned()) {
      out += '!';
      out += *a.learned();
    }
    out += '/';
  }
  out += "P|";
  for (const Proposer& p : proposers_) {
    put_u32(out, static_cast<std::uint64_t>(p.phase()));
    put_u32(out, p.current_round());
    out += p.chosen();
    out += ';';
    if (p.output()) {
      out += '!';
      out += *p.output();
    }
    out += ';';
    for (Round r : p.used_rounds()) {
      put_u32(out, r);
    }
    out += ';';
    if (!ground_truth_only) {
      put_table(out, p.state_copy());
      for (const auto& [key, st] : p.decision_table().entries()) {
        put_u32(out, key.first);
        for (AcceptorId a : key.second.members()) {
          put_u32(out, a);
        }
        put_u32(out, static_cast<std::uint64_t>(st.kind()));
        if (st.is_maybe() || st.is_decided()) {
          out += st.value();
        }
        out += ';';
      }
      for (Round r : p.decision_table().unused_rounds()) {
        put_u32(out, r);
      }
    }
    out += '/';
  }
  out += "F|";
  std::vector<std::string> msgs;
  msgs.reserve(in_flight_.size());
  for (const InFlightMessage& m : in_flight_) {
    std::string enc;
    put_message(enc, m.msg);
    msgs.push_back(std::move(enc));
  }
  std::sort(msgs.begin(), msgs.end());
  for (const std::string& s : msgs) {
    out += s;
  }
  out += "O|";
  for (const auto& [p, v] : outputs_) {
    put_u32(out, p);
    out += v;
    out += ';';
  }
  out += "C|";
  for (AcceptorId a : crashed_) {
    put_u32(out, a);
  }
  out += "T|";
  for (std::uint32_t t : timeouts_used_) {
    put_u32(out, t);
  }
  put_u32(out, drops_used_);
  put_u32(out, duplicates_used_);
  return out;
}

}  // namespace relpax
