#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace relpax {

/// Opaque proposal value. Values are only ever compared for equality; the
/// string "nil" is reserved for the nil register marker in external formats
/// and is rejected as a proposal value at configuration load time.
using Value = std::string;

/// Round index. Rounds are unbounded in principle; all containers holding
/// per-round data are sparse.
using Round = std::uint32_t;

using AcceptorId = std::uint32_t;
using ProposerId = std::uint32_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No rule of a quorum configuration matches a queried round.
class NoRuleMatchesError : public Error {
 public:
  using Error::Error;
};

/// One cell of a write-once register: unwritten, nil, or a value.
///
/// Legal lifecycle: Unwritten -> Nil or Unwritten -> Val(v); Nil and Val(v)
/// are terminal.
class RegisterValue {
 public:
  RegisterValue() = default;  // unwritten

  static RegisterValue unwritten() { return RegisterValue(); }
  static RegisterValue nil() { return RegisterValue(Kind::kNil, {}); }
  static RegisterValue val(Value v) { return RegisterValue(Kind::kVal, std::move(v)); }

  bool is_unwritten() const { return kind_ == Kind::kUnwritten; }
  bool is_nil() const { return kind_ == Kind::kNil; }
  bool is_val() const { return kind_ == Kind::kVal; }
  bool is_written() const { return kind_ != Kind::kUnwritten; }

  /// The stored value. Only meaningful when is_val().
  const Value& value() const;

  friend bool operator==(const RegisterValue&, const RegisterValue&) = default;
  friend auto operator<=>(const RegisterValue&, const RegisterValue&) = default;

 private:
  enum class Kind : std::uint8_t { kUnwritten, kNil, kVal };

  RegisterValue(Kind kind, Value v) : kind_(kind), value_(std::move(v)) {}

  Kind kind_ = Kind::kUnwritten;
  Value value_;
};

/// Coordinates of one register: acceptor column, round row.
struct Cell {
  AcceptorId acceptor = 0;
  Round round = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Sparse mapping (acceptor, round) -> register content. Absent keys are
/// Unwritten. Used both for the ground-truth table and for each proposer's
/// partial copy; write-once is enforced at this level, so a copy can never
/// go stale.
class StateTable {
 public:
  enum class MergeOutcome { kNew, kDuplicate, kConflict };

  /// Writes rv (nil or a value) at (a, i). Returns false and leaves the
  /// table unchanged if the cell was already written.
  bool write(AcceptorId a, Round i, const RegisterValue& rv);

  /// Records a fact read from elsewhere. kConflict means the same cell was
  /// reported with two different contents; the original entry is kept.
  MergeOutcome merge_fact(AcceptorId a, Round i, const RegisterValue& rv);

  /// Stored content, or Unwritten if absent.
  const RegisterValue& read(AcceptorId a, Round i) const;

  bool empty() const { return cells_.empty(); }
  std::size_t size() const { return cells_.size(); }
  const std::map<Cell, RegisterValue>& cells() const { return cells_; }

  /// Distinct non-nil values stored at round i.
  std::set<Value> values_at_round(Round i) const;

  /// Highest written round, if any cell is written.
  std::optional<Round> max_written_round() const;

  /// True if every cell of this table appears identically in other.
  bool subset_of(const StateTable& other) const;

  friend bool operator==(const StateTable&, const StateTable&) = default;

 private:
  std::map<Cell, RegisterValue> cells_;
};

/// Non-empty set of acceptors, canonically sorted.
class Quorum {
 public:
  explicit Quorum(std::vector<AcceptorId> members);
  Quorum(std::initializer_list<AcceptorId> members);

  bool contains(AcceptorId a) const;
  const std::vector<AcceptorId>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }

  friend bool operator==(const Quorum&, const Quorum&) = default;
  friend auto operator<=>(const Quorum&, const Quorum&) = default;

 private:
  std::vector<AcceptorId> members_;
};

/// Selects the rounds a configuration rule applies to.
struct RoundMatcher {
  enum class Kind { kExact, kFrom, kMod };

  Kind kind = Kind::kFrom;
  std::set<Round> rounds;        // kExact
  Round start = 0;               // kFrom
  std::uint32_t modulus = 1;     // kMod
  std::uint32_t remainder = 0;   // kMod

  static RoundMatcher exact(std::set<Round> rs);
  static RoundMatcher from(Round start);
  static RoundMatcher mod(std::uint32_t modulus, std::uint32_t remainder);

  bool matches(Round i) const;

  friend bool operator==(const RoundMatcher&, const RoundMatcher&) = default;
};

struct QuorumRule {
  RoundMatcher match;
  std::vector<Quorum> quorums;

  friend bool operator==(const QuorumRule&, const QuorumRule&) = default;
};

/// Per-round quorum sets, expressed as an ordered rule list; the first
/// matching rule wins. A round no rule matches is a configuration error,
/// surfaced lazily as NoRuleMatchesError.
class QuorumConfig {
 public:
  QuorumConfig(std::uint32_t acceptor_count, std::vector<QuorumRule> rules);

  /// Quorum set of the first rule matching round i.
  const std::vector<Quorum>& quorums_for(Round i) const;

  std::uint32_t acceptor_count() const { return acceptor_count_; }
  const std::vector<QuorumRule>& rules() const { return rules_; }

  friend bool operator==(const QuorumConfig&, const QuorumConfig&) = default;

 private:
  std::uint32_t acceptor_count_ = 0;
  std::vector<QuorumRule> rules_;
};

/// A (round, quorum, value) triple that is decided in a state table: every
/// member of the quorum holds the value in that round's register.
struct Decision {
  Round round = 0;
  Quorum quorum;
  Value value;

  friend bool operator==(const Decision&, const Decision&) = default;
  friend auto operator<=>(const Decision&, const Decision&) = default;
};

/// All decisions present in the table for rounds 0..max_round, in canonical
/// (round, quorum) order. Callers pass the highest round seen in any write;
/// decisions cannot exist in untouched rounds.
std::vector<Decision> decided_values(const StateTable& table, const QuorumConfig& config,
                                     Round max_round);

}  // namespace relpax
