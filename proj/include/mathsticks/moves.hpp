#ifndef MATHSTICKS_MOVES_HPP
#define MATHSTICKS_MOVES_HPP

// Stick relocation semantics. A state owns a set of occupied positions out
// of a fixed universe of 43 (six digit slots x 7 segments, plus G0, the
// vertical stroke of '+'). An edit relocates one or two sticks; sticks are
// never created or destroyed.

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mathsticks/equation.hpp"

namespace mathsticks {

inline constexpr int kPositionCount = 43;

/// A stick address such as "B2" or "G0". Codes 0..41 are digit slots
/// (slot * 7 + segment); 42 is G0. Code order = (slot letter, index) order.
class StickPosition {
 public:
  static constexpr std::uint8_t kOperatorCode = 42;

  constexpr StickPosition() = default;
  static constexpr StickPosition from_code(int code) {
    return StickPosition(static_cast<std::uint8_t>(code));
  }
  static constexpr StickPosition digit(DigitSlot slot, int segment) {
    return from_code(static_cast<int>(slot) * 7 + segment);
  }
  static constexpr StickPosition operator_stroke() { return from_code(kOperatorCode); }

  /// Parses "A0".."F6" and "G0".
  static std::optional<StickPosition> parse(std::string_view text);

  constexpr int code() const { return code_; }
  constexpr bool is_operator() const { return code_ == kOperatorCode; }
  constexpr DigitSlot slot() const { return static_cast<DigitSlot>(code_ / 7); }
  constexpr int segment() const { return is_operator() ? 0 : code_ % 7; }
  constexpr char slot_letter() const {
    return is_operator() ? 'G' : static_cast<char>('A' + code_ / 7);
  }

  std::string str() const;

  friend constexpr auto operator<=>(StickPosition, StickPosition) = default;

 private:
  constexpr explicit StickPosition(std::uint8_t code) : code_(code) {}
  std::uint8_t code_ = 0;
};

/// Bitset over the 43 positions.
class Occupancy {
 public:
  constexpr Occupancy() = default;
  constexpr explicit Occupancy(std::uint64_t bits) : bits_(bits) {}

  static constexpr std::uint64_t kUniverse = (std::uint64_t{1} << kPositionCount) - 1;

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool contains(StickPosition p) const { return (bits_ >> p.code()) & 1u; }
  constexpr int count() const { return __builtin_popcountll(bits_); }
  constexpr void insert(StickPosition p) { bits_ |= std::uint64_t{1} << p.code(); }
  constexpr void erase(StickPosition p) { bits_ &= ~(std::uint64_t{1} << p.code()); }
  constexpr Occupancy complement() const { return Occupancy(~bits_ & kUniverse); }

  /// Segments of one digit slot.
  constexpr SegmentSet slot_segments(DigitSlot s) const {
    return SegmentSet(static_cast<std::uint8_t>((bits_ >> (static_cast<int>(s) * 7)) & 0x7f));
  }

  /// Positions in ascending code order.
  std::vector<StickPosition> positions() const;

  friend constexpr bool operator==(Occupancy, Occupancy) = default;

 private:
  std::uint64_t bits_ = 0;
};

struct Relocation {
  StickPosition from;
  StickPosition to;

  friend constexpr auto operator<=>(const Relocation&, const Relocation&) = default;
};

/// One or two relocations applied atomically against the initial occupancy.
class Edit {
 public:
  Edit() = default;
  Edit(std::initializer_list<Relocation> moves);
  explicit Edit(std::span<const Relocation> moves);

  std::span<const Relocation> moves() const { return {moves_.data(), size_}; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool touches_operator() const;

  /// "Move(B0, B2)" or "Move(B0, B2), Move(G0, D5)".
  std::string str() const;

  friend bool operator==(const Edit& x, const Edit& y) {
    return std::equal(x.moves().begin(), x.moves().end(), y.moves().begin(), y.moves().end());
  }
  friend auto operator<=>(const Edit& x, const Edit& y) {
    return std::lexicographical_compare_three_way(x.moves().begin(), x.moves().end(),
                                                  y.moves().begin(), y.moves().end());
  }

 private:
  std::array<Relocation, 2> moves_{};
  std::size_t size_ = 0;
};

enum class FlipSemantics : std::uint8_t { kAnySolutionFlips, kAllSolutionsFlip };

/// Legality toggles for the rules the puzzle definition leaves open.
struct RuleConfig {
  /// Tens slots may turn blank <-> digit through an edit. Units slots never
  /// become blank regardless. Off by default: the ablation over the reference
  /// L1/L2 rows ranks blank=off closest.
  bool allow_blank_transitions = false;
  /// A final state may carry a tens digit of 0.
  bool allow_leading_zero_final = true;
  FlipSemantics flip = FlipSemantics::kAnySolutionFlips;

  /// Stable text form, e.g. "blank=on,leading-zero=on,flip=any".
  std::string fingerprint() const;
  /// Parses a fingerprint or any comma-separated subset of its toggles,
  /// applied on top of `base`.
  static std::optional<RuleConfig> parse(std::string_view text, const RuleConfig& base);
  static std::optional<RuleConfig> parse(std::string_view text);
  /// Permissive toggles switched on; used for tie-breaking.
  int permissiveness() const;

  friend bool operator==(const RuleConfig&, const RuleConfig&) = default;
};

Occupancy occupied_positions(const EquationState& z);

enum class EditError : std::uint8_t {
  kNone = 0,
  kMalformed,           // wrong move count, repeated source/target, or source == target
  kSourceEmpty,         // a source holds no stick
  kTargetOccupied,      // a target holds a stick after the removals
  kIllegalGlyph,        // some slot ends up as no glyph (or a blank units slot)
  kBlankRuleViolation,  // tens-slot rule of the RuleConfig violated
  kNoOpEdit,            // final occupancy equals the initial one
};

std::string_view to_string(EditError e);

struct EditOutcome {
  EditError error = EditError::kNone;
  EquationState state{};
  /// Which part of the state the failure concerns, when it is the operator.
  bool operator_fault = false;

  bool ok() const { return error == EditError::kNone; }
};

EditOutcome apply_edit(const EquationState& z, const Edit& e, const RuleConfig& rc);

/// Decodes an occupancy back into a state, checking glyph legality and the
/// RuleConfig relative to `origin`.
EditOutcome decode_occupancy(const EquationState& origin, Occupancy occ, const RuleConfig& rc);

/// One glyph change inside a slot.
struct SlotTransition {
  Glyph from = 0;
  Glyph to = 0;
  SegmentSet removed;
  SegmentSet added;

  int removals() const { return removed.count(); }
  int additions() const { return added.count(); }
};

/// Lookup tables of legal per-slot glyph changes with removals + additions
/// <= 4 (the envelope reachable by at most two relocations). The operator
/// slot is modelled as glyph 0 ('-', no G0) and 1 ('+', G0 present).
class TransitionTables {
 public:
  explicit TransitionTables(const RuleConfig& rc);

  /// Non-identity transitions out of `from`, ordered by (removals, additions, to).
  std::span<const SlotTransition> digit(bool tens_slot, Glyph from) const;
  std::span<const SlotTransition> op(Op from) const;

  const RuleConfig& rules() const { return rules_; }

 private:
  RuleConfig rules_;
  std::array<std::vector<SlotTransition>, 11> tens_;   // indexed by glyph + 1
  std::array<std::vector<SlotTransition>, 10> units_;
  std::array<std::vector<SlotTransition>, 2> op_;
};

/// Shared immutable tables for a RuleConfig.
const TransitionTables& slot_transition_tables(const RuleConfig& rc);

struct Successor {
  EquationState state;
  Edit witness;
};

/// Every state reachable from z by relocating exactly k sticks (k = 1 or 2)
/// as a net change of occupancy, sorted by state. Each carries the
/// lexicographically smallest edit realizing it.
std::vector<Successor> enumerate_edits(const EquationState& z, int k, const RuleConfig& rc);

/// Lower-level form of enumerate_edits: calls `visit(state, removed, added)`
/// for every successor, unsorted. Witnesses are derived on demand with
/// witness_edit.
void for_each_successor(
    const EquationState& z, int k, const TransitionTables& tables,
    const std::function<void(const EquationState&, Occupancy, Occupancy)>& visit);

/// Smallest edit that removes `removed` and adds `added` (equal sizes 1..2).
Edit witness_edit(Occupancy removed, Occupancy added);

/// Brute force over position-level relocations, filtered through
/// apply_edit. Independent of the transition tables.
std::vector<EquationState> oracle_enumerate(const EquationState& z, int k, const RuleConfig& rc);

}  // namespace mathsticks

#endif  // MATHSTICKS_MOVES_HPP
