#ifndef MATHSTICKS_EQUATION_HPP
#define MATHSTICKS_EQUATION_HPP

// Symbolic form of a matchstick equation: seven-segment glyph tables, the
// 7-slot state [a,b,g,c,d,e,f], arithmetic validity and difficulty levels.
//
// Segment indices within a digit slot:
//
//        1
//      -----
//   6 |     | 2
//     |  0  |
//      -----
//   5 |     | 3
//     |     |
//      -----
//        4

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mathsticks {

/// Value of a digit slot: 0..9, or kBlank for an empty tens slot.
using Glyph = std::int8_t;
inline constexpr Glyph kBlank = -1;

enum class Op : std::uint8_t { kPlus = 0, kMinus = 1 };

inline constexpr char op_char(Op op) { return op == Op::kPlus ? '+' : '-'; }

/// Digit slots in rendering order; the operator slot G sits between B and C.
enum class DigitSlot : std::uint8_t { A = 0, B, C, D, E, F };
inline constexpr int kDigitSlots = 6;

inline constexpr bool is_tens_slot(DigitSlot s) {
  return s == DigitSlot::A || s == DigitSlot::C || s == DigitSlot::E;
}

/// Occupancy of the seven segments of one digit slot, bit i = segment i.
class SegmentSet {
 public:
  constexpr SegmentSet() = default;
  constexpr explicit SegmentSet(std::uint8_t mask) : mask_(mask & 0x7f) {}

  constexpr std::uint8_t mask() const { return mask_; }
  constexpr bool contains(int segment) const { return (mask_ >> segment) & 1u; }
  constexpr int count() const { return __builtin_popcount(mask_); }
  constexpr bool empty() const { return mask_ == 0; }

  constexpr SegmentSet without(SegmentSet other) const {
    return SegmentSet(static_cast<std::uint8_t>(mask_ & ~other.mask_));
  }

  friend constexpr bool operator==(SegmentSet, SegmentSet) = default;

 private:
  std::uint8_t mask_ = 0;
};

/// Canonical segments of a digit or of kBlank.
SegmentSet glyph_segments(Glyph g);

/// Inverse of glyph_segments; nullopt when the set is no glyph.
std::optional<Glyph> segments_to_glyph(SegmentSet s);

/// Sticks needed to draw a glyph (0 for blank).
int stick_count(Glyph g);

/// One puzzle state. Field order is the canonical ordering; the defaulted
/// comparison gives blank < 0 and plus < minus.
struct EquationState {
  Glyph a = kBlank;
  Glyph b = 0;
  Op g = Op::kPlus;
  Glyph c = kBlank;
  Glyph d = 0;
  Glyph e = kBlank;
  Glyph f = 0;

  Glyph digit(DigitSlot s) const;
  void set_digit(DigitSlot s, Glyph v);

  /// Blank only in tens slots, every digit in range.
  bool well_formed() const;

  friend auto operator<=>(const EquationState&, const EquationState&) = default;
};

struct WholeEquation {
  Op op = Op::kPlus;
  int lhs = 0;
  int rhs = 0;
  int result = 0;

  friend bool operator==(const WholeEquation&, const WholeEquation&) = default;
};

WholeEquation solo_to_whole(const EquationState& z);
bool is_valid_arithmetic(const WholeEquation& w);

inline bool is_valid_arithmetic(const EquationState& z) {
  return is_valid_arithmetic(solo_to_whole(z));
}

/// Difficulty level, 1 + number of two-digit numbers.
struct Level {
  int value = 1;
  friend auto operator<=>(const Level&, const Level&) = default;
};

Level level_of(const EquationState& z);

/// Total sticks in the equation including the operator's G0 stroke.
int total_sticks(const EquationState& z);

/// "6+4=4", "12-4=8", "07+2=9". Blank tens are omitted, zeros kept.
std::string canonical_string(const EquationState& z);

/// Inverse of canonical_string; nullopt on anything it would not produce.
std::optional<EquationState> parse_state(std::string_view text);

/// Number of states in the full Cartesian product (11*10*2*11*10*11*10).
inline constexpr std::int64_t kStateSpaceSize = 2'662'000;

/// Position of z in canonical order, 0-based.
std::int64_t state_index(const EquationState& z);

/// Inverse of state_index; index must lie in [0, kStateSpaceSize).
EquationState state_at(std::int64_t index);

}  // namespace mathsticks

#endif  // MATHSTICKS_EQUATION_HPP
