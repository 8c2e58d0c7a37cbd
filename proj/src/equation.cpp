#include "mathsticks/equation.hpp"

#include <algorithm>
#include <cassert>

namespace mathsticks {

namespace {

// Bit i = segment i; see the diagram in equation.hpp.
constexpr std::array<std::uint8_t, 10> kDigitMasks = {
    0x7E,  // 0: top, both rights, bottom, both lefts
    0x0C,  // 1: right verticals
    0x37,  // 2
    0x1F,  // 3
    0x4D,  // 4
    0x5B,  // 5
    0x7B,  // 6
    0x0E,  // 7: top + right verticals
    0x7F,  // 8
    0x5F,  // 9
};

// kGlyphOfMask[mask] = glyph + 1, or 0 when the mask is no glyph.
constexpr std::array<std::int8_t, 128> build_inverse() {
  std::array<std::int8_t, 128> inv{};
  inv[0] = kBlank + 1;
  for (int d = 0; d < 10; ++d) inv[kDigitMasks[d]] = static_cast<std::int8_t>(d + 1);
  return inv;
}
constexpr auto kGlyphOfMask = build_inverse();

bool glyph_in_range(Glyph g, bool tens) {
  return (g >= 0 && g <= 9) || (tens && g == kBlank);
}

}  // namespace

SegmentSet glyph_segments(Glyph g) {
  assert(g == kBlank || (g >= 0 && g <= 9));
  return g == kBlank ? SegmentSet{} : SegmentSet(kDigitMasks[g]);
}

std::optional<Glyph> segments_to_glyph(SegmentSet s) {
  if (s.empty()) return kBlank;
  const std::int8_t v = kGlyphOfMask[s.mask()];
  if (v == 0) return std::nullopt;
  return static_cast<Glyph>(v - 1);
}

int stick_count(Glyph g) { return glyph_segments(g).count(); }

Glyph EquationState::digit(DigitSlot s) const {
  switch (s) {
    case DigitSlot::A: return a;
    case DigitSlot::B: return b;
    case DigitSlot::C: return c;
    case DigitSlot::D: return d;
    case DigitSlot::E: return e;
    case DigitSlot::F: return f;
  }
  return kBlank;
}

void EquationState::set_digit(DigitSlot s, Glyph v) {
  switch (s) {
    case DigitSlot::A: a = v; break;
    case DigitSlot::B: b = v; break;
    case DigitSlot::C: c = v; break;
    case DigitSlot::D: d = v; break;
    case DigitSlot::E: e = v; break;
    case DigitSlot::F: f = v; break;
  }
}

bool EquationState::well_formed() const {
  return glyph_in_range(a, true) && glyph_in_range(b, false) &&
         glyph_in_range(c, true) && glyph_in_range(d, false) &&
         glyph_in_range(e, true) && glyph_in_range(f, false) &&
         (g == Op::kPlus || g == Op::kMinus);
}

WholeEquation solo_to_whole(const EquationState& z) {
  auto number = [](Glyph tens, Glyph units) {
    return 10 * std::max<int>(tens, 0) + units;
  };
  return {z.g, number(z.a, z.b), number(z.c, z.d), number(z.e, z.f)};
}

bool is_valid_arithmetic(const WholeEquation& w) {
  return w.op == Op::kPlus ? w.lhs + w.rhs == w.result : w.lhs - w.rhs == w.result;
}

Level level_of(const EquationState& z) {
  return Level{1 + (z.a != kBlank) + (z.c != kBlank) + (z.e != kBlank)};
}

int total_sticks(const EquationState& z) {
  int n = z.g == Op::kPlus ? 1 : 0;
  for (int s = 0; s < kDigitSlots; ++s) n += stick_count(z.digit(static_cast<DigitSlot>(s)));
  return n;
}

std::string canonical_string(const EquationState& z) {
  std::string out;
  out.reserve(9);
  auto number = [&out](Glyph tens, Glyph units) {
    if (tens != kBlank) out.push_back(static_cast<char>('0' + tens));
    out.push_back(static_cast<char>('0' + units));
  };
  number(z.a, z.b);
  out.push_back(op_char(z.g));
  number(z.c, z.d);
  out.push_back('=');
  number(z.e, z.f);
  return out;
}

std::optional<EquationState> parse_state(std::string_view text) {
  std::size_t pos = 0;
  auto number = [&](Glyph& tens, Glyph& units) {
    std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    const std::size_t len = pos - start;
    if (len == 1) {
      tens = kBlank;
      units = static_cast<Glyph>(text[start] - '0');
      return true;
    }
    if (len == 2) {
      tens = static_cast<Glyph>(text[start] - '0');
      units = static_cast<Glyph>(text[start + 1] - '0');
      return true;
    }
    return false;
  };

  EquationState z;
  if (!number(z.a, z.b) || pos >= text.size()) return std::nullopt;
  if (text[pos] == '+') {
    z.g = Op::kPlus;
  } else if (text[pos] == '-') {
    z.g = Op::kMinus;
  } else {
    return std::nullopt;
  }
  ++pos;
  if (!number(z.c, z.d) || pos >= text.size() || text[pos] != '=') return std::nullopt;
  ++pos;
  if (!number(z.e, z.f) || pos != text.size()) return std::nullopt;
  return z;
}

std::int64_t state_index(const EquationState& z) {
  std::int64_t i = z.a + 1;
  i = i * 10 + z.b;
  i = i * 2 + static_cast<int>(z.g);
  i = i * 11 + (z.c + 1);
  i = i * 10 + z.d;
  i = i * 11 + (z.e + 1);
  i = i * 10 + z.f;
  return i;
}

EquationState state_at(std::int64_t index) {
  assert(index >= 0 && index < kStateSpaceSize);
  EquationState z;
  z.f = static_cast<Glyph>(index % 10);
  index /= 10;
  z.e = static_cast<Glyph>(index % 11 - 1);
  index /= 11;
  z.d = static_cast<Glyph>(index % 10);
  index /= 10;
  z.c = static_cast<Glyph>(index % 11 - 1);
  index /= 11;
  z.g = static_cast<Op>(index % 2);
  index /= 2;
  z.b = static_cast<Glyph>(index % 10);
  index /= 10;
  z.a = static_cast<Glyph>(index - 1);
  return z;
}

}  // namespace mathsticks
