#include "mathsticks/moves.hpp"

#include <algorithm>
#include <bit>
#include <cassert>

namespace mathsticks {

// ---------------------------------------------------------------------------
// StickPosition / Occupancy / Edit

std::optional<StickPosition> StickPosition::parse(std::string_view text) {
  if (text.size() != 2) return std::nullopt;
  const char slot = text[0];
  const char idx = text[1];
  if (idx < '0' || idx > '6') return std::nullopt;
  if (slot == 'G') {
    if (idx != '0') return std::nullopt;
    return operator_stroke();
  }
  if (slot < 'A' || slot > 'F') return std::nullopt;
  return digit(static_cast<DigitSlot>(slot - 'A'), idx - '0');
}

std::string StickPosition::str() const {
  return {slot_letter(), static_cast<char>('0' + segment())};
}

std::vector<StickPosition> Occupancy::positions() const {
  std::vector<StickPosition> out;
  out.reserve(static_cast<std::size_t>(count()));
  for (std::uint64_t rest = bits_; rest != 0; rest &= rest - 1) {
    out.push_back(StickPosition::from_code(std::countr_zero(rest)));
  }
  return out;
}

Edit::Edit(std::initializer_list<Relocation> moves)
    : Edit(std::span<const Relocation>(moves.begin(), moves.size())) {}

Edit::Edit(std::span<const Relocation> moves) {
  assert(moves.size() <= moves_.size());
  size_ = std::min(moves.size(), moves_.size());
  std::copy_n(moves.begin(), size_, moves_.begin());
}

bool Edit::touches_operator() const {
  return std::any_of(moves().begin(), moves().end(), [](const Relocation& r) {
    return r.from.is_operator() || r.to.is_operator();
  });
}

std::string Edit::str() const {
  std::string out;
  for (std::size_t i = 0; i < size_; ++i) {
    if (i > 0) out += ", ";
    out += "Move(" + moves_[i].from.str() + ", " + moves_[i].to.str() + ")";
  }
  return out;
}

// ---------------------------------------------------------------------------
// RuleConfig

std::string RuleConfig::fingerprint() const {
  std::string out = "blank=";
  out += allow_blank_transitions ? "on" : "off";
  out += ",leading-zero=";
  out += allow_leading_zero_final ? "on" : "off";
  out += ",flip=";
  out += flip == FlipSemantics::kAnySolutionFlips ? "any" : "all";
  return out;
}

std::optional<RuleConfig> RuleConfig::parse(std::string_view text) {
  return parse(text, RuleConfig{});
}

std::optional<RuleConfig> RuleConfig::parse(std::string_view text, const RuleConfig& base) {
  RuleConfig rc = base;
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;

    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);

    auto flag = [&](bool& target) {
      if (value == "on") {
        target = true;
      } else if (value == "off") {
        target = false;
      } else {
        return false;
      }
      return true;
    };

    if (key == "blank") {
      if (!flag(rc.allow_blank_transitions)) return std::nullopt;
    } else if (key == "leading-zero") {
      if (!flag(rc.allow_leading_zero_final)) return std::nullopt;
    } else if (key == "flip") {
      if (value == "any") {
        rc.flip = FlipSemantics::kAnySolutionFlips;
      } else if (value == "all") {
        rc.flip = FlipSemantics::kAllSolutionsFlip;
      } else {
        return std::nullopt;
      }
    } else {
      return std::nullopt;
    }
  }
  return rc;
}

int RuleConfig::permissiveness() const {
  return (allow_blank_transitions ? 1 : 0) + (allow_leading_zero_final ? 1 : 0);
}

// ---------------------------------------------------------------------------
// Occupancy and edit application

Occupancy occupied_positions(const EquationState& z) {
  std::uint64_t bits = 0;
  for (int s = 0; s < kDigitSlots; ++s) {
    const auto slot = static_cast<DigitSlot>(s);
    bits |= std::uint64_t{glyph_segments(z.digit(slot)).mask()} << (s * 7);
  }
  if (z.g == Op::kPlus) bits |= std::uint64_t{1} << StickPosition::kOperatorCode;
  return Occupancy(bits);
}

std::string_view to_string(EditError e) {
  switch (e) {
    case EditError::kNone: return "ok";
    case EditError::kMalformed: return "malformed-edit";
    case EditError::kSourceEmpty: return "source-empty";
    case EditError::kTargetOccupied: return "target-occupied";
    case EditError::kIllegalGlyph: return "illegal-glyph";
    case EditError::kBlankRuleViolation: return "blank-rule-violation";
    case EditError::kNoOpEdit: return "no-op-edit";
  }
  return "unknown";
}

EditOutcome decode_occupancy(const EquationState& origin, Occupancy occ, const RuleConfig& rc) {
  EditOutcome out;
  out.state.g = occ.contains(StickPosition::operator_stroke()) ? Op::kPlus : Op::kMinus;
  for (int s = 0; s < kDigitSlots; ++s) {
    const auto slot = static_cast<DigitSlot>(s);
    const auto glyph = segments_to_glyph(occ.slot_segments(slot));
    if (!glyph || (*glyph == kBlank && !is_tens_slot(slot))) {
      out.error = EditError::kIllegalGlyph;
      return out;
    }
    out.state.set_digit(slot, *glyph);
  }
  for (DigitSlot slot : {DigitSlot::A, DigitSlot::C, DigitSlot::E}) {
    const Glyph before = origin.digit(slot);
    const Glyph after = out.state.digit(slot);
    if (!rc.allow_blank_transitions && (before == kBlank) != (after == kBlank)) {
      out.error = EditError::kBlankRuleViolation;
      return out;
    }
    if (!rc.allow_leading_zero_final && after == 0) {
      out.error = EditError::kBlankRuleViolation;
      return out;
    }
  }
  return out;
}

EditOutcome apply_edit(const EquationState& z, const Edit& e, const RuleConfig& rc) {
  EditOutcome out;
  auto fail = [&out](EditError err, bool operator_fault = false) {
    out.error = err;
    out.operator_fault = operator_fault;
    return out;
  };

  const auto moves = e.moves();
  if (moves.empty() || moves.size() > 2) return fail(EditError::kMalformed);
  for (const Relocation& r : moves) {
    if (r.from == r.to) return fail(EditError::kMalformed);
  }
  if (moves.size() == 2 && (moves[0].from == moves[1].from || moves[0].to == moves[1].to)) {
    return fail(EditError::kMalformed);
  }

  const Occupancy initial = occupied_positions(z);
  Occupancy occ = initial;
  for (const Relocation& r : moves) {
    if (!occ.contains(r.from)) return fail(EditError::kSourceEmpty, r.from.is_operator());
    occ.erase(r.from);
  }
  for (const Relocation& r : moves) {
    if (occ.contains(r.to)) return fail(EditError::kTargetOccupied, r.to.is_operator());
    occ.insert(r.to);
  }
  if (occ == initial) return fail(EditError::kNoOpEdit);

  out = decode_occupancy(z, occ, rc);
  return out;
}

// ---------------------------------------------------------------------------
// Transition tables

namespace {

constexpr int kMaxSlotChange = 4;

std::vector<SlotTransition> transitions_from(Glyph from, std::span<const Glyph> targets) {
  std::vector<SlotTransition> out;
  const SegmentSet src = glyph_segments(from);
  for (Glyph to : targets) {
    if (to == from) continue;
    const SegmentSet dst = glyph_segments(to);
    SlotTransition t{from, to, src.without(dst), dst.without(src)};
    if (t.removals() > 2 || t.additions() > 2) continue;
    if (t.removals() + t.additions() > kMaxSlotChange) continue;
    out.push_back(t);
  }
  std::stable_sort(out.begin(), out.end(), [](const SlotTransition& x, const SlotTransition& y) {
    return std::pair(x.removals(), x.additions()) < std::pair(y.removals(), y.additions());
  });
  return out;
}

}  // namespace

TransitionTables::TransitionTables(const RuleConfig& rc) : rules_(rc) {
  std::vector<Glyph> digits;
  for (Glyph g = 0; g <= 9; ++g) digits.push_back(g);
  std::vector<Glyph> with_blank = digits;
  with_blank.insert(with_blank.begin(), kBlank);

  for (Glyph g = 0; g <= 9; ++g) units_[g] = transitions_from(g, digits);

  // Blank <-> digit changes are only offered when the rules allow them.
  tens_[0] = rc.allow_blank_transitions ? transitions_from(kBlank, with_blank)
                                        : std::vector<SlotTransition>{};
  for (Glyph g = 0; g <= 9; ++g) {
    tens_[g + 1] = transitions_from(g, rc.allow_blank_transitions ? std::span<const Glyph>(with_blank)
                                                                  : std::span<const Glyph>(digits));
  }

  const SegmentSet stroke(1);
  op_[static_cast<int>(Op::kPlus)] = {SlotTransition{1, 0, stroke, SegmentSet{}}};
  op_[static_cast<int>(Op::kMinus)] = {SlotTransition{0, 1, SegmentSet{}, stroke}};
}

std::span<const SlotTransition> TransitionTables::digit(bool tens_slot, Glyph from) const {
  if (tens_slot) return tens_[from + 1];
  assert(from >= 0);
  return units_[from];
}

std::span<const SlotTransition> TransitionTables::op(Op from) const {
  return op_[static_cast<int>(from)];
}

const TransitionTables& slot_transition_tables(const RuleConfig& rc) {
  // The flip semantics do not affect legality, so four tables cover every config.
  static const std::array<TransitionTables, 4> cache = {
      TransitionTables(RuleConfig{false, false}), TransitionTables(RuleConfig{false, true}),
      TransitionTables(RuleConfig{true, false}), TransitionTables(RuleConfig{true, true})};
  return cache[(rc.allow_blank_transitions ? 2 : 0) + (rc.allow_leading_zero_final ? 1 : 0)];
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

struct SearchFrame {
  const EquationState& origin;
  const TransitionTables& tables;
  bool leading_zero_ok;
  int k;
  const std::function<void(const EquationState&, Occupancy, Occupancy)>& visit;
};

// Slots 0..5 are digits A..F, slot 6 is the operator.
void search(const SearchFrame& f, int slot, int removals, int additions, EquationState& current,
            std::uint64_t removed, std::uint64_t added) {
  if (slot == 7) {
    if (removals != f.k || additions != f.k) return;
    if (!f.leading_zero_ok && (current.a == 0 || current.c == 0 || current.e == 0)) return;
    f.visit(current, Occupancy(removed), Occupancy(added));
    return;
  }

  search(f, slot + 1, removals, additions, current, removed, added);

  if (slot == 6) {
    for (const SlotTransition& t : f.tables.op(f.origin.g)) {
      if (removals + t.removals() > f.k || additions + t.additions() > f.k) continue;
      const std::uint64_t bit = std::uint64_t{1} << StickPosition::kOperatorCode;
      current.g = t.to == 1 ? Op::kPlus : Op::kMinus;
      search(f, 7, removals + t.removals(), additions + t.additions(), current,
             removed | (t.removals() ? bit : 0), added | (t.additions() ? bit : 0));
    }
    current.g = f.origin.g;
    return;
  }

  const auto ds = static_cast<DigitSlot>(slot);
  const Glyph from = f.origin.digit(ds);
  for (const SlotTransition& t : f.tables.digit(is_tens_slot(ds), from)) {
    if (removals + t.removals() > f.k) break;  // sorted by removals first
    if (additions + t.additions() > f.k) continue;
    current.set_digit(ds, t.to);
    const int shift = slot * 7;
    search(f, slot + 1, removals + t.removals(), additions + t.additions(), current,
           removed | (std::uint64_t{t.removed.mask()} << shift),
           added | (std::uint64_t{t.added.mask()} << shift));
  }
  current.set_digit(ds, from);
}

}  // namespace

void for_each_successor(
    const EquationState& z, int k, const TransitionTables& tables,
    const std::function<void(const EquationState&, Occupancy, Occupancy)>& visit) {
  assert(k == 1 || k == 2);
  const SearchFrame frame{z, tables, tables.rules().allow_leading_zero_final, k, visit};
  EquationState current = z;
  search(frame, 0, 0, 0, current, 0, 0);
}

Edit witness_edit(Occupancy removed, Occupancy added) {
  const auto sources = removed.positions();
  const auto targets = added.positions();
  assert(sources.size() == targets.size() && !sources.empty() && sources.size() <= 2);
  std::array<Relocation, 2> moves{};
  for (std::size_t i = 0; i < sources.size(); ++i) moves[i] = {sources[i], targets[i]};
  return Edit(std::span<const Relocation>(moves.data(), sources.size()));
}

std::vector<Successor> enumerate_edits(const EquationState& z, int k, const RuleConfig& rc) {
  const TransitionTables& tables = slot_transition_tables(rc);
  std::vector<Successor> out;
  for_each_successor(z, k, tables, [&](const EquationState& s, Occupancy removed, Occupancy added) {
    out.push_back({s, witness_edit(removed, added)});
  });
  std::sort(out.begin(), out.end(),
            [](const Successor& x, const Successor& y) { return x.state < y.state; });
  return out;
}

std::vector<EquationState> oracle_enumerate(const EquationState& z, int k, const RuleConfig& rc) {
  assert(k == 1 || k == 2);
  const Occupancy occ = occupied_positions(z);
  const auto sources = occ.positions();
  const auto targets = occ.complement().positions();

  std::vector<EquationState> out;
  auto consider = [&](const Edit& e) {
    const EditOutcome r = apply_edit(z, e, rc);
    if (r.ok()) out.push_back(r.state);
  };

  if (k == 1) {
    for (StickPosition s : sources) {
      for (StickPosition t : targets) consider(Edit{{s, t}});
    }
  } else {
    // Unordered pairs of relocations touching four distinct positions.
    for (std::size_t i = 0; i < sources.size(); ++i) {
      for (std::size_t j = i + 1; j < sources.size(); ++j) {
        for (std::size_t p = 0; p < targets.size(); ++p) {
          for (std::size_t q = p + 1; q < targets.size(); ++q) {
            consider(Edit{{sources[i], targets[p]}, {sources[j], targets[q]}});
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace mathsticks
