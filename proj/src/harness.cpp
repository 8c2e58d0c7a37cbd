#include "mathsticks/harness.hpp"

#include <cctype>
#include <fstream>
#include <ostream>
#include <set>
#include <unordered_map>

namespace mathsticks {

std::string_view to_string(Regime r) { return r == Regime::kText ? "text" : "visual"; }

std::optional<Regime> parse_regime(std::string_view text) {
  if (text == "text") return Regime::kText;
  if (text == "visual") return Regime::kVisual;
  return std::nullopt;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kCorrect: return "correct";
    case Verdict::kIncorrect: return "incorrect";
    case Verdict::kFormatError: return "format-error";
  }
  return "?";
}

std::string_view to_string(FailureClass c) {
  switch (c) {
    case FailureClass::kNone: return "none";
    case FailureClass::kEditPlanning: return "edit-planning";
    case FailureClass::kArithmetic: return "arithmetic";
    case FailureClass::kOperator: return "operator";
    case FailureClass::kFormat: return "format";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Prompts

namespace {

constexpr const char* kInstructions =
    "The picture shows an equation made of sticks. Digits use the usual seven-segment shapes, "
    "the operator is either plus or minus, and the equals sign is fixed.\n"
    "The equation is false. Make it true by moving exactly one stick or exactly two sticks. "
    "A moved stick is taken from a place that holds a stick and laid on a place that is empty. "
    "You may not add sticks, remove sticks for good, or touch the equals sign.\n"
    "\n"
    "Naming of places:\n"
    "- Digit slots from left to right: A B for the first number, C D for the second number, "
    "E F for the result. A, C and E hold tens digits and can be empty.\n"
    "- Inside a digit slot: 0 middle bar, 1 top bar, 2 upper right, 3 lower right, "
    "4 bottom bar, 5 lower left, 6 upper left. So B2 is the upper right stick of slot B.\n"
    "- G0 is the upright stroke of the operator. With it the operator is plus; without it, minus.\n"
    "\n"
    "Answer format: end your reply with one line holding your moves, source first and target "
    "second, for example\n"
    "Move(B0, B2)\n"
    "for one stick or\n"
    "Move(B0, B2), Move(G0, D5)\n"
    "for two sticks.";

}  // namespace

Json PromptPayload::to_json() const {
  Json j;
  j["id"] = id;
  j["regime"] = to_string(regime);
  j["template"] = template_version;
  j["instructions"] = instructions;
  j["question"] = question;
  if (equation) j["equation"] = *equation;
  j["image"] = image ? Json(*image) : Json(nullptr);
  return j;
}

PromptPayload build_prompt(const ManifestItem& item, Regime regime, const std::optional<std::string>& image) {
  if (regime == Regime::kVisual && (!image || image->empty())) {
    throw HarnessError(HarnessError::Code::kMissingImage, "visual prompt for " + item.id + " has no image");
  }
  PromptPayload p;
  p.id = item.id;
  p.regime = regime;
  p.instructions = kInstructions;
  if (image && !image->empty()) p.image = *image;
  if (regime == Regime::kText) {
    const std::string eq = canonical_string(item.state);
    p.equation = eq;
    p.question = "Equation: " + eq + "\nWhich sticks do you move?";
  } else {
    p.question = "The equation is in the attached image. Which sticks do you move?";
  }
  return p;
}

// ---------------------------------------------------------------------------
// Answer parsing

namespace {

class Scanner {
 public:
  explicit Scanner(std::string_view s) : s_(s) {}

  /// Tries "Move(XY, XY)" at `at`; returns the position after ')' or npos.
  std::size_t move_at(std::size_t at, std::string& from, std::string& to) const {
    std::size_t i = at;
    if (s_.substr(i, 4) != "Move") return npos;
    i = skip_space(i + 4);
    if (!eat(i, '(')) return npos;
    if (!token(i, from)) return npos;
    if (!eat(i, ',')) return npos;
    if (!token(i, to)) return npos;
    if (!eat(i, ')')) return npos;
    return i;
  }

  std::size_t skip_space(std::size_t i) const {
    while (i < s_.size() && std::isspace(static_cast<unsigned char>(s_[i]))) ++i;
    return i;
  }

  bool eat(std::size_t& i, char c) const {
    i = skip_space(i);
    if (i >= s_.size() || s_[i] != c) return false;
    ++i;
    return true;
  }

  std::size_t size() const { return s_.size(); }

  static constexpr std::size_t npos = std::string_view::npos;

 private:
  // A letter followed by a digit; range checks happen later.
  bool token(std::size_t& i, std::string& out) const {
    i = skip_space(i);
    if (i + 1 >= s_.size()) return false;
    if (!std::isupper(static_cast<unsigned char>(s_[i])) || !std::isdigit(static_cast<unsigned char>(s_[i + 1]))) {
      return false;
    }
    out.assign(s_.substr(i, 2));
    i += 2;
    return true;
  }

  std::string_view s_;
};

struct RawMove {
  std::string from;
  std::string to;
};

}  // namespace

AnswerParse parse_answer(std::string_view raw) {
  AnswerParse out;
  out.raw = std::string(raw);
  const Scanner sc(raw);

  std::vector<RawMove> last;
  for (std::size_t i = raw.find("Move"); i != std::string_view::npos; i = raw.find("Move", i + 1)) {
    RawMove m;
    std::size_t end = sc.move_at(i, m.from, m.to);
    if (end == Scanner::npos) continue;
    // Extend the chain over ", Move(..)" continuations.
    std::vector<RawMove> chain{m};
    for (;;) {
      std::size_t j = end;
      if (!sc.eat(j, ',')) break;
      j = sc.skip_space(j);
      RawMove next;
      const std::size_t e = sc.move_at(j, next.from, next.to);
      if (e == Scanner::npos) break;
      chain.push_back(next);
      end = e;
    }
    last = std::move(chain);
    i = end - 1;
  }

  if (last.empty()) {
    out.error = "no Move(source, target) answer found";
    return out;
  }
  if (last.size() > 2) {
    out.error = "answer has " + std::to_string(last.size()) + " moves; at most two are allowed";
    return out;
  }
  std::vector<Relocation> moves;
  for (const RawMove& m : last) {
    const auto from = StickPosition::parse(m.from);
    const auto to = StickPosition::parse(m.to);
    if (!from || !to) {
      out.error = "unknown stick position " + (from ? m.to : m.from);
      return out;
    }
    moves.push_back({*from, *to});
  }
  out.edit = Edit(std::span<const Relocation>(moves));
  return out;
}

// ---------------------------------------------------------------------------
// Grading

Json GradeResult::to_json() const {
  Json j;
  j["verdict"] = to_string(verdict);
  j["class"] = to_string(failure);
  j["k"] = k;
  j["edit_error"] = to_string(edit_error);
  j["final"] = final_state ? Json(canonical_string(*final_state)) : Json(nullptr);
  j["detail"] = detail;
  return j;
}

GradeResult grade(const EquationState& z, const AnswerParse& answer, const RuleConfig& rc) {
  GradeResult g;
  if (!answer.ok()) {
    g.detail = answer.error;
    return g;
  }
  const Edit& e = *answer.edit;
  g.k = static_cast<int>(e.size());
  const EditOutcome o = apply_edit(z, e, rc);
  g.verdict = Verdict::kIncorrect;
  if (!o.ok()) {
    g.edit_error = o.error;
    g.failure = o.operator_fault ? FailureClass::kOperator : FailureClass::kEditPlanning;
    g.detail = std::string(to_string(o.error));
    return g;
  }
  g.final_state = o.state;
  if (is_valid_arithmetic(o.state)) {
    g.verdict = Verdict::kCorrect;
    g.failure = FailureClass::kNone;
    return g;
  }
  g.failure = e.touches_operator() ? FailureClass::kOperator : FailureClass::kArithmetic;
  g.detail = canonical_string(o.state) + " is false";
  return g;
}

// ---------------------------------------------------------------------------
// Responses and scoring

Json response_json(const Response& r) {
  return Json{{"id", r.id}, {"regime", to_string(r.regime)}, {"model", r.model}, {"raw", r.raw}};
}

Response response_from_json(const Json& j) {
  Response r;
  try {
    r.id = j.at("id").get<std::string>();
    const auto regime = parse_regime(j.at("regime").get<std::string>());
    if (!regime) throw HarnessError(HarnessError::Code::kBadResponse, "regime must be text or visual");
    r.regime = *regime;
    r.model = j.value("model", "");
    r.raw = j.at("raw").is_null() ? std::string() : j.at("raw").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw HarnessError(HarnessError::Code::kBadResponse, e.what());
  }
  return r;
}

std::vector<Response> read_responses(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<Response> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw HarnessError(HarnessError::Code::kBadResponse, "line " + std::to_string(n) + ": " + e.what());
    }
    if (j.contains("header")) continue;
    out.push_back(response_from_json(j));
  }
  return out;
}

std::string ScoreReport::level_average() const {
  // Mean of the level percentages, exact on a common denominator.
  __int128 num = 0;
  __int128 den = 1;
  int cells = 0;
  for (const AccuracyCell& c : levels) {
    if (c.attempted > 0) den *= c.attempted;
  }
  for (const AccuracyCell& c : levels) {
    if (c.attempted == 0) continue;
    num += static_cast<__int128>(c.correct) * (den / c.attempted);
    ++cells;
  }
  if (cells == 0) return percent(0, 0);
  const __int128 whole = den * cells;
  const auto hundredths = static_cast<std::int64_t>((num * 20000 + whole) / (2 * whole));
  return percent(hundredths, 10000);
}

namespace {

Json cell_json(const AccuracyCell& c) {
  return Json{{"correct", c.correct}, {"attempted", c.attempted}, {"accuracy", c.accuracy()}};
}

constexpr std::array<const char*, 3> kMoveCells = {"1", "2", "1or2"};
constexpr std::array<const char*, 2> kMultiplicityCells = {"unique", "multiple"};
constexpr std::array<const char*, 2> kFlipCells = {"flip", "no-flip"};
constexpr std::array<FailureClass, 5> kClasses = {FailureClass::kNone, FailureClass::kEditPlanning,
                                                  FailureClass::kArithmetic, FailureClass::kOperator,
                                                  FailureClass::kFormat};

}  // namespace

Json ScoreReport::to_json(const RuleConfig& rc) const {
  Json j;
  j["header"] = provenance("report", rc, std::nullopt);
  j["regime"] = to_string(regime);
  j["model"] = model;
  for (std::size_t l = 0; l < 4; ++l) j["levels"]["L" + std::to_string(l + 1)] = cell_json(levels[l]);
  j["overall"] = cell_json(overall);
  j["level_average"] = level_average();
  for (std::size_t i = 0; i < move.size(); ++i) j["move"][kMoveCells[i]] = cell_json(move[i]);
  for (std::size_t i = 0; i < multiplicity.size(); ++i) {
    j["multiplicity"][kMultiplicityCells[i]] = cell_json(multiplicity[i]);
  }
  for (std::size_t i = 0; i < flip.size(); ++i) j["flip"][kFlipCells[i]] = cell_json(flip[i]);
  for (FailureClass c : kClasses) {
    if (c == FailureClass::kNone) continue;
    j["failures"][std::string(to_string(c))] = failures[static_cast<std::size_t>(c)];
  }
  j["missing"] = missing;
  return j;
}

void ScoreReport::write_csv(std::ostream& out) const {
  out << "regime,group,cell,correct,attempted,accuracy\n";
  auto row = [&](std::string_view group, std::string_view cell, const AccuracyCell& c) {
    out << to_string(regime) << ',' << group << ',' << cell << ',' << c.correct << ',' << c.attempted << ','
        << c.accuracy() << '\n';
  };
  for (std::size_t l = 0; l < 4; ++l) row("level", "L" + std::to_string(l + 1), levels[l]);
  row("level", "all", overall);
  for (std::size_t i = 0; i < move.size(); ++i) row("move", kMoveCells[i], move[i]);
  for (std::size_t i = 0; i < multiplicity.size(); ++i) row("multiplicity", kMultiplicityCells[i], multiplicity[i]);
  for (std::size_t i = 0; i < flip.size(); ++i) row("flip", kFlipCells[i], flip[i]);
}

ScoreReport score_run(const std::vector<Response>& responses, const TestSetManifest& manifest, Regime regime,
                      const RuleConfig& rc) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < manifest.items.size(); ++i) index.emplace(manifest.items[i].id, i);

  std::vector<const Response*> answer(manifest.items.size(), nullptr);
  std::set<std::string> models;
  for (const Response& r : responses) {
    const auto it = index.find(r.id);
    if (it == index.end()) throw HarnessError(HarnessError::Code::kUnknownId, "unknown id '" + r.id + "'");
    if (r.regime != regime) continue;
    if (answer[it->second]) {
      throw HarnessError(HarnessError::Code::kDuplicateResponse,
                         "second " + std::string(to_string(regime)) + " response for '" + r.id + "'");
    }
    answer[it->second] = &r;
    models.insert(r.model);
  }

  ScoreReport rep;
  rep.regime = regime;
  for (const std::string& m : models) rep.model += (rep.model.empty() ? "" : ",") + m;
  for (std::size_t i = 0; i < manifest.items.size(); ++i) {
    const ManifestItem& item = manifest.items[i];
    bool ok = false;
    if (answer[i]) {
      const GradeResult g = grade(item.state, parse_answer(answer[i]->raw), rc);
      ok = g.verdict == Verdict::kCorrect;
      ++rep.failures[static_cast<std::size_t>(g.failure)];
    } else {
      ++rep.missing;
    }
    auto tally = [ok](AccuracyCell& c) {
      ++c.attempted;
      if (ok) ++c.correct;
    };
    tally(rep.levels[static_cast<std::size_t>(item.labels.level.value - 1)]);
    tally(rep.overall);
    tally(rep.move[static_cast<std::size_t>(item.labels.move)]);
    tally(rep.multiplicity[static_cast<std::size_t>(item.labels.multiplicity)]);
    tally(rep.flip[item.labels.flip ? 0 : 1]);
  }
  return rep;
}

}  // namespace mathsticks
