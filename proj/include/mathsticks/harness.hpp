#ifndef MATHSTICKS_HARNESS_HPP
#define MATHSTICKS_HARNESS_HPP

// Evaluation protocol: prompt payloads, answer extraction, rule-based
// grading and accuracy reports. Grading checks legality and arithmetic
// directly, so any valid correction is accepted, not only the stored ones.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mathsticks/generator.hpp"
#include "mathsticks/io.hpp"

namespace mathsticks {

class HarnessError : public std::runtime_error {
 public:
  enum class Code { kMissingImage, kUnknownId, kDuplicateResponse, kBadResponse };
  HarnessError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

enum class Regime : std::uint8_t { kText, kVisual };

std::string_view to_string(Regime r);
std::optional<Regime> parse_regime(std::string_view text);

inline constexpr const char* kPromptTemplateVersion = "1";

struct PromptPayload {
  std::string id;
  Regime regime = Regime::kText;
  std::string template_version = kPromptTemplateVersion;
  std::string instructions;  // rules, position legend and answer grammar
  std::string question;
  std::optional<std::string> equation;  // text regime only
  std::optional<std::string> image;

  Json to_json() const;
};

/// The visual regime needs `image`; the text regime attaches it when given.
PromptPayload build_prompt(const ManifestItem& item, Regime regime,
                           const std::optional<std::string>& image);

struct AnswerParse {
  std::optional<Edit> edit;
  std::string error;  // reason when edit is empty
  std::string raw;

  bool ok() const { return edit.has_value(); }
};

/// Extracts the last complete answer of the form
///   Move(P, Q)  or  Move(P, Q), Move(R, S)
/// anywhere in `raw`. Positions are a slot letter A-G and an index 0-6
/// (G only 0). Whitespace inside the pattern and wrappers such as \boxed{}
/// are ignored.
AnswerParse parse_answer(std::string_view raw);

enum class Verdict : std::uint8_t { kCorrect, kIncorrect, kFormatError };

/// Failure classes. Perception mistakes cannot be told apart from the
/// answer alone; they show up as edit-planning or arithmetic failures.
enum class FailureClass : std::uint8_t { kNone, kEditPlanning, kArithmetic, kOperator, kFormat };

std::string_view to_string(Verdict v);
std::string_view to_string(FailureClass c);

struct GradeResult {
  Verdict verdict = Verdict::kFormatError;
  FailureClass failure = FailureClass::kFormat;
  int k = 0;  // relocations in the parsed answer
  EditError edit_error = EditError::kNone;
  std::optional<EquationState> final_state;
  std::string detail;

  Json to_json() const;
};

GradeResult grade(const EquationState& z, const AnswerParse& answer, const RuleConfig& rc);

struct Response {
  std::string id;
  Regime regime = Regime::kText;
  std::string model;
  std::string raw;
};

Json response_json(const Response& r);
Response response_from_json(const Json& j);
std::vector<Response> read_responses(const std::filesystem::path& path);

struct AccuracyCell {
  std::int64_t correct = 0;
  std::int64_t attempted = 0;

  std::string accuracy() const { return percent(correct, attempted); }
};

struct ScoreReport {
  Regime regime = Regime::kText;
  std::string model;
  std::array<AccuracyCell, 4> levels{};
  AccuracyCell overall;
  std::array<AccuracyCell, 3> move{};          // 1, 2, 1or2
  std::array<AccuracyCell, 2> multiplicity{};  // unique, multiple
  std::array<AccuracyCell, 2> flip{};          // flip, no flip
  std::array<std::int64_t, 5> failures{};      // indexed by FailureClass
  std::int64_t missing = 0;  // manifest items without a response (graded incorrect)

  /// Mean of the four level accuracies, as text.
  std::string level_average() const;
  Json to_json(const RuleConfig& rc) const;
  void write_csv(std::ostream& out) const;
};

/// Scores the responses of one regime against the manifest. Responses of
/// other regimes are ignored.
ScoreReport score_run(const std::vector<Response>& responses, const TestSetManifest& manifest,
                      Regime regime, const RuleConfig& rc);

}  // namespace mathsticks

#endif  // MATHSTICKS_HARNESS_HPP
